#ifndef STPLAN_KINO_ASTAR_HPP
#define STPLAN_KINO_ASTAR_HPP

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <queue>
#include <unordered_map>
#include <vector>

#include "stplan/sogm.hpp"

namespace stplan {

// Double-integrator state used by the search and as boundary conditions.
struct RobotState {
  Vec3 p = Vec3::Zero();
  Vec3 v = Vec3::Zero();
};

// Constant-acceleration segment of one temporal-resolution step.
struct MotionPrimitive {
  RobotState start;
  Vec3 u = Vec3::Zero();
  double duration = 0.0;
  double start_time = 0.0;  // wall clock, used to pick the temporal frame
};

inline RobotState rollout(const RobotState& s, const Vec3& u, double t) {
  return {s.p + s.v * t + 0.5 * u * t * t, s.v + u * t};
}

struct SearchLimits {
  double v_max = 2.0;
  double a_max = 6.0;
};

// One primitive per control-grid tuple; successors exceeding the velocity
// bound are discarded.
inline std::vector<std::pair<MotionPrimitive, RobotState>> expand(
    const RobotState& state, const std::vector<double>& axis_samples,
    double r_tau, const SearchLimits& limits, double start_time = 0.0) {
  std::vector<std::pair<MotionPrimitive, RobotState>> out;
  out.reserve(axis_samples.size() * axis_samples.size() * axis_samples.size());
  for (double ux : axis_samples)
    for (double uy : axis_samples)
      for (double uz : axis_samples) {
        const Vec3 u(ux, uy, uz);
        const RobotState next = rollout(state, u, r_tau);
        if (next.v.norm() > limits.v_max + 1e-9) continue;
        out.push_back({MotionPrimitive{state, u, r_tau, start_time}, next});
      }
  return out;
}

// True iff any rollout sample at spatial step <= r_s/2 is blocked in the
// frame covering the primitive's window.
inline bool primitive_collides(const Sogm& sogm, const MotionPrimitive& prim,
                               const ObstacleShape& robot_shape) {
  const int frame = sogm.frame_of_time(prim.start_time + 0.5 * prim.duration);
  const RobotState& s = prim.start;
  const double v_end = (s.v + prim.u * prim.duration).norm();
  const double v_peak = std::max(s.v.norm(), v_end);
  const double length = v_peak * prim.duration;
  const int steps =
      std::max(1, static_cast<int>(std::ceil(length / (0.5 * sogm.resolution()))));
  for (int k = 0; k <= steps; ++k) {
    const double t = prim.duration * k / steps;
    const Vec3 p = s.p + s.v * t + 0.5 * prim.u * t * t;
    if (!is_state_free(sogm, frame, p, robot_shape)) return true;
  }
  return false;
}

// Optimal fixed-horizon boundary-value cost of the double integrator
// (minimum integral of squared acceleration steering from -> to in tau).
inline double boundary_value_cost(const RobotState& from, const RobotState& to,
                                  double tau) {
  const Vec3 dp = to.p - from.p - from.v * tau;
  const Vec3 dv = to.v - from.v;
  const double t2 = tau * tau;
  return 12.0 * dp.squaredNorm() / (t2 * tau) - 12.0 * dp.dot(dv) / t2 +
         4.0 * dv.squaredNorm() / tau;
}

struct HeuristicOptions {
  double rho = 1.0;
  // Arrival-time candidates; defaults to a geometric grid when empty.
  std::vector<double> taus;
};

// Time-weighted cost-to-go estimate: min over candidate arrival times of
// the exact fixed-time boundary-value cost plus rho * tau.
inline double heuristic(const RobotState& state, const RobotState& goal,
                        const HeuristicOptions& opts = {}) {
  if ((state.p - goal.p).norm() < 1e-12 && (state.v - goal.v).norm() < 1e-12)
    return 0.0;
  double best = std::numeric_limits<double>::infinity();
  if (opts.taus.empty()) {
    double tau = 0.05;
    for (int k = 0; k < 32; ++k) {
      best = std::min(best, boundary_value_cost(state, goal, tau) + opts.rho * tau);
      tau *= std::pow(256.0, 1.0 / 31.0);
    }
  } else {
    for (double tau : opts.taus)
      best = std::min(best, boundary_value_cost(state, goal, tau) + opts.rho * tau);
  }
  return std::max(best, 0.0);
}

// Admissible, consistent cost-to-go for reaching a goal ball: minimum over
// whole-step arrival times of the velocity-free boundary cost plus the time
// weight, zero once inside the tolerance ball. Whole-step arrival times
// keep the estimate a lower bound on any primitive sequence's cost.
inline double goal_region_heuristic(const RobotState& s, const Vec3& goal_p,
                                    double tolerance, double rho, double r_tau,
                                    int k_max) {
  const Vec3 dp = goal_p - s.p;
  if (dp.norm() <= tolerance) return 0.0;
  const double pp = dp.squaredNorm();
  const double pv = dp.dot(s.v);
  const double vv = s.v.squaredNorm();
  double best = std::numeric_limits<double>::infinity();
  for (int k = 1; k <= k_max; ++k) {
    const double tau = k * r_tau;
    const double miss2 = pp - 2.0 * tau * pv + tau * tau * vv;
    const double miss = std::sqrt(std::max(miss2, 0.0));
    const double reach = std::max(miss - tolerance, 0.0);
    const double cost = 3.0 * reach * reach / (tau * tau * tau) + rho * tau;
    best = std::min(best, cost);
    if (reach == 0.0 && rho * tau >= best) break;
  }
  return best;
}

enum class SearchStatus {
  ReachedGoal,
  HorizonExhausted,   // best partial path by f-value
  BudgetExhausted,    // expansion budget hit; best partial path attached
  InfeasibleStart,
};

struct PathResult {
  SearchStatus status = SearchStatus::InfeasibleStart;
  bool reached_goal = false;
  std::vector<RobotState> states;  // len = controls.len + 1
  std::vector<Vec3> controls;
  double cost = 0.0;
  int expansions = 0;
};

struct SearchParams {
  int samples_per_axis = 3;
  double v_max = 2.0;
  double a_max = 6.0;
  double rho = 1.0;
  double goal_tolerance = 0.3;
  int max_expansions = 30000;
  ObstacleShape robot_shape = Sphere{0.25};
  bool planar = false;  // restrict controls to the xy plane (test instances)
};

namespace detail {

// Coarse per-frame occupancy mask: one bit per 4x4x4 block of cells. Lets
// free-space queries skip the exact stencil almost everywhere.
class CoarseMask {
 public:
  void build(const Sogm& sogm, int frame) {
    factor_ = 4;
    nx_ = (sogm.dims().x() + factor_ - 1) / factor_;
    ny_ = (sogm.dims().y() + factor_ - 1) / factor_;
    nz_ = (sogm.dims().z() + factor_ - 1) / factor_;
    bits_.assign((static_cast<std::size_t>(nx_) * ny_ * nz_ + 63) / 64, 0);
    sogm.for_each_occupied(frame, [&](const Eigen::Vector3i& c) {
      const std::size_t i = idx(c.x() / factor_, c.y() / factor_, c.z() / factor_);
      bits_[i >> 6] |= 1ull << (i & 63);
    });
    built_ = true;
  }

  bool built() const { return built_; }

  // True if no occupied cell can be within `radius` of p.
  bool clear_around(const Sogm& sogm, const Vec3& p, double radius) const {
    const double block = factor_ * sogm.resolution();
    const Vec3 rel = p - sogm.origin();
    const int x0 = static_cast<int>(std::floor((rel.x() - radius) / block));
    const int x1 = static_cast<int>(std::floor((rel.x() + radius) / block));
    const int y0 = static_cast<int>(std::floor((rel.y() - radius) / block));
    const int y1 = static_cast<int>(std::floor((rel.y() + radius) / block));
    const int z0 = static_cast<int>(std::floor((rel.z() - radius) / block));
    const int z1 = static_cast<int>(std::floor((rel.z() + radius) / block));
    for (int z = std::max(z0, 0); z <= std::min(z1, nz_ - 1); ++z)
      for (int y = std::max(y0, 0); y <= std::min(y1, ny_ - 1); ++y)
        for (int x = std::max(x0, 0); x <= std::min(x1, nx_ - 1); ++x) {
          const std::size_t i = idx(x, y, z);
          if (bits_[i >> 6] >> (i & 63) & 1) return false;
        }
    return true;
  }

 private:
  std::size_t idx(int x, int y, int z) const {
    return static_cast<std::size_t>(x) +
           static_cast<std::size_t>(nx_) *
               (static_cast<std::size_t>(y) + static_cast<std::size_t>(ny_) * z);
  }
  int factor_ = 4, nx_ = 0, ny_ = 0, nz_ = 0;
  std::vector<std::uint64_t> bits_;
  bool built_ = false;
};

inline bool lex_less(const RobotState& a, const RobotState& b) {
  for (int i = 0; i < 3; ++i) {
    if (a.p[i] != b.p[i]) return a.p[i] < b.p[i];
  }
  for (int i = 0; i < 3; ++i) {
    if (a.v[i] != b.v[i]) return a.v[i] < b.v[i];
  }
  return false;
}

}  // namespace detail

// Kinodynamic A* over the SOGM. Nodes are pruned into
// (step, position voxel, velocity bin) classes; the class representative is
// the cheapest state found before closure, ties broken lexicographically.
// Costs are sum of |u|^2 * r_tau plus rho * r_tau per step.
class KinoAstar {
 public:
  PathResult search(const Sogm& sogm, const RobotState& start,
                    const RobotState& goal, const SearchParams& params) {
    const double r_tau = sogm.time_resolution();
    const int horizon = sogm.frame_count();
    PathResult result;

    coarse_.assign(horizon, detail::CoarseMask{});

    if (!state_free(sogm, 0, start.p, params.robot_shape)) {
      result.status = SearchStatus::InfeasibleStart;
      return result;
    }
    if ((start.p - goal.p).norm() <= params.goal_tolerance) {
      result.status = SearchStatus::ReachedGoal;
      result.reached_goal = true;
      result.states = {start};
      result.cost = 0.0;
      return result;
    }

    std::vector<double> samples(params.samples_per_axis);
    for (int i = 0; i < params.samples_per_axis; ++i)
      samples[i] = params.samples_per_axis == 1
                       ? 0.0
                       : -params.a_max +
                             2.0 * params.a_max * i / (params.samples_per_axis - 1);
    const std::vector<double> z_samples =
        params.planar ? std::vector<double>{0.0} : samples;
    const SearchLimits limits{params.v_max, params.a_max};

    nodes_.clear();
    class_of_.clear();
    open_ = {};
    seq_ = 0;
    nodes_.reserve(4096);

    auto h_of = [&](const RobotState& s) {
      return goal_region_heuristic(s, goal.p, params.goal_tolerance,
                                   params.rho, r_tau, horizon + 4);
    };

    const NodeId root = new_node(start, -1, Vec3::Zero(), 0, 0.0);
    nodes_[root].h = h_of(start);
    class_of_[class_key(sogm, start, 0, params)] = root;
    push_open(root);

    NodeId best_partial = -1;
    int expansions = 0;
    NodeId goal_node = -1;

    while (!open_.empty()) {
      const HeapEntry top = open_.top();
      open_.pop();
      const NodeId id = top.node;
      if (nodes_[id].closed || top.g > nodes_[id].g + 1e-12) continue;  // stale
      nodes_[id].closed = true;
      const Node node = nodes_[id];  // copy: new_node() may reallocate

      if ((node.state.p - goal.p).norm() <= params.goal_tolerance &&
          node.step > 0) {
        goal_node = id;
        break;
      }
      if (node.step > 0) {
        if (best_partial < 0 || better_partial(node, nodes_[best_partial]))
          best_partial = id;
      }
      if (node.step >= horizon) continue;  // cannot extend past the horizon
      if (++expansions > params.max_expansions) {
        result.status = SearchStatus::BudgetExhausted;
        break;
      }

      const double step_time = sogm.t0() + node.step * r_tau;
      for (double ux : samples)
        for (double uy : samples)
          for (double uz : z_samples) {
            const Vec3 u(ux, uy, uz);
            const RobotState next = rollout(node.state, u, r_tau);
            if (next.v.norm() > params.v_max + 1e-9) continue;
            if (!inside_map(sogm, next.p)) continue;
            MotionPrimitive prim{node.state, u, r_tau, step_time};
            if (collides(sogm, prim, params.robot_shape)) continue;
            const double g_new =
                node.g + (u.squaredNorm() + params.rho) * r_tau;
            const std::uint64_t key =
                class_key(sogm, next, node.step + 1, params);
            auto it = class_of_.find(key);
            if (it == class_of_.end()) {
              const NodeId nid = new_node(next, id, u, node.step + 1, g_new);
              nodes_[nid].h = h_of(next);
              class_of_[key] = nid;
              push_open(nid);
            } else {
              Node& other = nodes_[it->second];
              if (other.closed) continue;  // first closed wins
              if (g_new < other.g - 1e-12 ||
                  (g_new < other.g + 1e-12 &&
                   detail::lex_less(next, other.state))) {
                other.state = next;
                other.parent = id;
                other.control = u;
                other.g = g_new;
                other.h = h_of(next);
                push_open(it->second);
              }
            }
          }
    }

    result.expansions = expansions;
    if (goal_node >= 0) {
      result.status = SearchStatus::ReachedGoal;
      result.reached_goal = true;
      extract(goal_node, result);
    } else {
      if (result.status != SearchStatus::BudgetExhausted)
        result.status = SearchStatus::HorizonExhausted;
      result.reached_goal = false;
      if (best_partial >= 0) {
        extract(best_partial, result);
      } else {
        result.states = {start};  // no movable step; callers fall back
      }
    }
    return result;
  }

 private:
  using NodeId = int;

  struct Node {
    RobotState state;
    NodeId parent = -1;
    Vec3 control = Vec3::Zero();
    int step = 0;
    double g = 0.0;
    double h = 0.0;
    bool closed = false;
  };

  struct HeapEntry {
    double f;
    double h;
    double g;
    NodeId node;
    std::uint64_t seq;
    bool operator>(const HeapEntry& o) const {
      if (f != o.f) return f > o.f;
      if (h != o.h) return h > o.h;
      return seq > o.seq;
    }
  };

  NodeId new_node(const RobotState& s, NodeId parent, const Vec3& u, int step,
                  double g) {
    nodes_.push_back({s, parent, u, step, g, 0.0, false});
    return static_cast<NodeId>(nodes_.size()) - 1;
  }

  void push_open(NodeId id) {
    const Node& n = nodes_[id];
    open_.push({n.g + n.h, n.h, n.g, id, seq_++});
  }

  bool better_partial(const Node& a, const Node& b) const {
    const double fa = a.g + a.h, fb = b.g + b.h;
    if (fa != fb) return fa < fb;
    if (a.h != b.h) return a.h < b.h;
    return detail::lex_less(a.state, b.state);
  }

  static bool inside_map(const Sogm& sogm, const Vec3& p) {
    const Vec3 lo = sogm.origin();
    const Vec3 hi = sogm.max_corner();
    return (p.array() >= lo.array()).all() && (p.array() <= hi.array()).all();
  }

  std::uint64_t class_key(const Sogm& sogm, const RobotState& s, int step,
                          const SearchParams& params) const {
    const double inv_rs = 1.0 / sogm.resolution();
    const double bin = params.v_max / 4.0;
    std::uint64_t key = static_cast<std::uint64_t>(step) & 0x7f;
    for (int a = 0; a < 3; ++a) {
      const int c = static_cast<int>(std::floor((s.p[a] - sogm.origin()[a]) * inv_rs));
      key = key << 11 | (static_cast<std::uint64_t>(c + 16) & 0x7ff);
    }
    for (int a = 0; a < 3; ++a) {
      int vb = static_cast<int>(std::floor(s.v[a] / bin));
      vb = std::clamp(vb, -5, 4);
      key = key << 4 | (static_cast<std::uint64_t>(vb + 5) & 0xf);
    }
    return key;
  }

  bool state_free(const Sogm& sogm, int frame, const Vec3& p,
                  const ObstacleShape& shape) {
    if (const auto* sph = std::get_if<Sphere>(&shape)) {
      detail::CoarseMask& mask = coarse_[frame];
      if (!mask.built()) mask.build(sogm, frame);
      if (mask.clear_around(sogm, p, sph->radius)) return true;
    }
    return is_state_free(sogm, frame, p, shape);
  }

  bool collides(const Sogm& sogm, const MotionPrimitive& prim,
                const ObstacleShape& shape) {
    const int frame = sogm.frame_of_time(prim.start_time + 0.5 * prim.duration);
    const RobotState& s = prim.start;
    const double v_peak =
        std::max(s.v.norm(), (s.v + prim.u * prim.duration).norm());
    const double length = v_peak * prim.duration;
    const int steps = std::max(
        1, static_cast<int>(std::ceil(length / (0.5 * sogm.resolution()))));
    for (int k = 0; k <= steps; ++k) {
      const double t = prim.duration * k / steps;
      const Vec3 p = s.p + s.v * t + 0.5 * prim.u * t * t;
      if (!state_free(sogm, frame, p, shape)) return true;
    }
    return false;
  }

  void extract(NodeId id, PathResult& out) const {
    std::vector<NodeId> chain;
    for (NodeId cur = id; cur >= 0; cur = nodes_[cur].parent)
      chain.push_back(cur);
    std::reverse(chain.begin(), chain.end());
    out.states.clear();
    out.controls.clear();
    for (std::size_t i = 0; i < chain.size(); ++i) {
      out.states.push_back(nodes_[chain[i]].state);
      if (i + 1 < chain.size()) out.controls.push_back(nodes_[chain[i + 1]].control);
    }
    out.cost = nodes_[id].g;
  }

  std::vector<Node> nodes_;
  std::unordered_map<std::uint64_t, NodeId> class_of_;
  std::priority_queue<HeapEntry, std::vector<HeapEntry>, std::greater<>> open_;
  std::vector<detail::CoarseMask> coarse_;
  std::uint64_t seq_ = 0;
};

// Convenience wrapper matching the functional style of the other modules.
inline PathResult kinodynamic_search(const Sogm& sogm, const RobotState& start,
                                     const RobotState& goal,
                                     const SearchParams& params) {
  KinoAstar astar;
  return astar.search(sogm, start, goal, params);
}

}  // namespace stplan

#endif  // STPLAN_KINO_ASTAR_HPP
