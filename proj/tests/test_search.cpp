#include <catch2/catch_amalgamated.hpp>

#include <Eigen/Dense>

#include <map>
#include <queue>

#include "stplan/kino_astar.hpp"
#include "stplan/rng.hpp"

using namespace stplan;

namespace {

// Independent oracle for the fixed-horizon boundary-value cost: direct
// transcription with piecewise-constant controls, solved as a min-norm
// least-squares problem per axis.
double transcription_cost(const RobotState& from, const RobotState& to,
                          double tau, int steps = 400) {
  const double dt = tau / steps;
  double total = 0.0;
  for (int axis = 0; axis < 3; ++axis) {
    Eigen::MatrixXd B(2, steps);
    for (int k = 0; k < steps; ++k) {
      B(0, k) = dt;                              // velocity constraint
      B(1, k) = dt * (tau - (k + 0.5) * dt);     // position constraint
    }
    Eigen::Vector2d c;
    c(0) = to.v[axis] - from.v[axis];
    c(1) = to.p[axis] - from.p[axis] - from.v[axis] * tau;
    const Eigen::Vector2d y = (B * B.transpose()).ldlt().solve(c);
    const Eigen::VectorXd u = B.transpose() * y;
    total += u.squaredNorm() * dt;
  }
  return total;
}

// Same class key the search uses: (step, voxel, velocity bin).
std::uint64_t oracle_key(const Sogm& sogm, const RobotState& s, int step,
                         double v_max) {
  const double inv_rs = 1.0 / sogm.resolution();
  const double bin = v_max / 4.0;
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

bool oracle_lex_less(const RobotState& a, const RobotState& b) {
  for (int i = 0; i < 3; ++i)
    if (a.p[i] != b.p[i]) return a.p[i] < b.p[i];
  for (int i = 0; i < 3; ++i)
    if (a.v[i] != b.v[i]) return a.v[i] < b.v[i];
  return false;
}

// Exhaustive Dijkstra over the pruned reachability graph, mirroring the
// search's control grid, horizon, and state classing but with no heuristic.
double dijkstra_cost(const Sogm& sogm, const RobotState& start,
                     const RobotState& goal, const SearchParams& params) {
  struct Rec {
    RobotState state;
    int step;
    double g;
    bool closed = false;
  };
  std::vector<Rec> recs;
  std::unordered_map<std::uint64_t, int> index;
  using Entry = std::pair<double, int>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> open;

  std::vector<double> samples(params.samples_per_axis);
  for (int i = 0; i < params.samples_per_axis; ++i)
    samples[i] = -params.a_max + 2.0 * params.a_max * i / (params.samples_per_axis - 1);
  const std::vector<double> z_samples =
      params.planar ? std::vector<double>{0.0} : samples;
  const double r_tau = sogm.time_resolution();
  const int horizon = sogm.frame_count();
  const SearchLimits limits{params.v_max, params.a_max};

  recs.push_back({start, 0, 0.0});
  index[oracle_key(sogm, start, 0, params.v_max)] = 0;
  open.push({0.0, 0});
  while (!open.empty()) {
    auto [g, id] = open.top();
    open.pop();
    if (recs[id].closed || g > recs[id].g + 1e-12) continue;
    recs[id].closed = true;
    const Rec rec = recs[id];
    if (rec.step > 0 && (rec.state.p - goal.p).norm() <= params.goal_tolerance)
      return rec.g;
    if (rec.step >= horizon) continue;
    for (double ux : samples)
      for (double uy : samples)
        for (double uz : z_samples) {
          const Vec3 u(ux, uy, uz);
          const RobotState next = rollout(rec.state, u, r_tau);
          if (next.v.norm() > params.v_max + 1e-9) continue;
          if ((next.p.array() < sogm.origin().array()).any() ||
              (next.p.array() > sogm.max_corner().array()).any())
            continue;
          MotionPrimitive prim{rec.state, u, r_tau,
                               sogm.t0() + rec.step * r_tau};
          if (primitive_collides(sogm, prim, params.robot_shape)) continue;
          const double g_new = rec.g + (u.squaredNorm() + params.rho) * r_tau;
          const std::uint64_t key =
              oracle_key(sogm, next, rec.step + 1, params.v_max);
          auto it = index.find(key);
          if (it == index.end()) {
            recs.push_back({next, rec.step + 1, g_new});
            index[key] = static_cast<int>(recs.size()) - 1;
            open.push({g_new, static_cast<int>(recs.size()) - 1});
          } else {
            Rec& other = recs[it->second];
            if (other.closed) continue;
            if (g_new < other.g - 1e-12 ||
                (g_new < other.g + 1e-12 && oracle_lex_less(next, other.state))) {
              other.state = next;
              other.g = g_new;
              open.push({g_new, it->second});
            }
          }
        }
  }
  return std::numeric_limits<double>::infinity();
}

}  // namespace

TEST_CASE("expand produces the full control grid") {
  const RobotState rest{Vec3(1, 1, 1), Vec3::Zero()};
  const SearchLimits limits{10.0, 2.0};
  const auto prims = expand(rest, {-2.0, 0.0, 2.0}, 0.1, limits);
  REQUIRE(prims.size() == 27);
  // u = 0 keeps the state unchanged.
  bool found_identity = false;
  for (const auto& [prim, next] : prims) {
    if (prim.u.norm() == 0.0) {
      REQUIRE((next.p - rest.p).norm() < 1e-12);
      REQUIRE(next.v.norm() < 1e-12);
      found_identity = true;
    }
    // Successor equals the exact rollout.
    const RobotState ref = rollout(rest, prim.u, 0.1);
    REQUIRE((next.p - ref.p).norm() < 1e-12);
  }
  REQUIRE(found_identity);
}

TEST_CASE("expand prunes velocity violations") {
  const double v_max = 2.0, a_max = 6.0;
  const RobotState fast{Vec3::Zero(), Vec3(v_max, 0, 0)};
  const auto prims = expand(fast, {-a_max, 0.0, a_max}, 0.1, {v_max, a_max});
  for (const auto& [prim, next] : prims) {
    REQUIRE(next.v.norm() <= v_max + 1e-9);
    REQUIRE_FALSE((prim.u.x() == a_max));  // accelerating past v_max is pruned
  }
}

TEST_CASE("boundary value cost closed form") {
  SECTION("rest to rest unit move, tau = 1") {
    const RobotState a{Vec3::Zero(), Vec3::Zero()};
    const RobotState b{Vec3(1, 0, 0), Vec3::Zero()};
    REQUIRE(boundary_value_cost(a, b, 1.0) == Catch::Approx(12.0));
    REQUIRE(transcription_cost(a, b, 1.0) == Catch::Approx(12.0).epsilon(1e-3));
  }
  SECTION("random boundary conditions match transcription within 0.1%") {
    Rng rng = Rng::seeded(31);
    for (int trial = 0; trial < 25; ++trial) {
      RobotState a, b;
      for (int i = 0; i < 3; ++i) {
        a.p[i] = rng.uniform(-2, 2);
        a.v[i] = rng.uniform(-1.5, 1.5);
        b.p[i] = rng.uniform(-2, 2);
        b.v[i] = rng.uniform(-1.5, 1.5);
      }
      const double tau = rng.uniform(0.4, 3.0);
      const double closed = boundary_value_cost(a, b, tau);
      const double oracle = transcription_cost(a, b, tau);
      REQUIRE(closed == Catch::Approx(oracle).epsilon(1e-3));
    }
  }
}

TEST_CASE("heuristic basics") {
  const RobotState g{Vec3(1, 2, 1), Vec3(0.5, 0, 0)};
  REQUIRE(heuristic(g, g) == 0.0);
  const RobotState s{Vec3(0, 0, 0), Vec3::Zero()};
  REQUIRE(heuristic(s, g) > 0.0);
}

TEST_CASE("heuristic consistency on sampled expansions") {
  Rng rng = Rng::seeded(53);
  const double r_tau = 0.1;
  const double rho = 1.0;
  // Arrival-time grid on whole steps keeps the estimate consistent across
  // one-step edges.
  HeuristicOptions opts;
  opts.rho = rho;
  for (int k = 1; k <= 64; ++k) opts.taus.push_back(k * r_tau);
  const RobotState goal{Vec3(2, 1, 1), Vec3::Zero()};
  for (int trial = 0; trial < 50; ++trial) {
    RobotState s;
    for (int i = 0; i < 3; ++i) {
      s.p[i] = rng.uniform(-1, 3);
      s.v[i] = rng.uniform(-1.5, 1.5);
    }
    const auto prims = expand(s, {-6.0, 0.0, 6.0}, r_tau, {2.0, 6.0});
    const double h_s = heuristic(s, goal, opts);
    for (const auto& [prim, next] : prims) {
      const double c = (prim.u.squaredNorm() + rho) * r_tau;
      const double h_n = heuristic(next, goal, opts);
      REQUIRE(h_s <= c + h_n + 1e-9);
    }
  }
}

TEST_CASE("goal region heuristic admissibility probe") {
  // Enumerate all 3-step primitive sequences; whenever one ends inside the
  // goal ball, its cost must dominate the start heuristic.
  const double r_tau = 0.25, rho = 1.0, tol = 0.3;
  const double a_max = 2.0, v_max = 2.0;
  const Vec3 goal_p(0.6, 0.2, 0.0);
  const RobotState start{Vec3::Zero(), Vec3::Zero()};
  const double h0 = goal_region_heuristic(start, goal_p, tol, rho, r_tau, 16);

  const std::vector<double> samples{-a_max, 0.0, a_max};
  double best_cost = std::numeric_limits<double>::infinity();
  std::vector<std::pair<RobotState, double>> layer{{start, 0.0}};
  for (int step = 0; step < 3; ++step) {
    std::vector<std::pair<RobotState, double>> next_layer;
    for (const auto& [s, g] : layer) {
      for (double ux : samples)
        for (double uy : samples)
          for (double uz : samples) {
            const Vec3 u(ux, uy, uz);
            const RobotState n = rollout(s, u, r_tau);
            if (n.v.norm() > v_max + 1e-9) continue;
            const double gn = g + (u.squaredNorm() + rho) * r_tau;
            if ((n.p - goal_p).norm() <= tol) best_cost = std::min(best_cost, gn);
            next_layer.push_back({n, gn});
          }
    }
    layer = std::move(next_layer);
  }
  REQUIRE(best_cost < std::numeric_limits<double>::infinity());
  REQUIRE(h0 <= best_cost + 1e-9);
}

TEST_CASE("search on an empty map matches the Dijkstra oracle") {
  Rng rng = Rng::seeded(71);
  for (int trial = 0; trial < 10; ++trial) {
    Sogm sogm(Vec3(-2, -2, -1), {40, 40, 20}, 0.1, 0.25, 4, 0.0);
    SearchParams params;
    params.samples_per_axis = 3;
    params.v_max = 2.0;
    params.a_max = 2.0;
    params.goal_tolerance = 0.3;
    params.planar = true;
    params.robot_shape = Sphere{0.2};
    RobotState start{Vec3(rng.uniform(-0.4, 0.4), rng.uniform(-0.4, 0.4), 0.0),
                     Vec3::Zero()};
    RobotState goal{Vec3(rng.uniform(0.5, 1.2), rng.uniform(-0.8, 0.8), 0.0),
                    Vec3::Zero()};
    if (trial % 3 == 1) {
      // Obstruct the straight line in some trials.
      const Vec3 mid = 0.5 * (start.p + goal.p);
      rasterize_obstacle(sogm, {Sphere{0.15}, mid, Vec3::Zero()}, 0, 3);
      if (!is_state_free(sogm, 0, start.p, params.robot_shape)) continue;
    }
    const PathResult res = kinodynamic_search(sogm, start, goal, params);
    const double oracle = dijkstra_cost(sogm, start, goal, params);
    if (res.reached_goal) {
      REQUIRE(res.cost == Catch::Approx(oracle).margin(1e-9));
    } else {
      REQUIRE(oracle == std::numeric_limits<double>::infinity());
    }
  }
}

TEST_CASE("search trivial goal") {
  Sogm sogm(Vec3(-1, -1, -1), {20, 20, 20}, 0.1, 0.1, 10, 0.0);
  SearchParams params;
  const RobotState start{Vec3::Zero(), Vec3::Zero()};
  const PathResult res = kinodynamic_search(sogm, start, start, params);
  REQUIRE(res.reached_goal);
  REQUIRE(res.controls.empty());
  REQUIRE(res.cost == 0.0);
}

TEST_CASE("search reports an infeasible start") {
  Sogm sogm(Vec3(-1, -1, -1), {20, 20, 20}, 0.1, 0.1, 5, 0.0);
  rasterize_obstacle(sogm, {Sphere{0.3}, Vec3::Zero(), Vec3::Zero()}, 0, 4);
  SearchParams params;
  params.robot_shape = Sphere{0.2};
  const PathResult res =
      kinodynamic_search(sogm, {Vec3::Zero(), Vec3::Zero()},
                         {Vec3(0.8, 0, 0), Vec3::Zero()}, params);
  REQUIRE(res.status == SearchStatus::InfeasibleStart);
}

TEST_CASE("search path is consistent with the double integrator") {
  Sogm sogm(Vec3(-2.5, -2.5, -1), {50, 50, 20}, 0.1, 0.1, 20, 0.0);
  SearchParams params;
  params.v_max = 2.0;
  params.a_max = 6.0;
  const RobotState start{Vec3(-2.0, 0, 0), Vec3::Zero()};
  const RobotState goal{Vec3(0.0, 0, 0), Vec3::Zero()};
  const PathResult res = kinodynamic_search(sogm, start, goal, params);
  REQUIRE(res.reached_goal);
  REQUIRE(res.states.size() == res.controls.size() + 1);
  for (std::size_t k = 0; k < res.controls.size(); ++k) {
    const RobotState ref = rollout(res.states[k], res.controls[k], 0.1);
    REQUIRE((res.states[k + 1].p - ref.p).norm() < 1e-9);
    REQUIRE((res.states[k + 1].v - ref.v).norm() < 1e-9);
    REQUIRE(res.states[k + 1].v.norm() <= params.v_max + 1e-9);
  }
  // g-values along the path are non-decreasing by construction of the cost.
  double g = 0.0;
  for (const auto& u : res.controls) {
    const double g_next = g + (u.squaredNorm() + params.rho) * 0.1;
    REQUIRE(g_next >= g);
    g = g_next;
  }
  REQUIRE(g == Catch::Approx(res.cost));
}

TEST_CASE("search avoids a moving column in the right frames") {
  // A column crosses the straight-line route; the path must be clear of it
  // frame by frame.
  Sogm sogm(Vec3(-2.5, -2.5, 0), {50, 50, 20}, 0.1, 0.1, 20, 0.0);
  const ObstacleTrack column{Column{0.6, 2.0}, Vec3(0.0, -1.0, 1.0), Vec3(0.0, 1.0, 0.0)};
  rasterize_obstacle(sogm, column, 0, 19);
  SearchParams params;
  params.robot_shape = Sphere{0.2};
  const RobotState start{Vec3(-2.0, 0, 1.0), Vec3::Zero()};
  const RobotState goal{Vec3(1.8, 0, 1.0), Vec3::Zero()};
  const PathResult res = kinodynamic_search(sogm, start, goal, params);
  REQUIRE(!res.states.empty());
  // Frame-correct clearance: sample each step densely against the true
  // column pose over that step's window.
  for (std::size_t k = 0; k < res.controls.size(); ++k) {
    for (int i = 0; i <= 10; ++i) {
      const double t_loc = 0.1 * i / 10.0;
      const double t_abs = 0.1 * k + t_loc;
      const Vec3 p = res.states[k].p + res.states[k].v * t_loc +
                     0.5 * res.controls[k] * t_loc * t_loc;
      const Vec3 col_pos = column.position + column.velocity * t_abs;
      REQUIRE(shape_distance(column.shape, col_pos, p) > 0.0);
    }
  }
}

TEST_CASE("search is deterministic") {
  Sogm sogm(Vec3(-2.5, -2.5, 0), {50, 50, 20}, 0.1, 0.1, 20, 0.0);
  rasterize_obstacle(sogm, {Column{0.8, 4.0}, Vec3(0, 0.2, 1.0), Vec3::Zero()}, 0, 19);
  SearchParams params;
  const RobotState start{Vec3(-2.0, 0, 1.0), Vec3::Zero()};
  const RobotState goal{Vec3(1.8, 0, 1.0), Vec3::Zero()};
  const PathResult a = kinodynamic_search(sogm, start, goal, params);
  const PathResult b = kinodynamic_search(sogm, start, goal, params);
  REQUIRE(a.cost == b.cost);
  REQUIRE(a.states.size() == b.states.size());
  for (std::size_t i = 0; i < a.states.size(); ++i) {
    REQUIRE(a.states[i].p == b.states[i].p);
    REQUIRE(a.states[i].v == b.states[i].v);
  }
}

TEST_CASE("primitive collision respects the temporal frame") {
  Sogm sogm(Vec3(-1, -1, -1), {20, 20, 20}, 0.1, 0.5, 3, 0.0);
  // Occupy a voxel only in frame 1 (window (0.5, 1.0]).
  sogm.set_cell(1, *sogm.world_to_cell(Vec3(0, 0, 0)));
  MotionPrimitive still{{Vec3::Zero(), Vec3::Zero()}, Vec3::Zero(), 0.5, 0.0};
  REQUIRE_FALSE(primitive_collides(sogm, still, Sphere{0.2}));
  still.start_time = 0.5;
  REQUIRE(primitive_collides(sogm, still, Sphere{0.2}));
  still.start_time = 1.0;
  REQUIRE_FALSE(primitive_collides(sogm, still, Sphere{0.2}));
  // Beyond the horizon the last frame's prediction holds.
  still.start_time = 5.0;
  REQUIRE_FALSE(primitive_collides(sogm, still, Sphere{0.2}));
  sogm.set_cell(2, *sogm.world_to_cell(Vec3(0, 0, 0)));
  REQUIRE(primitive_collides(sogm, still, Sphere{0.2}));
}
