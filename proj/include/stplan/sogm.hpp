#ifndef STPLAN_SOGM_HPP
#define STPLAN_SOGM_HPP

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <vector>

#include "stplan/bezier.hpp"
#include "stplan/shapes.hpp"

namespace stplan {

// Spatiotemporal occupancy grid: T binary 3D frames over a world-aligned
// box. Frame f (0-based) predicts occupancy for the half-open window
// (t0 + f*r_tau, t0 + (f+1)*r_tau]. Occupancy only ever accumulates; there
// is no per-cell clear, so merging maps and projecting trajectories are
// monotone unions by construction.
class Sogm {
 public:
  Sogm(const Vec3& origin, const Eigen::Vector3i& dims, double r_s,
       double r_tau, int frame_count, double t0)
      : origin_(origin),
        dims_(dims),
        r_s_(r_s),
        r_tau_(r_tau),
        frames_(frame_count),
        t0_(t0) {
    if ((dims.array() < 1).any())
      throw std::invalid_argument("Sogm dims must be >= 1");
    if (r_s <= 0.0 || r_tau <= 0.0)
      throw std::invalid_argument("Sogm resolutions must be positive");
    if (frame_count < 1)
      throw std::invalid_argument("Sogm needs at least one frame");
    cells_ = static_cast<std::size_t>(dims_.x()) * dims_.y() * dims_.z();
    words_per_frame_ = (cells_ + 63) / 64;
    bits_.assign(words_per_frame_ * frames_, 0);
  }

  const Vec3& origin() const { return origin_; }
  const Eigen::Vector3i& dims() const { return dims_; }
  double resolution() const { return r_s_; }
  double time_resolution() const { return r_tau_; }
  int frame_count() const { return frames_; }
  double t0() const { return t0_; }
  double horizon_end() const { return t0_ + frames_ * r_tau_; }
  Vec3 max_corner() const { return origin_ + dims_.cast<double>() * r_s_; }

  bool in_bounds(const Eigen::Vector3i& c) const {
    return (c.array() >= 0).all() && (c.array() < dims_.array()).all();
  }

  std::optional<Eigen::Vector3i> world_to_cell(const Vec3& p) const {
    Eigen::Vector3i c;
    for (int a = 0; a < 3; ++a)
      c[a] = static_cast<int>(std::floor((p[a] - origin_[a]) / r_s_));
    if (!in_bounds(c)) return std::nullopt;
    return c;
  }

  Vec3 cell_center(const Eigen::Vector3i& c) const {
    return origin_ + (c.cast<double>() + Vec3::Constant(0.5).eval()) * r_s_;
  }

  // Frame covering wall-clock time t, clamped to the horizon. The small
  // epsilon keeps times sitting exactly on a window boundary in the
  // earlier frame despite floating-point noise.
  int frame_of_time(double t) const {
    const int f = static_cast<int>(std::ceil((t - t0_) / r_tau_ - 1e-9)) - 1;
    return std::clamp(f, 0, frames_ - 1);
  }

  double frame_window_start(int f) const { return t0_ + f * r_tau_; }
  double frame_window_end(int f) const { return t0_ + (f + 1) * r_tau_; }

  void set_cell(int frame, const Eigen::Vector3i& c) {
    const std::size_t i = index(c);
    bits_[frame * words_per_frame_ + (i >> 6)] |= 1ull << (i & 63);
  }

  bool occupied(int frame, const Eigen::Vector3i& c) const {
    const std::size_t i = index(c);
    return bits_[frame * words_per_frame_ + (i >> 6)] >> (i & 63) & 1;
  }

  // Set cells [x0, x1] at row (y, z) in one go.
  void set_run(int frame, int x0, int x1, int y, int z) {
    x0 = std::max(x0, 0);
    x1 = std::min(x1, dims_.x() - 1);
    if (x0 > x1) return;
    std::size_t lo = index({x0, y, z});
    std::size_t hi = index({x1, y, z});
    std::uint64_t* base = bits_.data() + frame * words_per_frame_;
    std::size_t w0 = lo >> 6, w1 = hi >> 6;
    if (w0 == w1) {
      base[w0] |= (~0ull >> (63 - (hi & 63))) & (~0ull << (lo & 63));
      return;
    }
    base[w0] |= ~0ull << (lo & 63);
    for (std::size_t w = w0 + 1; w < w1; ++w) base[w] = ~0ull;
    base[w1] |= ~0ull >> (63 - (hi & 63));
  }

  // True if any cell in [x0, x1] at row (y, z) is occupied.
  bool any_in_run(int frame, int x0, int x1, int y, int z) const {
    x0 = std::max(x0, 0);
    x1 = std::min(x1, dims_.x() - 1);
    if (x0 > x1) return false;
    std::size_t lo = index({x0, y, z});
    std::size_t hi = index({x1, y, z});
    const std::uint64_t* base = bits_.data() + frame * words_per_frame_;
    std::size_t w0 = lo >> 6, w1 = hi >> 6;
    if (w0 == w1)
      return (base[w0] & (~0ull >> (63 - (hi & 63))) & (~0ull << (lo & 63))) != 0;
    if (base[w0] & (~0ull << (lo & 63))) return true;
    for (std::size_t w = w0 + 1; w < w1; ++w)
      if (base[w]) return true;
    return (base[w1] & (~0ull >> (63 - (hi & 63)))) != 0;
  }

  std::size_t occupied_count(int frame) const {
    std::size_t n = 0;
    const std::uint64_t* base = bits_.data() + frame * words_per_frame_;
    for (std::size_t w = 0; w < words_per_frame_; ++w)
      n += static_cast<std::size_t>(__builtin_popcountll(base[w]));
    return n;
  }

  template <typename Fn>
  void for_each_occupied(int frame, Fn&& fn) const {
    const std::uint64_t* base = bits_.data() + frame * words_per_frame_;
    for (std::size_t w = 0; w < words_per_frame_; ++w) {
      std::uint64_t bitsw = base[w];
      while (bitsw) {
        const int b = __builtin_ctzll(bitsw);
        bitsw &= bitsw - 1;
        const std::size_t i = (w << 6) + b;
        if (i >= cells_) break;
        const int x = static_cast<int>(i % dims_.x());
        const int y = static_cast<int>((i / dims_.x()) % dims_.y());
        const int z = static_cast<int>(i / (static_cast<std::size_t>(dims_.x()) * dims_.y()));
        fn(Eigen::Vector3i(x, y, z));
      }
    }
  }

  // Bitwise OR of another map with identical geometry.
  void merge(const Sogm& other) {
    if (other.dims_ != dims_ || other.frames_ != frames_)
      throw std::invalid_argument("merge requires identical geometry");
    for (std::size_t i = 0; i < bits_.size(); ++i) bits_[i] |= other.bits_[i];
  }

  const std::vector<std::uint64_t>& raw_bits() const { return bits_; }
  std::size_t words_per_frame() const { return words_per_frame_; }
  void load_raw_bits(std::vector<std::uint64_t> bits) {
    if (bits.size() != bits_.size())
      throw std::invalid_argument("raw bit size mismatch");
    bits_ = std::move(bits);
  }

  // ---- stamping primitives -------------------------------------------

  // Occupy every cell whose center lies within `margin` of the solid shape
  // placed at `center`.
  void stamp_shape(int frame, const ObstacleShape& shape, const Vec3& center,
                   double margin) {
    if (const auto* sph = std::get_if<Sphere>(&shape)) {
      stamp_capsule(frame, center, center, sph->radius + margin);
    } else if (const auto* col = std::get_if<Column>(&shape)) {
      stamp_column_sweep(frame, *col, center, center, margin);
    } else if (const auto* hoop = std::get_if<CircleHoop>(&shape)) {
      stamp_hoop_sweep(frame, *hoop, center, center, margin);
    } else {
      const auto& box = std::get<Box>(shape);
      const Vec3 lo = center - box.half_extents - Vec3::Constant(margin);
      const Vec3 hi = center + box.half_extents + Vec3::Constant(margin);
      for_cells_in_box(lo, hi, [&](const Eigen::Vector3i& c) {
        if (shape_distance(shape, center, cell_center(c)) <= margin)
          set_cell(frame, c);
      });
    }
  }

  // Exact swept stamp of a sphere translating from a to b.
  void stamp_capsule(int frame, const Vec3& a, const Vec3& b, double radius) {
    const Vec3 lo = a.cwiseMin(b) - Vec3::Constant(radius);
    const Vec3 hi = a.cwiseMax(b) + Vec3::Constant(radius);
    const Vec3 ab = b - a;
    const double ab2 = ab.squaredNorm();
    const double r2 = radius * radius;
    for_rows_in_box(lo, hi, [&](int y, int z, int x_lo, int x_hi) {
      for (int x = x_lo; x <= x_hi; ++x) {
        const Vec3 p = cell_center({x, y, z});
        Vec3 d = p - a;
        if (ab2 > 0.0) {
          const double s = std::clamp(d.dot(ab) / ab2, 0.0, 1.0);
          d -= s * ab;
        }
        if (d.squaredNorm() <= r2) set_cell(frame, {x, y, z});
      }
    });
  }

  // Exact swept stamp of a vertical column translating horizontally from
  // center `a` to center `b` (vertical velocity falls back to sub-sampling
  // at the call site). Rounded caps from `margin` are handled per z row.
  void stamp_column_sweep(int frame, const Column& col, const Vec3& a,
                          const Vec3& b, double margin) {
    const double half_h = 0.5 * col.height;
    const double base_r = 0.5 * col.diameter;
    const Vec3 lo3 = a.cwiseMin(b), hi3 = a.cwiseMax(b);
    const int z_lo = std::max(
        0, static_cast<int>(std::floor((lo3.z() - half_h - margin - origin_.z()) / r_s_ - 0.5)));
    const int z_hi = std::min(
        dims_.z() - 1,
        static_cast<int>(std::ceil((hi3.z() + half_h + margin - origin_.z()) / r_s_)));
    const Eigen::Vector2d a2(a.x(), a.y()), b2(b.x(), b.y());
    double cached_r = -1.0;
    std::vector<std::pair<int, std::pair<int, int>>> rows;
    for (int z = z_lo; z <= z_hi; ++z) {
      const double cz = origin_.z() + (z + 0.5) * r_s_;
      // Mid-sweep column z center; horizontal sweeps keep z constant.
      const double col_z = 0.5 * (a.z() + b.z());
      const double dz_excess = std::max(std::abs(cz - col_z) - half_h, 0.0);
      if (dz_excess > margin) continue;
      const double r = base_r + std::sqrt(std::max(margin * margin - dz_excess * dz_excess, 0.0));
      if (r != cached_r) {
        rows = capsule2d_rows(a2, b2, r);
        cached_r = r;
      }
      for (const auto& [y, run] : rows) set_run(frame, run.first, run.second, y, z);
    }
  }

  // Swept stamp of a torus: the major circle is sampled densely and a
  // capsule is stamped between the swept positions of each ring point.
  // Covers the true swept torus; over-approximates by at most about half a
  // cell beyond `margin`.
  void stamp_hoop_sweep(int frame, const CircleHoop& hoop, const Vec3& a,
                        const Vec3& b, double margin) {
    const double tube_r = 0.5 * hoop.tube_diameter + margin;
    Vec3 u = hoop.axis.unitOrthogonal();
    Vec3 v = hoop.axis.cross(u);
    const int steps = std::max(
        8, static_cast<int>(std::ceil(2.0 * M_PI * hoop.major_radius / (0.5 * r_s_))));
    for (int k = 0; k < steps; ++k) {
      const double phi = 2.0 * M_PI * k / steps;
      const Vec3 ring = hoop.major_radius * (std::cos(phi) * u + std::sin(phi) * v);
      stamp_capsule(frame, a + ring, b + ring, tube_r);
    }
  }

 private:
  std::size_t index(const Eigen::Vector3i& c) const {
    return static_cast<std::size_t>(c.x()) +
           static_cast<std::size_t>(dims_.x()) *
               (static_cast<std::size_t>(c.y()) +
                static_cast<std::size_t>(dims_.y()) * static_cast<std::size_t>(c.z()));
  }

  template <typename Fn>
  void for_rows_in_box(const Vec3& lo, const Vec3& hi, Fn&& fn) const {
    Eigen::Vector3i clo, chi;
    for (int axis = 0; axis < 3; ++axis) {
      clo[axis] = std::max(0, static_cast<int>(std::floor((lo[axis] - origin_[axis]) / r_s_ - 0.5)));
      chi[axis] = std::min(dims_[axis] - 1,
                           static_cast<int>(std::ceil((hi[axis] - origin_[axis]) / r_s_)));
    }
    for (int z = clo.z(); z <= chi.z(); ++z)
      for (int y = clo.y(); y <= chi.y(); ++y) fn(y, z, clo.x(), chi.x());
  }

  template <typename Fn>
  void for_cells_in_box(const Vec3& lo, const Vec3& hi, Fn&& fn) const {
    for_rows_in_box(lo, hi, [&](int y, int z, int x_lo, int x_hi) {
      for (int x = x_lo; x <= x_hi; ++x) fn(Eigen::Vector3i(x, y, z));
    });
  }

  // x-runs of the 2D capsule (segment a2-b2 dilated by r), one per y row.
  std::vector<std::pair<int, std::pair<int, int>>> capsule2d_rows(
      const Eigen::Vector2d& a2, const Eigen::Vector2d& b2, double r) const {
    std::vector<std::pair<int, std::pair<int, int>>> rows;
    const Eigen::Vector2d lo = a2.cwiseMin(b2).array() - r;
    const Eigen::Vector2d hi = a2.cwiseMax(b2).array() + r;
    const int y_lo = std::max(0, static_cast<int>(std::floor((lo.y() - origin_.y()) / r_s_ - 0.5)));
    const int y_hi = std::min(dims_.y() - 1,
                              static_cast<int>(std::ceil((hi.y() - origin_.y()) / r_s_)));
    const int x_lo = std::max(0, static_cast<int>(std::floor((lo.x() - origin_.x()) / r_s_ - 0.5)));
    const int x_hi = std::min(dims_.x() - 1,
                              static_cast<int>(std::ceil((hi.x() - origin_.x()) / r_s_)));
    const Eigen::Vector2d ab = b2 - a2;
    const double ab2 = ab.squaredNorm();
    const double r2 = r * r;
    for (int y = y_lo; y <= y_hi; ++y) {
      const double cy = origin_.y() + (y + 0.5) * r_s_;
      int run_lo = -1, run_hi = -2;
      for (int x = x_lo; x <= x_hi; ++x) {
        const double cx = origin_.x() + (x + 0.5) * r_s_;
        Eigen::Vector2d d(cx - a2.x(), cy - a2.y());
        if (ab2 > 0.0) {
          const double s = std::clamp(d.dot(ab) / ab2, 0.0, 1.0);
          d -= s * ab;
        }
        if (d.squaredNorm() <= r2) {
          if (run_lo < 0) run_lo = x;
          run_hi = x;
        }
      }
      if (run_lo >= 0) rows.push_back({y, {run_lo, run_hi}});
    }
    return rows;
  }

  Vec3 origin_;
  Eigen::Vector3i dims_;
  double r_s_, r_tau_;
  int frames_;
  double t0_;
  std::size_t cells_ = 0;
  std::size_t words_per_frame_ = 0;
  std::vector<std::uint64_t> bits_;
};

// ---- obstacle rasterization ------------------------------------------

// Stamp the shape swept at constant velocity over the absolute time window
// [wa, wb] into one frame. `pos_at_wa` is the shape center at time wa.
inline void rasterize_sweep(Sogm& sogm, const ObstacleShape& shape,
                            const Vec3& pos_at_wa, const Vec3& velocity,
                            int frame, double wa, double wb,
                            double margin = 0.0) {
  const Vec3 pos_at_wb = pos_at_wa + velocity * (wb - wa);
  if (const auto* sph = std::get_if<Sphere>(&shape)) {
    sogm.stamp_capsule(frame, pos_at_wa, pos_at_wb, sph->radius + margin);
    return;
  }
  if (const auto* col = std::get_if<Column>(&shape)) {
    if (std::abs(velocity.z()) < 1e-12) {
      sogm.stamp_column_sweep(frame, *col, pos_at_wa, pos_at_wb, margin);
      return;
    }
  }
  if (const auto* hoop = std::get_if<CircleHoop>(&shape)) {
    sogm.stamp_hoop_sweep(frame, *hoop, pos_at_wa, pos_at_wb, margin);
    return;
  }
  // Generic fallback: time sub-sampling at a quarter cell of travel.
  const double speed = velocity.norm();
  const double span = wb - wa;
  int steps = 1;
  if (speed > 1e-12)
    steps = std::max(1, static_cast<int>(std::ceil(span * speed / (0.25 * sogm.resolution()))));
  for (int k = 0; k <= steps; ++k) {
    const double t = wa + span * k / steps;
    sogm.stamp_shape(frame, shape, pos_at_wa + velocity * (t - wa), margin);
  }
}

// Rasterize a constant-velocity obstacle track into frames
// [frame_lo, frame_hi]. The track position refers to the map's t0.
inline void rasterize_obstacle(Sogm& sogm, const ObstacleTrack& track,
                               int frame_lo, int frame_hi,
                               double margin = 0.0) {
  validate_shape(track.shape);
  if (frame_lo < 0 || frame_hi >= sogm.frame_count() || frame_lo > frame_hi)
    throw std::out_of_range("frame window outside map horizon");
  for (int f = frame_lo; f <= frame_hi; ++f) {
    const double wa = sogm.frame_window_start(f);
    const double wb = sogm.frame_window_end(f);
    const Vec3 pos = track.position + track.velocity * (wa - sogm.t0());
    rasterize_sweep(sogm, track.shape, pos, track.velocity, f, wa, wb, margin);
  }
}

// ---- shared-trajectory projection ------------------------------------

// Trajectory broadcast by a cooperating robot: its planned spline in the
// shared world frame plus the body shape to rasterize along it.
struct TrajectoryMessage {
  std::uint32_t agent_id = 0;
  double stamp = 0.0;
  BezierSpline spline;
  ObstacleShape occupancy_shape = Sphere{0.1};
};

struct ProjectionResult {
  bool overlapped = false;
  int first_frame = -1;
  int last_frame = -1;
};

// Project a received trajectory into the map (union), sweeping the sender's
// body shape along its spline through every frame window the spline covers.
inline ProjectionResult project_trajectory(Sogm& sogm,
                                           const TrajectoryMessage& msg,
                                           double margin = 0.0) {
  ProjectionResult result;
  if (msg.spline.pieces.empty()) return result;
  const double msg_start = msg.spline.t_start;
  const double msg_end = msg.spline.t_end();
  if (msg_end <= sogm.t0() || msg_start >= sogm.horizon_end()) return result;

  // Velocity bound from hodograph control points, for the sampling step.
  double v_max = 0.0;
  for (const auto& piece : msg.spline.pieces) {
    if (piece.degree() < 1) continue;
    const BezierPiece hod = derivative_control_points(piece);
    for (int i = 0; i < hod.control_points.cols(); ++i)
      v_max = std::max(v_max, hod.control_points.col(i).norm());
  }
  double dt = 0.25 * sogm.time_resolution();
  if (v_max > 1e-9) dt = std::min(dt, sogm.resolution() / (4.0 * v_max));

  const bool is_sphere = std::holds_alternative<Sphere>(msg.occupancy_shape);
  const double sphere_r =
      is_sphere ? std::get<Sphere>(msg.occupancy_shape).radius + margin : 0.0;

  for (int f = 0; f < sogm.frame_count(); ++f) {
    const double wa = std::max(sogm.frame_window_start(f), msg_start);
    const double wb = std::min(sogm.frame_window_end(f), msg_end);
    if (wa > wb) continue;
    result.overlapped = true;
    if (result.first_frame < 0) result.first_frame = f;
    result.last_frame = f;
    const int steps = std::max(1, static_cast<int>(std::ceil((wb - wa) / dt)));
    Vec3 prev = msg.spline.eval(wa);
    if (!is_sphere) sogm.stamp_shape(f, msg.occupancy_shape, prev, margin);
    for (int k = 1; k <= steps; ++k) {
      const Vec3 cur = msg.spline.eval(wa + (wb - wa) * k / steps);
      if (is_sphere)
        sogm.stamp_capsule(f, prev, cur, sphere_r);
      else
        sogm.stamp_shape(f, msg.occupancy_shape, cur, margin);
      prev = cur;
    }
    if (is_sphere && steps == 0) sogm.stamp_capsule(f, prev, prev, sphere_r);
  }
  return result;
}

// ---- point queries ----------------------------------------------------

// True iff no occupied cell center of the frame lies strictly inside the
// inflation shape centered at p. Cells outside the map are free.
inline bool is_state_free(const Sogm& sogm, int frame, const Vec3& p,
                          const ObstacleShape& inflation) {
  if (const auto* sph = std::get_if<Sphere>(&inflation)) {
    const double r = sph->radius;
    const double r2 = r * r;
    const double rs = sogm.resolution();
    const Vec3& org = sogm.origin();
    const int z_lo = std::max(0, static_cast<int>(std::floor((p.z() - r - org.z()) / rs - 0.5)));
    const int z_hi = std::min(sogm.dims().z() - 1,
                              static_cast<int>(std::ceil((p.z() + r - org.z()) / rs)));
    for (int z = z_lo; z <= z_hi; ++z) {
      const double dz = org.z() + (z + 0.5) * rs - p.z();
      const double ry2 = r2 - dz * dz;
      if (ry2 <= 0.0) continue;
      const double ry = std::sqrt(ry2);
      const int y_lo = std::max(0, static_cast<int>(std::floor((p.y() - ry - org.y()) / rs - 0.5)));
      const int y_hi = std::min(sogm.dims().y() - 1,
                                static_cast<int>(std::ceil((p.y() + ry - org.y()) / rs)));
      for (int y = y_lo; y <= y_hi; ++y) {
        const double dy = org.y() + (y + 0.5) * rs - p.y();
        const double rx2 = ry2 - dy * dy;
        if (rx2 <= 0.0) continue;
        const double rx = std::sqrt(rx2);
        // Strict interior: trim boundary cells of the conservative run.
        int x_lo = static_cast<int>(std::floor((p.x() - rx - org.x()) / rs - 0.5));
        int x_hi = static_cast<int>(std::ceil((p.x() + rx - org.x()) / rs));
        x_lo = std::max(x_lo, 0);
        x_hi = std::min(x_hi, sogm.dims().x() - 1);
        while (x_lo <= x_hi) {
          const double dx = org.x() + (x_lo + 0.5) * rs - p.x();
          if (dx * dx + dy * dy + dz * dz < r2) break;
          ++x_lo;
        }
        while (x_hi >= x_lo) {
          const double dx = org.x() + (x_hi + 0.5) * rs - p.x();
          if (dx * dx + dy * dy + dz * dz < r2) break;
          --x_hi;
        }
        if (x_lo <= x_hi && sogm.any_in_run(frame, x_lo, x_hi, y, z)) return false;
      }
    }
    return true;
  }
  // Generic shapes: scan the inflation bounding box.
  const double reach = shape_bounding_radius(inflation);
  const Vec3 lo = p - Vec3::Constant(reach);
  const Vec3 hi = p + Vec3::Constant(reach);
  const double rs = sogm.resolution();
  const Vec3& org = sogm.origin();
  Eigen::Vector3i clo, chi;
  for (int a = 0; a < 3; ++a) {
    clo[a] = std::max(0, static_cast<int>(std::floor((lo[a] - org[a]) / rs - 0.5)));
    chi[a] = std::min(sogm.dims()[a] - 1,
                      static_cast<int>(std::ceil((hi[a] - org[a]) / rs)));
  }
  for (int z = clo.z(); z <= chi.z(); ++z)
    for (int y = clo.y(); y <= chi.y(); ++y)
      for (int x = clo.x(); x <= chi.x(); ++x) {
        const Eigen::Vector3i c(x, y, z);
        if (!sogm.occupied(frame, c)) continue;
        if (shape_contains(inflation, p, sogm.cell_center(c))) return false;
      }
  return true;
}

}  // namespace stplan

#endif  // STPLAN_SOGM_HPP
