#ifndef STPLAN_CORRIDOR_HPP
#define STPLAN_CORRIDOR_HPP

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include "stplan/convex.hpp"
#include "stplan/polytope.hpp"
#include "stplan/sogm.hpp"

namespace stplan {

// Ellipsoid {center + shape * u : |u| <= 1} with symmetric positive
// definite shape matrix.
struct Ellipsoid {
  Vec3 center = Vec3::Zero();
  Eigen::Matrix3d shape = 1e-3 * Eigen::Matrix3d::Identity();

  double log_det() const {
    return std::log(shape.determinant());
  }
  double volume() const { return 4.0 / 3.0 * M_PI * shape.determinant(); }
};

// Convex free region bound to one temporal frame's window.
struct SpatioTemporalCorridor {
  Polytope polytope;
  double window_start = 0.0;
  double window_end = 0.0;
  int frame_index = 0;
};

namespace detail {

// Closest point of an axis-aligned box to c in the metric x'Mx (M SPD).
// All 27 clamp patterns are enumerated; the feasible one with the lowest
// objective is the global optimum of this strictly convex problem.
inline Vec3 box_closest_point_metric(const Eigen::Matrix3d& M, const Vec3& c,
                                     const Vec3& lo, const Vec3& hi) {
  Vec3 best = lo;
  double best_obj = std::numeric_limits<double>::infinity();
  for (int pattern = 0; pattern < 27; ++pattern) {
    int state[3];
    int p = pattern;
    for (int a = 0; a < 3; ++a) {
      state[a] = p % 3;
      p /= 3;
    }
    Vec3 x;
    std::vector<int> free_axes;
    for (int a = 0; a < 3; ++a) {
      if (state[a] == 0)
        x[a] = lo[a];
      else if (state[a] == 1)
        x[a] = hi[a];
      else
        free_axes.push_back(a);
    }
    const int nf = static_cast<int>(free_axes.size());
    if (nf > 0) {
      Eigen::MatrixXd Mff(nf, nf);
      Eigen::VectorXd rhs(nf);
      for (int i = 0; i < nf; ++i) {
        rhs(i) = 0.0;
        for (int a = 0; a < 3; ++a) {
          if (state[a] == 2) continue;
          rhs(i) -= M(free_axes[i], a) * (x[a] - c[a]);
        }
        for (int j = 0; j < nf; ++j) Mff(i, j) = M(free_axes[i], free_axes[j]);
      }
      const Eigen::VectorXd xf = Mff.ldlt().solve(rhs);
      bool feasible = true;
      for (int i = 0; i < nf; ++i) {
        const double v = c[free_axes[i]] + xf(i);
        if (v < lo[free_axes[i]] - 1e-12 || v > hi[free_axes[i]] + 1e-12)
          feasible = false;
        x[free_axes[i]] = std::clamp(v, lo[free_axes[i]], hi[free_axes[i]]);
      }
      if (!feasible) continue;
    }
    const Vec3 d = x - c;
    const double obj = d.dot(M * d);
    if (obj < best_obj) {
      best_obj = obj;
      best = x;
    }
  }
  return best;
}

}  // namespace detail

// ---- inscribed ellipsoid ----------------------------------------------

struct InscribedEllipsoidResult {
  bool ok = false;
  Ellipsoid ellipsoid;
};

// Maximum-volume inscribed ellipsoid of a polytope via a log-det barrier
// Newton method on the lower-triangular factor of the shape matrix. The
// returned ellipsoid is rescaled so every halfspace constraint holds to
// 1e-9 slack, and is never smaller than the (feasibility-rescaled) warm
// start.
inline InscribedEllipsoidResult inscribed_ellipsoid(const Polytope& poly,
                                                    const Ellipsoid& initial) {
  const int m = static_cast<int>(poly.faces.size());
  InscribedEllipsoidResult out;

  Vec3 c = initial.center;
  double center_slack = poly.min_slack(c);
  if (center_slack <= 1e-12) {
    const ChebyshevResult cheb = chebyshev_ball(poly);
    if (!cheb.bounded || cheb.radius <= 1e-12) return out;  // empty interior
    c = cheb.center;
    center_slack = cheb.radius;
  }

  // Lower-triangular factor of the shape, scaled into the polytope.
  Eigen::Matrix3d shape2 = initial.shape * initial.shape;
  Eigen::LLT<Eigen::Matrix3d> llt(shape2);
  Eigen::Matrix3d B = llt.info() == Eigen::Success
                          ? Eigen::Matrix3d(llt.matrixL())
                          : Eigen::Matrix3d(1e-4 * Eigen::Matrix3d::Identity());
  {
    double scale = 1.0;
    for (const auto& f : poly.faces) {
      const double w = (B.transpose() * f.a).norm();
      const double s = f.b - f.a.dot(c);
      if (w > 1e-15) scale = std::min(scale, 0.95 * s / w);
    }
    if (scale <= 0.0) scale = 1e-6;
    B *= std::min(scale, 1.0);
    for (int j = 0; j < 3; ++j)
      if (B(j, j) < 1e-9) B(j, j) = std::min(1e-9, 0.1 * center_slack);
  }

  auto theta_get = [](const Eigen::Matrix3d& Bm, const Vec3& cm,
                      Eigen::Matrix<double, 9, 1>& th) {
    int k = 0;
    for (int r = 0; r < 3; ++r)
      for (int col = 0; col <= r; ++col) th(k++) = Bm(r, col);
    th.tail<3>() = cm;
  };
  auto theta_set = [](const Eigen::Matrix<double, 9, 1>& th, Eigen::Matrix3d& Bm,
                      Vec3& cm) {
    Bm.setZero();
    int k = 0;
    for (int r = 0; r < 3; ++r)
      for (int col = 0; col <= r; ++col) Bm(r, col) = th(k++);
    cm = th.tail<3>();
  };

  // Barrier value; +inf when outside the domain.
  auto barrier = [&](const Eigen::Matrix3d& Bm, const Vec3& cm,
                     double t) -> double {
    double val = 0.0;
    for (int j = 0; j < 3; ++j) {
      if (Bm(j, j) <= 0.0) return std::numeric_limits<double>::infinity();
      val -= t * std::log(Bm(j, j));
    }
    for (const auto& f : poly.faces) {
      const double s = f.b - f.a.dot(cm) - (Bm.transpose() * f.a).norm();
      if (s <= 0.0) return std::numeric_limits<double>::infinity();
      val -= std::log(s);
    }
    return val;
  };

  const double t_final = std::max(1200.0, 150.0 * m);
  Eigen::Matrix<double, 9, 1> theta, grad, step;
  Eigen::Matrix<double, 9, 9> hess;
  // Index map from (row, col) of B to theta slot.
  int slot[3][3];
  {
    int k = 0;
    for (int r = 0; r < 3; ++r)
      for (int col = 0; col <= r; ++col) slot[r][col] = k++;
  }

  for (double t = 4.0; t / 8.0 < t_final; t *= 8.0) {
    const double tt = std::min(t, t_final);
    for (int iter = 0; iter < 40; ++iter) {
      grad.setZero();
      hess.setZero();
      for (int j = 0; j < 3; ++j) {
        grad(slot[j][j]) -= tt / B(j, j);
        hess(slot[j][j], slot[j][j]) += tt / (B(j, j) * B(j, j));
      }
      bool domain_ok = true;
      for (const auto& f : poly.faces) {
        const Vec3 w = B.transpose() * f.a;
        const double n = w.norm();
        const double s = f.b - f.a.dot(c) - n;
        if (s <= 0.0) {
          domain_ok = false;
          break;
        }
        const Vec3 what = n > 1e-15 ? Vec3(w / n) : Vec3::Zero();
        Eigen::Matrix<double, 9, 1> g = Eigen::Matrix<double, 9, 1>::Zero();
        for (int r = 0; r < 3; ++r)
          for (int col = 0; col <= r; ++col) g(slot[r][col]) = f.a[r] * what[col];
        g.tail<3>() = f.a;
        const double inv_s = 1.0 / s;
        grad += inv_s * g;
        hess += (inv_s * inv_s) * g * g.transpose();
        // Curvature of the norm term.
        if (n > 1e-15) {
          for (int r = 0; r < 3; ++r)
            for (int col = 0; col <= r; ++col)
              for (int r2 = 0; r2 < 3; ++r2)
                for (int col2 = 0; col2 <= r2; ++col2) {
                  const double cur = f.a[r] * f.a[r2] *
                                     ((col == col2 ? 1.0 : 0.0) - what[col] * what[col2]) /
                                     n;
                  hess(slot[r][col], slot[r2][col2]) += inv_s * cur;
                }
        }
      }
      if (!domain_ok) break;
      hess.diagonal().array() += 1e-12;
      step = hess.ldlt().solve(-grad);
      const double decrement = -grad.dot(step);
      if (decrement < 1e-10) break;
      theta_get(B, c, theta);
      const double f0 = barrier(B, c, tt);
      double alpha = 1.0;
      Eigen::Matrix3d B_try;
      Vec3 c_try;
      bool accepted = false;
      for (int ls = 0; ls < 50; ++ls) {
        const Eigen::Matrix<double, 9, 1> cand = theta + alpha * step;
        theta_set(cand, B_try, c_try);
        const double f1 = barrier(B_try, c_try, tt);
        if (f1 < f0 - 0.25 * alpha * decrement) {
          B = B_try;
          c = c_try;
          accepted = true;
          break;
        }
        alpha *= 0.5;
      }
      if (!accepted) break;
    }
  }

  // Enforce containment exactly by rescaling.
  double scale = 1.0;
  for (const auto& f : poly.faces) {
    const double w = (B.transpose() * f.a).norm();
    const double s = f.b - f.a.dot(c);
    if (w > 1e-15) scale = std::min(scale, s / w);
  }
  if (scale < 1.0) B *= std::max(scale, 0.0);

  Eigen::Matrix3d shape_sq = B * B.transpose();
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(shape_sq);
  Eigen::Vector3d ev = eig.eigenvalues().cwiseMax(1e-24);
  out.ellipsoid.center = c;
  out.ellipsoid.shape = eig.eigenvectors() *
                        ev.cwiseSqrt().asDiagonal() *
                        eig.eigenvectors().transpose();
  out.ok = true;

  // Never shrink below a feasibility-rescaled warm start.
  double init_scale = 1.0;
  for (const auto& f : poly.faces) {
    const double w = (initial.shape * f.a).norm();
    const double s = f.b - f.a.dot(initial.center);
    if (w > 1e-15) init_scale = std::min(init_scale, s / w);
  }
  if (init_scale > 0.0) {
    const double init_logdet =
        std::log((initial.shape * init_scale).determinant());
    if (init_logdet > out.ellipsoid.log_det()) {
      out.ellipsoid.center = initial.center;
      out.ellipsoid.shape = initial.shape * init_scale;
    }
  }
  return out;
}

// ---- occupied-cell aggregation ----------------------------------------

// Merge occupied cells near the seed segment into maximal axis-aligned
// boxes (exact cover of the occupied cube union). Plane separation then
// works on boxes instead of single cells.
inline std::vector<std::pair<Vec3, Vec3>> merged_occupied_boxes(
    const Sogm& sogm, int frame, const Vec3& seg_a, const Vec3& seg_b,
    double prune_radius) {
  const double rs = sogm.resolution();
  const Vec3 lo_w = seg_a.cwiseMin(seg_b) - Vec3::Constant(prune_radius);
  const Vec3 hi_w = seg_a.cwiseMax(seg_b) + Vec3::Constant(prune_radius);
  Eigen::Vector3i clo, chi;
  for (int a = 0; a < 3; ++a) {
    clo[a] = std::max(0, static_cast<int>(std::floor((lo_w[a] - sogm.origin()[a]) / rs)));
    chi[a] = std::min(sogm.dims()[a] - 1,
                      static_cast<int>(std::floor((hi_w[a] - sogm.origin()[a]) / rs)));
  }
  if ((clo.array() > chi.array()).any()) return {};
  const int nx = chi.x() - clo.x() + 1;
  const int ny = chi.y() - clo.y() + 1;
  const int nz = chi.z() - clo.z() + 1;
  std::vector<std::uint8_t> mask(static_cast<std::size_t>(nx) * ny * nz, 0);
  auto mask_at = [&](int x, int y, int z) -> std::uint8_t& {
    return mask[static_cast<std::size_t>(x) +
                static_cast<std::size_t>(nx) * (y + static_cast<std::size_t>(ny) * z)];
  };

  const Vec3 ab = seg_b - seg_a;
  const double ab2 = ab.squaredNorm();
  const double keep2 = (prune_radius + rs) * (prune_radius + rs);
  bool any = false;
  for (int z = clo.z(); z <= chi.z(); ++z)
    for (int y = clo.y(); y <= chi.y(); ++y) {
      if (!sogm.any_in_run(frame, clo.x(), chi.x(), y, z)) continue;
      for (int x = clo.x(); x <= chi.x(); ++x) {
        if (!sogm.occupied(frame, {x, y, z})) continue;
        Vec3 d = sogm.cell_center({x, y, z}) - seg_a;
        if (ab2 > 0.0) {
          const double s = std::clamp(d.dot(ab) / ab2, 0.0, 1.0);
          d -= s * ab;
        }
        if (d.squaredNorm() > keep2) continue;
        mask_at(x - clo.x(), y - clo.y(), z - clo.z()) = 1;
        any = true;
      }
    }
  if (!any) return {};

  // Greedy meshing: grow x-runs, then y-rectangles, then z-slabs.
  std::vector<std::pair<Vec3, Vec3>> boxes;
  for (int z = 0; z < nz; ++z)
    for (int y = 0; y < ny; ++y)
      for (int x = 0; x < nx; ++x) {
        if (!mask_at(x, y, z)) continue;
        int x1 = x;
        while (x1 + 1 < nx && mask_at(x1 + 1, y, z)) ++x1;
        int y1 = y;
        for (; y1 + 1 < ny; ++y1) {
          bool full = true;
          for (int xi = x; xi <= x1 && full; ++xi)
            if (!mask_at(xi, y1 + 1, z)) full = false;
          if (!full) break;
        }
        int z1 = z;
        for (; z1 + 1 < nz; ++z1) {
          bool full = true;
          for (int yi = y; yi <= y1 && full; ++yi)
            for (int xi = x; xi <= x1 && full; ++xi)
              if (!mask_at(xi, yi, z1 + 1)) full = false;
          if (!full) break;
        }
        for (int zi = z; zi <= z1; ++zi)
          for (int yi = y; yi <= y1; ++yi)
            for (int xi = x; xi <= x1; ++xi) mask_at(xi, yi, zi) = 0;
        const Vec3 blo = sogm.origin() +
                         rs * Vec3(clo.x() + x, clo.y() + y, clo.z() + z);
        const Vec3 bhi = sogm.origin() + rs * Vec3(clo.x() + x1 + 1, clo.y() + y1 + 1,
                                                   clo.z() + z1 + 1);
        boxes.push_back({blo, bhi});
      }
  return boxes;
}

// ---- region inflation ---------------------------------------------------

enum class CorridorStatus { Ok, InfeasibleSeed };

struct CorridorGrowth {
  CorridorStatus status = CorridorStatus::InfeasibleSeed;
  Polytope polytope;
  Ellipsoid ellipsoid;
  // Inscribed-ellipsoid log-volume after each completed iteration.
  std::vector<double> log_volume_trace;
};

struct CorridorParams {
  int max_iters = 5;
  double prune_radius = 3.0;
  int plane_budget = 60;       // soft cap; separation soundness wins
  double fixpoint_rel_tol = 1e-3;
};

namespace detail {

struct ObstacleBox {
  Vec3 lo, hi;
  bool excluded = false;

  Vec3 corner(int k) const {
    return Vec3(k & 1 ? hi.x() : lo.x(), k & 2 ? hi.y() : lo.y(),
                k & 4 ? hi.z() : lo.z());
  }
};

// True if some existing face already excludes the whole box.
inline bool face_excludes(const Halfspace& f, const ObstacleBox& box) {
  for (int k = 0; k < 8; ++k)
    if (f.a.dot(box.corner(k)) < f.b - 1e-12) return false;
  return true;
}

// Max-margin separator between the seed segment and a box; exists whenever
// they are disjoint. Returns the face tangent to the box.
inline std::optional<Halfspace> segment_box_separator(const Vec3& a,
                                                      const Vec3& b,
                                                      const ObstacleBox& box) {
  Eigen::Matrix3Xd seg(3, 2);
  seg.col(0) = a;
  seg.col(1) = b;
  Eigen::Matrix3Xd corners(3, 8);
  for (int k = 0; k < 8; ++k) corners.col(k) = box.corner(k);
  Eigen::Matrix3Xd diff(3, 16);
  int idx = 0;
  for (int i = 0; i < 2; ++i)
    for (int k = 0; k < 8; ++k) diff.col(idx++) = seg.col(i) - corners.col(k);
  const Vec3 gap = min_norm_point(diff);  // p_seg - p_box
  const double d = gap.norm();
  if (d < 1e-9) return std::nullopt;
  const Vec3 n = -gap / d;  // points from the segment toward the box
  double beta = std::numeric_limits<double>::infinity();
  for (int k = 0; k < 8; ++k) beta = std::min(beta, n.dot(box.corner(k)));
  return Halfspace{n, beta};
}

}  // namespace detail

// Grow an obstacle-free convex polytope around the seed segment inside one
// temporal frame: alternate separating-plane placement against occupied
// boxes with inscribed-ellipsoid maximization. Every returned polytope
// excludes all occupied cells near the seed and contains the seed segment.
inline CorridorGrowth generate_corridor(const Sogm& sogm, int frame,
                                        const Vec3& seed_a, const Vec3& seed_b,
                                        const Polytope& map_box,
                                        const CorridorParams& params = {}) {
  CorridorGrowth out;
  auto boxes_raw =
      merged_occupied_boxes(sogm, frame, seed_a, seed_b, params.prune_radius);
  std::vector<detail::ObstacleBox> boxes;
  boxes.reserve(boxes_raw.size());
  for (auto& [lo, hi] : boxes_raw) boxes.push_back({lo, hi});

  const Vec3 seed_mid = 0.5 * (seed_a + seed_b);
  const Vec3 seed_pts[3] = {seed_a, seed_mid, seed_b};
  for (const auto& box : boxes)
    for (const Vec3& s : seed_pts)
      if ((s.array() >= box.lo.array()).all() && (s.array() <= box.hi.array()).all()) {
        out.status = CorridorStatus::InfeasibleSeed;
        return out;
      }

  if (boxes.empty()) {
    out.status = CorridorStatus::Ok;
    out.polytope = map_box;
    const InscribedEllipsoidResult e =
        inscribed_ellipsoid(map_box, Ellipsoid{seed_mid});
    if (e.ok) out.ellipsoid = e.ellipsoid;
    return out;
  }

  // Seed ellipsoid: thin tube along the segment.
  Ellipsoid ell;
  ell.center = seed_mid;
  {
    const Vec3 dir = seed_b - seed_a;
    const double len = dir.norm();
    const double lateral = 0.25 * sogm.resolution();
    if (len > 1e-9) {
      const Vec3 d = dir / len;
      ell.shape = (0.5 * len + lateral) * d * d.transpose() +
                  lateral * (Eigen::Matrix3d::Identity() - d * d.transpose());
    } else {
      ell.shape = lateral * Eigen::Matrix3d::Identity();
    }
  }

  // Local window around the seed: keeps the polytope (and the QP it feeds)
  // to the space the trajectory can actually use and retires far boxes
  // with a single face.
  Polytope base = map_box;
  {
    const Vec3 lo = seed_a.cwiseMin(seed_b) - Vec3::Constant(params.prune_radius);
    const Vec3 hi = seed_a.cwiseMax(seed_b) + Vec3::Constant(params.prune_radius);
    const Polytope window = Polytope::axis_box(lo, hi);
    base.faces.insert(base.faces.end(), window.faces.begin(), window.faces.end());
  }

  Polytope poly;
  for (int iter = 0; iter < std::max(params.max_iters, 1); ++iter) {
    // Plane step: separate every obstacle box from the current ellipsoid,
    // nearest first; a single plane usually retires many boxes.
    poly = base;
    for (auto& box : boxes) {
      box.excluded = false;
      for (const auto& f : base.faces)
        if (detail::face_excludes(f, box)) {
          box.excluded = true;
          break;
        }
    }
    Eigen::Matrix3d M;
    {
      Eigen::LLT<Eigen::Matrix3d> llt(ell.shape * ell.shape);
      const Eigen::Matrix3d L = llt.matrixL();
      const Eigen::Matrix3d Linv = L.inverse();
      M = Linv.transpose() * Linv;
    }
    std::vector<std::pair<double, int>> order(boxes.size());
    for (std::size_t i = 0; i < boxes.size(); ++i) {
      const Vec3 mid = 0.5 * (boxes[i].lo + boxes[i].hi) - ell.center;
      order[i] = {mid.dot(M * mid), static_cast<int>(i)};
    }
    std::sort(order.begin(), order.end());
    for (const auto& [dist, bi] : order) {
      detail::ObstacleBox& box = boxes[bi];
      if (box.excluded) continue;
      // Tangent plane of the scaled ellipsoid at the box's closest point.
      const Vec3 x_star =
          detail::box_closest_point_metric(M, ell.center, box.lo, box.hi);
      Vec3 normal = M * (x_star - ell.center);
      Halfspace face;
      bool have_face = false;
      if (normal.norm() > 1e-12) {
        normal.normalize();
        face = {normal, normal.dot(x_star)};
        bool keeps_seed = true;
        for (const Vec3& s : seed_pts)
          if (face.a.dot(s) > face.b - 1e-12) keeps_seed = false;
        have_face = keeps_seed;
      }
      if (!have_face) {
        // Fall back to the max-margin separator from the seed segment.
        const auto sep = detail::segment_box_separator(seed_a, seed_b, box);
        if (!sep) {
          out.status = CorridorStatus::InfeasibleSeed;
          return out;
        }
        face = *sep;
        have_face = true;
      }
      poly.faces.push_back(face);
      for (auto& other : boxes)
        if (!other.excluded && detail::face_excludes(face, other))
          other.excluded = true;
    }

    // Ellipsoid step; stop at the volume fixpoint (or guard a decrease).
    const InscribedEllipsoidResult grown = inscribed_ellipsoid(poly, ell);
    if (!grown.ok) break;
    const double prev = ell.log_det();
    const double next = grown.ellipsoid.log_det();
    if (next <= prev + std::log1p(params.fixpoint_rel_tol)) {
      if (next > prev) {
        ell = grown.ellipsoid;
        out.log_volume_trace.push_back(next);
      }
      break;
    }
    ell = grown.ellipsoid;
    out.log_volume_trace.push_back(next);
  }

  out.status = CorridorStatus::Ok;
  out.polytope = poly;
  out.ellipsoid = ell;
  return out;
}

// ---- shrink and connectivity ------------------------------------------

enum class ShrinkStatus { Ok, Empty };

struct ShrinkResult {
  ShrinkStatus status = ShrinkStatus::Empty;
  Polytope polytope;
};

// Offset every face inward by the robot radius. The result is the erosion
// of the region: any point inside keeps a clearance of d to the original
// complement.
inline ShrinkResult shrink(const Polytope& poly, double d) {
  ShrinkResult out;
  out.polytope = poly;
  for (auto& f : out.polytope.faces) f.b -= d;
  const ChebyshevResult cheb = chebyshev_ball(out.polytope);
  if (!cheb.bounded || cheb.radius <= 0.0) {
    out.status = ShrinkStatus::Empty;
    return out;
  }
  out.status = ShrinkStatus::Ok;
  return out;
}

struct ConnectivityReport {
  bool ok = false;
  std::vector<int> infeasible_corridors;   // empty interior
  std::vector<int> broken_links;           // corridor j and j+1 disjoint
};

// LP check that each corridor is nonempty and consecutive corridors
// intersect (closed-set semantics: touching at one point passes).
inline ConnectivityReport check_sequence(
    const std::vector<SpatioTemporalCorridor>& corridors) {
  ConnectivityReport report;
  report.ok = true;
  for (std::size_t j = 0; j < corridors.size(); ++j) {
    const ChebyshevResult own = chebyshev_ball(corridors[j].polytope);
    if (!own.bounded || own.radius < -1e-9) {
      report.infeasible_corridors.push_back(static_cast<int>(j));
      report.ok = false;
    }
    if (j + 1 < corridors.size()) {
      const ChebyshevResult link =
          intersection_ball(corridors[j].polytope, corridors[j + 1].polytope);
      if (!link.bounded || link.radius < -1e-9) {
        report.broken_links.push_back(static_cast<int>(j));
        report.ok = false;
      }
    }
  }
  return report;
}

}  // namespace stplan

#endif  // STPLAN_CORRIDOR_HPP
