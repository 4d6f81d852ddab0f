#ifndef STPLAN_TRAJ_OPT_HPP
#define STPLAN_TRAJ_OPT_HPP

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <stdexcept>
#include <vector>

#include "stplan/bezier.hpp"
#include "stplan/corridor.hpp"
#include "stplan/qp.hpp"

namespace stplan {

// Position/velocity/acceleration boundary condition.
struct BoundaryState {
  Vec3 p = Vec3::Zero();
  Vec3 v = Vec3::Zero();
  Vec3 a = Vec3::Zero();
};

struct DerivativeLimits {
  double v_max = 2.0;
  double a_max = 6.0;
};

// integral_0^1 b_m_i(s) b_m_j(s) ds
inline double bernstein_product_integral(int m, int i, int j) {
  return binomial(m, i) * binomial(m, j) /
         ((2.0 * m + 1.0) * binomial(2 * m, i + j));
}

// Exact Gram matrix of the squared third derivative of a degree-n piece:
// cost_axis = c' J c over the piece's control points.
inline Eigen::MatrixXd jerk_gram(int degree, double duration) {
  const int n = degree;
  if (n < 3) return Eigen::MatrixXd::Zero(n + 1, n + 1);
  const int m = n - 3;
  const double k = n * (n - 1.0) * (n - 2.0) / (duration * duration * duration);
  Eigen::MatrixXd D = Eigen::MatrixXd::Zero(m + 1, n + 1);
  for (int i = 0; i <= m; ++i) {
    D(i, i) = -1.0;
    D(i, i + 1) = 3.0;
    D(i, i + 2) = -3.0;
    D(i, i + 3) = 1.0;
  }
  Eigen::MatrixXd B(m + 1, m + 1);
  for (int i = 0; i <= m; ++i)
    for (int j = 0; j <= m; ++j) B(i, j) = bernstein_product_integral(m, i, j);
  return duration * k * k * D.transpose() * B * D;
}

// Linear map of the order-d endpoint derivative onto control points:
// returns the (coefficient, control point index) pairs for t = 0 or t = T.
inline std::vector<std::pair<double, int>> endpoint_derivative(int degree,
                                                               double duration,
                                                               int order,
                                                               bool at_end) {
  std::vector<std::pair<double, int>> terms;
  double scale = 1.0;
  for (int d = 0; d < order; ++d) scale *= (degree - d) / duration;
  // Finite-difference pattern with binomial signs on the first/last points.
  for (int k = 0; k <= order; ++k) {
    const double coeff = binomial(order, k) * ((order - k) % 2 == 0 ? 1.0 : -1.0);
    const int idx = at_end ? degree - order + k : k;
    terms.push_back({scale * coeff, idx});
  }
  return terms;
}

struct TrajOptParams {
  int degree = 5;
  DerivativeLimits limits;
  AdmmSettings qp;
  // Tiny relaxation of corridor rows; keeps boundary-tight seeds feasible.
  double corridor_relax = 1e-7;
};

// Build the corridor-constrained minimum-jerk QP over stacked control
// points. Piece j lives in corridor j; every control point of the piece
// satisfies that corridor's halfspaces, hodograph control points bound the
// velocity/acceleration per axis, and boundary plus C2 knot continuity are
// equality rows.
inline QpProblem assemble_qp(const std::vector<SpatioTemporalCorridor>& corridors,
                             const BoundaryState& start,
                             const BoundaryState& goal,
                             const TrajOptParams& params = {}) {
  const int pieces = static_cast<int>(corridors.size());
  if (pieces == 0) throw std::invalid_argument("no corridors to optimize in");
  const int n = params.degree;
  if (n < 3) throw std::invalid_argument("degree must be at least 3");
  const int per_piece = 3 * (n + 1);
  const int nvar = pieces * per_piece;
  auto var = [&](int piece, int cp, int axis) {
    return piece * per_piece + 3 * cp + axis;
  };

  QpProblem qp;
  qp.q = Eigen::VectorXd::Zero(nvar);

  std::vector<Eigen::Triplet<double>> p_trips;
  for (int j = 0; j < pieces; ++j) {
    const double tau = corridors[j].window_end - corridors[j].window_start;
    if (tau <= 0.0) throw std::invalid_argument("corridor window must be positive");
    const Eigen::MatrixXd J = 2.0 * jerk_gram(n, tau);  // objective uses 1/2 x'Px
    for (int i = 0; i <= n; ++i)
      for (int k = 0; k <= n; ++k) {
        if (J(i, k) == 0.0) continue;
        for (int axis = 0; axis < 3; ++axis)
          p_trips.emplace_back(var(j, i, axis), var(j, k, axis), J(i, k));
      }
  }
  qp.P.resize(nvar, nvar);
  qp.P.setFromTriplets(p_trips.begin(), p_trips.end());

  std::vector<Eigen::Triplet<double>> a_trips;
  std::vector<double> lo, hi;
  int row = 0;
  auto add_equality = [&](const std::vector<std::pair<double, int>>& terms,
                          double value) {
    for (const auto& [coeff, idx] : terms) a_trips.emplace_back(row, idx, coeff);
    lo.push_back(value);
    hi.push_back(value);
    ++row;
  };
  auto add_range = [&](const std::vector<std::pair<double, int>>& terms,
                       double low, double high) {
    for (const auto& [coeff, idx] : terms) a_trips.emplace_back(row, idx, coeff);
    lo.push_back(low);
    hi.push_back(high);
    ++row;
  };

  // Boundary conditions.
  const double tau0 = corridors.front().window_end - corridors.front().window_start;
  const double tauT = corridors.back().window_end - corridors.back().window_start;
  for (int order = 0; order <= 2; ++order) {
    const auto head = endpoint_derivative(n, tau0, order, false);
    const auto tail = endpoint_derivative(n, tauT, order, true);
    const Vec3 sv = order == 0 ? start.p : order == 1 ? start.v : start.a;
    const Vec3 gv = order == 0 ? goal.p : order == 1 ? goal.v : goal.a;
    for (int axis = 0; axis < 3; ++axis) {
      std::vector<std::pair<double, int>> terms;
      for (const auto& [c, cp] : head) terms.push_back({c, var(0, cp, axis)});
      add_equality(terms, sv[axis]);
      terms.clear();
      for (const auto& [c, cp] : tail)
        terms.push_back({c, var(pieces - 1, cp, axis)});
      add_equality(terms, gv[axis]);
    }
  }

  // C2 continuity at interior knots.
  for (int j = 0; j + 1 < pieces; ++j) {
    const double ta = corridors[j].window_end - corridors[j].window_start;
    const double tb = corridors[j + 1].window_end - corridors[j + 1].window_start;
    for (int order = 0; order <= 2; ++order) {
      const auto left = endpoint_derivative(n, ta, order, true);
      const auto right = endpoint_derivative(n, tb, order, false);
      for (int axis = 0; axis < 3; ++axis) {
        std::vector<std::pair<double, int>> terms;
        for (const auto& [c, cp] : left) terms.push_back({c, var(j, cp, axis)});
        for (const auto& [c, cp] : right)
          terms.push_back({-c, var(j + 1, cp, axis)});
        add_equality(terms, 0.0);
      }
    }
  }

  // Corridor containment of every control point (convex hull property
  // makes this sufficient for the whole curve).
  for (int j = 0; j < pieces; ++j) {
    for (const auto& face : corridors[j].polytope.faces) {
      for (int i = 0; i <= n; ++i) {
        std::vector<std::pair<double, int>> terms;
        for (int axis = 0; axis < 3; ++axis)
          terms.push_back({face.a[axis], var(j, i, axis)});
        add_range(terms, -kInf, face.b + params.corridor_relax);
      }
    }
  }

  // Per-axis derivative bounds on hodograph control points.
  for (int j = 0; j < pieces; ++j) {
    const double tau = corridors[j].window_end - corridors[j].window_start;
    const double kv = n / tau;
    for (int i = 0; i < n; ++i)
      for (int axis = 0; axis < 3; ++axis)
        add_range({{kv, var(j, i + 1, axis)}, {-kv, var(j, i, axis)}},
                  -params.limits.v_max, params.limits.v_max);
    const double ka = n * (n - 1.0) / (tau * tau);
    for (int i = 0; i + 1 < n; ++i)
      for (int axis = 0; axis < 3; ++axis)
        add_range({{ka, var(j, i + 2, axis)},
                   {-2.0 * ka, var(j, i + 1, axis)},
                   {ka, var(j, i, axis)}},
                  -params.limits.a_max, params.limits.a_max);
  }

  qp.A.resize(row, nvar);
  qp.A.setFromTriplets(a_trips.begin(), a_trips.end());
  qp.l = Eigen::Map<Eigen::VectorXd>(lo.data(), row);
  qp.u = Eigen::Map<Eigen::VectorXd>(hi.data(), row);
  return qp;
}

enum class TrajOptStatus { Ok, SolverFailed };

struct TrajOptResult {
  TrajOptStatus status = TrajOptStatus::SolverFailed;
  BezierSpline spline;
  double objective = 0.0;
  QpStatus qp_status = QpStatus::MaxIterations;
  int qp_iterations = 0;
};

// Corridor-constrained minimum-jerk optimization; piece durations are the
// corridor windows fixed by the search.
inline TrajOptResult optimize_trajectory(
    const std::vector<SpatioTemporalCorridor>& corridors,
    const BoundaryState& start, const BoundaryState& goal,
    const TrajOptParams& params = {}) {
  TrajOptResult out;
  const QpProblem qp = assemble_qp(corridors, start, goal, params);
  const QpSolution sol = solve_qp(qp, params.qp);
  out.qp_status = sol.status;
  out.qp_iterations = sol.iterations;
  if (sol.status != QpStatus::Solved) return out;

  const int n = params.degree;
  out.spline.t_start = corridors.front().window_start;
  out.spline.pieces.resize(corridors.size());
  for (std::size_t j = 0; j < corridors.size(); ++j) {
    BezierPiece& piece = out.spline.pieces[j];
    piece.duration = corridors[j].window_end - corridors[j].window_start;
    piece.control_points.resize(3, n + 1);
    for (int i = 0; i <= n; ++i)
      for (int axis = 0; axis < 3; ++axis)
        piece.control_points(axis, i) =
            sol.x(j * 3 * (n + 1) + 3 * i + axis);
  }
  out.objective = sol.objective;
  out.status = TrajOptStatus::Ok;
  return out;
}

}  // namespace stplan

#endif  // STPLAN_TRAJ_OPT_HPP
