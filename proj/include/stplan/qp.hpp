#ifndef STPLAN_QP_HPP
#define STPLAN_QP_HPP

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace stplan {

constexpr double kInf = std::numeric_limits<double>::infinity();

// min 1/2 x'Px + q'x  s.t.  l <= Ax <= u. Equality rows use l == u.
// P is stored with both triangles populated.
struct QpProblem {
  Eigen::SparseMatrix<double> P;
  Eigen::VectorXd q;
  Eigen::SparseMatrix<double> A;
  Eigen::VectorXd l, u;

  int vars() const { return static_cast<int>(q.size()); }
  int constraints() const { return static_cast<int>(l.size()); }

  double objective(const Eigen::VectorXd& x) const {
    return 0.5 * x.dot(P.selfadjointView<Eigen::Upper>() * x) + q.dot(x);
  }
};

enum class QpStatus {
  Solved,
  MaxIterations,
  PrimalInfeasible,
  DualInfeasible,
};

struct QpSolution {
  QpStatus status = QpStatus::MaxIterations;
  Eigen::VectorXd x, y;
  double objective = 0.0;
  double primal_residual = kInf;
  double dual_residual = kInf;
  int iterations = 0;
  bool polished = false;
};

struct AdmmSettings {
  double eps_abs = 1e-6;
  double eps_rel = 1e-6;
  double eps_infeasible = 1e-8;
  int max_iter = 4000;
  int check_interval = 25;
  double alpha = 1.6;
  double sigma = 1e-6;
  double rho = 0.1;
  double rho_eq_scale = 1e3;  // stiffer rho on equality rows
  bool adaptive_rho = true;
  bool scaling = true;
  int scaling_iters = 10;
  bool polish = true;
  double polish_delta = 1e-7;
};

// Operator-splitting QP solver in the OSQP mold: ADMM on the equivalent
// problem with slack z in [l, u], a quasi-definite KKT factorization reused
// across iterations, Ruiz equilibration, and an optional active-set polish.
class AdmmQpSolver {
 public:
  explicit AdmmQpSolver(AdmmSettings settings = {}) : cfg_(settings) {}

  QpSolution solve(const QpProblem& problem) {
    const int n = problem.vars();
    const int m = problem.constraints();
    QpSolution sol;
    sol.x = Eigen::VectorXd::Zero(n);
    sol.y = Eigen::VectorXd::Zero(m);
    if (n == 0) {
      sol.status = QpStatus::Solved;
      return sol;
    }

    // ---- scaling (Ruiz equilibration on the stacked KKT matrix) ----
    Eigen::VectorXd d = Eigen::VectorXd::Ones(n);
    Eigen::VectorXd e = Eigen::VectorXd::Ones(m);
    double cost_scale = 1.0;
    Eigen::SparseMatrix<double> P = problem.P;
    Eigen::SparseMatrix<double> A = problem.A;
    Eigen::VectorXd q = problem.q;
    Eigen::VectorXd l = problem.l;
    Eigen::VectorXd u = problem.u;

    if (cfg_.scaling) {
      for (int iter = 0; iter < cfg_.scaling_iters; ++iter) {
        Eigen::VectorXd col_norm_x = Eigen::VectorXd::Zero(n);
        Eigen::VectorXd col_norm_y = Eigen::VectorXd::Zero(m);
        for (int k = 0; k < P.outerSize(); ++k)
          for (Eigen::SparseMatrix<double>::InnerIterator it(P, k); it; ++it) {
            col_norm_x(it.col()) = std::max(col_norm_x(it.col()), std::abs(it.value()));
            col_norm_x(it.row()) = std::max(col_norm_x(it.row()), std::abs(it.value()));
          }
        for (int k = 0; k < A.outerSize(); ++k)
          for (Eigen::SparseMatrix<double>::InnerIterator it(A, k); it; ++it) {
            col_norm_x(it.col()) = std::max(col_norm_x(it.col()), std::abs(it.value()));
            col_norm_y(it.row()) = std::max(col_norm_y(it.row()), std::abs(it.value()));
          }
        Eigen::VectorXd dx(n), dy(m);
        for (int i = 0; i < n; ++i)
          dx(i) = 1.0 / std::sqrt(std::max(col_norm_x(i), 1e-8));
        for (int i = 0; i < m; ++i)
          dy(i) = 1.0 / std::sqrt(std::max(col_norm_y(i), 1e-8));
        P = dx.asDiagonal() * P * dx.asDiagonal();
        A = dy.asDiagonal() * A * dx.asDiagonal();
        q = dx.cwiseProduct(q);
        for (int i = 0; i < m; ++i) {
          if (std::isfinite(l(i))) l(i) *= dy(i);
          if (std::isfinite(u(i))) u(i) *= dy(i);
        }
        d = d.cwiseProduct(dx);
        e = e.cwiseProduct(dy);
        // Cost normalization.
        double p_col_mean = 0.0;
        for (int i = 0; i < n; ++i) p_col_mean += col_norm_x(i) * dx(i) * dx(i);
        p_col_mean /= n;
        const double gamma =
            1.0 / std::max({p_col_mean, q.lpNorm<Eigen::Infinity>(), 1e-8});
        if (std::isfinite(gamma) && gamma > 0 && std::abs(gamma - 1.0) > 1e-12) {
          P *= gamma;
          q *= gamma;
          cost_scale *= gamma;
        }
      }
    }

    // ---- per-row rho and KKT factorization ----
    Eigen::VectorXd rho_vec(m);
    for (int i = 0; i < m; ++i) {
      const bool eq = std::isfinite(l(i)) && std::isfinite(u(i)) &&
                      u(i) - l(i) < 1e-12;
      rho_vec(i) = eq ? cfg_.rho * cfg_.rho_eq_scale : cfg_.rho;
    }
    double rho_factor = 1.0;
    factorize(P, A, rho_vec, rho_factor);

    Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
    Eigen::VectorXd z = Eigen::VectorXd::Zero(m);
    Eigen::VectorXd y = Eigen::VectorXd::Zero(m);
    for (int i = 0; i < m; ++i)
      z(i) = std::clamp(0.0, std::isfinite(l(i)) ? l(i) : -1e30,
                        std::isfinite(u(i)) ? u(i) : 1e30);

    Eigen::VectorXd rhs(n + m), kkt_sol(n + m);
    Eigen::VectorXd x_prev, y_prev, ax(m), px(n), aty(n);

    auto unscale_x = [&](const Eigen::VectorXd& xs) {
      return Eigen::VectorXd(d.cwiseProduct(xs));
    };
    auto unscale_y = [&](const Eigen::VectorXd& ys) {
      return Eigen::VectorXd(e.cwiseProduct(ys) / cost_scale);
    };

    int iter = 0;
    for (; iter < cfg_.max_iter; ++iter) {
      x_prev = x;
      y_prev = y;
      // KKT solve for (x~, nu).
      rhs.head(n) = cfg_.sigma * x - q;
      rhs.tail(m) = z - y.cwiseQuotient(rho_factor * rho_vec);
      kkt_sol = ldlt_.solve(rhs);
      const auto x_tilde = kkt_sol.head(n);
      const auto nu = kkt_sol.tail(m);
      Eigen::VectorXd z_tilde =
          z + (nu - y).cwiseQuotient(rho_factor * rho_vec);

      x = cfg_.alpha * x_tilde + (1.0 - cfg_.alpha) * x;
      Eigen::VectorXd z_step = cfg_.alpha * z_tilde + (1.0 - cfg_.alpha) * z;
      Eigen::VectorXd z_unproj =
          z_step + y.cwiseQuotient(rho_factor * rho_vec);
      for (int i = 0; i < m; ++i) {
        double v = z_unproj(i);
        if (std::isfinite(l(i))) v = std::max(v, l(i));
        if (std::isfinite(u(i))) v = std::min(v, u(i));
        z(i) = v;
      }
      y = y_prev + (rho_factor * rho_vec).cwiseProduct(z_step - z);

      if ((iter + 1) % cfg_.check_interval != 0 && iter + 1 != cfg_.max_iter)
        continue;

      // Residuals on the scaled problem, with unscaled thresholds.
      ax = A * x;
      px = P.selfadjointView<Eigen::Upper>() * x;
      aty = A.transpose() * y;
      const Eigen::VectorXd rp_vec = e.cwiseInverse().cwiseProduct(ax - z);
      const Eigen::VectorXd rd_vec =
          d.cwiseInverse().cwiseProduct(px + q + aty) / cost_scale;
      const double rp = m > 0 ? rp_vec.lpNorm<Eigen::Infinity>() : 0.0;
      const double rd = rd_vec.lpNorm<Eigen::Infinity>();
      const double ax_n =
          m > 0 ? e.cwiseInverse().cwiseProduct(ax).lpNorm<Eigen::Infinity>() : 0.0;
      const double z_n =
          m > 0 ? e.cwiseInverse().cwiseProduct(z).lpNorm<Eigen::Infinity>() : 0.0;
      const double px_n =
          d.cwiseInverse().cwiseProduct(px).lpNorm<Eigen::Infinity>() / cost_scale;
      const double aty_n =
          d.cwiseInverse().cwiseProduct(aty).lpNorm<Eigen::Infinity>() / cost_scale;
      const double q_n =
          d.cwiseInverse().cwiseProduct(q).lpNorm<Eigen::Infinity>() / cost_scale;
      const double eps_p = cfg_.eps_abs + cfg_.eps_rel * std::max(ax_n, z_n);
      const double eps_d =
          cfg_.eps_abs + cfg_.eps_rel * std::max({px_n, aty_n, q_n});

      if (rp <= eps_p && rd <= eps_d) {
        sol.status = QpStatus::Solved;
        sol.iterations = iter + 1;
        sol.x = unscale_x(x);
        sol.y = unscale_y(y);
        sol.primal_residual = rp;
        sol.dual_residual = rd;
        break;
      }

      // Infeasibility certificates.
      const Eigen::VectorXd dy = y - y_prev;
      const double dy_n = dy.lpNorm<Eigen::Infinity>();
      if (m > 0 && dy_n > 1e-12) {
        const double aty_dy =
            (A.transpose() * dy).lpNorm<Eigen::Infinity>();
        double support = 0.0;
        bool certificate = true;
        for (int i = 0; i < m; ++i) {
          if (dy(i) > 0) {
            if (!std::isfinite(u(i))) certificate = false;
            else support += u(i) * dy(i);
          } else if (dy(i) < 0) {
            if (!std::isfinite(l(i))) certificate = false;
            else support += l(i) * dy(i);
          }
        }
        if (certificate && aty_dy <= cfg_.eps_infeasible * dy_n &&
            support <= -cfg_.eps_infeasible * dy_n) {
          sol.status = QpStatus::PrimalInfeasible;
          sol.iterations = iter + 1;
          sol.x = unscale_x(x);
          sol.y = unscale_y(y);
          return sol;
        }
      }
      const Eigen::VectorXd dx = x - x_prev;
      const double dx_n = dx.lpNorm<Eigen::Infinity>();
      if (dx_n > 1e-12) {
        const double pdx = (P.selfadjointView<Eigen::Upper>() * dx)
                               .lpNorm<Eigen::Infinity>();
        const double qdx = q.dot(dx);
        bool cone_ok = true;
        const Eigen::VectorXd adx = A * dx;
        for (int i = 0; i < m; ++i) {
          if (std::isfinite(u(i)) && adx(i) > cfg_.eps_infeasible * dx_n)
            cone_ok = false;
          if (std::isfinite(l(i)) && adx(i) < -cfg_.eps_infeasible * dx_n)
            cone_ok = false;
        }
        if (cone_ok && pdx <= cfg_.eps_infeasible * dx_n &&
            qdx <= -cfg_.eps_infeasible * dx_n) {
          sol.status = QpStatus::DualInfeasible;
          sol.iterations = iter + 1;
          sol.x = unscale_x(x);
          sol.y = unscale_y(y);
          return sol;
        }
      }

      // Adaptive rho.
      if (cfg_.adaptive_rho && rp > 0 && rd > 0) {
        const double num = rp / std::max(std::max(ax_n, z_n), 1e-12);
        const double den = rd / std::max(std::max({px_n, aty_n, q_n}), 1e-12);
        const double ratio = std::sqrt(num / std::max(den, 1e-16));
        if (ratio > 5.0 || ratio < 0.2) {
          rho_factor = std::clamp(rho_factor * ratio, 1e-6, 1e6);
          factorize(P, A, rho_vec, rho_factor);
        }
      }
    }

    if (sol.status != QpStatus::Solved) {
      sol.status = QpStatus::MaxIterations;
      sol.iterations = iter;
      sol.x = unscale_x(x);
      sol.y = unscale_y(y);
      ax = A * x;
      px = P.selfadjointView<Eigen::Upper>() * x;
      aty = A.transpose() * y;
      sol.primal_residual =
          m > 0 ? e.cwiseInverse().cwiseProduct(ax - z).lpNorm<Eigen::Infinity>()
                : 0.0;
      sol.dual_residual = d.cwiseInverse()
                              .cwiseProduct(px + q + aty)
                              .lpNorm<Eigen::Infinity>() /
                          cost_scale;
    }

    if (sol.status == QpStatus::Solved && cfg_.polish)
      polish(problem, sol);
    sol.objective = problem.objective(sol.x);
    return sol;
  }

 private:
  void factorize(const Eigen::SparseMatrix<double>& P,
                 const Eigen::SparseMatrix<double>& A,
                 const Eigen::VectorXd& rho_vec, double rho_factor) {
    const int n = static_cast<int>(P.rows());
    const int m = static_cast<int>(A.rows());
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(P.nonZeros() + A.nonZeros() + n + m);
    for (int k = 0; k < P.outerSize(); ++k)
      for (Eigen::SparseMatrix<double>::InnerIterator it(P, k); it; ++it)
        if (it.row() <= it.col()) trips.emplace_back(it.row(), it.col(), it.value());
    for (int i = 0; i < n; ++i) trips.emplace_back(i, i, cfg_.sigma);
    for (int k = 0; k < A.outerSize(); ++k)
      for (Eigen::SparseMatrix<double>::InnerIterator it(A, k); it; ++it)
        trips.emplace_back(it.col(), n + it.row(), it.value());
    for (int i = 0; i < m; ++i)
      trips.emplace_back(n + i, n + i, -1.0 / (rho_factor * rho_vec(i)));
    Eigen::SparseMatrix<double> kkt(n + m, n + m);
    kkt.setFromTriplets(trips.begin(), trips.end());
    ldlt_.compute(kkt.selfadjointView<Eigen::Upper>());
  }

  // Solve the equality-constrained QP on the active constraints and accept
  // the result when it improves the KKT residuals.
  void polish(const QpProblem& problem, QpSolution& sol) {
    const int n = problem.vars();
    const int m = problem.constraints();
    std::vector<int> active;
    std::vector<double> bound;
    const Eigen::VectorXd ax = problem.A * sol.x;
    for (int i = 0; i < m; ++i) {
      const bool eq = std::isfinite(problem.l(i)) && std::isfinite(problem.u(i)) &&
                      problem.u(i) - problem.l(i) < 1e-12;
      if (eq) {
        active.push_back(i);
        bound.push_back(problem.u(i));
      } else if (sol.y(i) < -1e-10 && std::isfinite(problem.l(i))) {
        active.push_back(i);
        bound.push_back(problem.l(i));
      } else if (sol.y(i) > 1e-10 && std::isfinite(problem.u(i))) {
        active.push_back(i);
        bound.push_back(problem.u(i));
      }
    }
    const int k = static_cast<int>(active.size());
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(problem.P.nonZeros() + problem.A.nonZeros() + n + k);
    for (int c = 0; c < problem.P.outerSize(); ++c)
      for (Eigen::SparseMatrix<double>::InnerIterator it(problem.P, c); it; ++it)
        if (it.row() <= it.col()) trips.emplace_back(it.row(), it.col(), it.value());
    for (int i = 0; i < n; ++i) trips.emplace_back(i, i, cfg_.polish_delta);
    std::vector<int> row_of(m, -1);
    for (int j = 0; j < k; ++j) row_of[active[j]] = j;
    for (int c = 0; c < problem.A.outerSize(); ++c)
      for (Eigen::SparseMatrix<double>::InnerIterator it(problem.A, c); it; ++it) {
        const int j = row_of[it.row()];
        if (j >= 0) trips.emplace_back(it.col(), n + j, it.value());
      }
    for (int j = 0; j < k; ++j)
      trips.emplace_back(n + j, n + j, -cfg_.polish_delta);
    Eigen::SparseMatrix<double> kkt(n + k, n + k);
    kkt.setFromTriplets(trips.begin(), trips.end());
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt;
    ldlt.compute(kkt.selfadjointView<Eigen::Upper>());
    if (ldlt.info() != Eigen::Success) return;

    Eigen::VectorXd rhs(n + k);
    rhs.head(n) = -problem.q;
    for (int j = 0; j < k; ++j) rhs(n + j) = bound[j];
    Eigen::VectorXd xy = ldlt.solve(rhs);
    // Iterative refinement against the unregularized KKT system, using the
    // regularized factorization as the preconditioner.
    for (int refine = 0; refine < 3; ++refine) {
      Eigen::VectorXd err = rhs - kkt.selfadjointView<Eigen::Upper>() * xy;
      err.head(n) += cfg_.polish_delta * xy.head(n);
      err.tail(k) -= cfg_.polish_delta * xy.tail(k);
      xy += ldlt.solve(err);
    }
    Eigen::VectorXd x_new = xy.head(n);
    Eigen::VectorXd y_new = Eigen::VectorXd::Zero(m);
    for (int j = 0; j < k; ++j) y_new(active[j]) = xy(n + j);

    // Accept only if feasibility and stationarity both improve.
    const Eigen::VectorXd ax_new = problem.A * x_new;
    double rp = 0.0;
    for (int i = 0; i < m; ++i) {
      if (std::isfinite(problem.l(i))) rp = std::max(rp, problem.l(i) - ax_new(i));
      if (std::isfinite(problem.u(i))) rp = std::max(rp, ax_new(i) - problem.u(i));
    }
    const double rd = (problem.P.selfadjointView<Eigen::Upper>() * x_new +
                       problem.q + problem.A.transpose() * y_new)
                          .lpNorm<Eigen::Infinity>();
    if (rp <= std::max(sol.primal_residual, cfg_.eps_abs) + 1e-12 &&
        rd <= std::max(sol.dual_residual, cfg_.eps_abs) + 1e-12) {
      sol.x = x_new;
      sol.y = y_new;
      sol.primal_residual = rp;
      sol.dual_residual = rd;
      sol.polished = true;
    }
  }

  AdmmSettings cfg_;
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt_;
};

inline QpSolution solve_qp(const QpProblem& problem,
                           const AdmmSettings& settings = {}) {
  AdmmQpSolver solver(settings);
  return solver.solve(problem);
}

}  // namespace stplan

#endif  // STPLAN_QP_HPP
