#ifndef STPLAN_QP_ACTIVE_SET_HPP
#define STPLAN_QP_ACTIVE_SET_HPP

#include <Eigen/Dense>

#include <cmath>
#include <vector>

#include "stplan/lp.hpp"
#include "stplan/qp.hpp"

namespace stplan {

// Dense null-space primal active-set solver for the same problem form as
// the ADMM path. Meant for small instances (reference results in tests,
// tiny QPs); everything is dense and unapologetically O(n^3).
class ActiveSetQpSolver {
 public:
  QpSolution solve(const QpProblem& problem) {
    QpSolution sol;
    const int n = problem.vars();
    Eigen::MatrixXd P = Eigen::MatrixXd(problem.P);  // stored fully symmetric
    const Eigen::VectorXd& q = problem.q;
    const Eigen::MatrixXd A = Eigen::MatrixXd(problem.A);
    const int m = static_cast<int>(A.rows());

    // Split rows into equalities and one-sided inequalities g.x <= h.
    Eigen::MatrixXd E(m, n), G(2 * m, n);
    Eigen::VectorXd eb(m), gh(2 * m);
    std::vector<int> g_row;  // original row per inequality (for duals)
    std::vector<double> g_sign;
    int ne = 0, ng = 0;
    for (int i = 0; i < m; ++i) {
      const bool eq = std::isfinite(problem.l(i)) && std::isfinite(problem.u(i)) &&
                      problem.u(i) - problem.l(i) < 1e-12;
      if (eq) {
        E.row(ne) = A.row(i);
        eb(ne++) = problem.u(i);
      } else {
        if (std::isfinite(problem.u(i))) {
          G.row(ng) = A.row(i);
          gh(ng) = problem.u(i);
          g_row.push_back(i);
          g_sign.push_back(1.0);
          ++ng;
        }
        if (std::isfinite(problem.l(i))) {
          G.row(ng) = -A.row(i);
          gh(ng) = -problem.l(i);
          g_row.push_back(i);
          g_sign.push_back(-1.0);
          ++ng;
        }
      }
    }
    E.conservativeResize(ne, n);
    eb.conservativeResize(ne);
    G.conservativeResize(ng, n);
    gh.conservativeResize(ng);

    // Particular solution of the equalities and a null-space basis.
    Eigen::VectorXd x0 = Eigen::VectorXd::Zero(n);
    Eigen::MatrixXd Z = Eigen::MatrixXd::Identity(n, n);
    if (ne > 0) {
      Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(E);
      x0 = cod.solve(eb);
      if ((E * x0 - eb).lpNorm<Eigen::Infinity>() > 1e-7) {
        sol.status = QpStatus::PrimalInfeasible;
        return sol;
      }
      const int rank = static_cast<int>(cod.rank());
      if (rank >= n) {
        // Fully determined by equalities.
        sol.x = x0;
        return check_inequalities(problem, G, gh, sol);
      }
      // Kernel basis from the full QR of E'.
      Eigen::HouseholderQR<Eigen::MatrixXd> qr(E.transpose());
      Eigen::MatrixXd Q = qr.householderQ();
      Z = Q.rightCols(n - rank);
    }
    const int k = static_cast<int>(Z.cols());

    // Phase 1 LP: minimize the worst violation over y.
    Eigen::VectorXd y = Eigen::VectorXd::Zero(k);
    if (ng > 0) {
      const Eigen::MatrixXd GZ = G * Z;
      const Eigen::VectorXd slack0 = gh - G * x0;
      Eigen::MatrixXd lpA(ng, k + 1);
      lpA.leftCols(k) = GZ;
      lpA.col(k).setConstant(-1.0);
      Eigen::VectorXd lpc = Eigen::VectorXd::Zero(k + 1);
      lpc(k) = -1.0;  // maximize -t  ==  minimize t
      const LpResult lp = lp_maximize(lpc, lpA, slack0);
      if (lp.status != LpStatus::Optimal || -lp.objective > 1e-7) {
        sol.status = QpStatus::PrimalInfeasible;
        return sol;
      }
      y = lp.x.head(k);
    }

    // Reduced problem: 1/2 y'Hy + g'y with H = Z'PZ (regularized).
    Eigen::MatrixXd H = Z.transpose() * P * Z;
    H.diagonal().array() += 1e-11 * std::max(1.0, H.norm());
    const Eigen::VectorXd g0 = Z.transpose() * (P * x0 + q);
    const Eigen::MatrixXd GZ = G * Z;
    const Eigen::VectorXd hb = gh - G * x0;

    std::vector<int> active;
    std::vector<char> is_active(ng, 0);
    for (int i = 0; i < ng; ++i)
      if (GZ.row(i).dot(y) >= hb(i) - 1e-9) {
        active.push_back(i);
        is_active[i] = 1;
      }
    drop_dependent(GZ, active, is_active);

    Eigen::VectorXd lambda;
    for (int iter = 0; iter < 200 + 10 * ng; ++iter) {
      // Solve the equality-constrained step on the working set.
      const int na = static_cast<int>(active.size());
      Eigen::MatrixXd kkt(k + na, k + na);
      kkt.setZero();
      kkt.topLeftCorner(k, k) = H;
      for (int j = 0; j < na; ++j) {
        kkt.block(k + j, 0, 1, k) = GZ.row(active[j]);
        kkt.block(0, k + j, k, 1) = GZ.row(active[j]).transpose();
      }
      Eigen::VectorXd rhs(k + na);
      rhs.head(k) = -(H * y + g0);
      for (int j = 0; j < na; ++j)
        rhs(k + j) = hb(active[j]) - GZ.row(active[j]).dot(y);
      const Eigen::VectorXd step =
          kkt.completeOrthogonalDecomposition().solve(rhs);
      const Eigen::VectorXd dy = step.head(k);
      lambda = step.tail(na);

      if (dy.lpNorm<Eigen::Infinity>() < 1e-10) {
        // Check multipliers; drop the most negative if any.
        int worst = -1;
        double worst_val = -1e-9;
        for (int j = 0; j < na; ++j)
          if (lambda(j) < worst_val) {
            worst_val = lambda(j);
            worst = j;
          }
        if (worst < 0) break;  // optimal
        is_active[active[worst]] = 0;
        active.erase(active.begin() + worst);
        continue;
      }
      // Step length to the nearest blocking constraint.
      double alpha = 1.0;
      int blocking = -1;
      for (int i = 0; i < ng; ++i) {
        if (is_active[i]) continue;
        const double gd = GZ.row(i).dot(dy);
        if (gd > 1e-12) {
          const double room = hb(i) - GZ.row(i).dot(y);
          const double a = room / gd;
          if (a < alpha - 1e-12) {
            alpha = std::max(a, 0.0);
            blocking = i;
          }
        }
      }
      y += alpha * dy;
      if (blocking >= 0) {
        active.push_back(blocking);
        is_active[blocking] = 1;
        drop_dependent(GZ, active, is_active);
      }
    }

    sol.x = x0 + Z * y;
    sol.status = QpStatus::Solved;
    sol.y = Eigen::VectorXd::Zero(m);
    // Recover duals on the original rows from the working set.
    for (std::size_t j = 0; j < active.size(); ++j) {
      if (j < static_cast<std::size_t>(lambda.size())) {
        const int row = g_row[active[j]];
        sol.y(row) += g_sign[active[j]] * std::max(lambda(j), 0.0);
      }
    }
    sol.objective = problem.objective(sol.x);
    const Eigen::VectorXd ax = A * sol.x;
    sol.primal_residual = 0.0;
    for (int i = 0; i < m; ++i) {
      if (std::isfinite(problem.l(i)))
        sol.primal_residual = std::max(sol.primal_residual, problem.l(i) - ax(i));
      if (std::isfinite(problem.u(i)))
        sol.primal_residual = std::max(sol.primal_residual, ax(i) - problem.u(i));
    }
    return sol;
  }

 private:
  static QpSolution check_inequalities(const QpProblem& problem,
                                       const Eigen::MatrixXd& G,
                                       const Eigen::VectorXd& gh,
                                       QpSolution sol) {
    if (G.rows() > 0) {
      const Eigen::VectorXd slack = gh - G * sol.x;
      if (slack.minCoeff() < -1e-7) {
        sol.status = QpStatus::PrimalInfeasible;
        return sol;
      }
    }
    sol.status = QpStatus::Solved;
    sol.objective = problem.objective(sol.x);
    sol.y = Eigen::VectorXd::Zero(problem.constraints());
    sol.primal_residual = 0.0;
    sol.dual_residual = 0.0;
    return sol;
  }

  // Keep the working set linearly independent.
  static void drop_dependent(const Eigen::MatrixXd& GZ, std::vector<int>& active,
                             std::vector<char>& is_active) {
    if (active.empty()) return;
    Eigen::MatrixXd rows(active.size(), GZ.cols());
    for (std::size_t j = 0; j < active.size(); ++j) rows.row(j) = GZ.row(active[j]);
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(rows.transpose());
    const int rank = static_cast<int>(qr.rank());
    if (rank == static_cast<int>(active.size())) return;
    std::vector<int> kept;
    const auto perm = qr.colsPermutation().indices();
    for (int j = 0; j < rank; ++j) kept.push_back(active[perm(j)]);
    for (int idx : active) is_active[idx] = 0;
    active.clear();
    for (int idx : kept) {
      active.push_back(idx);
      is_active[idx] = 1;
    }
  }
};

inline QpSolution solve_qp_active_set(const QpProblem& problem) {
  ActiveSetQpSolver solver;
  return solver.solve(problem);
}

}  // namespace stplan

#endif  // STPLAN_QP_ACTIVE_SET_HPP
