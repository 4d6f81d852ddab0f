#ifndef STPLAN_LP_HPP
#define STPLAN_LP_HPP

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <vector>

namespace stplan {

enum class LpStatus { Optimal, Infeasible, Unbounded };

struct LpResult {
  LpStatus status = LpStatus::Infeasible;
  Eigen::VectorXd x;
  double objective = 0.0;
};

// Dense two-phase tableau simplex for
//   max c'x  s.t.  A x <= b,  x free.
// Free variables are split into positive parts internally. Bland's rule
// keeps the pivoting cycle-free; problems here are tiny (<= ~10 vars,
// <= ~200 rows), so simplicity wins over speed.
class SimplexSolver {
 public:
  LpResult maximize(const Eigen::VectorXd& c, const Eigen::MatrixXd& A,
                    const Eigen::VectorXd& b) {
    const int n = static_cast<int>(c.size());
    const int m = static_cast<int>(b.size());
    const int cols = 2 * n + m;  // u, v, slack
    // Tableau rows: constraints in equality form with slacks, RHS >= 0.
    Eigen::MatrixXd T(m, cols + m + 1);  // + artificials + rhs
    T.setZero();
    std::vector<int> basis(m);
    int art_count = 0;
    std::vector<int> art_col(m, -1);
    for (int i = 0; i < m; ++i) {
      double rhs = b(i);
      double sign = 1.0;
      if (rhs < 0.0) {
        sign = -1.0;
        rhs = -rhs;
      }
      for (int j = 0; j < n; ++j) {
        T(i, j) = sign * A(i, j);
        T(i, n + j) = -sign * A(i, j);
      }
      T(i, 2 * n + i) = sign;  // slack
      T(i, cols + m) = rhs;
      if (sign > 0.0) {
        basis[i] = 2 * n + i;
      } else {
        art_col[i] = cols + art_count;
        T(i, cols + art_count) = 1.0;
        basis[i] = cols + art_count;
        ++art_count;
      }
    }
    const int total = cols + m;  // usable columns (artificial slots included)

    // Phase 1: minimize the sum of artificials.
    if (art_count > 0) {
      Eigen::VectorXd obj = Eigen::VectorXd::Zero(total);
      for (int i = 0; i < m; ++i)
        if (art_col[i] >= 0) obj(art_col[i]) = 1.0;
      const double phase1 = run_simplex(T, basis, obj, total, true);
      if (phase1 > 1e-7) return {LpStatus::Infeasible, {}, 0.0};
      // Pivot remaining artificials out of the basis where possible.
      for (int i = 0; i < m; ++i) {
        if (basis[i] < cols) continue;
        int enter = -1;
        for (int j = 0; j < cols; ++j)
          if (std::abs(T(i, j)) > 1e-9) {
            enter = j;
            break;
          }
        if (enter >= 0) pivot(T, basis, i, enter);
      }
    }

    // Phase 2: minimize -c'(u - v).
    Eigen::VectorXd obj = Eigen::VectorXd::Zero(total);
    for (int j = 0; j < n; ++j) {
      obj(j) = -c(j);
      obj(n + j) = c(j);
    }
    // Forbid artificials from re-entering.
    for (int i = 0; i < m; ++i)
      if (art_col[i] >= 0) obj(art_col[i]) = 1e30;
    const double neg_obj = run_simplex(T, basis, obj, total, false);
    if (!std::isfinite(neg_obj)) return {LpStatus::Unbounded, {}, 0.0};

    Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
    for (int i = 0; i < m; ++i) {
      if (basis[i] < n)
        x(basis[i]) += T(i, cols + m);
      else if (basis[i] < 2 * n)
        x(basis[i] - n) -= T(i, cols + m);
    }
    return {LpStatus::Optimal, x, c.dot(x)};
  }

 private:
  static void pivot(Eigen::MatrixXd& T, std::vector<int>& basis, int row,
                    int col) {
    T.row(row) /= T(row, col);
    for (int i = 0; i < T.rows(); ++i) {
      if (i == row) continue;
      const double f = T(i, col);
      if (f != 0.0) T.row(i) -= f * T.row(row);
    }
    basis[row] = col;
  }

  // Minimizes obj'y over the tableau; returns the optimal objective, or
  // +inf when unbounded below is impossible here / -inf flag via NaN. For
  // phase 2 an unbounded direction returns infinity.
  static double run_simplex(Eigen::MatrixXd& T, std::vector<int>& basis,
                            const Eigen::VectorXd& obj, int total,
                            bool phase1) {
    const int m = static_cast<int>(T.rows());
    const int rhs_col = static_cast<int>(T.cols()) - 1;
    Eigen::VectorXd reduced(total);
    for (int iter = 0; iter < 20000; ++iter) {
      // Reduced costs: obj_j - sum_i obj_basis(i) * T(i, j).
      reduced = obj.head(total);
      for (int i = 0; i < m; ++i) {
        const double cb = obj(basis[i]);
        if (cb != 0.0) reduced -= cb * T.row(i).head(total).transpose();
      }
      int enter = -1;
      for (int j = 0; j < total; ++j)
        if (reduced(j) < -1e-9) {
          enter = j;  // Bland: smallest index
          break;
        }
      if (enter < 0) break;
      int leave = -1;
      double best = std::numeric_limits<double>::infinity();
      for (int i = 0; i < m; ++i) {
        if (T(i, enter) > 1e-11) {
          const double ratio = T(i, rhs_col) / T(i, enter);
          if (ratio < best - 1e-12 ||
              (ratio < best + 1e-12 && (leave < 0 || basis[i] < basis[leave]))) {
            best = ratio;
            leave = i;
          }
        }
      }
      if (leave < 0)
        return phase1 ? 0.0 : std::numeric_limits<double>::infinity();
      pivot(T, basis, leave, enter);
    }
    double value = 0.0;
    for (int i = 0; i < m; ++i) value += obj(basis[i]) * T(i, rhs_col);
    return value;
  }
};

inline LpResult lp_maximize(const Eigen::VectorXd& c, const Eigen::MatrixXd& A,
                            const Eigen::VectorXd& b) {
  SimplexSolver solver;
  return solver.maximize(c, A, b);
}

}  // namespace stplan

#endif  // STPLAN_LP_HPP
