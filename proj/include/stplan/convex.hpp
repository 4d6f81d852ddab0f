#ifndef STPLAN_CONVEX_HPP
#define STPLAN_CONVEX_HPP

#include <Eigen/Dense>

#include <cmath>
#include <vector>

namespace stplan {

// Wolfe's min-norm-point algorithm over an explicit point set: returns the
// point of conv(points) closest to the origin. Point counts here are small
// (control-point hulls and their Minkowski differences), so the dense
// corral solves stay tiny.
inline Eigen::Vector3d min_norm_point(const Eigen::Matrix3Xd& points,
                                      double tol = 1e-12) {
  const int n = static_cast<int>(points.cols());
  if (n == 0) return Eigen::Vector3d::Zero();

  // Start from the point with the smallest norm.
  int best = 0;
  double best_norm = points.col(0).squaredNorm();
  for (int i = 1; i < n; ++i) {
    const double s = points.col(i).squaredNorm();
    if (s < best_norm) {
      best_norm = s;
      best = i;
    }
  }
  std::vector<int> corral{best};
  std::vector<double> weight{1.0};
  Eigen::Vector3d x = points.col(best);

  const double scale = std::max(1.0, std::sqrt(best_norm));
  for (int iter = 0; iter < 200; ++iter) {
    // Support point minimizing x . p.
    int support = 0;
    double support_val = x.dot(points.col(0));
    for (int i = 1; i < n; ++i) {
      const double v = x.dot(points.col(i));
      if (v < support_val) {
        support_val = v;
        support = i;
      }
    }
    if (x.squaredNorm() - support_val <= tol * scale * scale) break;
    bool already = false;
    for (int idx : corral)
      if (idx == support) already = true;
    if (already) break;
    corral.push_back(support);
    weight.push_back(0.0);

    // Minor cycle: project onto the affine hull of the corral, stepping
    // back toward the feasible (convex) weights when needed.
    for (int inner = 0; inner < 100; ++inner) {
      const int k = static_cast<int>(corral.size());
      Eigen::MatrixXd G(k + 1, k + 1);
      Eigen::VectorXd rhs = Eigen::VectorXd::Zero(k + 1);
      for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j)
          G(i, j) = points.col(corral[i]).dot(points.col(corral[j]));
      for (int i = 0; i < k; ++i) {
        G(i, i) += 1e-13 * scale * scale;
        G(i, k) = 1.0;
        G(k, i) = 1.0;
      }
      G(k, k) = 0.0;
      rhs(k) = 1.0;
      Eigen::VectorXd lam = G.fullPivLu().solve(rhs).head(k);

      bool feasible = true;
      for (int i = 0; i < k; ++i)
        if (lam(i) < 1e-12) feasible = false;
      if (feasible) {
        weight.assign(lam.data(), lam.data() + k);
        x.setZero();
        for (int i = 0; i < k; ++i) x += weight[i] * points.col(corral[i]);
        break;
      }
      // Largest step toward lam keeping weights nonnegative.
      double theta = 1.0;
      for (int i = 0; i < k; ++i) {
        const double d = weight[i] - lam(i);
        if (d > 1e-15) theta = std::min(theta, weight[i] / d);
      }
      for (int i = 0; i < k; ++i)
        weight[i] = (1.0 - theta) * weight[i] + theta * lam(i);
      // Drop zeroed points from the corral.
      for (int i = k - 1; i >= 0; --i) {
        if (weight[i] <= 1e-12) {
          corral.erase(corral.begin() + i);
          weight.erase(weight.begin() + i);
        }
      }
      double wsum = 0.0;
      for (double w : weight) wsum += w;
      for (double& w : weight) w /= wsum;
      x.setZero();
      for (std::size_t i = 0; i < corral.size(); ++i)
        x += weight[i] * points.col(corral[i]);
    }
  }
  return x;
}

// Euclidean distance between the convex hulls of two point sets.
inline double hull_distance(const Eigen::Matrix3Xd& a,
                            const Eigen::Matrix3Xd& b) {
  Eigen::Matrix3Xd diff(3, a.cols() * b.cols());
  int k = 0;
  for (int i = 0; i < a.cols(); ++i)
    for (int j = 0; j < b.cols(); ++j) diff.col(k++) = a.col(i) - b.col(j);
  return min_norm_point(diff).norm();
}

// Distance from a point to the convex hull of a point set.
inline double point_hull_distance(const Eigen::Vector3d& p,
                                  const Eigen::Matrix3Xd& pts) {
  Eigen::Matrix3Xd shifted = pts.colwise() - p;
  return min_norm_point(shifted).norm();
}

}  // namespace stplan

#endif  // STPLAN_CONVEX_HPP
