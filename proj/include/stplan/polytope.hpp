#ifndef STPLAN_POLYTOPE_HPP
#define STPLAN_POLYTOPE_HPP

#include <Eigen/Dense>

#include <stdexcept>
#include <vector>

#include "stplan/lp.hpp"

namespace stplan {

// One halfspace a.x <= b with unit normal.
struct Halfspace {
  Eigen::Vector3d a;
  double b;
};

// Intersection of halfspaces. Normals are kept unit-length so that offsets
// in `b` are metric distances (shrinking by a radius is then b - d).
struct Polytope {
  std::vector<Halfspace> faces;

  void add_face(const Eigen::Vector3d& normal, double offset) {
    const double n = normal.norm();
    if (n < 1e-12) throw std::invalid_argument("degenerate halfspace normal");
    faces.push_back({normal / n, offset / n});
  }

  bool contains(const Eigen::Vector3d& p, double tol = 1e-9) const {
    for (const auto& f : faces)
      if (f.a.dot(p) > f.b + tol) return false;
    return true;
  }

  double min_slack(const Eigen::Vector3d& p) const {
    double s = std::numeric_limits<double>::infinity();
    for (const auto& f : faces) s = std::min(s, f.b - f.a.dot(p));
    return s;
  }

  static Polytope axis_box(const Eigen::Vector3d& lo, const Eigen::Vector3d& hi) {
    Polytope p;
    for (int a = 0; a < 3; ++a) {
      Eigen::Vector3d n = Eigen::Vector3d::Zero();
      n[a] = 1.0;
      p.add_face(n, hi[a]);
      p.add_face(-n, -lo[a]);
    }
    return p;
  }
};

struct ChebyshevResult {
  bool bounded = false;
  Eigen::Vector3d center = Eigen::Vector3d::Zero();
  double radius = -std::numeric_limits<double>::infinity();
};

// Largest inscribed ball: max r s.t. a_i.x + r <= b_i. A nonnegative radius
// certifies a nonempty (closed) polytope; a positive one, nonempty interior.
inline ChebyshevResult chebyshev_ball(const std::vector<Halfspace>& faces,
                                      double radius_cap = 1e6) {
  const int m = static_cast<int>(faces.size());
  Eigen::MatrixXd A(m + 1, 4);
  Eigen::VectorXd b(m + 1);
  for (int i = 0; i < m; ++i) {
    A.row(i).head<3>() = faces[i].a.transpose();
    A(i, 3) = 1.0;
    b(i) = faces[i].b;
  }
  // Cap the radius so unbounded polytopes still yield a finite certificate.
  A.row(m).setZero();
  A(m, 3) = 1.0;
  b(m) = radius_cap;
  Eigen::VectorXd c = Eigen::VectorXd::Zero(4);
  c(3) = 1.0;
  const LpResult lp = lp_maximize(c, A, b);
  ChebyshevResult out;
  if (lp.status != LpStatus::Optimal) return out;
  out.bounded = true;
  out.center = lp.x.head<3>();
  out.radius = lp.x(3);
  return out;
}

inline ChebyshevResult chebyshev_ball(const Polytope& p) {
  return chebyshev_ball(p.faces);
}

// Chebyshev ball of the intersection of two polytopes.
inline ChebyshevResult intersection_ball(const Polytope& p, const Polytope& q) {
  std::vector<Halfspace> faces = p.faces;
  faces.insert(faces.end(), q.faces.begin(), q.faces.end());
  return chebyshev_ball(faces);
}

}  // namespace stplan

#endif  // STPLAN_POLYTOPE_HPP
