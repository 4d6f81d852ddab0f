#ifndef STPLAN_BEZIER_HPP
#define STPLAN_BEZIER_HPP

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>
#include <vector>

namespace stplan {

inline double binomial(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * static_cast<double>(n - k + i) / i;
  return r;
}

// One polynomial piece in Bernstein form. Control points are columns of a
// 3 x (degree + 1) matrix; the curve is traversed over [0, duration].
struct BezierPiece {
  Eigen::Matrix3Xd control_points;
  double duration = 0.0;

  int degree() const { return static_cast<int>(control_points.cols()) - 1; }

  // Position (or derivative) at local time t in [0, duration]. Derivatives
  // carry the 1/duration chain-rule factor per order.
  Eigen::Vector3d eval(double t, int order = 0) const {
    Eigen::Matrix3Xd cps = control_points;
    double scale = 1.0;
    int n = degree();
    for (int d = 0; d < order; ++d) {
      if (n == 0) return Eigen::Vector3d::Zero();
      Eigen::Matrix3Xd next(3, n);
      for (int i = 0; i < n; ++i)
        next.col(i) = cps.col(i + 1) - cps.col(i);
      scale *= static_cast<double>(n) / duration;
      cps = next;
      --n;
    }
    const double s = t / duration;
    const double u = 1.0 - s;
    Eigen::Vector3d out = Eigen::Vector3d::Zero();
    // Horner-style accumulation of the Bernstein basis.
    double sp = 1.0;
    std::vector<double> basis(n + 1);
    for (int i = 0; i <= n; ++i) {
      basis[i] = binomial(n, i) * sp;
      sp *= s;
    }
    double up = 1.0;
    for (int i = n; i >= 0; --i) {
      out += basis[i] * up * cps.col(i);
      up *= u;
    }
    return scale * out;
  }
};

// Control points of the derivative curve: d_i = n/duration * (c_{i+1} - c_i).
inline BezierPiece derivative_control_points(const BezierPiece& piece) {
  const int n = piece.degree();
  if (n < 1) throw std::invalid_argument("cannot differentiate a degree-0 piece");
  BezierPiece out;
  out.duration = piece.duration;
  out.control_points.resize(3, n);
  const double k = static_cast<double>(n) / piece.duration;
  for (int i = 0; i < n; ++i)
    out.control_points.col(i) =
        k * (piece.control_points.col(i + 1) - piece.control_points.col(i));
  return out;
}

// Exact degree elevation by one.
inline BezierPiece elevate_degree(const BezierPiece& piece) {
  const int n = piece.degree();
  BezierPiece out;
  out.duration = piece.duration;
  out.control_points.resize(3, n + 2);
  out.control_points.col(0) = piece.control_points.col(0);
  out.control_points.col(n + 1) = piece.control_points.col(n);
  for (int i = 1; i <= n; ++i) {
    const double a = static_cast<double>(i) / (n + 1);
    out.control_points.col(i) = a * piece.control_points.col(i - 1) +
                                (1.0 - a) * piece.control_points.col(i);
  }
  return out;
}

inline BezierPiece elevate_to_degree(BezierPiece piece, int degree) {
  while (piece.degree() < degree) piece = elevate_degree(piece);
  return piece;
}

// de Casteljau split at parameter s in (0, 1); durations scale accordingly.
inline std::pair<BezierPiece, BezierPiece> subdivide(const BezierPiece& piece,
                                                     double s) {
  const int n = piece.degree();
  Eigen::Matrix3Xd pts = piece.control_points;
  BezierPiece left, right;
  left.control_points.resize(3, n + 1);
  right.control_points.resize(3, n + 1);
  left.duration = s * piece.duration;
  right.duration = (1.0 - s) * piece.duration;
  left.control_points.col(0) = pts.col(0);
  right.control_points.col(n) = pts.col(n);
  for (int level = 1; level <= n; ++level) {
    for (int i = 0; i + level <= n; ++i)
      pts.col(i) = (1.0 - s) * pts.col(i) + s * pts.col(i + 1);
    left.control_points.col(level) = pts.col(0);
    right.control_points.col(n - level) = pts.col(n - level);
  }
  return {left, right};
}

// Piecewise Bernstein curve with a wall-clock start time.
struct BezierSpline {
  std::vector<BezierPiece> pieces;
  double t_start = 0.0;

  double duration() const {
    double d = 0.0;
    for (const auto& p : pieces) d += p.duration;
    return d;
  }
  double t_end() const { return t_start + duration(); }

  // Index of the piece covering wall-clock time t, plus the local offset.
  // Pieces cover [knot_{j-1}, knot_j); the final knot is closed.
  std::pair<int, double> locate(double t) const {
    if (pieces.empty()) throw std::out_of_range("empty spline");
    const double eps = 1e-12 * std::max(1.0, std::abs(t_end()));
    if (t < t_start - eps || t > t_end() + eps)
      throw std::out_of_range("time outside spline range");
    double local = std::min(std::max(t - t_start, 0.0), duration());
    for (std::size_t j = 0; j + 1 < pieces.size(); ++j) {
      if (local < pieces[j].duration) return {static_cast<int>(j), local};
      local -= pieces[j].duration;
    }
    return {static_cast<int>(pieces.size()) - 1,
            std::min(local, pieces.back().duration)};
  }

  Eigen::Vector3d eval(double t, int order = 0) const {
    auto [j, local] = locate(t);
    return pieces[j].eval(local, order);
  }

  Eigen::Vector3d end_position() const {
    return pieces.back().control_points.rightCols<1>();
  }
};

// Single piece holding `p` for `duration` seconds.
inline BezierSpline hold_spline(const Eigen::Vector3d& p, double t_start,
                                double duration, int degree = 5) {
  BezierPiece piece;
  piece.duration = duration;
  piece.control_points = p.replicate(1, degree + 1);
  BezierSpline s;
  s.t_start = t_start;
  s.pieces.push_back(piece);
  return s;
}

}  // namespace stplan

#endif  // STPLAN_BEZIER_HPP
