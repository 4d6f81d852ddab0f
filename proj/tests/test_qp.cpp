#include <catch2/catch_amalgamated.hpp>

#include <Eigen/Dense>

#include "stplan/qp.hpp"
#include "stplan/qp_active_set.hpp"
#include "stplan/rng.hpp"
#include "stplan/traj_opt.hpp"

using namespace stplan;

namespace {

QpProblem dense_problem(const Eigen::MatrixXd& P, const Eigen::VectorXd& q,
                        const Eigen::MatrixXd& A, const Eigen::VectorXd& l,
                        const Eigen::VectorXd& u) {
  QpProblem qp;
  qp.P = P.sparseView();
  qp.q = q;
  qp.A = A.sparseView();
  qp.l = l;
  qp.u = u;
  return qp;
}

// Gauss-Legendre nodes/weights on [0,1] via Golub-Welsch.
void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights) {
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
  for (int i = 1; i < n; ++i) {
    const double b = i / std::sqrt(4.0 * i * i - 1.0);
    J(i, i - 1) = b;
    J(i - 1, i) = b;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(J);
  nodes.resize(n);
  weights.resize(n);
  for (int i = 0; i < n; ++i) {
    nodes[i] = 0.5 * (eig.eigenvalues()(i) + 1.0);
    weights[i] = eig.eigenvectors()(0, i) * eig.eigenvectors()(0, i);
  }
}

// KKT residuals of a solution on l <= Ax <= u form.
struct KktResiduals {
  double stationarity;
  double primal;
  double complementarity;
};

KktResiduals kkt_residuals(const QpProblem& qp, const Eigen::VectorXd& x,
                           const Eigen::VectorXd& y) {
  KktResiduals r{};
  r.stationarity = (qp.P.selfadjointView<Eigen::Upper>() * x + qp.q +
                    qp.A.transpose() * y)
                       .lpNorm<Eigen::Infinity>();
  const Eigen::VectorXd ax = qp.A * x;
  r.primal = 0.0;
  r.complementarity = 0.0;
  for (int i = 0; i < qp.constraints(); ++i) {
    if (std::isfinite(qp.l(i))) r.primal = std::max(r.primal, qp.l(i) - ax(i));
    if (std::isfinite(qp.u(i))) r.primal = std::max(r.primal, ax(i) - qp.u(i));
    const bool eq = std::isfinite(qp.l(i)) && std::isfinite(qp.u(i)) &&
                    qp.u(i) - qp.l(i) < 1e-12;
    if (eq) continue;
    if (y(i) > 0 && std::isfinite(qp.u(i)))
      r.complementarity = std::max(r.complementarity, y(i) * std::abs(qp.u(i) - ax(i)));
    if (y(i) < 0 && std::isfinite(qp.l(i)))
      r.complementarity =
          std::max(r.complementarity, -y(i) * std::abs(ax(i) - qp.l(i)));
  }
  return r;
}

// A feasible random corridor chain: overlapping axis boxes drifting in
// space, with rest boundary states in the first/last box.
std::vector<SpatioTemporalCorridor> random_corridors(Rng& rng, int pieces,
                                                     double r_tau) {
  std::vector<SpatioTemporalCorridor> cs(pieces);
  Vec3 center(0, 0, 0);
  for (int j = 0; j < pieces; ++j) {
    const Vec3 half(rng.uniform(0.5, 1.2), rng.uniform(0.5, 1.2),
                    rng.uniform(0.5, 1.2));
    cs[j].polytope = Polytope::axis_box(center - half, center + half);
    cs[j].window_start = j * r_tau;
    cs[j].window_end = (j + 1) * r_tau;
    cs[j].frame_index = j;
    center += Vec3(rng.uniform(-0.2, 0.35), rng.uniform(-0.25, 0.25),
                   rng.uniform(-0.15, 0.15));
  }
  return cs;
}

}  // namespace

TEST_CASE("1-D analytic QP") {
  // min x^2 s.t. x >= 1  ->  x = 1.
  Eigen::MatrixXd P(1, 1), A(1, 1);
  P << 2.0;
  A << 1.0;
  Eigen::VectorXd q(1), l(1), u(1);
  q << 0.0;
  l << 1.0;
  u << kInf;
  const QpSolution sol = solve_qp(dense_problem(P, q, A, l, u));
  REQUIRE(sol.status == QpStatus::Solved);
  REQUIRE(sol.x(0) == Catch::Approx(1.0).margin(1e-6));
  const QpSolution as = solve_qp_active_set(dense_problem(P, q, A, l, u));
  REQUIRE(as.status == QpStatus::Solved);
  REQUIRE(as.x(0) == Catch::Approx(1.0).margin(1e-9));
}

TEST_CASE("equality-only QP matches the dense KKT oracle") {
  Rng rng = Rng::seeded(13);
  for (int trial = 0; trial < 10; ++trial) {
    const int n = 6, me = 3;
    Eigen::MatrixXd M(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) M(i, j) = rng.uniform(-1, 1);
    Eigen::MatrixXd P = M.transpose() * M + 0.1 * Eigen::MatrixXd::Identity(n, n);
    Eigen::MatrixXd A(me, n);
    for (int i = 0; i < me; ++i)
      for (int j = 0; j < n; ++j) A(i, j) = rng.uniform(-1, 1);
    Eigen::VectorXd q(n), b(me);
    for (int i = 0; i < n; ++i) q(i) = rng.uniform(-1, 1);
    for (int i = 0; i < me; ++i) b(i) = rng.uniform(-1, 1);

    // Dense KKT oracle.
    Eigen::MatrixXd kkt(n + me, n + me);
    kkt.setZero();
    kkt.topLeftCorner(n, n) = P;
    kkt.topRightCorner(n, me) = A.transpose();
    kkt.bottomLeftCorner(me, n) = A;
    Eigen::VectorXd rhs(n + me);
    rhs.head(n) = -q;
    rhs.tail(me) = b;
    const Eigen::VectorXd ref = kkt.fullPivLu().solve(rhs).head(n);

    const QpSolution sol = solve_qp(dense_problem(P, q, A, b, b));
    REQUIRE(sol.status == QpStatus::Solved);
    REQUIRE((sol.x - ref).lpNorm<Eigen::Infinity>() < 1e-8);
    const QpSolution as = solve_qp_active_set(dense_problem(P, q, A, b, b));
    REQUIRE(as.status == QpStatus::Solved);
    REQUIRE((as.x - ref).lpNorm<Eigen::Infinity>() < 1e-7);
  }
}

TEST_CASE("contradictory constraints are reported infeasible") {
  Eigen::MatrixXd P(1, 1), A(2, 1);
  P << 2.0;
  A << 1.0, 1.0;
  Eigen::VectorXd q(1), l(2), u(2);
  q << 0.0;
  l << -kInf, 1.0;
  u << 0.0, kInf;  // x <= 0 and x >= 1
  const QpSolution sol = solve_qp(dense_problem(P, q, A, l, u));
  REQUIRE(sol.status == QpStatus::PrimalInfeasible);
  const QpSolution as = solve_qp_active_set(dense_problem(P, q, A, l, u));
  REQUIRE(as.status == QpStatus::PrimalInfeasible);
}

TEST_CASE("random inequality QPs: ADMM and active-set agree") {
  Rng rng = Rng::seeded(17);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 5, mi = 8;
    Eigen::MatrixXd M(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) M(i, j) = rng.uniform(-1, 1);
    Eigen::MatrixXd P = M.transpose() * M + 0.05 * Eigen::MatrixXd::Identity(n, n);
    Eigen::MatrixXd A(mi, n);
    Eigen::VectorXd q(n), l(mi), u(mi);
    for (int i = 0; i < n; ++i) q(i) = rng.uniform(-1, 1);
    for (int i = 0; i < mi; ++i) {
      for (int j = 0; j < n; ++j) A(i, j) = rng.uniform(-1, 1);
      const double mid = rng.uniform(-0.5, 0.5);
      l(i) = mid - rng.uniform(0.2, 1.5);
      u(i) = mid + rng.uniform(0.2, 1.5);
    }
    const QpProblem qp = dense_problem(P, q, A, l, u);
    const QpSolution admm = solve_qp(qp);
    const QpSolution as = solve_qp_active_set(qp);
    REQUIRE(admm.status == QpStatus::Solved);
    REQUIRE(as.status == QpStatus::Solved);
    REQUIRE(admm.objective ==
            Catch::Approx(as.objective).margin(1e-6).epsilon(1e-6));
  }
}

TEST_CASE("jerk gram matches quadrature on random pieces") {
  Rng rng = Rng::seeded(23);
  std::vector<double> nodes, weights;
  gauss_legendre(8, nodes, weights);
  for (int trial = 0; trial < 100; ++trial) {
    const int degree = 5;
    BezierPiece piece;
    piece.duration = rng.uniform(0.2, 1.5);
    piece.control_points.resize(3, degree + 1);
    for (int i = 0; i <= degree; ++i)
      for (int a = 0; a < 3; ++a) piece.control_points(a, i) = rng.uniform(-2, 2);

    const Eigen::MatrixXd G = jerk_gram(degree, piece.duration);
    double gram_cost = 0.0;
    for (int a = 0; a < 3; ++a) {
      const Eigen::VectorXd c = piece.control_points.row(a).transpose();
      gram_cost += c.dot(G * c);
    }
    double quad_cost = 0.0;
    for (std::size_t k = 0; k < nodes.size(); ++k) {
      const Eigen::Vector3d jerk = piece.eval(nodes[k] * piece.duration, 3);
      quad_cost += weights[k] * piece.duration * jerk.squaredNorm();
    }
    REQUIRE(gram_cost == Catch::Approx(quad_cost).epsilon(1e-8).margin(1e-10));
  }
}

TEST_CASE("assemble_qp structure") {
  Rng rng = Rng::seeded(29);
  const auto corridors = random_corridors(rng, 4, 0.25);
  BoundaryState start, goal;
  start.p = corridors.front().polytope.faces.empty()
                ? Vec3::Zero()
                : Vec3(0, 0, 0);
  goal.p = Vec3(0.3, 0.1, 0.0);
  const QpProblem qp = assemble_qp(corridors, start, goal);
  const int n = 5;
  const int nvar = 4 * 3 * (n + 1);
  REQUIRE(qp.vars() == nvar);
  // Corridor rows: faces_j * (n+1) per piece.
  int corridor_rows = 0;
  for (const auto& c : corridors)
    corridor_rows += static_cast<int>(c.polytope.faces.size()) * (n + 1);
  const int equality_rows = 18 + 9 * 3;
  const int vel_rows = 4 * n * 3;
  const int acc_rows = 4 * (n - 1) * 3;
  REQUIRE(qp.constraints() == corridor_rows + equality_rows + vel_rows + acc_rows);

  // Cost matrix is symmetric PSD.
  const Eigen::MatrixXd P = Eigen::MatrixXd(qp.P);
  REQUIRE((P - P.transpose()).lpNorm<Eigen::Infinity>() < 1e-12);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(P);
  REQUIRE(eig.eigenvalues().minCoeff() > -1e-9 * std::max(1.0, P.norm()));
}

TEST_CASE("single piece with equal boundary states is the constant curve") {
  std::vector<SpatioTemporalCorridor> cs(1);
  cs[0].polytope = Polytope::axis_box(Vec3(-1, -1, -1), Vec3(1, 1, 1));
  cs[0].window_start = 0.0;
  cs[0].window_end = 0.5;
  BoundaryState rest;
  rest.p = Vec3(0.2, -0.1, 0.4);
  const TrajOptResult res = optimize_trajectory(cs, rest, rest);
  REQUIRE(res.status == TrajOptStatus::Ok);
  REQUIRE(res.objective < 1e-9);
  for (double t : {0.0, 0.2, 0.5})
    REQUIRE((res.spline.eval(t) - rest.p).norm() < 1e-6);
}

TEST_CASE("rest-to-rest transfer matches the analytic quintic cost") {
  // Two pieces inside one large box; the optimum equals the single quintic.
  std::vector<SpatioTemporalCorridor> cs(2);
  for (int j = 0; j < 2; ++j) {
    cs[j].polytope = Polytope::axis_box(Vec3(-5, -5, -5), Vec3(5, 5, 5));
    cs[j].window_start = 0.5 * j;
    cs[j].window_end = 0.5 * (j + 1);
  }
  BoundaryState start, goal;
  goal.p = Vec3(1.0, 0, 0);
  TrajOptParams params;
  params.limits.v_max = 10.0;  // keep hull bounds inactive
  params.limits.a_max = 50.0;
  const TrajOptResult res = optimize_trajectory(cs, start, goal, params);
  REQUIRE(res.status == TrajOptStatus::Ok);
  const double analytic = 720.0;  // 720 D^2 / T^5 with D = 1, T = 1
  REQUIRE(res.objective == Catch::Approx(analytic).epsilon(0.01));
}

TEST_CASE("optimized spline respects corridors, limits, and continuity") {
  Rng rng = Rng::seeded(41);
  for (int trial = 0; trial < 10; ++trial) {
    const auto corridors = random_corridors(rng, 6, 0.4);
    BoundaryState start, goal;
    start.p = Vec3::Zero();
    // Goal at the center of the last box.
    Vec3 center = Vec3::Zero();
    {
      const auto& faces = corridors.back().polytope.faces;
      Vec3 lo, hi;
      for (int a = 0; a < 3; ++a) {
        hi[a] = faces[2 * a].b;
        lo[a] = -faces[2 * a + 1].b;
      }
      center = 0.5 * (lo + hi);
    }
    goal.p = center;
    TrajOptParams params;
    params.limits = {2.5, 8.0};
    const TrajOptResult res = optimize_trajectory(corridors, start, goal, params);
    if (res.status != TrajOptStatus::Ok) continue;  // tight windows may bind

    // Control points inside their corridor.
    for (std::size_t j = 0; j < corridors.size(); ++j)
      for (int i = 0; i <= 5; ++i)
        REQUIRE(corridors[j].polytope.contains(
            res.spline.pieces[j].control_points.col(i), 1e-5));
    // Boundary states.
    REQUIRE((res.spline.eval(0.0) - start.p).norm() < 1e-5);
    REQUIRE((res.spline.eval(res.spline.t_end()) - goal.p).norm() < 1e-5);
    REQUIRE(res.spline.eval(res.spline.t_end(), 1).norm() < 1e-4);
    // C2 continuity at the knots.
    double knot = 0.0;
    for (std::size_t j = 0; j + 1 < corridors.size(); ++j) {
      knot += res.spline.pieces[j].duration;
      for (int order = 0; order <= 2; ++order) {
        const Eigen::Vector3d left = res.spline.pieces[j].eval(
            res.spline.pieces[j].duration, order);
        const Eigen::Vector3d right = res.spline.pieces[j + 1].eval(0.0, order);
        REQUIRE((left - right).norm() < 1e-5);
      }
    }
    // Sampled velocity / acceleration within limits (hull bound implies it).
    for (int k = 0; k <= 100; ++k) {
      const double t = res.spline.t_end() * k / 100.0;
      for (int a = 0; a < 3; ++a) {
        REQUIRE(std::abs(res.spline.eval(t, 1)[a]) <= params.limits.v_max + 1e-5);
        REQUIRE(std::abs(res.spline.eval(t, 2)[a]) <= params.limits.a_max + 1e-4);
      }
    }
  }
}

TEST_CASE("hodograph bounds imply sampled bounds, not conversely") {
  Rng rng = Rng::seeded(59);
  int checked = 0;
  for (int trial = 0; trial < 50; ++trial) {
    BezierPiece piece;
    piece.duration = rng.uniform(0.3, 1.0);
    piece.control_points.resize(3, 6);
    for (int i = 0; i < 6; ++i)
      for (int a = 0; a < 3; ++a) piece.control_points(a, i) = rng.uniform(-1, 1);
    const BezierPiece hod = derivative_control_points(piece);
    const double bound = 2.0;
    bool hod_ok = true;
    for (int i = 0; i < hod.control_points.cols(); ++i)
      if (hod.control_points.col(i).lpNorm<Eigen::Infinity>() > bound)
        hod_ok = false;
    if (!hod_ok) continue;
    ++checked;
    for (int k = 0; k <= 50; ++k) {
      const Eigen::Vector3d v = piece.eval(piece.duration * k / 50.0, 1);
      REQUIRE(v.lpNorm<Eigen::Infinity>() <= bound + 1e-9);
    }
  }
  REQUIRE(checked > 0);
}

TEST_CASE("infeasible corridor propagates as failure") {
  std::vector<SpatioTemporalCorridor> cs(2);
  cs[0].polytope = Polytope::axis_box(Vec3(-1, -1, -1), Vec3(-0.5, 1, 1));
  cs[1].polytope = Polytope::axis_box(Vec3(0.5, -1, -1), Vec3(1, 1, 1));
  cs[0].window_start = 0.0;
  cs[0].window_end = 0.1;
  cs[1].window_start = 0.1;
  cs[1].window_end = 0.2;
  BoundaryState start, goal;
  start.p = Vec3(-0.75, 0, 0);
  goal.p = Vec3(0.75, 0, 0);
  const TrajOptResult res = optimize_trajectory(cs, start, goal);
  REQUIRE(res.status == TrajOptStatus::SolverFailed);
}

TEST_CASE("solver independence on random corridor instances") {
  Rng rng = Rng::seeded(61);
  int solved_both = 0;
  for (int trial = 0; trial < 20; ++trial) {
    const auto corridors = random_corridors(rng, 3, 0.4);
    BoundaryState start, goal;
    start.p = Vec3::Zero();
    goal.p = Vec3(0.2, 0.1, 0.0);
    TrajOptParams params;
    params.limits = {3.0, 12.0};
    const QpProblem qp = assemble_qp(corridors, start, goal, params);
    const QpSolution admm = solve_qp(qp, params.qp);
    const QpSolution as = solve_qp_active_set(qp);
    if (admm.status == QpStatus::Solved && as.status == QpStatus::Solved) {
      ++solved_both;
      REQUIRE(admm.objective ==
              Catch::Approx(as.objective).margin(2e-6).epsilon(1e-6));
    }
  }
  REQUIRE(solved_both >= 15);
}

TEST_CASE("KKT residuals are tight on solved corridor instances") {
  Rng rng = Rng::seeded(67);
  for (int trial = 0; trial < 5; ++trial) {
    const auto corridors = random_corridors(rng, 5, 0.3);
    BoundaryState start, goal;
    goal.p = Vec3(0.25, -0.1, 0.05);
    const QpProblem qp = assemble_qp(corridors, start, goal);
    const QpSolution sol = solve_qp(qp);
    REQUIRE(sol.status == QpStatus::Solved);
    const KktResiduals r = kkt_residuals(qp, sol.x, sol.y);
    REQUIRE(r.stationarity < 1e-6);
    REQUIRE(r.primal < 1e-6);
    REQUIRE(r.complementarity < 1e-6);
  }
}
