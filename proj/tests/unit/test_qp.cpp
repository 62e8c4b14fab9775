#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "shmpc/mpc/qp.hpp"
#include "support/oracles.hpp"

#include <limits>

using namespace shmpc;
using namespace shmpc::mpc;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

SpMat sparse(const Mat& M) { return M.sparseView(); }

QpProblem make(const Mat& P, const Vec& q, const Mat& A, const Vec& b, const Mat& C, const Vec& d) {
  QpProblem qp;
  qp.P = sparse(P);
  qp.q = q;
  qp.A = sparse(A);
  qp.b = b;
  qp.C = sparse(C);
  qp.d = d;
  qp.lb = Vec::Constant(q.size(), -kInf);
  qp.ub = Vec::Constant(q.size(), kInf);
  return qp;
}

// Active-set enumeration: the optimum of a strictly convex QP is the unique
// KKT point, found among all subsets of active inequalities.
double brute_force(const Mat& P, const Vec& q, const Mat& A, const Vec& b, const Mat& C, const Vec& d, Vec& xbest) {
  const Eigen::Index n = q.size(), me = A.rows(), mi = C.rows();
  double best = kInf;
  for (int mask = 0; mask < (1 << mi); ++mask) {
    std::vector<Eigen::Index> act;
    for (Eigen::Index i = 0; i < mi; ++i)
      if (mask >> i & 1) act.push_back(i);
    const Eigen::Index k = me + static_cast<Eigen::Index>(act.size());
    Mat K = Mat::Zero(n + k, n + k);
    Vec r(n + k);
    K.topLeftCorner(n, n) = P;
    r.head(n) = -q;
    for (Eigen::Index i = 0; i < me; ++i) {
      K.block(n + i, 0, 1, n) = A.row(i);
      K.block(0, n + i, n, 1) = A.row(i).transpose();
      r(n + i) = b(i);
    }
    for (std::size_t j = 0; j < act.size(); ++j) {
      K.block(n + me + j, 0, 1, n) = C.row(act[j]);
      K.block(0, n + me + j, n, 1) = C.row(act[j]).transpose();
      r(n + me + j) = d(act[j]);
    }
    Eigen::FullPivLU<Mat> lu(K);
    if (!lu.isInvertible()) continue;
    const Vec sol = lu.solve(r);
    const Vec x = sol.head(n);
    if (mi && (C * x - d).maxCoeff() > 1e-9) continue;
    bool dual_ok = true;
    for (std::size_t j = 0; j < act.size(); ++j) dual_ok &= sol(n + me + j) >= -1e-9;
    if (!dual_ok) continue;
    const double val = 0.5 * x.dot(P * x) + q.dot(x);
    if (val < best) {
      best = val;
      xbest = x;
    }
  }
  return best;
}

}  // namespace

TEST_CASE("unconstrained scalar") {
  Mat P(1, 1);
  P << 2.0;
  Vec q(1);
  q << -2.0;
  QpProblem qp = make(P, q, Mat(0, 1), Vec(0), Mat(0, 1), Vec(0));
  qp.c0 = 1.0;  // (v-1)^2
  const auto r = solve_qp(qp);
  REQUIRE(r.status == QpStatus::Optimal);
  CHECK(r.x(0) == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(r.objective == doctest::Approx(0.0).epsilon(1e-10));
}

TEST_CASE("equality constrained two-variable QP matches closed form") {
  // min x1^2 + 2 x2^2 - x1 s.t. x1 + x2 = 1
  Mat P(2, 2);
  P << 2, 0, 0, 4;
  Vec q(2);
  q << -1, 0;
  Mat A(1, 2);
  A << 1, 1;
  Vec b(1);
  b << 1;
  const auto r = solve_qp(make(P, q, A, b, Mat(0, 2), Vec(0)));
  REQUIRE(r.status == QpStatus::Optimal);
  // KKT: 2x1 - 1 + y = 0, 4x2 + y = 0, x1 + x2 = 1  ->  x1 = 5/6, x2 = 1/6
  CHECK(r.x(0) == doctest::Approx(5.0 / 6.0).epsilon(1e-8));
  CHECK(r.x(1) == doctest::Approx(1.0 / 6.0).epsilon(1e-8));
  CHECK(r.y(0) == doctest::Approx(-2.0 / 3.0).epsilon(1e-8));
}

TEST_CASE("random strictly convex QPs agree with active-set enumeration") {
  std::mt19937_64 rng(42);
  int solved = 0;
  for (int t = 0; t < 150; ++t) {
    const Eigen::Index n = 3 + t % 2, me = t % 2, mi = 6;
    const Mat L = oracle::uniform_mat(rng, n, n);
    const Mat P = L * L.transpose() + 0.1 * Mat::Identity(n, n);
    const Vec q = oracle::uniform_vec(rng, n, -2, 2);
    const Mat A = oracle::uniform_mat(rng, me, n);
    const Vec b = oracle::uniform_vec(rng, me, -0.2, 0.2);
    const Mat C = oracle::uniform_mat(rng, mi, n);
    const Vec d = oracle::uniform_vec(rng, mi, 0.1, 1.0);  // origin strictly feasible for C
    Vec xb;
    const double best = brute_force(P, q, A, b, C, d, xb);
    if (!std::isfinite(best)) continue;
    const auto r = solve_qp(make(P, q, A, b, C, d));
    REQUIRE(r.status == QpStatus::Optimal);
    CHECK(r.objective == doctest::Approx(best).epsilon(1e-8));
    CHECK((r.x - xb).cwiseAbs().maxCoeff() < 1e-6);
    ++solved;
  }
  CHECK(solved > 100);
}

TEST_CASE("bounds are honored and infeasibility is detected") {
  Mat P = Mat::Identity(2, 2);
  Vec q(2);
  q << -5, 5;
  QpProblem qp = make(P, q, Mat(0, 2), Vec(0), Mat(0, 2), Vec(0));
  qp.lb << -1, -1;
  qp.ub << 1, 1;
  auto r = solve_qp(qp);
  REQUIRE(r.status == QpStatus::Optimal);
  CHECK(r.x(0) == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(r.x(1) == doctest::Approx(-1.0).epsilon(1e-8));

  Mat C(2, 2);
  C << 1, 1, -1, -1;
  Vec d(2);
  d << -1, -1;  // x1 + x2 <= -1 and >= 1
  r = solve_qp(make(P, q, Mat(0, 2), Vec(0), C, d));
  CHECK(r.status == QpStatus::Infeasible);

  Mat A(2, 2);
  A << 1, 0, 1, 0;
  Vec b(2);
  b << 0, 1;
  QpProblem bad = make(P, q, Mat(0, 2), Vec(0), Mat(0, 2), Vec(0));
  bad.lb << 2, -kInf;
  bad.C = sparse(Mat((Mat(1, 2) << 1, 0).finished()));
  bad.d = Vec::Constant(1, 1.0);
  CHECK(solve_qp(bad).status == QpStatus::Infeasible);
}

TEST_CASE("stalled solves fall back to the best iterate only within the reduced tolerances") {
  std::mt19937_64 rng(11);
  const Mat L = oracle::uniform_mat(rng, 3, 3);
  const Mat P = L * L.transpose() + 0.1 * Mat::Identity(3, 3);
  const Vec q = oracle::uniform_vec(rng, 3, -2, 2);
  const Mat C = oracle::uniform_mat(rng, 6, 3);
  const Vec d = oracle::uniform_vec(rng, 6, 0.1, 1.0);
  Vec xb;
  const double best = brute_force(P, q, Mat(0, 3), Vec(0), C, d, xb);
  REQUIRE(std::isfinite(best));

  QpOptions unreachable;
  unreachable.eps_feas = 1e-30;
  unreachable.eps_gap = 1e-30;
  const auto r = solve_qp(make(P, q, Mat(0, 3), Vec(0), C, d), unreachable);
  REQUIRE(r.status == QpStatus::Optimal);
  CHECK(r.reduced_accuracy);
  CHECK(r.iterations < unreachable.max_iterations);
  CHECK(r.primal_residual <= unreachable.eps_feas_reduced);
  CHECK(r.dual_residual <= unreachable.eps_feas_reduced);
  CHECK(r.gap <= unreachable.eps_gap_reduced);
  CHECK(r.objective == doctest::Approx(best).epsilon(1e-7));

  unreachable.eps_feas_reduced = 1e-30;
  unreachable.eps_gap_reduced = 1e-30;
  const auto strict = solve_qp(make(P, q, Mat(0, 3), Vec(0), C, d), unreachable);
  CHECK(strict.status != QpStatus::Optimal);
  CHECK_FALSE(strict.reduced_accuracy);

  const auto normal = solve_qp(make(P, q, Mat(0, 3), Vec(0), C, d));
  REQUIRE(normal.status == QpStatus::Optimal);
  CHECK_FALSE(normal.reduced_accuracy);
}

TEST_CASE("warm start from an optimum returns immediately") {
  std::mt19937_64 rng(3);
  const Mat L = oracle::uniform_mat(rng, 4, 4);
  const Mat P = L * L.transpose() + Mat::Identity(4, 4);
  const Mat C = oracle::uniform_mat(rng, 8, 4);
  const QpProblem qp = make(P, oracle::uniform_vec(rng, 4, -3, 3), Mat(0, 4), Vec(0), C, Vec::Constant(8, 0.5));
  const auto cold = solve_qp(qp);
  REQUIRE(cold.status == QpStatus::Optimal);
  CHECK(cold.iterations > 3);
  const auto again = solve_qp(qp, {}, &cold);
  REQUIRE(again.status == QpStatus::Optimal);
  CHECK(again.iterations <= 2);
  CHECK((again.x - cold.x).norm() == 0.0);
  // Determinism.
  const auto twice = solve_qp(qp);
  CHECK((twice.x - cold.x).norm() == 0.0);
}

TEST_CASE("triplet export") {
  Mat P = Mat::Identity(2, 2);
  QpProblem qp = make(P, Vec::Zero(2), Mat(0, 2), Vec(0), Mat(0, 2), Vec(0));
  qp.ub(1) = 3.0;
  const Json j = to_json(qp);
  CHECK(j["n"] == 2);
  CHECK(j["P"]["vals"].size() == 2);
  CHECK(j["ub"][0].is_null());
  CHECK(j["ub"][1] == 3.0);
}
