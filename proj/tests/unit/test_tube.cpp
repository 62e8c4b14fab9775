#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "shmpc/error.hpp"
#include "shmpc/geometry/containment.hpp"
#include "shmpc/sim/scenario.hpp"
#include "shmpc/tube/tube.hpp"
#include "support/fixtures.hpp"
#include "support/oracles.hpp"

#include <cmath>

using namespace shmpc;
using namespace shmpc::tube;
using geometry::HPolytope;
using geometry::Zonotope;

namespace {

using fixture::random_tube;

Mat scalar(double v) { return Mat::Constant(1, 1, v); }

const mpc::ManeuverProblem& heli() {
  static const mpc::ManeuverProblem p = sim::build_problem(sim::load_config("heli"));
  return p;
}

}  // namespace

TEST_CASE("dlqr: deadbeat scalar") {
  const auto r = dlqr({scalar(0.0), scalar(1.0), 1.0}, scalar(1.0), scalar(1.0));
  CHECK(r.P(0, 0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::abs(r.K(0, 0)) < 1e-14);
}

TEST_CASE("dlqr: integrator gives the golden ratio") {
  const LTISystem sys{scalar(1.0), scalar(1.0), 1.0};
  const auto r = dlqr(sys, scalar(1.0), scalar(1.0));
  // P solves P^2 - P - 1 = 0.
  CHECK(r.P(0, 0) == doctest::Approx((1.0 + std::sqrt(5.0)) / 2.0).epsilon(1e-10));
  CHECK(riccati_residual(sys, scalar(1.0), scalar(1.0), r.P).cwiseAbs().maxCoeff() <= 1e-10);
  CHECK(r.K(0, 0) == doctest::Approx(r.P(0, 0) / (1.0 + r.P(0, 0))));
}

TEST_CASE("dlqr: Riccati residual and stability on random systems") {
  std::mt19937_64 rng(11);
  for (int t = 0; t < 20; ++t) {
    const LTISystem sys{oracle::uniform_mat(rng, 3, 3, -1.5, 1.5), oracle::uniform_mat(rng, 3, 2), 1.0};
    const Mat Q = Mat::Identity(3, 3), R = Mat::Identity(2, 2);
    const auto r = dlqr(sys, Q, R);
    const double res = riccati_residual(sys, Q, R, r.P).cwiseAbs().maxCoeff();
    CHECK(res <= 1e-9 * r.P.cwiseAbs().maxCoeff());
    CHECK(spectral_radius(sys.A - sys.B * r.K) < 1.0);
    const Mat Kref = (R + sys.B.transpose() * r.P * sys.B).ldlt().solve(sys.B.transpose() * r.P * sys.A);
    CHECK((Kref - r.K).cwiseAbs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("dlqr: uncontrollable unstable mode does not converge") {
  const LTISystem sys{(Mat(2, 2) << 1.5, 0, 0, 0.5).finished(), (Mat(2, 1) << 0, 1).finished(), 1.0};
  CHECK_THROWS_AS(dlqr(sys, Mat::Identity(2, 2), scalar(1.0), 1e-12, 5000), Error);
}

TEST_CASE("helicopter LQR is Schur stable") {
  const auto& p = heli();
  CHECK(spectral_radius(p.sys.A - p.sys.B * p.tube.K) < 1.0);
  CHECK(riccati_residual(p.sys, p.Q, p.R, p.tube.P_terminal).cwiseAbs().maxCoeff() <=
        1e-9 * p.tube.P_terminal.cwiseAbs().maxCoeff());
}

TEST_CASE("compute_rpi: deadbeat") {
  const Zonotope W = Zonotope::box(Vec::Constant(2, -1.0), Vec::Constant(2, 1.0));
  const auto r = compute_rpi(Mat::Zero(2, 2), W, {1e-6, 2000});
  CHECK(r.s_rpi == 1);
  CHECK(r.Z.interval_radius()(0) == doctest::Approx(1.0 / (1.0 - 1e-6)).epsilon(1e-14));
  CHECK(certify_rpi(Mat::Zero(2, 2), W, r));
}

TEST_CASE("compute_rpi: scalar geometric series") {
  const double alpha = std::ldexp(1.0, -10);
  const Zonotope W = Zonotope::box(Vec::Constant(1, -1.0), Vec::Constant(1, 1.0));
  const auto r = compute_rpi(scalar(0.5), W, {alpha, 2000});
  CHECK(r.s_rpi == 10);
  const double expected = (2.0 - std::ldexp(1.0, -9)) / (1.0 - alpha);
  CHECK(r.Z.interval_radius()(0) == doctest::Approx(expected).epsilon(1e-14));
  CHECK(r.Z.support(Vec::Constant(1, -1.0)) == doctest::Approx(expected).epsilon(1e-14));
}

TEST_CASE("compute_rpi: cap is reported") {
  const Zonotope W = Zonotope::box(Vec::Constant(1, -1.0), Vec::Constant(1, 1.0));
  CHECK_THROWS_AS(compute_rpi(scalar(0.999), W, {1e-6, 50}), Error);
}

TEST_CASE("RPI certificate and invariance on 10 random 2-state systems") {
  std::mt19937_64 rng(5);
  for (int t = 0; t < 10; ++t) {
    const auto r = random_tube(rng);
    const Mat AK = r.sys.A - r.sys.B * r.tube.K;
    const Zonotope& Z = r.tube.Z();
    CHECK(certify_rpi(AK, r.W, r.tube.rpi));
    // Support functions on Z's own facet normals decide A_K Z + W in Z exactly.
    CHECK(rpi_margin(AK, r.W, Z, Z.compacted(1e-12).facet_normals()) <= 1e-9);
    // Symmetric about the origin.
    CHECK(Z.center().norm() < 1e-14);
    // Vertices of Z pushed through one step with vertices of W stay in Z.
    for (int k = 0; k < 100; ++k) {
      const Vec x = Z.sample_vertex(rng);
      const Vec w = r.W.sample_vertex(rng);
      CHECK(Z.contains(AK * x + w, 1e-9));
    }
  }
}

TEST_CASE("tube tracking: the error stays in Z along closed-loop runs") {
  std::mt19937_64 rng(8);
  for (int t = 0; t < 5; ++t) {
    const auto r = random_tube(rng);
    const Mat AK = r.sys.A - r.sys.B * r.tube.K;
    const HPolytope Zh(r.tube.Z().compacted(1e-12).facet_normals(),
                       [&] {
                         const Mat N = r.tube.Z().compacted(1e-12).facet_normals();
                         Vec h(N.rows());
                         for (Eigen::Index i = 0; i < N.rows(); ++i) h(i) = r.tube.Z().support(N.row(i).transpose());
                         return h;
                       }());
    for (int run = 0; run < 20; ++run) {
      Vec e = r.tube.Z().sample(rng);
      for (int k = 0; k < 50; ++k) {
        const Vec w = run % 2 ? r.W.sample_vertex(rng) : r.W.sample(rng);
        e = AK * e + w;
        REQUIRE(Zh.contains(e, 1e-9));
      }
    }
  }
}

TEST_CASE("helicopter tube: certificate and one-step invariance") {
  const auto& p = heli();
  const Mat AK = p.sys.A - p.sys.B * p.tube.K;
  const auto& rpi = p.tube.rpi;
  CHECK(rpi.method == RpiMethod::Modal);
  CHECK(certify_rpi(AK, p.W, rpi));
  CHECK(p.tube.Z().num_generators() <= 2 * 2000);
  // Necessary condition on random directions: h_{A_K Z + W} <= h_Z.
  std::mt19937_64 rng(3);
  Mat D(2000, 6);
  for (Eigen::Index i = 0; i < D.rows(); ++i) D.row(i) = oracle::uniform_vec(rng, 6).normalized().transpose();
  CHECK(rpi_margin(AK, p.W, p.tube.Z(), D) <= 1e-9);
  for (int k = 0; k < 20; ++k) {
    const Vec x = p.tube.Z().sample_vertex(rng);
    CHECK(p.tube.Z().contains(AK * x + p.W.sample_vertex(rng), 1e-8));
  }
}

TEST_CASE("tighten: trivial and interval cases") {
  const HPolytope F = HPolytope::box(Vec::Constant(2, -1.0), Vec::Constant(2, 1.0));
  const HPolytope XT = HPolytope::box(Vec::Constant(1, -1.0), Vec::Constant(1, 1.0));
  {
    const auto [Fb, Xb] = tighten(F, XT, Zonotope::point(Vec::Zero(1)), scalar(1.0));
    CHECK((Fb.offsets() - F.offsets()).cwiseAbs().maxCoeff() < 1e-14);
    CHECK((Xb.offsets() - XT.offsets()).cwiseAbs().maxCoeff() < 1e-14);
  }
  const Zonotope Z = Zonotope::box(Vec::Constant(1, -0.1), Vec::Constant(1, 0.1));
  const auto [Fb, Xb] = tighten(F, XT, Z, scalar(1.0));
  const auto [lo, hi] = Fb.bounding_box();
  CHECK(lo(0) == doctest::Approx(-0.9));
  CHECK(lo(1) == doctest::Approx(-0.9));
  CHECK(hi(0) == doctest::Approx(0.9));
  CHECK(hi(1) == doctest::Approx(0.9));
  CHECK(Xb.bounding_box().second(0) == doctest::Approx(0.9));
}

TEST_CASE("tighten: coupled product is no smaller than the Cartesian one") {
  // x + u <= 1 with K = -1: the coupled tube (z, -z) has zero width along (1, 1).
  const HPolytope F((Mat(3, 2) << 1, 1, 1, 0, 0, 1).finished(), (Vec(3) << 1, 2, 2).finished());
  const HPolytope XT = HPolytope::box(Vec::Constant(1, -1.0), Vec::Constant(1, 1.0));
  const Zonotope Z = Zonotope::box(Vec::Constant(1, -0.1), Vec::Constant(1, 0.1));
  const auto coupled = tighten(F, XT, Z, scalar(-1.0), TubeProduct::Coupled).first;
  const auto cart = tighten(F, XT, Z, scalar(-1.0), TubeProduct::Cartesian).first;
  const Vec d = (Vec(2) << 1, 1).finished().normalized();
  CHECK(coupled.support_value(d) == doctest::Approx(1.0 / std::sqrt(2.0)));
  CHECK(cart.support_value(d) == doctest::Approx(0.8 / std::sqrt(2.0)));
  CHECK(geometry::contains(coupled, cart));
}

TEST_CASE("tighten: empty result is reported") {
  const HPolytope F = HPolytope::box(Vec::Constant(2, -1.0), Vec::Constant(2, 1.0));
  const HPolytope XT = HPolytope::box(Vec::Constant(1, -1.0), Vec::Constant(1, 1.0));
  const Zonotope Z = Zonotope::box(Vec::Constant(1, -2.0), Vec::Constant(1, 2.0));
  CHECK_THROWS_AS(tighten(F, XT, Z, scalar(1.0)), Error);
}

TEST_CASE("helicopter tightened sets are nonempty and inside the originals") {
  const auto& p = heli();
  CHECK(p.F_bar.num_halfspaces() > 0);
  CHECK(p.X_T_bar.num_halfspaces() > 0);
  CHECK(p.X_T.contains(p.X_T_bar.interior_point()));
  CHECK(geometry::contains(p.X_T, p.X_T_bar, 1e-7));
}

TEST_CASE("tube design JSON round trip") {
  std::mt19937_64 rng(2);
  const auto r = random_tube(rng);
  const TubeDesign back = tube_from_json(tube::to_json(r.tube));
  CHECK((back.K - r.tube.K).norm() == 0.0);
  CHECK((back.P_terminal - r.tube.P_terminal).norm() == 0.0);
  CHECK((back.Z().generators() - r.tube.Z().generators()).norm() == 0.0);
  CHECK(back.rpi.alpha == r.tube.rpi.alpha);
  CHECK(back.rpi.s_rpi == r.tube.rpi.s_rpi);
}
