#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "shmpc/error.hpp"
#include "shmpc/mpc/controller.hpp"
#include "shmpc/sim/simulate.hpp"
#include "support/fixtures.hpp"
#include "support/oracles.hpp"

using namespace shmpc;
using namespace shmpc::mpc;
using blocking::BlockingVector;
using geometry::HPolytope;
using geometry::Zonotope;

namespace {

using fixture::per_step_qp;
using fixture::random_blocking;
using fixture::small_problem;

struct Heli {
  sim::Scenario sc{sim::load_config("heli")};
};

Heli& heli() {
  static Heli h;
  return h;
}

}  // namespace

TEST_CASE("per-step and blocked formulations have equal optimal values") {
  std::mt19937_64 rng(21);
  int optimal = 0;
  for (int t = 0; t < 50; ++t) {
    const int N = std::uniform_int_distribution<int>(1, 8)(rng);
    const BlockingVector s = random_blocking(rng, N);
    const ManeuverProblem p = small_problem(rng, N, s);
    auto cache = make_stage_cache(p, Mode::Raw);
    cache->precompute(s.values());
    const Vec x = oracle::uniform_vec(rng, 2, -3.0, 3.0);
    const QpSolution blocked = solve(assemble(p, *cache, x, s));
    const QpResult ref = solve_qp(per_step_qp(p, s, x));
    REQUIRE(blocked.status == ref.status);
    if (ref.status != QpStatus::Optimal) continue;
    ++optimal;
    CHECK(blocked.cost == doctest::Approx(ref.objective).epsilon(1e-8));
  }
  CHECK(optimal >= 35);
}

TEST_CASE("unit blocking in raw mode is the per-step problem") {
  std::mt19937_64 rng(4);
  const int N = 6;
  const ManeuverProblem p = small_problem(rng, N, BlockingVector::uniform(N, 1));
  auto raw = make_stage_cache(p, Mode::Raw);
  auto full = make_stage_cache(p, Mode::Full);
  const Vec x = oracle::uniform_vec(rng, 2);
  const auto a = assemble(p, *raw, x, BlockingVector::uniform(N, 1));
  const auto b = assemble(p, *full, x, BlockingVector::uniform(N, 1));
  CHECK(Mat(a.qp.C - b.qp.C).norm() == 0.0);
  CHECK((a.qp.d - b.qp.d).norm() == 0.0);
  CHECK(Mat(a.qp.A - b.qp.A).norm() == 0.0);
  CHECK(Mat(a.qp.P - b.qp.P).norm() == 0.0);
  CHECK_THROWS_AS(assemble(p, *full, x, BlockingVector{2, 4}), Error);
}

TEST_CASE("missing stages and bad states are reported") {
  std::mt19937_64 rng(5);
  const ManeuverProblem p = small_problem(rng, 4, BlockingVector{2, 2});
  condense::StageCache empty(p.stage_setup(), Mode::Raw);
  CHECK_THROWS_AS(assemble(p, empty, Vec::Zero(2), BlockingVector{2, 2}), Error);
  auto cache = make_stage_cache(p, Mode::Raw);
  Vec bad = Vec::Zero(2);
  bad(1) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(assemble(p, *cache, bad, BlockingVector{2, 2}), Error);
}

TEST_CASE("helicopter variable counts") {
  const auto& sc = heli().sc;
  const auto& p = sc.problem();
  const int g = static_cast<int>(p.tube.Z().num_generators());
  condense::StageCache raw(p.stage_setup(), Mode::Raw);
  raw.precompute({30});
  CHECK(assemble(p, raw, Vec::Zero(6), p.s0).layout.size() == 11 * 6 + 10 * 2 + g);
  condense::StageCache full(p.stage_setup(), Mode::Full);
  full.precompute({1});
  CHECK(assemble(p, full, Vec::Zero(6), BlockingVector::uniform(300, 1)).layout.size() == 301 * 6 + 300 * 2 + g);
}

TEST_CASE("control law") {
  QpSolution sol;
  sol.V_bar = (Vec(4) << 0.5, -1.0, 2.0, 3.0).finished();
  sol.z0 = (Vec(3) << 1, 2, 3).finished();
  const Mat K = oracle::uniform_mat(*std::make_unique<std::mt19937_64>(1), 2, 3);
  CHECK((control(sol.z0, sol, K) - sol.V_bar.head(2)).norm() == 0.0);
  const Vec x = (Vec(3) << 0, 0, 1).finished();
  CHECK((control(x, sol, Mat::Zero(2, 3)) - sol.V_bar.head(2)).norm() == 0.0);
  CHECK((control(x, sol, K) - (sol.V_bar.head(2) - K * (x - sol.z0))).norm() < 1e-15);
}

TEST_CASE("splitting with a duplicated warm start never increases the cost") {
  std::mt19937_64 rng(31);
  int checked = 0;
  for (int t = 0; t < 100; ++t) {
    const int N = std::uniform_int_distribution<int>(2, 8)(rng);
    BlockingVector s = random_blocking(rng, N);
    if (*std::max_element(s.begin(), s.end()) < 2) s = BlockingVector{N};
    const ManeuverProblem p = small_problem(rng, N, s);
    auto cache = make_stage_cache(p, Mode::Raw);
    cache->precompute(std::vector<int>{1, 2, 3, 4, 5, 6, 7, 8});
    const Vec x = oracle::uniform_vec(rng, 2, -2.0, 2.0);
    const auto a = assemble(p, *cache, x, s);
    const QpSolution before = solve(a);
    if (before.status != QpStatus::Optimal) continue;
    const auto [j, i] = blocking::choose_split(s);
    const BlockingVector s2 = blocking::split(s, j, i);
    Vec W(s2.size());
    for (int k = 0, o = 0; k < s.size(); ++k) {
      W(o++) = before.V_bar(k);
      if (k == j) W(o++) = before.V_bar(k);
    }
    const auto b = assemble(p, *cache, x, s2);
    Vec xw = rollout_point(b, *cache, before.z0, W);
    xw.tail(b.layout.g) = before.lambda;
    CHECK(b.qp.max_violation(xw) <= 1e-7);
    CHECK(b.qp.objective(xw) == doctest::Approx(before.cost).epsilon(1e-9));
    const QpSolution after = solve(b);
    REQUIRE(after.status == QpStatus::Optimal);
    CHECK(after.cost <= before.cost * (1.0 + 1e-8) + 1e-8);
    ++checked;
  }
  CHECK(checked >= 60);
}

TEST_CASE("zero disturbance: warm starts stay feasible and the target is reached") {
  std::mt19937_64 rng(41);
  int runs = 0;
  for (int t = 0; t < 20 && runs < 10; ++t) {
    const ManeuverProblem p = small_problem(rng, 8, BlockingVector{4, 4}, 0.02);
    for (Mode mode : {Mode::Raw, Mode::Minimal, Mode::Approx}) {
      ControllerOptions o;
      o.mode = mode;
      o.check_warm_start = true;
      Controller c(p, make_stage_cache(p, mode, {}), o);
      Vec x = oracle::uniform_vec(rng, 2, -1.0, 1.0);
      try {
        c.step(x);
      } catch (const Error& e) {
        REQUIRE(e.kind() == ErrorKind::Infeasible);
        continue;
      }
      ++runs;
      // Replay without disturbance: the nominal successor is the next state.
      x = c.state().prev->Z.col(0);
      for (int k = 1; k < p.N0; ++k) {
        const auto& prev = *c.state().prev;
        const Vec u = control(x, prev, p.tube.K);
        x = p.sys.A * x + p.sys.B * u;
        const StepResult r = c.step(x);
        CHECK(r.warm_start_violation <= 1e-7);
        CHECK(r.sol.cost <= r.warm_start_cost + 1e-7 * std::max(1.0, std::abs(r.warm_start_cost)));
      }
      const Vec u = control(x, *c.state().prev, p.tube.K);
      CHECK(p.X_T.contains(p.sys.A * x + p.sys.B * u, 1e-7));
      CHECK(c.finished());
      CHECK_THROWS_AS(c.step(x), Error);
    }
  }
  CHECK(runs >= 10);
}

TEST_CASE("random disturbances: recursive feasibility, tube membership, constraints, arrival") {
  std::mt19937_64 rng(51);
  int runs = 0;
  for (int t = 0; t < 200 && runs < 50; ++t) {
    const ManeuverProblem p = small_problem(rng, 8, BlockingVector{3, 5}, 0.05);
    auto cache = make_stage_cache(p, Mode::Approx);
    ControllerOptions o;
    o.mode = Mode::Approx;
    Controller c(p, cache, o);
    Vec x = oracle::uniform_vec(rng, 2, -1.0, 1.0);
    std::vector<Vec> xs{x};
    try {
      c.step(x);
    } catch (const Error& e) {
      REQUIRE(e.kind() == ErrorKind::Infeasible);
      continue;
    }
    ++runs;
    for (int k = 0; k < p.N0; ++k) {
      const auto& sol = *c.state().prev;
      CHECK(p.tube.Z().contains(x - sol.z0, 1e-7));
      const Vec u = control(x, sol, p.tube.K);
      Vec xi(3);
      xi << x, u;
      CHECK(p.F.contains(xi, 1e-7));
      const Vec w = (k + t) % 2 ? p.W.sample_vertex(rng) : p.W.sample(rng);
      x = p.sys.A * x + p.sys.B * u + w;
      if (k + 1 < p.N0) REQUIRE_NOTHROW(c.step(x));
    }
    CHECK(p.X_T.contains(x, 1e-7));
  }
  CHECK(runs >= 50);
}

TEST_CASE("helicopter: k = 0 costs follow the constraint-set inclusion chain") {
  auto& sc = heli().sc;
  const auto& p = sc.problem();
  for (int run = 0; run < 3; ++run) {
    const Vec x0 = sim::sample_x0(sc, 99, run).x0;
    std::map<Mode, double> J;
    for (Mode m : {Mode::Full, Mode::Raw, Mode::Minimal, Mode::Approx}) {
      const BlockingVector s = m == Mode::Full ? BlockingVector::uniform(p.N0, 1) : p.s0;
      const QpSolution sol = solve(assemble(p, *sc.stages(m), x0, s));
      REQUIRE(sol.status == QpStatus::Optimal);
      CHECK(sol.max_violation <= 1e-6);
      J[m] = sol.cost;
    }
    CHECK(J[Mode::Raw] == doctest::Approx(J[Mode::Minimal]).epsilon(1e-6));
    CHECK(J[Mode::Approx] >= J[Mode::Minimal] * (1.0 - 1e-8));
    CHECK(J[Mode::Minimal] >= J[Mode::Full] * (1.0 - 1e-8));
  }
}

TEST_CASE("helicopter: vertex disturbances keep x_k in z0 + Z and reach the target") {
  auto& sc = heli().sc;
  const auto& p = sc.problem();
  const Vec x0 = sim::sample_x0(sc, 5, 0).x0;
  ControllerOptions o;
  o.mode = Mode::Approx;
  Controller c(p, sc.stages(Mode::Approx), o);
  std::mt19937_64 rng(5);
  Vec x = x0;
  for (int k = 0; k < p.N0; ++k) {
    const StepResult r = c.step(x);
    CHECK(r.s.horizon() == p.N0 - k);
    CHECK(r.s.size() <= p.N_max);
    REQUIRE(p.tube.Z().contains(x - r.sol.z0, 1e-7));
    Vec xi(8);
    xi << x, r.u;
    CHECK(p.F.contains(xi, 1e-6));
    x = p.sys.A * x + p.sys.B * r.u + p.W.sample_vertex(rng);
  }
  CHECK(p.X_T.contains(x, 1e-6));
}
