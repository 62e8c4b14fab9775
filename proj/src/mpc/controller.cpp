#include "shmpc/mpc/controller.hpp"

#include "shmpc/error.hpp"

#include <set>

namespace shmpc::mpc {

using blocking::BlockingVector;

Controller::Controller(const ManeuverProblem& problem, std::shared_ptr<const condense::StageCache> stages,
                       ControllerOptions opts)
    : problem_(problem), stages_(std::move(stages)), opts_(opts) {
  if (!stages_) throw Error(ErrorKind::InvalidArgument, "controller needs a stage cache");
  if (stages_->mode() != opts_.mode) throw Error(ErrorKind::InvalidArgument, "stage cache mode differs from controller mode");
}

StepResult Controller::step(const Vec& x_k) {
  if (finished()) throw Error(ErrorKind::HorizonExhausted, "maneuver already completed");
  const int N_k = problem_.N0 - state_.k;
  const bool full = opts_.mode == Mode::Full;
  StepResult out;
  if (state_.k == 0) {
    state_.s = full ? BlockingVector::uniform(N_k, 1) : problem_.s0;
  } else {
    auto [next, tr] = blocking::advance(state_.s, N_k + 1, full ? N_k + 1 : problem_.N_max);
    state_.s = std::move(next);
    state_.last = tr;
  }
  const AssembledQp aqp = assemble(problem_, *stages_, x_k, state_.s);

  if (opts_.check_warm_start && state_.prev) {
    const QpSolution& prev = *state_.prev;
    const Vec W = blocking::warm_start(prev.V_bar, state_.last, static_cast<int>(problem_.sys.m()));
    // The shifted nominal state: one step of the first previous interval.
    const Vec z1 = problem_.sys.A * prev.z0 + problem_.sys.B * prev.V_bar.head(problem_.sys.m());
    const Vec xw = rollout_point(aqp, *stages_, z1, W);
    double viol = aqp.qp.C.rows() ? (aqp.qp.C * xw - aqp.qp.d).maxCoeff() : 0.0;
    if (!problem_.tube.Z().contains(z1 - x_k, 1e-7)) viol = std::max(viol, 1.0);
    out.warm_start_violation = std::max(0.0, viol);
    out.warm_start_cost = aqp.qp.objective(xw);
  }

  QpSolution sol = solve(aqp, opts_.qp);
  if (sol.status != QpStatus::Optimal) {
    if (sol.status == QpStatus::Infeasible) {
      if (state_.k == 0) throw Error(ErrorKind::Infeasible, "initial state is outside the region of attraction");
      throw Error(ErrorKind::Infeasible, "QP infeasible at k = " + std::to_string(state_.k) +
                                             " although the previous step was feasible");
    }
    throw Error(ErrorKind::MaxIterations, std::string("QP solver: ") + to_string(sol.status) + " at k = " +
                                              std::to_string(state_.k));
  }
  if (sol.max_violation > opts_.audit_tol)
    throw Error(ErrorKind::Infeasible, "solution violates constraints by " + std::to_string(sol.max_violation));
  out.u = control(x_k, sol, problem_.tube.K);
  out.s = state_.s;
  out.sol = sol;
  state_.prev = std::move(sol);
  ++state_.k;
  return out;
}

std::vector<int> required_lengths(const ManeuverProblem& problem, Mode mode) {
  if (mode == Mode::Full) return {1};
  return blocking::reachable_lengths(problem.s0, problem.N_max);
}

std::shared_ptr<condense::StageCache> make_stage_cache(const ManeuverProblem& problem, Mode mode,
                                                       const condense::ApproxOptions& approx,
                                                       const std::string& directory) {
  auto cache = std::make_shared<condense::StageCache>(problem.stage_setup(approx), mode, directory);
  cache->precompute(required_lengths(problem, mode));
  return cache;
}

}  // namespace shmpc::mpc
