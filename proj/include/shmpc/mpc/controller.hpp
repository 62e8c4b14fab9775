#pragma once

#include "shmpc/mpc/problem.hpp"

#include <memory>
#include <optional>

namespace shmpc::mpc {

struct ControllerOptions {
  Mode mode = Mode::Approx;
  QpOptions qp;
  double audit_tol = 1e-5;
  /// Evaluate the shifted previous solution against the new QP's constraints.
  bool check_warm_start = false;
};

struct ControllerState {
  int k = 0;
  blocking::BlockingVector s;
  blocking::BlockingTransition last;
  std::optional<QpSolution> prev;
};

struct StepResult {
  Vec u;
  QpSolution sol;
  blocking::BlockingVector s;
  double warm_start_violation = std::numeric_limits<double>::quiet_NaN();
  double warm_start_cost = std::numeric_limits<double>::quiet_NaN();
};

/// Shrinking-horizon tube controller. The stage cache must hold every
/// interval length that the blocking dynamics can produce (see
/// `required_lengths`).
class Controller {
 public:
  Controller(const ManeuverProblem& problem, std::shared_ptr<const condense::StageCache> stages,
             ControllerOptions opts = {});

  /// Solves at x_k and returns the applied input. Throws Infeasible (at k = 0
  /// the start is outside the region of attraction; later it is a defect).
  StepResult step(const Vec& x_k);

  const ControllerState& state() const { return state_; }
  bool finished() const { return state_.k >= problem_.N0; }

 private:
  const ManeuverProblem& problem_;
  std::shared_ptr<const condense::StageCache> stages_;
  ControllerOptions opts_;
  ControllerState state_;
};

/// Interval lengths needed by a controller in `mode`.
std::vector<int> required_lengths(const ManeuverProblem& problem, Mode mode);

/// Builds a cache for `mode` and precomputes the required lengths.
std::shared_ptr<condense::StageCache> make_stage_cache(const ManeuverProblem& problem, Mode mode,
                                                       const condense::ApproxOptions& approx = {},
                                                       const std::string& directory = "");

}  // namespace shmpc::mpc
