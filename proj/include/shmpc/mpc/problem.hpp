#pragma once

#include "shmpc/blocking/blocking.hpp"
#include "shmpc/condense/stage.hpp"
#include "shmpc/geometry/hpolytope.hpp"
#include "shmpc/geometry/zonotope.hpp"
#include "shmpc/mpc/qp.hpp"
#include "shmpc/tube/tube.hpp"

#include <optional>

namespace shmpc::mpc {

using condense::Mode;

/// Everything that defines one maneuver: plant, sets, weights, horizon,
/// initial blocking, and the derived tube and tightened sets.
struct ManeuverProblem {
  tube::LTISystem sys;
  geometry::HPolytope F;    // state-input constraints in R^{n+m}
  geometry::HPolytope X_T;  // terminal set
  geometry::Zonotope W;
  Mat Q;
  Mat R;
  int N0 = 0;
  int N_max = 0;
  Vec x_ref;
  blocking::BlockingVector s0;

  tube::TubeDesign tube;
  geometry::HPolytope F_bar;
  geometry::HPolytope X_T_bar;

  Mat H() const { return block_diag(Q, R); }
  condense::StageSetup stage_setup(const condense::ApproxOptions& approx = {}) const;
  /// Throws DimMismatch / InvalidArgument on inconsistent data.
  void validate() const;
};

struct ProblemOptions {
  tube::RpiOptions rpi;
  tube::TubeProduct product = tube::TubeProduct::Coupled;
};

/// Designs the tube (LQR + RPI) and tightens F and X_T.
ManeuverProblem make_problem(tube::LTISystem sys, geometry::HPolytope F, geometry::HPolytope X_T,
                             geometry::Zonotope W, Mat Q, Mat R, int N0, int N_max, Vec x_ref,
                             blocking::BlockingVector s0, const ProblemOptions& opts = {});

/// Same, with a previously computed tube.
ManeuverProblem make_problem_with_tube(tube::LTISystem sys, geometry::HPolytope F, geometry::HPolytope X_T,
                                       geometry::Zonotope W, Mat Q, Mat R, int N0, int N_max, Vec x_ref,
                                       blocking::BlockingVector s0, tube::TubeDesign tube,
                                       tube::TubeProduct product = tube::TubeProduct::Coupled);

/// Variable layout of an assembled QP: z_0, v_0, z_1, v_1, ..., z_Nbar, lambda.
struct QpLayout {
  int n = 0;
  int m = 0;
  int blocks = 0;
  int g = 0;

  int z(int i) const { return i * (n + m); }
  int v(int i) const { return i * (n + m) + n; }
  int lambda() const { return blocks * (n + m) + n; }
  int size() const { return lambda() + g; }
};

struct AssembledQp {
  QpProblem qp;
  QpLayout layout;
  blocking::BlockingVector s;
};

/// Blocked shrinking-horizon QP at state x_k. In Full mode `s` must be all ones.
/// Throws MissingStage when a length in `s` has not been cached.
AssembledQp assemble(const ManeuverProblem& problem, const condense::StageCache& stages, const Vec& x_k,
                     const blocking::BlockingVector& s);

struct QpSolution {
  QpStatus status = QpStatus::Numerical;
  Vec V_bar;  // blocked nominal inputs, blocks*m
  Vec z0;
  Mat Z;      // nominal block-boundary states, n x (blocks+1)
  Vec lambda;
  double cost = 0.0;
  int iterations = 0;
  double solve_seconds = 0.0;
  double max_violation = 0.0;
  QpResult raw;
};

QpSolution solve(const AssembledQp& aqp, const QpOptions& opts = {}, const QpResult* warm = nullptr);

/// u = v_0 - K (x_k - z_0)
Vec control(const Vec& x_k, const QpSolution& sol, const Mat& K);

/// Primal point of `aqp` obtained by rolling z_0 forward under the blocked
/// inputs V (lambda = 0). Dynamics rows other than the initial-set row hold
/// by construction; used to check warm starts.
Vec rollout_point(const AssembledQp& aqp, const condense::StageCache& stages, const Vec& z0, const Vec& V);

}  // namespace shmpc::mpc
