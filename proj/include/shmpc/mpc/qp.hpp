#pragma once

#include "shmpc/json_util.hpp"
#include "shmpc/linalg.hpp"

#include <Eigen/Sparse>

namespace shmpc::mpc {

using SpMat = Eigen::SparseMatrix<double>;

/// min 1/2 x'Px + q'x + c0  s.t.  A x = b,  C x <= d,  lb <= x <= ub.
/// P holds both triangles. Infinite bounds are ignored.
struct QpProblem {
  SpMat P;
  Vec q;
  double c0 = 0.0;
  SpMat A;
  Vec b;
  SpMat C;
  Vec d;
  Vec lb;
  Vec ub;

  Eigen::Index num_variables() const { return q.size(); }
  double objective(const Vec& x) const;
  /// Largest violation over equalities, inequalities and bounds.
  double max_violation(const Vec& x) const;
};

enum class QpStatus { Optimal, Infeasible, MaxIterations, Numerical };

const char* to_string(QpStatus s);

struct QpOptions {
  double eps_feas = 1e-9;   // primal and dual residuals, relative
  double eps_gap = 1e-10;   // complementarity, relative
  double eps_infeas = 1e-9; // Farkas certificate residual
  int max_iterations = 200;
  // Accepted only from the best iterate when the method stalls or breaks down.
  double eps_feas_reduced = 1e-7;
  double eps_gap_reduced = 1e-7;
  int stall_iterations = 10;  // iterations without halving the scaled residual
  double reg_primal = 1e-10;
  double reg_dual = 1e-10;
};

struct QpResult {
  QpStatus status = QpStatus::Numerical;
  Vec x;
  Vec y;  // equality multipliers
  Vec z;  // multipliers of the stacked inequalities [C; -I_lb; I_ub]
  Vec s;  // their slacks
  double objective = 0.0;
  int iterations = 0;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  double gap = 0.0;
  bool reduced_accuracy = false;  // met only the reduced tolerances
};

/// Mehrotra predictor-corrector interior-point method. The reduced KKT system
/// is factored with a sparse LDL' whose symbolic analysis is done once per
/// call. A warm start is accepted as-is when it already meets the tolerances.
QpResult solve_qp(const QpProblem& qp, const QpOptions& opts = {}, const QpResult* warm = nullptr);

/// Sparse triplet export: {"n", "P": {"rows","cols","vals"}, "q", "c0", "A", "b", "C", "d", "lb", "ub"}.
/// Infinite bounds are written as null.
Json to_json(const QpProblem& qp);

}  // namespace shmpc::mpc
