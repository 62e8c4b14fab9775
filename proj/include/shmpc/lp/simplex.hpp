#pragma once

#include "shmpc/linalg.hpp"

namespace shmpc::lp {

enum class Status { Optimal, Infeasible, Unbounded, IterationLimit };

const char* to_string(Status s);

struct SimplexOptions {
  double feasibility_tol = 1e-9;
  double optimality_tol = 1e-9;
  double pivot_tol = 1e-10;
  int max_iterations = 0;  // 0: derived from problem size
};

/// Outcome of min c'x s.t. Ax = b, x >= 0.
///
/// `duals` holds y with c - A'y >= 0 at an optimum. When infeasible, `farkas`
/// holds y with A'y <= 0 and b'y > 0. When unbounded, `ray` holds d >= 0 with
/// Ad = 0 and c'd < 0.
struct StandardResult {
  Status status = Status::IterationLimit;
  Vec x;
  Vec duals;
  Vec farkas;
  Vec ray;
  double objective = 0.0;
  int iterations = 0;
};

/// Two-phase dense tableau simplex. Dantzig pricing, switching to Bland's rule
/// while stalling on degenerate pivots.
StandardResult solve_standard(const Mat& A, const Vec& b, const Vec& c,
                              const SimplexOptions& opts = {});

/// Result of maximizing a linear objective over {x | F x <= f}.
struct SupportResult {
  Status status = Status::IterationLimit;
  double value = 0.0;
  Vec point;        // maximizer (Optimal)
  Vec ray;          // F ray <= 0, a'ray > 0 (Unbounded)
  Vec multipliers;  // lambda >= 0 with F'lambda = a, f'lambda = value (Optimal)
};

/// Solves max a'x s.t. F x <= f through its dual, whose tableau has only
/// dim(x) rows. Efficient for the tall systems produced by set operations.
SupportResult maximize(const Mat& F, const Vec& f, const Vec& a,
                       const SimplexOptions& opts = {});

}  // namespace shmpc::lp
