#pragma once

#include "shmpc/geometry/containment.hpp"
#include "shmpc/geometry/hpolytope.hpp"
#include "shmpc/linalg.hpp"
#include "shmpc/tube/tube.hpp"

#include <optional>
#include <utility>
#include <vector>

namespace shmpc::condense {

/// (A^s, sum_{j<s} A^j B) by iterated accumulation.
std::pair<Mat, Mat> block_dynamics(const tube::LTISystem& sys, int s);

/// sum_{j<s} (A_aug^j)' H A_aug^j
Mat block_cost(const Mat& H, const Mat& A_aug, int s);

/// sum_{j<s} (A_aug^j)' H; the cross term of a block held at a constant reference.
Mat block_tracking(const Mat& H, const Mat& A_aug, int s);

enum class ExactMode { Raw, Minimal };

/// Intersection of the preimages of F_bar under A_aug^j, j = 0..s-1.
geometry::HPolytope block_constraints_exact(const geometry::HPolytope& F_bar, const Mat& A_aug, int s,
                                            ExactMode mode);

struct TemplateSpec {
  std::vector<int> pi;

  /// {0, floor((s-1)/2), s-1}, deduplicated.
  static TemplateSpec midpoint(int s);
};

/// Intersection of the preimages of F_bar under A_aug^j for j in spec.pi.
geometry::HPolytope build_template(const geometry::HPolytope& F_bar, const Mat& A_aug, int s, const TemplateSpec& spec);

struct ApproxOptions {
  double sigma_min = 1e-6;
  double sigma_max = std::numeric_limits<double>::infinity();
  /// After maximizing sum(sigma), minimize ||x_off||_1 among (near) optimal solutions.
  bool center_tiebreak = true;
  double tol = 1e-9;
  int max_rounds = 1000;
};

/// Scaling sigma, translation x_off and multipliers Lambda (rows of F) with
///   Lambda F_t = F diag(sigma),  Lambda f_t <= f - F x_off,  Lambda >= 0.
struct ApproxSolution {
  Vec sigma;
  Vec x_off;
  Mat Lambda;
  int rounds = 0;
};

/// Largest (in sum(sigma)) axis-scaled translate x_off + diag(sigma) T of the
/// template T = {F_t x <= f_t} inside {F x <= f}. Separation is done lazily:
/// each row of F contributes a cut from its support LP over T.
/// Throws Infeasible or Unbounded (scaling hit the numerical cap).
ApproxSolution inner_approximate_lp(const geometry::HPolytope& F_exact, const geometry::HPolytope& templ,
                                    const ApproxOptions& opts = {});

/// Same problem posed as one LP over (sigma, x_off, Lambda). Intended for
/// cross-checks on small instances.
ApproxSolution inner_approximate_joint(const geometry::HPolytope& F_exact, const geometry::HPolytope& templ,
                                       const ApproxOptions& opts = {});

/// {x | F_t diag(sigma)^{-1} (x - x_off) <= f_t}
geometry::HPolytope recover(const geometry::HPolytope& templ, const ApproxSolution& sol);

/// The recovered set as an affine image of the template, for certification.
geometry::AffineSet as_affine(const geometry::HPolytope& templ, const ApproxSolution& sol);

/// Solve and recover.
std::pair<ApproxSolution, geometry::HPolytope> inner_approximate(const geometry::HPolytope& F_exact,
                                                                 const geometry::HPolytope& templ,
                                                                 const ApproxOptions& opts = {});

}  // namespace shmpc::condense
