#pragma once

#include "shmpc/geometry/hpolytope.hpp"
#include "shmpc/geometry/zonotope.hpp"
#include "shmpc/json_util.hpp"
#include "shmpc/linalg.hpp"

#include <utility>

namespace shmpc::tube {

struct LTISystem {
  Mat A;
  Mat B;
  double tau = 1.0;

  Eigen::Index n() const { return A.rows(); }
  Eigen::Index m() const { return B.cols(); }
  /// Throws DimMismatch for inconsistent shapes.
  void validate() const;
};

struct LqrResult {
  Mat K;
  Mat P;
  int iterations = 0;
};

/// Riccati fixed-point iteration from P = Q to relative tolerance `tol`.
/// u = -K x. Throws NoConvergence when the iteration diverges or stalls.
LqrResult dlqr(const LTISystem& sys, const Mat& Q, const Mat& R, double tol = 1e-12, int max_iterations = 200000);

/// A'PA - P - A'PB (R + B'PB)^{-1} B'PA + Q
Mat riccati_residual(const LTISystem& sys, const Mat& Q, const Mat& R, const Mat& P);

enum class RpiMethod {
  Scaled,  // smallest s with A^s W in alpha W, Z = (1-alpha)^{-1} sum_{j<s} A^j W
  Modal    // Z = sum_{j<s} A^j W  +  parallelotope bound on the tail (degenerate W)
};

const char* to_string(RpiMethod m);

struct RpiOptions {
  double alpha = 1e-6;
  int max_terms = 2000;
};

/// Outer approximation of the minimal RPI set together with the data of its
/// invariance certificate.
struct RpiSet {
  geometry::Zonotope Z;
  double alpha = 0.0;
  int s_rpi = 0;
  RpiMethod method = RpiMethod::Scaled;
  Mat T;  // Modal: real modal basis of A_K
  Vec e;  // Modal: tail bound T*diag(e)*B_inf
};

/// Uses the scaled construction when W is full dimensional, otherwise the
/// modal one. Throws NoConvergence when s exceeds opts.max_terms.
RpiSet compute_rpi(const Mat& AK, const geometry::Zonotope& W, const RpiOptions& opts = {});

/// Checks A_K Z + W in Z through the construction's own certificate:
/// A^s W in alpha W on W's facets (Scaled), or A^s W + A_K E in E on E's
/// facets (Modal). Both are exact sufficient conditions.
bool certify_rpi(const Mat& AK, const geometry::Zonotope& W, const RpiSet& rpi, double tol = 1e-9);

/// max_a  h_{A_K Z + W}(a) - h_Z(a)  over the rows of `directions`.
/// With Z's facet normals this is an exact invariance test.
double rpi_margin(const Mat& AK, const geometry::Zonotope& W, const geometry::Zonotope& Z, const Mat& directions);

struct TubeDesign {
  Mat K;
  Mat P_terminal;
  RpiSet rpi;

  const geometry::Zonotope& Z() const { return rpi.Z; }
};

/// LQR gain and terminal weight plus the RPI tube for A - BK.
TubeDesign design_tube(const LTISystem& sys, const Mat& Q, const Mat& R, const geometry::Zonotope& W,
                       const RpiOptions& opts = {});

enum class TubeProduct {
  Coupled,   // {(z, Kz) | z in Z}
  Cartesian  // Z x KZ
};

/// F_bar = F - (Z x KZ), X_T_bar = X_T - Z.
std::pair<geometry::HPolytope, geometry::HPolytope> tighten(const geometry::HPolytope& F,
                                                            const geometry::HPolytope& X_T,
                                                            const geometry::Zonotope& Z, const Mat& K,
                                                            TubeProduct product = TubeProduct::Coupled);

Json to_json(const TubeDesign& t);
TubeDesign tube_from_json(const Json& j);

}  // namespace shmpc::tube
