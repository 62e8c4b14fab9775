#pragma once

#include "shmpc/geometry/hpolytope.hpp"
#include "shmpc/geometry/zonotope.hpp"

#include <optional>

namespace shmpc::geometry {

/// center + map * {z | base}: an affine image of an H-polytope.
struct AffineSet {
  Vec center;
  Mat map;
  HPolytope base;
};

AffineSet as_affine(const HPolytope& P);
/// A zonotope is the image of the unit box in generator space.
AffineSet as_affine(const Zonotope& Z);

/// Multipliers proving X subset Y:
///   Xmap = Ymap*Gamma, ycenter - xcenter = Ymap*beta,
///   Lambda*Hx = Hy*Gamma, Lambda*hx <= hy + Hy*beta, Lambda >= 0.
struct ContainmentCertificate {
  Mat Gamma;
  Vec beta;
  Mat Lambda;
};

enum class ContainmentMethod {
  Auto,    // per-row support LPs when Ymap is invertible, otherwise the joint LP
  JointLp  // one LP over (Gamma, beta, Lambda)
};

/// Sufficient condition only. std::nullopt means "not certified".
std::optional<ContainmentCertificate> certify_containment(const AffineSet& X, const AffineSet& Y,
                                                          ContainmentMethod method = ContainmentMethod::Auto);

/// Checks the four relations with absolute tolerance `tol`.
bool verify_certificate(const AffineSet& X, const AffineSet& Y, const ContainmentCertificate& c,
                        double tol = 1e-7);

/// Exact: every halfspace of P bounds Z's support function.
bool contains(const HPolytope& P, const Zonotope& Z, double tol = 1e-9);
/// Exact for bounded-in-direction inner sets: one support LP per row of outer.
bool contains(const HPolytope& outer, const HPolytope& inner, double tol = 1e-9);

}  // namespace shmpc::geometry
