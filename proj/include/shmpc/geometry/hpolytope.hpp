#pragma once

#include "shmpc/linalg.hpp"
#include "shmpc/lp/simplex.hpp"

#include <utility>
#include <vector>

namespace shmpc::geometry {

/// Convex polyhedron {x | normals * x <= offsets}.
///
/// Rows are scaled to unit Euclidean norm on construction and zero rows that
/// hold trivially are dropped. Construction runs a feasibility LP and throws
/// EmptyResult for an empty set. Boundedness is not required.
class HPolytope {
 public:
  /// The whole space R^0; placeholder for late initialization.
  HPolytope() = default;
  HPolytope(Mat normals, Vec offsets);

  /// Axis-aligned box lo <= x <= hi.
  static HPolytope box(const Vec& lo, const Vec& hi);

  Eigen::Index dim() const { return normals_.cols(); }
  Eigen::Index num_halfspaces() const { return normals_.rows(); }
  const Mat& normals() const { return normals_; }
  const Vec& offsets() const { return offsets_; }

  bool contains(const Vec& x, double tol = 1e-9) const;

  /// max direction'x over the set, as a full LP result (point, ray, multipliers).
  lp::SupportResult support(const Vec& direction) const;
  /// Support value; throws UnboundedSupport when the set is unbounded in `direction`.
  double support_value(const Vec& direction) const;

  bool is_bounded() const;
  /// Per-axis bounds; throws Unbounded.
  std::pair<Vec, Vec> bounding_box() const;
  /// Center of the largest inscribed ball (radius capped at 1).
  Vec interior_point() const;

 private:
  Mat normals_;
  Vec offsets_;
};

class Zonotope;

/// P - S (Pontryagin difference), one support evaluation per halfspace.
HPolytope erode(const HPolytope& P, const Zonotope& S);
HPolytope erode(const HPolytope& P, const HPolytope& S);

/// {xi | M xi in P}; M need not be invertible.
HPolytope preimage(const HPolytope& P, const Mat& M);

/// {M x | x in P} for invertible M.
HPolytope image_invertible(const HPolytope& P, const Mat& M);

/// Stacked halfspaces, no redundancy removal.
HPolytope intersect(const std::vector<HPolytope>& sets);

HPolytope cartesian_product(const HPolytope& P, const HPolytope& Q);

/// Drops halfspace i iff max normals_i'x over the remaining rows does not
/// exceed offsets_i + 1e-9. Rows are visited in order; removed rows stay removed.
HPolytope remove_redundancy(const HPolytope& P);

}  // namespace shmpc::geometry
