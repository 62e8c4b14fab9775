#pragma once

#include "shmpc/linalg.hpp"

#include <random>
#include <vector>

namespace shmpc::geometry {

/// {center + generators * xi | ||xi||_inf <= 1}.
class Zonotope {
 public:
  Zonotope() = default;
  Zonotope(Vec center, Mat generators);

  /// The singleton {point}.
  static Zonotope point(const Vec& p);
  /// Axis-aligned box, one generator per axis.
  static Zonotope box(const Vec& lo, const Vec& hi);

  Eigen::Index dim() const { return center_.size(); }
  Eigen::Index num_generators() const { return generators_.cols(); }
  const Vec& center() const { return center_; }
  const Mat& generators() const { return generators_; }

  /// Exact: a'c + sum_i |a'g_i|.
  double support(const Vec& direction) const;
  /// Vertex attaining the support in `direction`.
  Vec support_point(const Vec& direction) const;

  Zonotope linear_map(const Mat& M) const;
  Zonotope scaled(double factor) const;
  Zonotope minkowski_sum(const Zonotope& other) const;
  /// Same set with zero generators removed.
  Zonotope compacted(double tol = 0.0) const;

  /// Half-widths of the axis-aligned bounding box.
  Vec interval_radius() const { return generators_.cwiseAbs().rowwise().sum(); }
  Eigen::Index rank(double tol = 1e-12) const;

  /// Point membership through a cutting-plane LP over separating directions.
  bool contains(const Vec& p, double tol = 1e-9) const;

  /// Facet normals (unit, both signs) of a full-dimensional zonotope with few generators.
  Mat facet_normals() const;

  /// center + G*xi with xi uniform in the unit box.
  template <class Rng>
  Vec sample(Rng& rng) const {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Vec xi(num_generators());
    for (Eigen::Index i = 0; i < xi.size(); ++i) xi(i) = u(rng);
    return center_ + generators_ * xi;
  }

  /// Vertices attained for the sign patterns of random directions (cheap vertex sample).
  template <class Rng>
  Vec sample_vertex(Rng& rng) const {
    std::normal_distribution<double> nd;
    Vec a(dim());
    for (Eigen::Index i = 0; i < a.size(); ++i) a(i) = nd(rng);
    return support_point(a);
  }

 private:
  Vec center_;
  Mat generators_;
};

/// Image of z under z -> (z, K z): center (c, Kc), generators (g_i, K g_i).
Zonotope graph_zonotope(const Zonotope& Z, const Mat& K);
/// Literal Cartesian product Z x (K Z): independent generator blocks.
Zonotope product_zonotope(const Zonotope& Z, const Mat& K);

}  // namespace shmpc::geometry
