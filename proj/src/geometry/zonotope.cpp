#include "shmpc/geometry/zonotope.hpp"

#include "shmpc/error.hpp"
#include "shmpc/lp/simplex.hpp"

#include <cmath>
#include <vector>

namespace shmpc::geometry {

Zonotope::Zonotope(Vec center, Mat generators) : center_(std::move(center)), generators_(std::move(generators)) {
  if (generators_.cols() == 0) generators_.resize(center_.size(), 0);
  if (generators_.rows() != center_.size()) throw Error(ErrorKind::DimMismatch, "zonotope generators/center");
}

Zonotope Zonotope::point(const Vec& p) { return Zonotope(p, Mat(p.size(), 0)); }

Zonotope Zonotope::box(const Vec& lo, const Vec& hi) {
  if (lo.size() != hi.size()) throw Error(ErrorKind::DimMismatch, "box bounds differ in size");
  return Zonotope(0.5 * (lo + hi), (0.5 * (hi - lo)).asDiagonal().toDenseMatrix());
}

double Zonotope::support(const Vec& direction) const {
  if (direction.size() != dim()) throw Error(ErrorKind::DimMismatch, "direction dimension");
  return direction.dot(center_) + (generators_.transpose() * direction).cwiseAbs().sum();
}

Vec Zonotope::support_point(const Vec& direction) const {
  const Vec proj = generators_.transpose() * direction;
  Vec sgn(proj.size());
  for (Eigen::Index i = 0; i < proj.size(); ++i) sgn(i) = proj(i) >= 0 ? 1.0 : -1.0;
  return center_ + generators_ * sgn;
}

Zonotope Zonotope::linear_map(const Mat& M) const {
  if (M.cols() != dim()) throw Error(ErrorKind::DimMismatch, "linear map columns");
  return Zonotope(M * center_, M * generators_);
}

Zonotope Zonotope::scaled(double factor) const { return Zonotope(factor * center_, factor * generators_); }

Zonotope Zonotope::minkowski_sum(const Zonotope& other) const {
  if (other.dim() != dim()) throw Error(ErrorKind::DimMismatch, "minkowski sum");
  Mat G(dim(), num_generators() + other.num_generators());
  G << generators_, other.generators_;
  return Zonotope(center_ + other.center_, G);
}

Zonotope Zonotope::compacted(double tol) const {
  std::vector<Eigen::Index> keep;
  for (Eigen::Index i = 0; i < num_generators(); ++i)
    if (generators_.col(i).cwiseAbs().maxCoeff() > tol) keep.push_back(i);
  Mat G(dim(), static_cast<Eigen::Index>(keep.size()));
  for (std::size_t k = 0; k < keep.size(); ++k) G.col(k) = generators_.col(keep[k]);
  return Zonotope(center_, G);
}

Eigen::Index Zonotope::rank(double tol) const {
  if (num_generators() == 0) return 0;
  Eigen::JacobiSVD<Mat> svd(generators_);
  const Vec& sv = svd.singularValues();
  Eigen::Index r = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv(i) > tol * std::max(1.0, sv(0))) ++r;
  return r;
}

bool Zonotope::contains(const Vec& p, double tol) const {
  if (p.size() != dim()) throw Error(ErrorKind::DimMismatch, "point dimension");
  const Vec y = p - center_;
  const double scale = std::max(1.0, y.cwiseAbs().maxCoeff());
  if (y.cwiseAbs().maxCoeff() <= tol) return true;
  if (num_generators() == 0) return false;
  // y in G*B_inf  iff  max { a'y | a'v <= 1 for all vertices v } <= 1.
  // Vertices enter lazily as cuts; each master optimum a either separates y
  // (a'y > h(a)) or produces the vertex violating the cut.
  const auto h = [&](const Vec& a) { return (generators_.transpose() * a).cwiseAbs().sum(); };
  std::vector<Vec> cuts;
  for (Eigen::Index i = 0; i < dim(); ++i)
    for (double s : {1.0, -1.0}) {
      Vec e = Vec::Zero(dim());
      e(i) = s;
      cuts.push_back(support_point(e) - center_);
    }
  for (int iter = 0; iter < 2000; ++iter) {
    Mat V(static_cast<Eigen::Index>(cuts.size()), dim());
    for (std::size_t k = 0; k < cuts.size(); ++k) V.row(k) = cuts[k].transpose();
    const lp::SupportResult r = lp::maximize(V, Vec::Ones(V.rows()), y);
    Vec a;
    if (r.status == lp::Status::Unbounded) {
      a = r.ray;
      const double ha = h(a);
      if (ha <= 1e-12 * a.norm()) return a.dot(y) <= tol * a.norm() * scale;
    } else if (r.status == lp::Status::Optimal) {
      if (r.value <= 1.0 + tol) return true;
      a = r.point;
      if (a.dot(y) > (1.0 + tol) * h(a)) return false;
    } else {
      throw Error(ErrorKind::NoConvergence, "zonotope membership LP failed");
    }
    cuts.push_back(support_point(a) - center_);
  }
  throw Error(ErrorKind::NoConvergence, "zonotope membership did not converge");
}

Mat Zonotope::facet_normals() const {
  const Eigen::Index d = dim(), g = num_generators();
  if (d == 1) {
    Mat N(2, 1);
    N << 1.0, -1.0;
    return N;
  }
  if (rank() < d) throw Error(ErrorKind::InvalidArgument, "facet normals need a full-dimensional zonotope");
  std::vector<Vec> normals;
  std::vector<Eigen::Index> comb(d - 1);
  for (Eigen::Index i = 0; i < d - 1; ++i) comb[i] = i;
  std::size_t visited = 0;
  while (true) {
    if (++visited > 2000000) throw Error(ErrorKind::InvalidArgument, "too many generator subsets");
    Mat S(d, d - 1);
    for (Eigen::Index i = 0; i < d - 1; ++i) S.col(i) = generators_.col(comb[i]);
    Eigen::FullPivLU<Mat> lu(S.transpose());
    lu.setThreshold(1e-10);
    if (lu.rank() == d - 1) {
      Vec n = lu.kernel().col(0);
      n.normalize();
      bool dup = false;
      for (const auto& m : normals)
        if (std::abs(std::abs(m.dot(n)) - 1.0) < 1e-10) {
          dup = true;
          break;
        }
      if (!dup) normals.push_back(n);
    }
    Eigen::Index k = d - 2;
    while (k >= 0 && comb[k] == g - (d - 1) + k) --k;
    if (k < 0) break;
    ++comb[k];
    for (Eigen::Index i = k + 1; i < d - 1; ++i) comb[i] = comb[i - 1] + 1;
  }
  Mat N(2 * static_cast<Eigen::Index>(normals.size()), d);
  for (std::size_t i = 0; i < normals.size(); ++i) {
    N.row(2 * i) = normals[i].transpose();
    N.row(2 * i + 1) = -normals[i].transpose();
  }
  return N;
}

Zonotope graph_zonotope(const Zonotope& Z, const Mat& K) {
  if (K.cols() != Z.dim()) throw Error(ErrorKind::DimMismatch, "graph zonotope gain");
  Mat L(Z.dim() + K.rows(), Z.dim());
  L << Mat::Identity(Z.dim(), Z.dim()), K;
  return Z.linear_map(L);
}

Zonotope product_zonotope(const Zonotope& Z, const Mat& K) {
  if (K.cols() != Z.dim()) throw Error(ErrorKind::DimMismatch, "product zonotope gain");
  const Eigen::Index n = Z.dim(), m = K.rows(), g = Z.num_generators();
  Vec c(n + m);
  c << Z.center(), K * Z.center();
  Mat G = Mat::Zero(n + m, 2 * g);
  G.topLeftCorner(n, g) = Z.generators();
  G.bottomRightCorner(m, g) = K * Z.generators();
  return Zonotope(c, G);
}

}  // namespace shmpc::geometry
