#include "shmpc/geometry/hpolytope.hpp"

#include "shmpc/error.hpp"
#include "shmpc/geometry/zonotope.hpp"

#include <cmath>
#include <limits>

namespace shmpc::geometry {

namespace {

constexpr double kZeroRow = 1e-12;
constexpr double kFeasTol = 1e-9;

// max t s.t. F x + t <= f, t <= 1. Returns (t*, x*).
std::pair<double, Vec> chebyshev(const Mat& F, const Vec& f) {
  const Eigen::Index q = F.rows(), d = F.cols();
  Mat Fa(q + 1, d + 1);
  Vec fa(q + 1);
  Fa.topLeftCorner(q, d) = F;
  Fa.topRightCorner(q, 1).setOnes();
  fa.head(q) = f;
  Fa.bottomRows(1).setZero();
  Fa(q, d) = 1.0;
  fa(q) = 1.0;
  Vec obj = Vec::Zero(d + 1);
  obj(d) = 1.0;
  const lp::SupportResult r = lp::maximize(Fa, fa, obj);
  if (r.status == lp::Status::Infeasible) return {-std::numeric_limits<double>::infinity(), Vec()};
  if (r.status != lp::Status::Optimal)
    throw Error(ErrorKind::NoConvergence, std::string("feasibility LP: ") + lp::to_string(r.status));
  return {r.value, r.point.head(d)};
}

}  // namespace

HPolytope::HPolytope(Mat normals, Vec offsets) {
  if (normals.rows() != offsets.size())
    throw Error(ErrorKind::DimMismatch, "normals/offsets row count differ");
  std::vector<Eigen::Index> keep;
  for (Eigen::Index i = 0; i < normals.rows(); ++i) {
    if (!std::isfinite(offsets(i))) {
      if (offsets(i) > 0) continue;
      throw Error(ErrorKind::InvalidArgument, "offset is -inf or NaN");
    }
    const double nrm = normals.row(i).norm();
    if (nrm <= kZeroRow) {
      if (offsets(i) < -kFeasTol) throw Error(ErrorKind::EmptyResult, "trivially infeasible row 0'x <= b < 0");
      continue;
    }
    normals.row(i) /= nrm;
    offsets(i) /= nrm;
    keep.push_back(i);
  }
  normals_.resize(static_cast<Eigen::Index>(keep.size()), normals.cols());
  offsets_.resize(static_cast<Eigen::Index>(keep.size()));
  for (std::size_t k = 0; k < keep.size(); ++k) {
    normals_.row(k) = normals.row(keep[k]);
    offsets_(k) = offsets(keep[k]);
  }
  if (normals_.rows() > 0 && chebyshev(normals_, offsets_).first < -kFeasTol)
    throw Error(ErrorKind::EmptyResult, "halfspace system is infeasible");
}

HPolytope HPolytope::box(const Vec& lo, const Vec& hi) {
  if (lo.size() != hi.size()) throw Error(ErrorKind::DimMismatch, "box bounds differ in size");
  const Eigen::Index d = lo.size();
  Mat F(2 * d, d);
  F << Mat::Identity(d, d), -Mat::Identity(d, d);
  Vec f(2 * d);
  f << hi, -lo;
  return HPolytope(F, f);
}

bool HPolytope::contains(const Vec& x, double tol) const {
  if (x.size() != dim()) throw Error(ErrorKind::DimMismatch, "point dimension");
  if (normals_.rows() == 0) return true;
  return ((normals_ * x - offsets_).array() <= tol).all();
}

lp::SupportResult HPolytope::support(const Vec& direction) const {
  if (direction.size() != dim()) throw Error(ErrorKind::DimMismatch, "direction dimension");
  if (normals_.rows() == 0) {
    lp::SupportResult r;
    if (direction.isZero(0.0)) {
      r.status = lp::Status::Optimal;
      r.point = Vec::Zero(dim());
    } else {
      r.status = lp::Status::Unbounded;
      r.ray = direction;
      r.value = std::numeric_limits<double>::infinity();
    }
    return r;
  }
  return lp::maximize(normals_, offsets_, direction);
}

double HPolytope::support_value(const Vec& direction) const {
  const lp::SupportResult r = support(direction);
  if (r.status == lp::Status::Unbounded) throw Error(ErrorKind::UnboundedSupport, "support function is +inf");
  if (r.status != lp::Status::Optimal)
    throw Error(ErrorKind::NoConvergence, std::string("support LP: ") + lp::to_string(r.status));
  return r.value;
}

bool HPolytope::is_bounded() const {
  // Bounded iff the recession cone {d | F d <= 0} is {0}: check all 2d axis directions.
  for (Eigen::Index i = 0; i < dim(); ++i)
    for (double sgn : {1.0, -1.0}) {
      Vec e = Vec::Zero(dim());
      e(i) = sgn;
      if (support(e).status == lp::Status::Unbounded) return false;
    }
  return true;
}

std::pair<Vec, Vec> HPolytope::bounding_box() const {
  Vec lo(dim()), hi(dim());
  for (Eigen::Index i = 0; i < dim(); ++i) {
    Vec e = Vec::Zero(dim());
    e(i) = 1.0;
    try {
      hi(i) = support_value(e);
      lo(i) = -support_value(-e);
    } catch (const Error& err) {
      if (err.kind() == ErrorKind::UnboundedSupport) throw Error(ErrorKind::Unbounded, "polytope is unbounded");
      throw;
    }
  }
  return {lo, hi};
}

Vec HPolytope::interior_point() const {
  if (normals_.rows() == 0) return Vec::Zero(dim());
  return chebyshev(normals_, offsets_).second;
}

HPolytope erode(const HPolytope& P, const Zonotope& S) {
  if (P.dim() != S.dim()) throw Error(ErrorKind::DimMismatch, "erode: dimensions differ");
  Vec f = P.offsets();
  for (Eigen::Index i = 0; i < f.size(); ++i) f(i) -= S.support(P.normals().row(i).transpose());
  return HPolytope(P.normals(), f);
}

HPolytope erode(const HPolytope& P, const HPolytope& S) {
  if (P.dim() != S.dim()) throw Error(ErrorKind::DimMismatch, "erode: dimensions differ");
  Vec f = P.offsets();
  for (Eigen::Index i = 0; i < f.size(); ++i) f(i) -= S.support_value(P.normals().row(i).transpose());
  return HPolytope(P.normals(), f);
}

HPolytope preimage(const HPolytope& P, const Mat& M) {
  if (M.rows() != P.dim()) throw Error(ErrorKind::DimMismatch, "preimage: map rows must equal polytope dim");
  return HPolytope(P.normals() * M, P.offsets());
}

HPolytope image_invertible(const HPolytope& P, const Mat& M) {
  if (M.rows() != M.cols() || M.rows() != P.dim())
    throw Error(ErrorKind::DimMismatch, "image: map must be square of polytope dim");
  Eigen::FullPivLU<Mat> lu(M);
  if (!lu.isInvertible()) throw Error(ErrorKind::InvalidArgument, "image: map is singular");
  return HPolytope(P.normals() * lu.inverse(), P.offsets());
}

HPolytope intersect(const std::vector<HPolytope>& sets) {
  if (sets.empty()) throw Error(ErrorKind::InvalidArgument, "intersect: empty list");
  Eigen::Index rows = 0;
  for (const auto& S : sets) {
    if (S.dim() != sets.front().dim()) throw Error(ErrorKind::DimMismatch, "intersect: dimensions differ");
    rows += S.num_halfspaces();
  }
  Mat F(rows, sets.front().dim());
  Vec f(rows);
  Eigen::Index r = 0;
  for (const auto& S : sets) {
    F.middleRows(r, S.num_halfspaces()) = S.normals();
    f.segment(r, S.num_halfspaces()) = S.offsets();
    r += S.num_halfspaces();
  }
  return HPolytope(F, f);
}

HPolytope cartesian_product(const HPolytope& P, const HPolytope& Q) {
  Mat F = Mat::Zero(P.num_halfspaces() + Q.num_halfspaces(), P.dim() + Q.dim());
  F.topLeftCorner(P.num_halfspaces(), P.dim()) = P.normals();
  F.bottomRightCorner(Q.num_halfspaces(), Q.dim()) = Q.normals();
  Vec f(F.rows());
  f << P.offsets(), Q.offsets();
  return HPolytope(F, f);
}

HPolytope remove_redundancy(const HPolytope& P) {
  constexpr double kSlack = 1e-9;
  const Eigen::Index q = P.num_halfspaces();
  std::vector<bool> alive(q, true);
  std::vector<Eigen::Index> idx;
  idx.reserve(q);
  for (Eigen::Index i = 0; i < q; ++i) {
    idx.clear();
    for (Eigen::Index k = 0; k < q; ++k)
      if (k != i && alive[k]) idx.push_back(k);
    if (idx.empty()) continue;
    Mat F(static_cast<Eigen::Index>(idx.size()), P.dim());
    Vec f(F.rows());
    for (std::size_t k = 0; k < idx.size(); ++k) {
      F.row(k) = P.normals().row(idx[k]);
      f(k) = P.offsets()(idx[k]);
    }
    const lp::SupportResult r = lp::maximize(F, f, P.normals().row(i).transpose());
    if (r.status == lp::Status::Optimal && r.value <= P.offsets()(i) + kSlack) alive[i] = false;
    else if (r.status == lp::Status::IterationLimit)
      throw Error(ErrorKind::NoConvergence, "redundancy LP hit iteration limit");
  }
  idx.clear();
  for (Eigen::Index k = 0; k < q; ++k)
    if (alive[k]) idx.push_back(k);
  Mat F(static_cast<Eigen::Index>(idx.size()), P.dim());
  Vec f(F.rows());
  for (std::size_t k = 0; k < idx.size(); ++k) {
    F.row(k) = P.normals().row(idx[k]);
    f(k) = P.offsets()(idx[k]);
  }
  return HPolytope(F, f);
}

}  // namespace shmpc::geometry
