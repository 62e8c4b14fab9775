#include "shmpc/geometry/containment.hpp"

#include "shmpc/error.hpp"
#include "shmpc/lp/linear_program.hpp"

namespace shmpc::geometry {

AffineSet as_affine(const HPolytope& P) {
  return {Vec::Zero(P.dim()), Mat::Identity(P.dim(), P.dim()), P};
}

AffineSet as_affine(const Zonotope& Z) {
  const Eigen::Index g = Z.num_generators();
  return {Z.center(), Z.generators(), HPolytope::box(-Vec::Ones(g), Vec::Ones(g))};
}

namespace {

std::optional<ContainmentCertificate> certify_rowwise(const AffineSet& X, const AffineSet& Y,
                                                      const Eigen::FullPivLU<Mat>& lu) {
  ContainmentCertificate c;
  c.Gamma = lu.solve(X.map);
  c.beta = lu.solve(Y.center - X.center);
  const Mat& Hx = X.base.normals();
  const Vec& hx = X.base.offsets();
  const Mat& Hy = Y.base.normals();
  const Vec rhs = Y.base.offsets() + Hy * c.beta;
  const Mat HyG = Hy * c.Gamma;
  c.Lambda = Mat::Zero(Hy.rows(), Hx.rows());
  for (Eigen::Index r = 0; r < Hy.rows(); ++r) {
    const Vec a = HyG.row(r).transpose();
    if (a.isZero(0.0)) {
      if (rhs(r) < -1e-9) return std::nullopt;
      continue;
    }
    const lp::SupportResult s = lp::maximize(Hx, hx, a);
    if (s.status != lp::Status::Optimal || s.value > rhs(r) + 1e-9) return std::nullopt;
    c.Lambda.row(r) = s.multipliers.cwiseMax(0.0).transpose();
  }
  return c;
}

std::optional<ContainmentCertificate> certify_joint(const AffineSet& X, const AffineSet& Y) {
  const Mat& Hx = X.base.normals();
  const Vec& hx = X.base.offsets();
  const Mat& Hy = Y.base.normals();
  const Vec& hy = Y.base.offsets();
  const Eigen::Index d = X.map.rows(), r = X.map.cols(), p = Y.map.cols();
  const Eigen::Index qx = Hx.rows(), qy = Hy.rows();
  lp::LinearProgram prog;
  const int g0 = prog.add_variables(static_cast<int>(p * r), -lp::kInf, lp::kInf);
  const int b0 = prog.add_variables(static_cast<int>(p), -lp::kInf, lp::kInf);
  const int l0 = prog.add_variables(static_cast<int>(qy * qx), 0.0, lp::kInf);
  auto G = [&](Eigen::Index i, Eigen::Index j) { return g0 + static_cast<int>(i * r + j); };
  auto L = [&](Eigen::Index i, Eigen::Index j) { return l0 + static_cast<int>(i * qx + j); };
  using T = lp::LinearProgram::Term;
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = 0; j < r; ++j) {
      std::vector<T> t;
      for (Eigen::Index k = 0; k < p; ++k)
        if (Y.map(i, k) != 0.0) t.push_back({G(k, j), Y.map(i, k)});
      prog.add_row(t, lp::Sense::Equal, X.map(i, j));
    }
  for (Eigen::Index i = 0; i < d; ++i) {
    std::vector<T> t;
    for (Eigen::Index k = 0; k < p; ++k)
      if (Y.map(i, k) != 0.0) t.push_back({b0 + static_cast<int>(k), Y.map(i, k)});
    prog.add_row(t, lp::Sense::Equal, Y.center(i) - X.center(i));
  }
  for (Eigen::Index i = 0; i < qy; ++i)
    for (Eigen::Index j = 0; j < r; ++j) {
      std::vector<T> t;
      for (Eigen::Index k = 0; k < qx; ++k)
        if (Hx(k, j) != 0.0) t.push_back({L(i, k), Hx(k, j)});
      for (Eigen::Index k = 0; k < p; ++k)
        if (Hy(i, k) != 0.0) t.push_back({G(k, j), -Hy(i, k)});
      prog.add_row(t, lp::Sense::Equal, 0.0);
    }
  for (Eigen::Index i = 0; i < qy; ++i) {
    std::vector<T> t;
    for (Eigen::Index k = 0; k < qx; ++k)
      if (hx(k) != 0.0) t.push_back({L(i, k), hx(k)});
    for (Eigen::Index k = 0; k < p; ++k)
      if (Hy(i, k) != 0.0) t.push_back({b0 + static_cast<int>(k), -Hy(i, k)});
    prog.add_row(t, lp::Sense::LessEqual, hy(i));
  }
  const auto res = prog.solve();
  if (res.status == lp::Status::Infeasible) return std::nullopt;
  if (res.status != lp::Status::Optimal)
    throw Error(ErrorKind::NoConvergence, std::string("containment LP: ") + lp::to_string(res.status));
  ContainmentCertificate c;
  c.Gamma.resize(p, r);
  for (Eigen::Index i = 0; i < p; ++i)
    for (Eigen::Index j = 0; j < r; ++j) c.Gamma(i, j) = res.x(G(i, j));
  c.beta = res.x.segment(b0, p);
  c.Lambda.resize(qy, qx);
  for (Eigen::Index i = 0; i < qy; ++i)
    for (Eigen::Index j = 0; j < qx; ++j) c.Lambda(i, j) = std::max(0.0, res.x(L(i, j)));
  return c;
}

void check_dims(const AffineSet& S) {
  if (S.center.size() != S.map.rows() || S.map.cols() != S.base.dim())
    throw Error(ErrorKind::DimMismatch, "affine set dimensions");
}

}  // namespace

std::optional<ContainmentCertificate> certify_containment(const AffineSet& X, const AffineSet& Y,
                                                          ContainmentMethod method) {
  check_dims(X);
  check_dims(Y);
  if (X.map.rows() != Y.map.rows()) throw Error(ErrorKind::DimMismatch, "containment: ambient dimensions differ");
  if (method == ContainmentMethod::Auto && Y.map.rows() == Y.map.cols()) {
    Eigen::FullPivLU<Mat> lu(Y.map);
    if (lu.isInvertible()) return certify_rowwise(X, Y, lu);
  }
  return certify_joint(X, Y);
}

bool verify_certificate(const AffineSet& X, const AffineSet& Y, const ContainmentCertificate& c, double tol) {
  if (c.Lambda.size() && c.Lambda.minCoeff() < -tol) return false;
  const auto small = [tol](const Mat& M) { return M.size() == 0 || M.cwiseAbs().maxCoeff() <= tol; };
  if (!small(X.map - Y.map * c.Gamma)) return false;
  if (!small(Y.center - X.center - Y.map * c.beta)) return false;
  if (!small(c.Lambda * X.base.normals() - Y.base.normals() * c.Gamma)) return false;
  const Vec slack = Y.base.offsets() + Y.base.normals() * c.beta - c.Lambda * X.base.offsets();
  return slack.size() == 0 || slack.minCoeff() >= -tol;
}

bool contains(const HPolytope& P, const Zonotope& Z, double tol) {
  if (P.dim() != Z.dim()) throw Error(ErrorKind::DimMismatch, "containment dimensions");
  for (Eigen::Index i = 0; i < P.num_halfspaces(); ++i)
    if (Z.support(P.normals().row(i).transpose()) > P.offsets()(i) + tol) return false;
  return true;
}

bool contains(const HPolytope& outer, const HPolytope& inner, double tol) {
  if (outer.dim() != inner.dim()) throw Error(ErrorKind::DimMismatch, "containment dimensions");
  for (Eigen::Index i = 0; i < outer.num_halfspaces(); ++i) {
    const lp::SupportResult r = inner.support(outer.normals().row(i).transpose());
    if (r.status == lp::Status::Unbounded) return false;
    if (r.status != lp::Status::Optimal) throw Error(ErrorKind::NoConvergence, "containment support LP");
    if (r.value > outer.offsets()(i) + tol) return false;
  }
  return true;
}

}  // namespace shmpc::geometry
