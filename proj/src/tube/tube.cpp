#include "shmpc/tube/tube.hpp"

#include "shmpc/error.hpp"
#include "shmpc/geometry/serialize.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <complex>

namespace shmpc::tube {

using geometry::HPolytope;
using geometry::Zonotope;

void LTISystem::validate() const {
  if (A.rows() != A.cols()) throw Error(ErrorKind::DimMismatch, "A must be square");
  if (B.rows() != A.rows()) throw Error(ErrorKind::DimMismatch, "B rows must match A");
  if (!(tau > 0.0)) throw Error(ErrorKind::InvalidArgument, "sample time must be positive");
}

Mat riccati_residual(const LTISystem& sys, const Mat& Q, const Mat& R, const Mat& P) {
  const Mat& A = sys.A;
  const Mat& B = sys.B;
  const Mat BtPA = B.transpose() * P * A;
  return A.transpose() * P * A - P - BtPA.transpose() * (R + B.transpose() * P * B).ldlt().solve(BtPA) + Q;
}

LqrResult dlqr(const LTISystem& sys, const Mat& Q, const Mat& R, double tol, int max_iterations) {
  sys.validate();
  const Mat& A = sys.A;
  const Mat& B = sys.B;
  if (Q.rows() != sys.n() || Q.cols() != sys.n() || R.rows() != sys.m() || R.cols() != sys.m())
    throw Error(ErrorKind::DimMismatch, "LQR weights do not match system");
  LqrResult out;
  Mat P = Q;
  for (int it = 1; it <= max_iterations; ++it) {
    const Mat BtPA = B.transpose() * P * A;
    const Mat S = R + B.transpose() * P * B;
    Mat Pn = Q + A.transpose() * P * A - BtPA.transpose() * S.ldlt().solve(BtPA);
    Pn = 0.5 * (Pn + Pn.transpose());
    if (!Pn.allFinite() || Pn.norm() > 1e30)
      throw Error(ErrorKind::NoConvergence, "Riccati iteration diverged (pair not stabilizable?)");
    const double change = (Pn - P).norm();
    P = std::move(Pn);
    if (change <= tol * std::max(1.0, P.norm())) {
      out.iterations = it;
      out.P = P;
      out.K = (R + B.transpose() * P * B).ldlt().solve(B.transpose() * P * A);
      if (spectral_radius(A - B * out.K) >= 1.0)
        throw Error(ErrorKind::NoConvergence, "closed loop is not Schur stable");
      return out;
    }
  }
  throw Error(ErrorKind::NoConvergence, "Riccati iteration did not converge");
}

const char* to_string(RpiMethod m) { return m == RpiMethod::Scaled ? "scaled" : "modal"; }

namespace {

// Real basis T with T^{-1} A T block diagonal (1x1 and 2x2 rotation-scaling blocks).
Mat modal_basis(const Mat& A) {
  Eigen::EigenSolver<Mat> es(A);
  const Eigen::Index n = A.rows();
  Mat T(n, n);
  Eigen::Index col = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const std::complex<double> lam = es.eigenvalues()(i);
    const Eigen::VectorXcd v = es.eigenvectors().col(i);
    if (std::abs(lam.imag()) <= 1e-12 * std::max(1.0, std::abs(lam))) {
      T.col(col++) = v.real().normalized();
    } else if (lam.imag() > 0) {
      const double s = v.norm();
      T.col(col++) = v.real() / s;
      T.col(col++) = v.imag() / s;
    }
  }
  if (col != n) throw Error(ErrorKind::NoConvergence, "modal basis: unpaired complex eigenvalues");
  Eigen::FullPivLU<Mat> lu(T);
  if (!lu.isInvertible() || 1.0 / lu.rcond() > 1e10)
    throw Error(ErrorKind::NoConvergence, "modal basis: A_K is not safely diagonalizable");
  return T;
}

bool facet_contained(const Zonotope& inner, const Zonotope& outer, double alpha, double tol) {
  const Mat N = outer.facet_normals();
  for (Eigen::Index i = 0; i < N.rows(); ++i) {
    const Vec a = N.row(i).transpose();
    if (inner.support(a) > alpha * outer.support(a) + tol) return false;
  }
  return true;
}

Zonotope concat_terms(const Mat& AK, const Zonotope& W, int s) {
  const Eigen::Index g = W.num_generators();
  Mat G(W.dim(), g * s);
  Mat Gj = W.generators();
  for (int j = 0; j < s; ++j) {
    G.middleCols(j * g, g) = Gj;
    Gj = AK * Gj;
  }
  return Zonotope(Vec::Zero(W.dim()), G);
}

RpiSet rpi_scaled(const Mat& AK, const Zonotope& W, const RpiOptions& opts) {
  const double tol = 1e-12 * std::max(1.0, W.interval_radius().maxCoeff());
  Zonotope AsW = W.linear_map(AK);
  for (int s = 1; s <= opts.max_terms; ++s) {
    if (facet_contained(AsW, W, opts.alpha, tol)) {
      RpiSet out;
      out.Z = concat_terms(AK, W, s).scaled(1.0 / (1.0 - opts.alpha));
      out.alpha = opts.alpha;
      out.s_rpi = s;
      out.method = RpiMethod::Scaled;
      return out;
    }
    AsW = AsW.linear_map(AK);
  }
  throw Error(ErrorKind::NoConvergence, "RPI: s exceeded the term cap");
}

// Tail bound for A^t W + A_K E in E with E = T diag(e) B_inf:
// e = (I - |M|)^{-1} delta, delta_r the modal extents of A^t W.
Vec modal_tail(const Mat& absM, const Mat& Tinv, const Mat& AtG) {
  const Vec delta = (Tinv * AtG).cwiseAbs().rowwise().sum();
  const Eigen::Index n = absM.rows();
  Vec e = (Mat::Identity(n, n) - absM).fullPivLu().solve(delta);
  // Strict slack against round-off in the certificate.
  return e * (1.0 + 1e-9) + Vec::Constant(n, 1e-15);
}

RpiSet rpi_modal(const Mat& AK, const Zonotope& W, const RpiOptions& opts) {
  const Mat T = modal_basis(AK);
  const Mat Tinv = T.inverse();
  const Mat absM = (Tinv * AK * T).cwiseAbs();
  if (spectral_radius(absM) >= 1.0)
    throw Error(ErrorKind::NoConvergence, "RPI: modal bound does not contract for this A_K");
  const Eigen::Index n = AK.rows();
  Vec extent = Vec::Zero(n);  // modal extents of sum_{j<t} A^j W
  Mat Gt = W.generators();
  for (int t = 1; t <= opts.max_terms; ++t) {
    extent += (Tinv * Gt).cwiseAbs().rowwise().sum();
    Gt = AK * Gt;
    const Vec e = modal_tail(absM, Tinv, Gt);
    if ((e.array() <= opts.alpha * extent.array()).all()) {
      RpiSet out;
      const Zonotope Ft = concat_terms(AK, W, t);
      out.Z = Ft.minkowski_sum(Zonotope(Vec::Zero(n), T * e.asDiagonal()));
      out.alpha = opts.alpha;
      out.s_rpi = t;
      out.method = RpiMethod::Modal;
      out.T = T;
      out.e = e;
      return out;
    }
  }
  throw Error(ErrorKind::NoConvergence, "RPI: s exceeded the term cap");
}

}  // namespace

RpiSet compute_rpi(const Mat& AK, const Zonotope& W, const RpiOptions& opts) {
  if (AK.rows() != AK.cols() || AK.rows() != W.dim()) throw Error(ErrorKind::DimMismatch, "RPI dimensions");
  if (!(opts.alpha > 0.0 && opts.alpha < 1.0)) throw Error(ErrorKind::InvalidArgument, "alpha must be in (0,1)");
  if (W.center().cwiseAbs().maxCoeff() > 0.0) throw Error(ErrorKind::InvalidArgument, "W must be centered at 0");
  if (spectral_radius(AK) >= 1.0) throw Error(ErrorKind::InvalidArgument, "A_K must be Schur");
  const Zonotope Wc = W.compacted();
  if (Wc.num_generators() == 0) {
    RpiSet out;
    out.Z = Zonotope::point(Vec::Zero(W.dim()));
    out.alpha = opts.alpha;
    out.s_rpi = 0;
    return out;
  }
  if (Wc.rank() == Wc.dim()) return rpi_scaled(AK, Wc, opts);
  return rpi_modal(AK, Wc, opts);
}

bool certify_rpi(const Mat& AK, const Zonotope& W, const RpiSet& rpi, double tol) {
  const Zonotope Wc = W.compacted();
  const Eigen::Index n = AK.rows();
  if (rpi.Z.center().cwiseAbs().maxCoeff() > tol) return false;
  if (Wc.num_generators() == 0) return true;  // {0} is invariant for w = 0
  const double scale = std::max(1.0, rpi.Z.interval_radius().maxCoeff());
  if (rpi.method == RpiMethod::Scaled) {
    Zonotope expected = concat_terms(AK, Wc, rpi.s_rpi).scaled(1.0 / (1.0 - rpi.alpha));
    if (expected.generators().cols() != rpi.Z.generators().cols()) return false;
    if ((expected.generators() - rpi.Z.generators()).cwiseAbs().maxCoeff() > tol * scale) return false;
    Zonotope AsW = Wc;
    for (int j = 0; j < rpi.s_rpi; ++j) AsW = AsW.linear_map(AK);
    return facet_contained(AsW, Wc, rpi.alpha, tol);
  }
  const Zonotope Ft = concat_terms(AK, Wc, rpi.s_rpi);
  const Mat Eg = rpi.T * rpi.e.asDiagonal();
  if (rpi.Z.generators().cols() != Ft.num_generators() + n) return false;
  Mat expected(n, Ft.num_generators() + n);
  expected << Ft.generators(), Eg;
  if ((expected - rpi.Z.generators()).cwiseAbs().maxCoeff() > tol * scale) return false;
  // Facets of E are the rows of T^{-1}: need delta + |M| e <= e.
  const Mat Tinv = rpi.T.inverse();
  Mat At = Mat::Identity(n, n);
  for (int j = 0; j < rpi.s_rpi; ++j) At = AK * At;
  const Vec delta = (Tinv * At * Wc.generators()).cwiseAbs().rowwise().sum();
  const Vec tail = (Tinv * AK * rpi.T).cwiseAbs() * rpi.e;
  return ((delta + tail - rpi.e).array() <= 0.0).all();
}

double rpi_margin(const Mat& AK, const Zonotope& W, const Zonotope& Z, const Mat& directions) {
  const Zonotope lhs = Z.linear_map(AK).minkowski_sum(W);
  double worst = -std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < directions.rows(); ++i) {
    const Vec a = directions.row(i).transpose();
    worst = std::max(worst, lhs.support(a) - Z.support(a));
  }
  return worst;
}

TubeDesign design_tube(const LTISystem& sys, const Mat& Q, const Mat& R, const Zonotope& W,
                       const RpiOptions& opts) {
  const LqrResult lqr = dlqr(sys, Q, R);
  TubeDesign t;
  t.K = lqr.K;
  t.P_terminal = lqr.P;
  t.rpi = compute_rpi(sys.A - sys.B * lqr.K, W, opts);
  return t;
}

std::pair<HPolytope, HPolytope> tighten(const HPolytope& F, const HPolytope& X_T, const Zonotope& Z, const Mat& K,
                                        TubeProduct product) {
  if (F.dim() != Z.dim() + K.rows() || X_T.dim() != Z.dim() || K.cols() != Z.dim())
    throw Error(ErrorKind::DimMismatch, "tighten: dimensions");
  const Zonotope S = product == TubeProduct::Coupled ? geometry::graph_zonotope(Z, K) : geometry::product_zonotope(Z, K);
  return {geometry::erode(F, S), geometry::erode(X_T, Z)};
}

Json to_json(const TubeDesign& t) {
  Json j = {{"K", shmpc::to_json(t.K)},
            {"P_terminal", shmpc::to_json(t.P_terminal)},
            {"Z", geometry::to_json(t.rpi.Z)},
            {"alpha", t.rpi.alpha},
            {"s_rpi", t.rpi.s_rpi},
            {"method", to_string(t.rpi.method)}};
  if (t.rpi.method == RpiMethod::Modal) {
    j["modal_basis"] = shmpc::to_json(t.rpi.T);
    j["modal_extent"] = shmpc::to_json(t.rpi.e);
  }
  return j;
}

TubeDesign tube_from_json(const Json& j) {
  TubeDesign t;
  t.K = mat_from_json(j.at("K"));
  t.P_terminal = mat_from_json(j.at("P_terminal"));
  t.rpi.Z = geometry::zonotope_from_json(j.at("Z"));
  t.rpi.alpha = j.at("alpha").get<double>();
  t.rpi.s_rpi = j.at("s_rpi").get<int>();
  const std::string method = j.at("method").get<std::string>();
  if (method == "scaled") {
    t.rpi.method = RpiMethod::Scaled;
  } else if (method == "modal") {
    t.rpi.method = RpiMethod::Modal;
    t.rpi.T = mat_from_json(j.at("modal_basis"));
    t.rpi.e = vec_from_json(j.at("modal_extent"));
  } else {
    throw Error(ErrorKind::InvalidArgument, "unknown RPI method '" + method + "'");
  }
  return t;
}

}  // namespace shmpc::tube
