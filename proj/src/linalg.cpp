#include "shmpc/linalg.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <cstring>

namespace shmpc {

Mat augmented_matrix(const Mat& A, const Mat& B) {
  const auto n = A.rows();
  const auto m = B.cols();
  Mat M = Mat::Zero(n + m, n + m);
  M.topLeftCorner(n, n) = A;
  M.topRightCorner(n, m) = B;
  M.bottomRightCorner(m, m).setIdentity();
  return M;
}

double spectral_radius(const Mat& M) {
  if (M.size() == 0) return 0.0;
  Eigen::EigenSolver<Mat> es(M, false);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

Mat kron(const Mat& A, const Mat& B) {
  Mat K(A.rows() * B.rows(), A.cols() * B.cols());
  for (Eigen::Index i = 0; i < A.rows(); ++i)
    for (Eigen::Index j = 0; j < A.cols(); ++j)
      K.block(i * B.rows(), j * B.cols(), B.rows(), B.cols()) = A(i, j) * B;
  return K;
}

Mat block_diag(const Mat& A, const Mat& B) {
  Mat D = Mat::Zero(A.rows() + B.rows(), A.cols() + B.cols());
  D.topLeftCorner(A.rows(), A.cols()) = A;
  D.bottomRightCorner(B.rows(), B.cols()) = B;
  return D;
}

void zoh_discretize(const Mat& Ac, const Mat& Bc, double tau, Mat& A, Mat& B) {
  const auto n = Ac.rows();
  const auto m = Bc.cols();
  Mat M = Mat::Zero(n + m, n + m);
  M.topLeftCorner(n, n) = Ac * tau;
  M.topRightCorner(n, m) = Bc * tau;
  const Mat E = M.exp();
  A = E.topLeftCorner(n, n);
  B = E.topRightCorner(n, m);
}

namespace {
std::uint64_t fnv1a(std::uint64_t h, const void* data, std::size_t len) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < len; ++i) {
    h ^= p[i];
    h *= 1099511628211ULL;
  }
  return h;
}
}  // namespace

std::uint64_t hash_combine(std::uint64_t seed, const Mat& M) {
  const std::int64_t dims[2] = {M.rows(), M.cols()};
  seed = fnv1a(seed, dims, sizeof(dims));
  for (Eigen::Index j = 0; j < M.cols(); ++j)
    for (Eigen::Index i = 0; i < M.rows(); ++i) {
      double v = M(i, j);
      if (v == 0.0) v = 0.0;  // fold -0.0
      seed = fnv1a(seed, &v, sizeof(v));
    }
  return seed;
}

std::uint64_t hash_combine(std::uint64_t seed, double value) {
  if (value == 0.0) value = 0.0;
  return fnv1a(seed, &value, sizeof(value));
}

}  // namespace shmpc
