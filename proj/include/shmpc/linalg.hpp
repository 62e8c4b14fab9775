#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <string>

namespace shmpc {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

/// Block matrix [[A, B], [0, I]] used to propagate (state, held input) pairs.
Mat augmented_matrix(const Mat& A, const Mat& B);

/// Largest eigenvalue modulus.
double spectral_radius(const Mat& M);

/// Kronecker product of two dense matrices.
Mat kron(const Mat& A, const Mat& B);

/// Block diagonal stacking diag(A, B).
Mat block_diag(const Mat& A, const Mat& B);

/// Zero-order-hold discretization of x' = Ac x + Bc u.
void zoh_discretize(const Mat& Ac, const Mat& Bc, double tau, Mat& A, Mat& B);

/// FNV-1a over the raw bytes of the coefficients; stable within one build.
std::uint64_t hash_combine(std::uint64_t seed, const Mat& M);
std::uint64_t hash_combine(std::uint64_t seed, double value);

}  // namespace shmpc
