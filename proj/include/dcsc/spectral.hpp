#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <lapacke.h>

#include "dcsc/kmeans.hpp"
#include "dcsc/laplacian.hpp"
#include "dcsc/spectral_basis.hpp"

namespace dcsc {

inline constexpr int kDefaultDenseCap = 5000;

namespace detail {

/// First coordinate with non-negligible magnitude made positive.
inline void fix_sign(Eigen::Ref<Eigen::VectorXd> v) {
  const double scale = v.cwiseAbs().maxCoeff();
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (std::abs(v[i]) > 1e-10 * scale) {
      if (v[i] < 0.0) v = -v;
      return;
    }
  }
}

}  // namespace detail

/// Bottom-k eigenpairs and lambda_{k+1} of a Laplacian via a dense
/// subset-eigensolver (LAPACK dsyevr). Baseline and test oracle only.
inline SpectralBasis eigendecompose(const LaplacianMatrix& L, int k, int cap = kDefaultDenseCap) {
  const int n = L.size();
  if (k < 1 || k >= n) throw ParameterError("eigendecompose: need 1 <= k < n");
  if (n > cap)
    throw CapacityError("eigendecompose: n = " + std::to_string(n) + " exceeds the dense cap " +
                        std::to_string(cap) + "; use the compressive (CSC) path instead");
  Eigen::MatrixXd A = L.dense();
  const int want = k + 1;
  std::vector<double> w(n);
  Eigen::MatrixXd Z(n, want);
  std::vector<lapack_int> support(2 * static_cast<std::size_t>(want));
  lapack_int found = 0;
  const lapack_int info =
      LAPACKE_dsyevr(LAPACK_COL_MAJOR, 'V', 'I', 'U', n, A.data(), n, 0.0, 0.0, 1, want, 0.0,
                     &found, w.data(), Z.data(), n, support.data());
  if (info != 0 || found != want)
    throw Error("eigendecompose: LAPACK dsyevr failed (info = " + std::to_string(info) + ")");
  SpectralBasis basis;
  basis.k = k;
  basis.eigenvalues.assign(w.begin(), w.begin() + k);
  basis.next_eigenvalue = w[k];
  basis.vectors = Z.leftCols(k);
  for (int c = 0; c < k; ++c) detail::fix_sign(basis.vectors.col(c));
  return basis;
}

/// U_k U_k^T X without forming the n x n projector.
inline Eigen::MatrixXd ideal_projector_apply(const SpectralBasis& basis, const Eigen::MatrixXd& X) {
  if (X.rows() != basis.size()) throw ParameterError("ideal_projector_apply: row count mismatch");
  return basis.vectors * (basis.vectors.transpose() * X);
}

/// ||H_a - H_b||_F from k x k Gram products, never forming n x n projectors.
///
/// 2k - 2 ||U_a^T U_b||_F^2 equals 2 ||U_b - U_a U_a^T U_b||_F^2; the
/// residual form is used because it does not cancel for nearby subspaces.
inline double spectral_similarity(const SpectralBasis& a, const SpectralBasis& b) {
  if (a.size() != b.size() || a.k != b.k)
    throw ParameterError("spectral_similarity: bases differ in n or k");
  if (a.vectors == b.vectors) return 0.0;
  const Eigen::MatrixXd overlap = a.vectors.transpose() * b.vectors;
  const double residual = (b.vectors - a.vectors * overlap).squaredNorm();
  return std::sqrt(std::max(0.0, 2.0 * residual));
}

/// ||L_a - L_b||_F over the union of the two sparsity patterns.
inline double edge_similarity(const LaplacianMatrix& a, const LaplacianMatrix& b) {
  if (a.variant() != b.variant()) throw ParameterError("edge_similarity: Laplacian variant mismatch");
  if (a.size() != b.size()) throw ParameterError("edge_similarity: size mismatch");
  SparseMatrix diff = a.matrix() - b.matrix();
  return diff.norm();
}

/// Eigengap min{lambda_k^t, lambda_{k+1}^{t-1} - lambda_k^t} controlling how
/// far the span of the bottom-k eigenvectors can rotate.
inline double perturbation_eigengap(const SpectralBasis& previous, const SpectralBasis& current) {
  return std::min(current.lambda_k(), previous.next_eigenvalue - current.lambda_k());
}

/// Spectral clustering: k-means on the rows of U_k. `feature_cost` of the
/// result is the SC cost.
inline Assignment sc_assign(const SpectralBasis& basis, const KmeansConfig& cfg, std::uint64_t seed) {
  return kmeans(basis.vectors, basis.k, cfg, seed);
}

inline Assignment sc_assign(const LaplacianMatrix& L, int k, const KmeansConfig& cfg,
                            std::uint64_t seed, int cap = kDefaultDenseCap) {
  return sc_assign(eigendecompose(L, k, cap), cfg, seed);
}

}  // namespace dcsc
