#pragma once

#include <vector>

#include <Eigen/Dense>

namespace dcsc {

/// Bottom-k eigenpairs of a Laplacian plus the next eigenvalue.
struct SpectralBasis {
  int k = 0;
  std::vector<double> eigenvalues;  ///< lambda_1 <= ... <= lambda_k
  double next_eigenvalue = 0.0;     ///< lambda_{k+1}
  Eigen::MatrixXd vectors;          ///< n x k, orthonormal columns

  int size() const { return static_cast<int>(vectors.rows()); }
  double lambda_k() const { return eigenvalues.back(); }
  double eigengap() const { return next_eigenvalue - eigenvalues.back(); }
};

}  // namespace dcsc
