#pragma once

#include <cmath>
#include <string_view>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "dcsc/graph.hpp"

namespace dcsc {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

enum class LaplacianVariant { combinatorial, normalized };

inline std::string_view to_string(LaplacianVariant v) {
  return v == LaplacianVariant::combinatorial ? "combinatorial" : "normalized";
}

inline LaplacianVariant parse_variant(std::string_view s) {
  if (s == "combinatorial") return LaplacianVariant::combinatorial;
  if (s == "normalized") return LaplacianVariant::normalized;
  throw ParameterError("unknown Laplacian variant '" + std::string(s) +
                       "' (expected combinatorial|normalized)");
}

/// Sparse symmetric graph Laplacian together with a cheap upper bound on its
/// largest eigenvalue.
class LaplacianMatrix {
 public:
  LaplacianMatrix(LaplacianVariant variant, SparseMatrix matrix, double lambda_max_bound)
      : variant_(variant), matrix_(std::move(matrix)), lambda_max_bound_(lambda_max_bound) {}

  LaplacianVariant variant() const { return variant_; }
  const SparseMatrix& matrix() const { return matrix_; }
  double lambda_max_bound() const { return lambda_max_bound_; }
  int size() const { return static_cast<int>(matrix_.rows()); }
  Matrix dense() const { return Matrix(matrix_); }

 private:
  LaplacianVariant variant_;
  SparseMatrix matrix_;
  double lambda_max_bound_;
};

/// Combinatorial L = D - W (bound 2 * max degree) or normalized
/// L = I - D^{-1/2} W D^{-1/2} (bound 2). Isolated nodes get an all-zero row
/// in the normalized variant.
inline LaplacianMatrix laplacian(const Graph& g, LaplacianVariant variant) {
  const int n = g.num_nodes();
  std::vector<Eigen::Triplet<double>> entries;
  entries.reserve(2 * g.num_edges() + static_cast<std::size_t>(n));
  if (variant == LaplacianVariant::combinatorial) {
    for (int i = 0; i < n; ++i)
      if (g.degree(i) > 0.0) entries.emplace_back(i, i, g.degree(i));
    for (const auto& e : g.edges()) {
      entries.emplace_back(e.i, e.j, -e.w);
      entries.emplace_back(e.j, e.i, -e.w);
    }
  } else {
    std::vector<double> inv_sqrt(n, 0.0);
    for (int i = 0; i < n; ++i) {
      if (g.degree(i) > 0.0) {
        inv_sqrt[i] = 1.0 / std::sqrt(g.degree(i));
        entries.emplace_back(i, i, 1.0);
      }
    }
    for (const auto& e : g.edges()) {
      const double v = -e.w * inv_sqrt[e.i] * inv_sqrt[e.j];
      entries.emplace_back(e.i, e.j, v);
      entries.emplace_back(e.j, e.i, v);
    }
  }
  SparseMatrix L(n, n);
  L.setFromTriplets(entries.begin(), entries.end());
  L.makeCompressed();
  double bound = 2.0;
  if (variant == LaplacianVariant::combinatorial) {
    bound = 2.0 * g.max_degree();
    if (bound <= 0.0) bound = 1.0;  // edgeless: spectrum is {0}
  }
  return {variant, std::move(L), bound};
}

}  // namespace dcsc
