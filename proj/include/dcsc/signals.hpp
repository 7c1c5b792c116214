#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include <Eigen/Dense>

#include "dcsc/common.hpp"

namespace dcsc {

/// n x cols i.i.d. zero-mean Gaussian block with the given variance. Column j
/// is drawn from its own stream (seed, first_stream + j), so any column can be
/// regenerated independently of the others.
inline Eigen::MatrixXd gaussian_signals(int n, int cols, double variance, std::uint64_t seed,
                                        std::uint64_t first_stream = 0) {
  if (n < 0 || cols < 0) throw ParameterError("gaussian_signals: negative shape");
  if (!(variance > 0.0)) throw ParameterError("gaussian_signals: variance must be > 0");
  Eigen::MatrixXd R(n, cols);
  const double sigma = std::sqrt(variance);
  const std::uint64_t base = derive_seed(seed, stream::signals);
  for (int c = 0; c < cols; ++c) {
    Rng rng(derive_seed(base, first_stream + static_cast<std::uint64_t>(c)));
    std::normal_distribution<double> normal(0.0, sigma);
    for (int i = 0; i < n; ++i) R(i, c) = normal(rng);
  }
  return R;
}

/// The n x d random signal matrix R: centred Gaussian entries of variance 1/d.
inline Eigen::MatrixXd random_signals(int n, int d, std::uint64_t seed) {
  if (d < 1) throw ParameterError("random_signals: d must be >= 1");
  return gaussian_signals(n, d, 1.0 / d, seed);
}

}  // namespace dcsc
