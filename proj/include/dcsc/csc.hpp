#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SVD>

#include "dcsc/filter.hpp"
#include "dcsc/kmeans.hpp"
#include "dcsc/laplacian.hpp"
#include "dcsc/signals.hpp"

namespace dcsc {

/// Origin of one feature column: the sequence step whose graph it was
/// filtered on and the random stream its raw signal came from.
struct ColumnTag {
  int step = 0;
  std::uint64_t stream = 0;

  friend bool operator==(const ColumnTag&, const ColumnTag&) = default;
};

/// n x d filtered random signals; rows are node features.
struct FeatureMatrix {
  Eigen::MatrixXd values;
  std::vector<ColumnTag> provenance;

  int rows() const { return static_cast<int>(values.rows()); }
  int cols() const { return static_cast<int>(values.cols()); }
};

/// d = round(factor * ln n), the usual desk-scale signal count.
inline int log_scaled_dimension(int n, double factor = 30.0) {
  return std::max(1, static_cast<int>(std::lround(factor * std::log(static_cast<double>(n)))));
}

struct CscConfig {
  int d = 64;
  FilterConfig filter;
  KmeansConfig kmeans;
  double report_t = 2.0;  ///< deviation t used for the reported cost bound
  int workers = 1;
};

struct CscFeatures {
  FeatureMatrix features;
  double lambda_k = 0.0;
  double eigencount = 0.0;
  int dichotomy_iters = 0;
  FilterPoly filter;
  bool d_below_k = false;  ///< allowed, but quality is no longer guaranteed
};

/// Approximate spectral features: a cold cut-off dichotomy whose accepting
/// iteration already yields h(L) R, returned as is.
inline CscFeatures csc_features(const LaplacianMatrix& L, int k, int d, const FilterConfig& cfg,
                                std::uint64_t seed, MatvecCounter& counter, int step = 1,
                                int workers = 1) {
  if (k < 1 || k >= L.size()) throw ParameterError("csc_features: need 1 <= k < n");
  if (d < 1) throw ParameterError("csc_features: d must be >= 1");
  const Eigen::MatrixXd R = random_signals(L.size(), d, seed);
  auto search = find_lambda_k(L, k, R, 1.0 / d, cfg, SearchInterval::cold(L), counter, workers);
  CscFeatures out;
  out.features.values = std::move(search.features);
  out.features.provenance.resize(d);
  for (int c = 0; c < d; ++c) out.features.provenance[c] = {step, static_cast<std::uint64_t>(c)};
  out.lambda_k = search.lambda_k;
  out.eigencount = search.estimate;
  out.dichotomy_iters = search.iterations;
  out.filter = std::move(search.filter);
  out.d_below_k = d < k;
  return out;
}

struct CscDiagnostics {
  double lambda_k = 0.0;
  double eigencount = 0.0;
  int dichotomy_iters = 0;
  std::uint64_t matvecs = 0;
  double wall_ms = 0.0;
  bool d_below_k = false;
  double bound_t = 2.0;
  /// 2 sqrt(k/d) (sqrt(k) + t): additive gap to the SC cost holding with
  /// probability at least 1 - exp(-t^2 / 2) for an ideal filter.
  double cost_bound_gap = 0.0;
};

struct CscResult {
  Assignment assignment;
  CscDiagnostics diagnostics;
  CscFeatures features;
};

inline double csc_cost_gap(int k, int d, double t) {
  return 2.0 * std::sqrt(static_cast<double>(k) / d) * (std::sqrt(static_cast<double>(k)) + t);
}

/// Static compressive spectral clustering: k-means on the rows of h(L) R.
inline CscResult csc_assign(const LaplacianMatrix& L, int k, const CscConfig& cfg, std::uint64_t seed) {
  const auto start = std::chrono::steady_clock::now();
  MatvecCounter counter;
  CscResult r;
  r.features = csc_features(L, k, cfg.d, cfg.filter, seed, counter, 1, cfg.workers);
  r.assignment = kmeans(r.features.features.values, k, cfg.kmeans, derive_seed(seed, stream::kmeans));
  auto& diag = r.diagnostics;
  diag.lambda_k = r.features.lambda_k;
  diag.eigencount = r.features.eigencount;
  diag.dichotomy_iters = r.features.dichotomy_iters;
  diag.matvecs = counter.count();
  diag.d_below_k = r.features.d_below_k;
  diag.bound_t = cfg.report_t;
  diag.cost_bound_gap = csc_cost_gap(k, cfg.d, cfg.report_t);
  diag.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return r;
}

/// Orthogonal alignment between exact and random features.
struct Alignment {
  Eigen::MatrixXd Q;      ///< d x d orthogonal
  Eigen::VectorXd sigma;  ///< the k singular values of R'
};

/// For R' = Q_L Sigma Q_R^T (k x d, k <= d) returns
/// Q = diag(Q_L, I_{d-k}) Q_R^T, for which
/// ||R' - I_{k x d} Q||_F = ||Sigma - I_{k x d}||_F.
inline Alignment alignment_Q(const Eigen::MatrixXd& Rprime) {
  const auto k = Rprime.rows();
  const auto d = Rprime.cols();
  if (k > d) throw ParameterError("alignment_Q: need k <= d");
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(Rprime, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Eigen::MatrixXd left = Eigen::MatrixXd::Identity(d, d);
  left.topLeftCorner(k, k) = svd.matrixU();
  return {left * svd.matrixV().transpose(), svd.singularValues()};
}

}  // namespace dcsc
