#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <vector>

#include <Eigen/Dense>

#include "dcsc/common.hpp"
#include "dcsc/graph.hpp"
#include "dcsc/parallel.hpp"
#include "dcsc/spectral_basis.hpp"

namespace dcsc {

struct KmeansConfig {
  int restarts = 10;
  int max_iters = 100;
  double tol = 1e-6;  ///< relative improvement of the squared cost
  int workers = 1;    ///< threads for running restarts
};

/// Hard cluster assignment. The implied indicator matrix X has
/// X(i, j) = 1 / sqrt(s_j) on the members of cluster j.
struct Assignment {
  LabelVector labels;
  std::vector<int> cluster_sizes;
  double feature_cost = std::numeric_limits<double>::quiet_NaN();

  int k() const { return static_cast<int>(cluster_sizes.size()); }
  int size() const { return static_cast<int>(labels.size()); }

  static Assignment from_labels(LabelVector labels, int k) {
    Assignment a;
    a.cluster_sizes.assign(k, 0);
    for (int l : labels) {
      if (l < 0 || l >= k) throw ParameterError("assignment: label outside [0, k)");
      ++a.cluster_sizes[l];
    }
    a.labels = std::move(labels);
    return a;
  }
};

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

namespace detail {

inline double sum_squared_to_means(const RowMatrix& X, const LabelVector& labels, int k) {
  const auto d = X.cols();
  RowMatrix means = RowMatrix::Zero(k, d);
  std::vector<int> sizes(k, 0);
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    means.row(labels[i]) += X.row(i);
    ++sizes[labels[i]];
  }
  for (int c = 0; c < k; ++c)
    if (sizes[c] > 0) means.row(c) /= sizes[c];
  double total = 0.0;
  for (Eigen::Index i = 0; i < X.rows(); ++i) total += (X.row(i) - means.row(labels[i])).squaredNorm();
  return total;
}

}  // namespace detail

/// ||F - X X^T F||_F in centroid form: the square root of the sum of squared
/// distances to the cluster means.
inline double kmeans_cost(const Eigen::MatrixXd& F, const Assignment& a) {
  if (F.rows() != a.size()) throw ParameterError("kmeans_cost: row count != assignment size");
  return std::sqrt(detail::sum_squared_to_means(RowMatrix(F), a.labels, a.k()));
}

/// Dense n x k indicator matrix (tests and small oracles only).
inline Eigen::MatrixXd indicator_matrix(const Assignment& a) {
  Eigen::MatrixXd X = Eigen::MatrixXd::Zero(a.size(), a.k());
  for (int i = 0; i < a.size(); ++i) {
    const int c = a.labels[i];
    X(i, c) = 1.0 / std::sqrt(static_cast<double>(a.cluster_sizes[c]));
  }
  return X;
}

/// Cost of `a` measured on the exact spectral features U_k.
inline double evaluate_on_basis(const SpectralBasis& basis, const Assignment& a) {
  return kmeans_cost(basis.vectors, a);
}

/// k-means++ seeding: first centre uniform, the rest by D^2 sampling.
inline RowMatrix kmeanspp_seed(const RowMatrix& X, int k, Rng& rng) {
  const auto n = X.rows();
  RowMatrix centers(k, X.cols());
  std::uniform_int_distribution<Eigen::Index> first(0, n - 1);
  centers.row(0) = X.row(first(rng));
  std::vector<double> dist(n);
  for (Eigen::Index i = 0; i < n; ++i) dist[i] = (X.row(i) - centers.row(0)).squaredNorm();
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (int c = 1; c < k; ++c) {
    double total = 0.0;
    for (double v : dist) total += v;
    Eigen::Index pick = 0;
    if (total > 0.0) {
      double target = unif(rng) * total, acc = 0.0;
      pick = n - 1;
      for (Eigen::Index i = 0; i < n; ++i) {
        acc += dist[i];
        if (acc > target && dist[i] > 0.0) {
          pick = i;
          break;
        }
      }
    } else {
      pick = first(rng);
    }
    centers.row(c) = X.row(pick);
    for (Eigen::Index i = 0; i < n; ++i)
      dist[i] = std::min(dist[i], (X.row(i) - centers.row(c)).squaredNorm());
  }
  return centers;
}

/// Lloyd iterations from the given centres. When `trace` is set it receives
/// the k-means cost after every iteration.
inline Assignment lloyd(const RowMatrix& X, RowMatrix centers, const KmeansConfig& cfg,
                        std::vector<double>* trace = nullptr) {
  const auto n = X.rows();
  const auto d = X.cols();
  const int k = static_cast<int>(centers.rows());
  LabelVector labels(n, -1);
  std::vector<int> sizes(k, 0);
  double prev = std::numeric_limits<double>::infinity();
  double cost = prev;

  for (int iter = 0; iter < std::max(1, cfg.max_iters); ++iter) {
    bool changed = false;
    std::fill(sizes.begin(), sizes.end(), 0);
    for (Eigen::Index i = 0; i < n; ++i) {
      int best = 0;
      double best_d = (X.row(i) - centers.row(0)).squaredNorm();
      for (int c = 1; c < k; ++c) {
        const double dc = (X.row(i) - centers.row(c)).squaredNorm();
        if (dc < best_d) {
          best_d = dc;
          best = c;
        }
      }
      if (labels[i] != best) changed = true;
      labels[i] = best;
      ++sizes[best];
    }

    RowMatrix means = RowMatrix::Zero(k, d);
    for (Eigen::Index i = 0; i < n; ++i) means.row(labels[i]) += X.row(i);
    for (int c = 0; c < k; ++c)
      if (sizes[c] > 0) means.row(c) /= sizes[c];

    // Empty-cluster repair: the point farthest from its centre (within a
    // cluster of size >= 2) moves into the empty cluster.
    for (int c = 0; c < k; ++c) {
      if (sizes[c] > 0) continue;
      Eigen::Index far = -1;
      double far_d = -1.0;
      for (Eigen::Index i = 0; i < n; ++i) {
        if (sizes[labels[i]] < 2) continue;
        const double di = (X.row(i) - means.row(labels[i])).squaredNorm();
        if (di > far_d) {
          far_d = di;
          far = i;
        }
      }
      const int from = labels[far];
      means.row(from) = (means.row(from) * sizes[from] - X.row(far)) / (sizes[from] - 1);
      --sizes[from];
      labels[far] = c;
      sizes[c] = 1;
      means.row(c) = X.row(far);
      changed = true;
    }

    cost = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) cost += (X.row(i) - means.row(labels[i])).squaredNorm();
    if (trace) trace->push_back(std::sqrt(cost));
    centers = std::move(means);
    if (!changed || cost == 0.0) break;
    if (std::isfinite(prev) && (prev - cost) < cfg.tol * prev) break;
    prev = cost;
  }

  Assignment a;
  a.labels = std::move(labels);
  a.cluster_sizes = std::move(sizes);
  a.feature_cost = std::sqrt(cost);
  return a;
}

/// Best-of-restarts Lloyd from k-means++ seeds on the rows of F.
inline Assignment kmeans(const Eigen::MatrixXd& F, int k, const KmeansConfig& cfg,
                         std::uint64_t seed) {
  if (k < 1) throw ParameterError("kmeans: k must be >= 1");
  if (k > F.rows()) throw ParameterError("kmeans: k > n");
  if (cfg.restarts < 1) throw ParameterError("kmeans: restarts must be >= 1");
  if (!F.allFinite()) throw ParameterError("kmeans: features must be finite");
  const RowMatrix X(F);
  std::vector<Assignment> runs(cfg.restarts);
  parallel_for(runs.size(), cfg.workers, [&](std::size_t r) {
    Rng rng = make_rng(derive_seed(seed, stream::kmeans), static_cast<std::uint64_t>(r));
    runs[r] = lloyd(X, kmeanspp_seed(X, k, rng), cfg);
  });
  std::size_t best = 0;
  for (std::size_t r = 1; r < runs.size(); ++r)
    if (runs[r].feature_cost < runs[best].feature_cost) best = r;
  return std::move(runs[best]);
}

/// Adjusted Rand index between two labelings of the same nodes.
inline double adjusted_rand_index(const LabelVector& a, const LabelVector& b) {
  if (a.size() != b.size()) throw ParameterError("adjusted_rand_index: length mismatch");
  std::map<std::pair<int, int>, long long> joint;
  std::map<int, long long> ra, rb;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ++joint[{a[i], b[i]}];
    ++ra[a[i]];
    ++rb[b[i]];
  }
  auto c2 = [](long long x) { return 0.5 * static_cast<double>(x) * static_cast<double>(x - 1); };
  double sum_joint = 0.0, sum_a = 0.0, sum_b = 0.0;
  for (const auto& [key, v] : joint) sum_joint += c2(v);
  for (const auto& [key, v] : ra) sum_a += c2(v);
  for (const auto& [key, v] : rb) sum_b += c2(v);
  const double total = c2(static_cast<long long>(a.size()));
  const double expected = total > 0.0 ? sum_a * sum_b / total : 0.0;
  const double max_index = 0.5 * (sum_a + sum_b);
  if (max_index == expected) return 1.0;
  return (sum_joint - expected) / (max_index - expected);
}

}  // namespace dcsc
