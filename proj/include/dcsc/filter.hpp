#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "dcsc/common.hpp"
#include "dcsc/laplacian.hpp"
#include "dcsc/parallel.hpp"
#include "dcsc/signals.hpp"

namespace dcsc {

enum class Damping { none, jackson };
enum class FilterShape { step, sigmoid };

inline std::string_view to_string(Damping d) { return d == Damping::none ? "none" : "jackson"; }
inline Damping parse_damping(std::string_view s) {
  if (s == "none") return Damping::none;
  if (s == "jackson") return Damping::jackson;
  throw ParameterError("unknown damping '" + std::string(s) + "' (expected none|jackson)");
}
inline std::string_view to_string(FilterShape s) { return s == FilterShape::step ? "step" : "sigmoid"; }
inline FilterShape parse_shape(std::string_view s) {
  if (s == "step") return FilterShape::step;
  if (s == "sigmoid") return FilterShape::sigmoid;
  throw ParameterError("unknown filter shape '" + std::string(s) + "' (expected step|sigmoid)");
}

/// Low-pass filter design and cut-off search settings.
///
/// The polynomial order and sigmoid steepness are free parameters; the
/// defaults are tuned for graphs of up to ~10^4 nodes.
struct FilterConfig {
  int order = 100;
  Damping damping = Damping::jackson;
  FilterShape shape = FilterShape::step;
  double sigmoid_steepness = 200.0;  ///< slope at the cut-off, in units of 1/lambda_max
  double eigencount_tol = 0.1;       ///< accept when |count - k| <= tol * k
  double interval_tol = 1e-3;        ///< stop bisecting below this width (fraction of lambda_max)
  int max_iters = 20;
};

/// Cumulative number of sparse matrix-vector products.
class MatvecCounter {
 public:
  MatvecCounter() = default;
  MatvecCounter(const MatvecCounter& other) : count_(other.count()) {}
  MatvecCounter& operator=(const MatvecCounter& other) {
    count_ = other.count();
    return *this;
  }
  void add(std::uint64_t n) { count_.fetch_add(n, std::memory_order_relaxed); }
  std::uint64_t count() const { return count_.load(std::memory_order_relaxed); }

 private:
  std::atomic<std::uint64_t> count_{0};
};

/// Truncated Chebyshev expansion h(lambda) = sum_j c_j T_j(2 lambda / lambda_max - 1).
/// c_0 is stored already halved.
class FilterPoly {
 public:
  FilterPoly() = default;
  FilterPoly(std::vector<double> coefficients, double lambda_c, double lambda_max,
             Damping damping = Damping::none)
      : coeffs_(std::move(coefficients)), lambda_c_(lambda_c), lambda_max_(lambda_max), damping_(damping) {
    if (coeffs_.empty()) throw ParameterError("FilterPoly: need at least one coefficient");
    if (!(lambda_max_ > 0.0)) throw ParameterError("FilterPoly: lambda_max must be > 0");
  }

  int order() const { return static_cast<int>(coeffs_.size()) - 1; }
  const std::vector<double>& coefficients() const { return coeffs_; }
  double lambda_c() const { return lambda_c_; }
  double lambda_max() const { return lambda_max_; }
  Damping damping() const { return damping_; }

  /// Clenshaw evaluation.
  double operator()(double lambda) const {
    const double x = 2.0 * lambda / lambda_max_ - 1.0;
    double b1 = 0.0, b2 = 0.0;
    for (int j = order(); j >= 1; --j) {
      const double b0 = coeffs_[j] + 2.0 * x * b1 - b2;
      b2 = b1;
      b1 = b0;
    }
    return coeffs_[0] + x * b1 - b2;
  }

 private:
  std::vector<double> coeffs_{1.0};
  double lambda_c_ = 0.0;
  double lambda_max_ = 1.0;
  Damping damping_ = Damping::none;
};

/// Jackson kernel weights g_0..g_m.
inline std::vector<double> jackson_factors(int m) {
  std::vector<double> g(m + 1);
  const double alpha = std::numbers::pi / (m + 2);
  for (int j = 0; j <= m; ++j) {
    g[j] = ((1.0 - j / (m + 2.0)) * std::sin(alpha) * std::cos(j * alpha) +
            std::cos(alpha) * std::sin(j * alpha) / (m + 2.0)) /
           std::sin(alpha);
  }
  return g;
}

/// Order-m Chebyshev approximation on [0, lambda_max] of the low-pass response
/// with cut-off lambda_c. The step shape uses closed-form coefficients; the
/// sigmoid shape uses Chebyshev-Gauss quadrature. A cut-off outside
/// (0, lambda_max) saturates to the all-stop or all-pass response.
inline FilterPoly cheb_coeffs(double lambda_c, double lambda_max, int m,
                              Damping damping = Damping::jackson,
                              FilterShape shape = FilterShape::step, double steepness = 200.0) {
  if (m < 0) throw ParameterError("cheb_coeffs: order must be >= 0");
  if (!(lambda_max > 0.0)) throw ParameterError("cheb_coeffs: lambda_max must be > 0");
  std::vector<double> c(m + 1, 0.0);
  constexpr double pi = std::numbers::pi;
  if (shape == FilterShape::step) {
    // 1{x <= a} with x = cos(theta): the pass band is theta in [acos(a), pi].
    const double a = std::clamp(2.0 * lambda_c / lambda_max - 1.0, -1.0, 1.0);
    const double theta_c = std::acos(a);
    c[0] = (pi - theta_c) / pi;
    for (int j = 1; j <= m; ++j) c[j] = -2.0 * std::sin(j * theta_c) / (j * pi);
  } else {
    const int nodes = std::max(1024, 8 * (m + 1));
    for (int l = 0; l < nodes; ++l) {
      const double theta = pi * (l + 0.5) / nodes;
      const double lambda = 0.5 * lambda_max * (std::cos(theta) + 1.0);
      const double f = 1.0 / (1.0 + std::exp(steepness * (lambda - lambda_c) / lambda_max));
      for (int j = 0; j <= m; ++j) c[j] += f * std::cos(j * theta);
    }
    c[0] /= nodes;
    for (int j = 1; j <= m; ++j) c[j] *= 2.0 / nodes;
  }
  if (damping == Damping::jackson) {
    const auto g = jackson_factors(m);
    for (int j = 0; j <= m; ++j) c[j] *= g[j];
  }
  return FilterPoly(std::move(c), lambda_c, lambda_max, damping);
}

inline FilterPoly cheb_coeffs(double lambda_c, double lambda_max, const FilterConfig& cfg) {
  return cheb_coeffs(lambda_c, lambda_max, cfg.order, cfg.damping, cfg.shape, cfg.sigmoid_steepness);
}

namespace detail {

using RowBlock = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Row-major blocks turn each sparse row into contiguous axpys over columns.
inline void chebyshev_recurrence(const SparseMatrix& L, const FilterPoly& poly,
                                 const RowBlock& X, RowBlock& out) {
  const auto& c = poly.coefficients();
  const double scale = 2.0 / poly.lambda_max();
  out = c[0] * X;
  if (poly.order() == 0) return;
  RowBlock prev = X;
  RowBlock cur = scale * (L * X) - X;
  out += c[1] * cur;
  RowBlock next(X.rows(), X.cols());
  for (int j = 2; j <= poly.order(); ++j) {
    next.noalias() = L * cur;
    next = 2.0 * (scale * next - cur) - prev;
    out += c[j] * next;
    std::swap(prev, cur);
    std::swap(cur, next);
  }
}

}  // namespace detail

/// h(L) X by the three-term Chebyshev recurrence: exactly `order` sparse
/// matvecs per column, no dense n x n matrix. Column blocks run in parallel;
/// columns never interact, so the result does not depend on `workers`.
inline Eigen::MatrixXd apply_filter(const LaplacianMatrix& L, const FilterPoly& poly,
                                    const Eigen::MatrixXd& X, MatvecCounter& counter,
                                    int workers = 1) {
  if (X.rows() != L.size()) throw ParameterError("apply_filter: signal rows != graph size");
  Eigen::MatrixXd out(X.rows(), X.cols());
  const auto cols = static_cast<std::size_t>(X.cols());
  const std::size_t blocks = std::min<std::size_t>(cols, static_cast<std::size_t>(std::max(1, workers)));
  parallel_for(blocks, workers, [&](std::size_t b) {
    const auto first = static_cast<Eigen::Index>(b * cols / blocks);
    const auto width = static_cast<Eigen::Index>((b + 1) * cols / blocks) - first;
    const detail::RowBlock part = X.middleCols(first, width);
    detail::RowBlock result;
    detail::chebyshev_recurrence(L.matrix(), poly, part, result);
    out.middleCols(first, width) = result;
  });
  counter.add(static_cast<std::uint64_t>(poly.order()) * cols);
  return out;
}

struct EigencountResult {
  double estimate = 0.0;
  Eigen::MatrixXd features;  ///< h(L) R, reusable as clustering features
};

/// Stochastic eigencount: ||h(L) R||_F^2 / (cols * variance) estimates the
/// number of eigenvalues passed by h. For R with variance 1/d and d columns
/// the normaliser is 1.
inline EigencountResult eigencount(const LaplacianMatrix& L, const FilterPoly& poly,
                                   const Eigen::MatrixXd& signals, double signal_variance,
                                   MatvecCounter& counter, int workers = 1) {
  if (signals.cols() < 1) throw ParameterError("eigencount: need at least one signal");
  EigencountResult r;
  r.features = apply_filter(L, poly, signals, counter, workers);
  r.estimate = r.features.squaredNorm() / (static_cast<double>(signals.cols()) * signal_variance);
  return r;
}

/// Draws R (n x d, variance 1/d) and counts the eigenvalues below lambda_c.
inline EigencountResult eigencount(const LaplacianMatrix& L, double lambda_c, int d, int m,
                                   std::uint64_t seed, MatvecCounter& counter,
                                   Damping damping = Damping::jackson) {
  if (d < 1) throw ParameterError("eigencount: d must be >= 1");
  const auto poly = cheb_coeffs(lambda_c, L.lambda_max_bound(), m, damping);
  return eigencount(L, poly, random_signals(L.size(), d, seed), 1.0 / d, counter);
}

/// Bisection bracket for the cut-off search. `first_probe` replaces the
/// midpoint on the first iteration.
struct SearchInterval {
  double lo = 0.0;
  double hi = 0.0;
  std::optional<double> first_probe;

  static SearchInterval cold(const LaplacianMatrix& L) { return {0.0, L.lambda_max_bound(), std::nullopt}; }

  /// [lambda_prev / 2, min(2 lambda_prev, bound)], probing lambda_prev first.
  static SearchInterval warm(double lambda_prev, const LaplacianMatrix& L) {
    const double bound = L.lambda_max_bound();
    const double hi = std::min(2.0 * lambda_prev, bound);
    const double lo = std::min(0.5 * lambda_prev, hi);
    return {lo, hi, std::clamp(lambda_prev, lo, hi)};
  }
};

struct LambdaSearchResult {
  double lambda_k = 0.0;
  double estimate = 0.0;
  int iterations = 0;
  FilterPoly filter;
  Eigen::MatrixXd features;  ///< filtered signals of the accepting iteration
};

/// Dichotomy on the cut-off until the eigencount of the given signals matches
/// k within cfg.eigencount_tol, or the bracket is narrower than
/// cfg.interval_tol * lambda_max. The same signals are reused at every probe.
inline LambdaSearchResult find_lambda_k(const LaplacianMatrix& L, int k, const Eigen::MatrixXd& signals,
                                        double signal_variance, const FilterConfig& cfg,
                                        SearchInterval interval, MatvecCounter& counter,
                                        int workers = 1) {
  if (k < 1 || k >= L.size()) throw ParameterError("find_lambda_k: need 1 <= k < n");
  const double bound = L.lambda_max_bound();
  double lo = std::max(0.0, interval.lo);
  double hi = std::min(bound, interval.hi);
  if (!(lo <= hi)) throw ParameterError("find_lambda_k: empty search interval");
  double probe = interval.first_probe ? std::clamp(*interval.first_probe, lo, hi) : 0.5 * (lo + hi);
  double last_estimate = 0.0;
  for (int it = 1; it <= cfg.max_iters; ++it) {
    auto poly = cheb_coeffs(probe, bound, cfg);
    auto ec = eigencount(L, poly, signals, signal_variance, counter, workers);
    last_estimate = ec.estimate;
    const bool accepted = std::abs(ec.estimate - k) <= cfg.eigencount_tol * k;
    if (ec.estimate > k)
      hi = probe;
    else
      lo = probe;
    if (accepted || hi - lo < cfg.interval_tol * bound)
      return {probe, ec.estimate, it, std::move(poly), std::move(ec.features)};
    probe = 0.5 * (lo + hi);
  }
  throw ConvergenceError("find_lambda_k: no cut-off matched k = " + std::to_string(k) + " after " +
                             std::to_string(cfg.max_iters) + " iterations (last estimate " +
                             std::to_string(last_estimate) + ")",
                         probe, last_estimate);
}

/// Seeded variant: draws R (n x d, variance 1/d) first.
inline LambdaSearchResult find_lambda_k(const LaplacianMatrix& L, int k, int d, const FilterConfig& cfg,
                                        SearchInterval interval, MatvecCounter& counter,
                                        std::uint64_t seed) {
  if (d < 1) throw ParameterError("find_lambda_k: d must be >= 1");
  return find_lambda_k(L, k, random_signals(L.size(), d, seed), 1.0 / d, cfg, interval, counter);
}

}  // namespace dcsc
