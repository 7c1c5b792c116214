#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dcsc/csc.hpp"
#include "dcsc/graph.hpp"

namespace dcsc {

struct DynamicConfig {
  double p = 0.5;  ///< fraction of feature columns carried over, <= 0.5
  int d = 64;
  int k = 2;
  LaplacianVariant variant = LaplacianVariant::normalized;
  FilterConfig filter;
  KmeansConfig kmeans;
  int workers = 1;

  void validate() const {
    if (!(p >= 0.0 && p <= 0.5))
      throw ParameterError("dynamic: reuse fraction p must lie in [0, 0.5] so reused columns stem from t-1");
    if (d < 1) throw ParameterError("dynamic: d must be >= 1");
    if (k < 1) throw ParameterError("dynamic: k must be >= 1");
  }

  /// floor(d p) reused columns per step.
  int reuse_count() const { return static_cast<int>(std::floor(d * p + 1e-9)); }

  CscConfig csc() const { return {d, filter, kmeans, 2.0, workers}; }
};

/// Carry-over between sequence steps.
struct DynamicState {
  int t = 0;
  int n = 0;
  FeatureMatrix features;  ///< Theta_t (reused columns first, then fresh)
  double lambda_k = 0.0;
  FilterPoly filter;
  std::uint64_t seed = 0;
  MatvecCounter counter;
};

struct StepDiagnostics {
  int t = 0;
  bool refined = false;
  int dichotomy_iters = 0;
  std::uint64_t matvecs = 0;  ///< sparse matvecs spent in this step
  int reused = 0;
  int fresh = 0;
  double lambda_k = 0.0;
  double eigencount = 0.0;
  std::optional<double> cost_on_basis;
  double wall_ms = 0.0;
};

struct StepResult {
  Assignment assignment;
  DynamicState state;
  StepDiagnostics diagnostics;
};

/// First graph: plain CSC with a cold dichotomy.
inline StepResult dynamic_init(const Graph& g, const DynamicConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  const auto L = laplacian(g, cfg.variant);
  auto csc = csc_assign(L, cfg.k, cfg.csc(), seed);
  StepResult r;
  r.assignment = std::move(csc.assignment);
  r.state.t = 1;
  r.state.n = g.num_nodes();
  r.state.features = std::move(csc.features.features);
  r.state.lambda_k = csc.features.lambda_k;
  r.state.filter = std::move(csc.features.filter);
  r.state.seed = seed;
  r.state.counter.add(csc.diagnostics.matvecs);
  auto& diag = r.diagnostics;
  diag.t = 1;
  diag.dichotomy_iters = csc.diagnostics.dichotomy_iters;
  diag.matvecs = csc.diagnostics.matvecs;
  diag.fresh = cfg.d;
  diag.lambda_k = csc.diagnostics.lambda_k;
  diag.eigencount = csc.diagnostics.eigencount;
  diag.wall_ms = csc.diagnostics.wall_ms;
  return r;
}

/// One step of dynamic CSC on G_t.
///
/// floor(d p) columns of Theta_{t-1} that were filtered on G_{t-1} are kept
/// verbatim. The remaining columns are fresh Gaussian signals filtered on G_t
/// with the previous filter; their eigencount decides whether the cut-off is
/// refined by a warm dichotomy over the same raw signals.
inline StepResult dynamic_step(DynamicState state, const Graph& g, const DynamicConfig& cfg) {
  cfg.validate();
  if (g.num_nodes() != state.n)
    throw ParameterError("dynamic_step: graph has " + std::to_string(g.num_nodes()) +
                         " nodes, sequence has " + std::to_string(state.n));
  const auto start = std::chrono::steady_clock::now();
  const std::uint64_t before = state.counter.count();
  const int t = state.t + 1;
  const std::uint64_t step_seed = derive_seed(derive_seed(state.seed, stream::step), t);
  const int n = state.n;
  const int d = cfg.d;

  std::vector<int> candidates;
  for (int c = 0; c < state.features.cols(); ++c)
    if (state.features.provenance[c].step == state.t) candidates.push_back(c);
  const int reuse = std::min(cfg.reuse_count(), static_cast<int>(candidates.size()));
  const int fresh = d - reuse;

  Rng pick = make_rng(step_seed, stream::selection);
  for (int r = 0; r < reuse; ++r) {
    std::uniform_int_distribution<std::size_t> u(r, candidates.size() - 1);
    std::swap(candidates[r], candidates[u(pick)]);
  }
  std::vector<int> kept(candidates.begin(), candidates.begin() + reuse);
  std::sort(kept.begin(), kept.end());

  const auto L = laplacian(g, cfg.variant);
  const Eigen::MatrixXd raw = gaussian_signals(n, fresh, 1.0 / d, step_seed);
  auto check = eigencount(L, state.filter, raw, 1.0 / d, state.counter, cfg.workers);

  StepDiagnostics diag;
  diag.t = t;
  diag.reused = reuse;
  diag.fresh = fresh;
  diag.eigencount = check.estimate;
  Eigen::MatrixXd fresh_features = std::move(check.features);
  if (std::abs(check.estimate - cfg.k) > cfg.filter.eigencount_tol * cfg.k) {
    // The failed check tells which side of lambda_prev the cut-off lies on.
    const double bound = L.lambda_max_bound();
    const double prev = state.lambda_k;
    SearchInterval interval = check.estimate > cfg.k
                                  ? SearchInterval{0.5 * prev, prev, std::nullopt}
                                  : SearchInterval{prev, std::min(2.0 * prev, bound), std::nullopt};
    auto search = find_lambda_k(L, cfg.k, raw, 1.0 / d, cfg.filter, interval, state.counter, cfg.workers);
    fresh_features = std::move(search.features);
    state.lambda_k = search.lambda_k;
    state.filter = std::move(search.filter);
    diag.refined = true;
    diag.dichotomy_iters = search.iterations;
    diag.eigencount = search.estimate;
  }

  FeatureMatrix theta;
  theta.values.resize(n, d);
  theta.provenance.reserve(d);
  for (int c = 0; c < reuse; ++c) {
    theta.values.col(c) = state.features.values.col(kept[c]);
    theta.provenance.push_back(state.features.provenance[kept[c]]);
  }
  theta.values.rightCols(fresh) = fresh_features;
  for (int c = 0; c < fresh; ++c) theta.provenance.push_back({t, static_cast<std::uint64_t>(c)});

  StepResult r;
  r.assignment = kmeans(theta.values, cfg.k, cfg.kmeans, derive_seed(step_seed, stream::kmeans));
  state.t = t;
  state.features = std::move(theta);
  diag.lambda_k = state.lambda_k;
  diag.matvecs = state.counter.count() - before;
  diag.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  r.state = std::move(state);
  r.diagnostics = diag;
  return r;
}

/// A step that failed inside run_sequence; `step()` is 1-based.
class SequenceError : public Error {
 public:
  SequenceError(int step, const std::string& what)
      : Error("sequence step " + std::to_string(step) + ": " + what), step_(step) {}
  int step() const { return step_; }

 private:
  int step_;
};

struct SequenceEntry {
  Assignment assignment;
  StepDiagnostics diagnostics;
};

/// Dynamic CSC over a whole graph sequence.
inline std::vector<SequenceEntry> run_sequence(std::span<const Graph> graphs, const DynamicConfig& cfg,
                                               std::uint64_t seed) {
  if (graphs.empty()) throw ParameterError("run_sequence: need at least one graph");
  std::vector<SequenceEntry> out;
  out.reserve(graphs.size());
  std::optional<DynamicState> state;
  for (std::size_t t = 0; t < graphs.size(); ++t) {
    try {
      StepResult r = t == 0 ? dynamic_init(graphs[0], cfg, seed) : dynamic_step(std::move(*state), graphs[t], cfg);
      out.push_back({std::move(r.assignment), r.diagnostics});
      state = std::move(r.state);
    } catch (const std::exception& err) {
      throw SequenceError(static_cast<int>(t) + 1, err.what());
    }
  }
  return out;
}

}  // namespace dcsc
