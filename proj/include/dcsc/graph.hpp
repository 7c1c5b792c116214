#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numeric>
#include <span>
#include <sstream>
#include <string>
#include <unordered_set>
#include <vector>

#include "dcsc/common.hpp"

namespace dcsc {

struct Edge {
  int i = 0;
  int j = 0;
  double w = 1.0;

  friend bool operator==(const Edge&, const Edge&) = default;
};

using LabelVector = std::vector<int>;

/// Immutable simple undirected weighted graph.
///
/// Edges are stored once in canonical form (i < j, sorted). A mirrored CSR
/// adjacency is built from them, so symmetry holds by construction.
class Graph {
 public:
  Graph() = default;

  /// Builds a graph from an edge list in any orientation. Repeated pairs are
  /// merged when their weights agree and rejected otherwise.
  static Graph from_edges(int n, std::vector<Edge> edges) {
    if (n < 0) throw ParameterError("graph: node count must be >= 0");
    for (auto& e : edges) {
      if (e.i < 0 || e.i >= n || e.j < 0 || e.j >= n)
        throw ParameterError("graph: node index out of range [0, n)");
      if (e.i == e.j) throw ParameterError("graph: self-loops are not allowed");
      if (!(e.w > 0.0) || !std::isfinite(e.w))
        throw ParameterError("graph: edge weights must be finite and > 0");
      if (e.i > e.j) std::swap(e.i, e.j);
    }
    std::sort(edges.begin(), edges.end(), [](const Edge& a, const Edge& b) {
      return a.i != b.i ? a.i < b.i : a.j < b.j;
    });
    std::vector<Edge> unique;
    unique.reserve(edges.size());
    for (const auto& e : edges) {
      if (!unique.empty() && unique.back().i == e.i && unique.back().j == e.j) {
        if (unique.back().w != e.w)
          throw FormatError("graph: asymmetric duplicate edge (" + std::to_string(e.i) + ", " +
                            std::to_string(e.j) + ")");
        continue;
      }
      unique.push_back(e);
    }
    return Graph(n, std::move(unique));
  }

  /// Fast path for edges already canonical, sorted and unique.
  static Graph from_canonical(int n, std::vector<Edge> edges) { return Graph(n, std::move(edges)); }

  int num_nodes() const { return n_; }
  std::size_t num_edges() const { return edges_.size(); }
  std::span<const Edge> edges() const { return edges_; }

  std::span<const int> neighbors(int i) const {
    return {col_.data() + row_ptr_[i], col_.data() + row_ptr_[i + 1]};
  }
  std::span<const double> neighbor_weights(int i) const {
    return {val_.data() + row_ptr_[i], val_.data() + row_ptr_[i + 1]};
  }
  double degree(int i) const { return degree_[i]; }
  std::span<const double> degrees() const { return degree_; }

  /// Weight of (i, j), or 0 when absent.
  double weight(int i, int j) const {
    auto nb = neighbors(i);
    auto it = std::lower_bound(nb.begin(), nb.end(), j);
    if (it == nb.end() || *it != j) return 0.0;
    return val_[row_ptr_[i] + static_cast<std::size_t>(it - nb.begin())];
  }
  bool has_edge(int i, int j) const { return weight(i, j) > 0.0; }

  double max_degree() const {
    return degree_.empty() ? 0.0 : *std::max_element(degree_.begin(), degree_.end());
  }

  friend bool operator==(const Graph& a, const Graph& b) {
    return a.n_ == b.n_ && a.edges_ == b.edges_;
  }

 private:
  Graph(int n, std::vector<Edge> edges) : n_(n), edges_(std::move(edges)) {
    row_ptr_.assign(static_cast<std::size_t>(n_) + 1, 0);
    for (const auto& e : edges_) {
      ++row_ptr_[e.i + 1];
      ++row_ptr_[e.j + 1];
    }
    std::partial_sum(row_ptr_.begin(), row_ptr_.end(), row_ptr_.begin());
    col_.resize(2 * edges_.size());
    val_.resize(2 * edges_.size());
    degree_.assign(n_, 0.0);
    std::vector<std::size_t> fill(row_ptr_.begin(), row_ptr_.end() - 1);
    // Canonical order fills every row sorted: row r receives its lower
    // neighbours in the first pass and its higher ones in the second.
    for (const auto& e : edges_) {
      col_[fill[e.j]] = e.i;
      val_[fill[e.j]++] = e.w;
    }
    for (const auto& e : edges_) {
      col_[fill[e.i]] = e.j;
      val_[fill[e.i]++] = e.w;
    }
    for (int r = 0; r < n_; ++r) {
      for (auto k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) degree_[r] += val_[k];
    }
  }

  int n_ = 0;
  std::vector<Edge> edges_;
  std::vector<std::size_t> row_ptr_{0};
  std::vector<int> col_;
  std::vector<double> val_;
  std::vector<double> degree_;
};

// ---------------------------------------------------------------------------
// Edge-list and label files.

inline void write_edge_list(std::ostream& os, const Graph& g) {
  os << g.num_nodes() << ' ' << g.num_edges() << '\n';
  os << std::setprecision(17);
  for (const auto& e : g.edges()) os << e.i << ' ' << e.j << ' ' << e.w << '\n';
}

inline Graph read_edge_list(std::istream& is) {
  long long n = -1, m = -1;
  if (!(is >> n >> m) || n < 0 || m < 0) throw FormatError("edge list: bad header, expected `n m`");
  if (n > std::numeric_limits<int>::max()) throw FormatError("edge list: node count too large");
  std::vector<Edge> edges;
  edges.reserve(static_cast<std::size_t>(m));
  for (long long l = 0; l < m; ++l) {
    long long i, j;
    double w;
    if (!(is >> i >> j >> w))
      throw FormatError("edge list: expected " + std::to_string(m) + " edge lines, got " +
                        std::to_string(l));
    if (i < 0 || j < 0 || i >= n || j >= n)
      throw FormatError("edge list: node index out of range on edge line " + std::to_string(l + 1));
    edges.push_back({static_cast<int>(i), static_cast<int>(j), w});
  }
  try {
    return Graph::from_edges(static_cast<int>(n), std::move(edges));
  } catch (const ParameterError& err) {
    throw FormatError(std::string("edge list: ") + err.what());
  }
}

inline void write_labels(std::ostream& os, const LabelVector& labels) {
  for (int l : labels) os << l << '\n';
}

inline LabelVector read_labels(std::istream& is, int expected_n = -1) {
  LabelVector labels;
  long long v;
  while (is >> v) {
    if (v < 0) throw FormatError("labels: negative label");
    labels.push_back(static_cast<int>(v));
  }
  if (!is.eof()) throw FormatError("labels: non-integer entry");
  if (expected_n >= 0 && static_cast<int>(labels.size()) != expected_n)
    throw FormatError("labels: expected " + std::to_string(expected_n) + " lines, got " +
                      std::to_string(labels.size()));
  return labels;
}

// ---------------------------------------------------------------------------
// Stochastic block model.

/// SBM parameterised by average degree s and clusterability e = q2 / q1.
struct SbmParams {
  int n = 0;
  int k = 1;
  double s = 0.0;
  double e = 0.0;
  double q1 = 0.0;  ///< intra-cluster edge probability
  double q2 = 0.0;  ///< inter-cluster edge probability

  /// Solves s = q1 (n/k - 1) + q2 n (k-1)/k with q2 = e q1.
  static SbmParams from_degree(int n, int k, double s, double e) {
    if (k < 1) throw ParameterError("sbm: k must be >= 1");
    if (n < k) throw ParameterError("sbm: n must be >= k");
    if (!(s >= 0.0)) throw ParameterError("sbm: average degree s must be >= 0");
    if (!(e >= 0.0 && e <= 1.0)) throw ParameterError("sbm: ratio e must lie in [0, 1]");
    const double nd = n, kd = k;
    const double denom = (nd / kd - 1.0) + e * nd * (kd - 1.0) / kd;
    SbmParams p{n, k, s, e, 0.0, 0.0};
    if (denom <= 0.0) {
      if (s > 0.0) throw ParameterError("sbm: q1 > 1 after derivation (no admissible pairs)");
    } else {
      p.q1 = s / denom;
      p.q2 = e * p.q1;
    }
    p.validate();
    return p;
  }

  void validate() const {
    if (k < 1) throw ParameterError("sbm: k must be >= 1");
    if (n < k) throw ParameterError("sbm: n must be >= k");
    if (!(q1 >= 0.0 && q1 <= 1.0))
      throw ParameterError("sbm: q1 > 1 after derivation (q1 = " + std::to_string(q1) +
                           "); lower s or raise e");
    if (!(q2 >= 0.0 && q2 <= 1.0)) throw ParameterError("sbm: q2 must lie in [0, 1]");
  }

  double probability(int label_a, int label_b) const { return label_a == label_b ? q1 : q2; }
};

/// Planted cluster sizes: n / k each, the n mod k remainder going one-extra
/// to the first clusters.
inline std::vector<int> planted_sizes(int n, int k) {
  std::vector<int> sizes(k, n / k);
  for (int c = 0; c < n % k; ++c) ++sizes[c];
  return sizes;
}

inline LabelVector planted_labels(int n, int k) {
  LabelVector labels;
  labels.reserve(n);
  auto sizes = planted_sizes(n, k);
  for (int c = 0; c < k; ++c) labels.insert(labels.end(), sizes[c], c);
  return labels;
}

struct LabeledGraph {
  Graph graph;
  LabelVector labels;
};

/// Draws every node pair independently with probability q1 (same cluster)
/// or q2 (different clusters).
inline LabeledGraph sbm_generate(const SbmParams& params, std::uint64_t seed) {
  params.validate();
  auto labels = planted_labels(params.n, params.k);
  auto rng = make_rng(seed, stream::graph);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<Edge> edges;
  edges.reserve(static_cast<std::size_t>(params.s * params.n / 2.0 * 1.2) + 16);
  for (int i = 0; i < params.n; ++i) {
    for (int j = i + 1; j < params.n; ++j) {
      const double q = params.probability(labels[i], labels[j]);
      if (q > 0.0 && unif(rng) < q) edges.push_back({i, j, 1.0});
    }
  }
  return {Graph::from_canonical(params.n, std::move(edges)), std::move(labels)};
}

namespace detail {

inline std::uint64_t pair_key(int i, int j) {
  if (i > j) std::swap(i, j);
  return (static_cast<std::uint64_t>(i) << 32) | static_cast<std::uint32_t>(j);
}

inline void check_labels(const Graph& g, const SbmParams& params, const LabelVector& labels) {
  if (static_cast<int>(labels.size()) != g.num_nodes())
    throw ParameterError("perturbation: label vector length must equal node count");
  for (int l : labels)
    if (l < 0 || l >= params.k) throw ParameterError("perturbation: label outside [0, k)");
}

}  // namespace detail

/// Edge redrawing: removes round(fraction * m) uniformly chosen edges, then
/// adds as many new ones drawn from the SBM probabilities. A just-removed
/// pair may be drawn again.
inline Graph perturb_edges(const Graph& g, double fraction, const SbmParams& params,
                           const LabelVector& labels, std::uint64_t seed) {
  if (!(fraction >= 0.0 && fraction <= 1.0))
    throw ParameterError("perturb_edges: fraction must lie in [0, 1]");
  detail::check_labels(g, params, labels);
  const std::size_t m = g.num_edges();
  const auto count = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(m)));
  if (count == 0) return g;

  auto rng = make_rng(seed, stream::perturb_edges);
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), std::size_t{0});
  for (std::size_t r = 0; r < count; ++r) {
    std::uniform_int_distribution<std::size_t> pick(r, m - 1);
    std::swap(order[r], order[pick(rng)]);
  }
  std::vector<char> removed(m, 0);
  for (std::size_t r = 0; r < count; ++r) removed[order[r]] = 1;

  std::vector<Edge> kept;
  kept.reserve(m);
  std::unordered_set<std::uint64_t> present;
  present.reserve(2 * m);
  auto all = g.edges();
  for (std::size_t idx = 0; idx < m; ++idx) {
    if (removed[idx]) continue;
    kept.push_back(all[idx]);
    present.insert(detail::pair_key(all[idx].i, all[idx].j));
  }

  const double q_max = std::max(params.q1, params.q2);
  const int n = g.num_nodes();
  if (q_max <= 0.0 || n < 2)
    throw ParameterError("perturb_edges: model admits no edges to redraw");
  const double pairs = 0.5 * static_cast<double>(n) * (n - 1);
  if (static_cast<double>(m) >= pairs) throw ParameterError("perturb_edges: graph is complete");

  std::uniform_int_distribution<int> node(0, n - 1);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::size_t added = 0;
  const std::size_t max_attempts = 1000 * count + 1'000'000;
  for (std::size_t attempt = 0; added < count; ++attempt) {
    if (attempt >= max_attempts) throw Error("perturb_edges: could not place redrawn edges");
    int u = node(rng), v = node(rng);
    if (u == v) continue;
    if (unif(rng) * q_max >= params.probability(labels[u], labels[v])) continue;
    if (!present.insert(detail::pair_key(u, v)).second) continue;
    kept.push_back({std::min(u, v), std::max(u, v), 1.0});
    ++added;
  }
  std::sort(kept.begin(), kept.end(), [](const Edge& a, const Edge& b) {
    return a.i != b.i ? a.i < b.i : a.j < b.j;
  });
  return Graph::from_canonical(n, std::move(kept));
}

/// Node reassignment: round(fraction * n) uniformly chosen nodes lose all
/// incident edges, move to a uniformly chosen other class, and are reconnected
/// to every other node with the SBM probability for their new label.
inline LabeledGraph perturb_nodes(const Graph& g, double fraction, const SbmParams& params,
                                  const LabelVector& labels, std::uint64_t seed) {
  if (!(fraction >= 0.0 && fraction <= 1.0))
    throw ParameterError("perturb_nodes: fraction must lie in [0, 1]");
  if (params.k < 2) throw ParameterError("perturb_nodes: k must be >= 2 to reassign a class");
  detail::check_labels(g, params, labels);
  const int n = g.num_nodes();
  const auto count = static_cast<int>(std::llround(fraction * n));
  if (count == 0) return {g, labels};

  auto rng = make_rng(seed, stream::perturb_nodes);
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  for (int r = 0; r < count; ++r) {
    std::uniform_int_distribution<int> pick(r, n - 1);
    std::swap(order[r], order[pick(rng)]);
  }
  std::vector<char> selected(n, 0);
  std::vector<int> chosen(order.begin(), order.begin() + count);
  std::sort(chosen.begin(), chosen.end());
  for (int v : chosen) selected[v] = 1;

  LabelVector next = labels;
  std::uniform_int_distribution<int> other(0, params.k - 2);
  for (int v : chosen) {
    int c = other(rng);
    next[v] = c >= labels[v] ? c + 1 : c;
  }

  std::vector<Edge> edges;
  edges.reserve(g.num_edges());
  for (const auto& e : g.edges())
    if (!selected[e.i] && !selected[e.j]) edges.push_back(e);

  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (int u : chosen) {
    for (int v = 0; v < n; ++v) {
      if (v == u || (selected[v] && v < u)) continue;
      const double q = params.probability(next[u], next[v]);
      if (q > 0.0 && unif(rng) < q) edges.push_back({std::min(u, v), std::max(u, v), 1.0});
    }
  }
  std::sort(edges.begin(), edges.end(), [](const Edge& a, const Edge& b) {
    return a.i != b.i ? a.i < b.i : a.j < b.j;
  });
  return {Graph::from_canonical(n, std::move(edges)), std::move(next)};
}

}  // namespace dcsc
