#pragma once

#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "dcsc/config.hpp"
#include "dcsc/csc.hpp"
#include "dcsc/dynamic.hpp"
#include "dcsc/graph.hpp"
#include "dcsc/parallel.hpp"
#include "dcsc/spectral.hpp"

namespace dcsc {

/// Shortest round-trip decimal form, so equal doubles always print equally.
inline std::string format_number(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

/// CSV table with a header row; cells are preformatted strings.
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::string csv() const {
    std::ostringstream os;
    auto line = [&](const std::vector<std::string>& cells) {
      for (std::size_t i = 0; i < cells.size(); ++i) os << (i ? "," : "") << cells[i];
      os << '\n';
    };
    line(header);
    for (const auto& r : rows) line(r);
    return os.str();
  }
};

struct ExperimentOutput {
  Table table;
  std::vector<Json> diagnostics;  ///< JSON-lines records, dynamic runs only

  std::string jsonl() const {
    std::string out;
    for (const auto& j : diagnostics) out += j.dump() + '\n';
    return out;
  }
};

/// Writes next to the target and renames, so readers never see a partial file.
inline void write_atomic(const std::string& path, const std::string& contents) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  fs::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write '" + tmp.string() + "'");
    out << contents;
    out.flush();
    if (!out) throw Error("write failed for '" + tmp.string() + "'");
  }
  fs::rename(tmp, target);
}

/// Seed for one replication cell, independent of sweep order.
inline std::uint64_t cell_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> keys) {
  std::uint64_t s = derive_seed(seed, stream::replication);
  for (auto k : keys) s = derive_seed(s, k);
  return s;
}

/// tau graphs: G_1 from the SBM, then per step a node relabelling followed by
/// an edge redraw, each applied to the previous graph.
inline std::vector<LabeledGraph> perturbed_sequence(const SbmParams& params, int steps, double node_fraction,
                                                    double edge_fraction, std::uint64_t seed) {
  std::vector<LabeledGraph> seq;
  seq.reserve(steps);
  seq.push_back(sbm_generate(params, derive_seed(seed, stream::graph)));
  for (int t = 1; t < steps; ++t) {
    const auto& prev = seq.back();
    auto moved = perturb_nodes(prev.graph, node_fraction, params, prev.labels,
                               derive_seed(derive_seed(seed, stream::perturb_nodes), t));
    auto redrawn = perturb_edges(moved.graph, edge_fraction, params, moved.labels,
                                 derive_seed(derive_seed(seed, stream::perturb_edges), t));
    seq.push_back({std::move(redrawn), std::move(moved.labels)});
  }
  return seq;
}

namespace detail {

struct Baseline {
  SpectralBasis basis;
  double sc_cost = 0.0;
};

inline Baseline sc_baseline(const Graph& g, const ExperimentConfig& cfg, int k, std::uint64_t seed) {
  Baseline b;
  b.basis = eigendecompose(laplacian(g, cfg.variant), k, cfg.dense_cap);
  b.sc_cost = sc_assign(b.basis, cfg.kmeans, derive_seed(seed, stream::kmeans)).feature_cost;
  return b;
}

inline double elapsed_ms(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
}

inline DynamicConfig dynamic_config(const ExperimentConfig& cfg, int nodes, int k, double p) {
  DynamicConfig d;
  d.p = p;
  d.d = cfg.signals_for(nodes);
  d.k = k;
  d.variant = cfg.variant;
  d.filter = cfg.filter;
  d.kmeans = cfg.kmeans;
  return d;
}

inline int workers_for(const ExperimentConfig& cfg) { return std::max(1, cfg.workers); }

}  // namespace detail

/// Spectral and edge similarity between an SBM and its perturbed copies.
/// Rows are ordered by model, fraction, n, k, rep.
inline ExperimentOutput run_similarity_study(const ExperimentConfig& cfg) {
  cfg.validate();
  struct Cell {
    int n, k, rep;
  };
  std::vector<Cell> cells;
  for (int n : cfg.n_sweep())
    for (int k : cfg.k_sweep())
      for (int rep = 0; rep < cfg.replications; ++rep) cells.push_back({n, k, rep});

  const std::size_t per_cell = cfg.models.size() * cfg.fractions.size();
  std::vector<std::vector<std::string>> slots(cells.size() * per_cell);
  parallel_for(cells.size(), detail::workers_for(cfg), [&](std::size_t c) {
    const auto [n, k, rep] = cells[c];
    const auto params = SbmParams::from_degree(n, k, cfg.s, cfg.e);
    const std::uint64_t seed = cell_seed(cfg.seed, {static_cast<std::uint64_t>(n), static_cast<std::uint64_t>(k),
                                                    static_cast<std::uint64_t>(rep)});
    const auto base = sbm_generate(params, derive_seed(seed, stream::graph));
    const auto L0 = laplacian(base.graph, cfg.variant);
    const auto U0 = eigendecompose(L0, k, cfg.dense_cap);
    for (std::size_t m = 0; m < cfg.models.size(); ++m) {
      const auto& model = cfg.models[m];
      const std::uint64_t pseed = derive_seed(seed, 100 + m);
      for (std::size_t f = 0; f < cfg.fractions.size(); ++f) {
        const double frac = cfg.fractions[f];
        Graph g = base.graph;
        if (model == "nodes" || model == "combined")
          g = perturb_nodes(g, frac, params, base.labels, derive_seed(pseed, stream::perturb_nodes)).graph;
        if (model == "edges" || model == "combined")
          g = perturb_edges(g, frac, params, base.labels, derive_seed(pseed, stream::perturb_edges));
        const auto L1 = laplacian(g, cfg.variant);
        const auto U1 = eigendecompose(L1, k, cfg.dense_cap);
        slots[(m * cfg.fractions.size() + f) * cells.size() + c] = {
            model,
            std::to_string(n),
            std::to_string(k),
            format_number(cfg.s),
            format_number(cfg.e),
            format_number(frac),
            std::to_string(rep),
            format_number(spectral_similarity(U0, U1)),
            format_number(edge_similarity(L0, L1)),
            format_number(perturbation_eigengap(U0, U1))};
      }
    }
  });
  ExperimentOutput out;
  out.table.header = {"model", "n", "k", "s", "e", "fraction", "rep", "rho", "edge_sim", "alpha"};
  out.table.rows = std::move(slots);
  return out;
}

/// Dynamic CSC over tau-step perturbed sequences for every p in the sweep.
/// The sequences, the SC baseline and the clustering seed depend on the
/// replication only, so p values are compared on identical inputs.
inline ExperimentOutput run_dynamic_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  const int n = cfg.n, k = cfg.k, d = cfg.signals_for(n);
  const auto params = SbmParams::from_degree(n, k, cfg.s, cfg.e);
  const auto& ps = cfg.p_values;
  const auto reps = static_cast<std::size_t>(cfg.replications);
  const auto steps = static_cast<std::size_t>(cfg.steps);
  struct Record {
    std::vector<std::string> row;
    Json diag;
  };
  std::vector<Record> slots(ps.size() * reps * steps);

  parallel_for(reps, detail::workers_for(cfg), [&](std::size_t rep) {
    const std::uint64_t seed = cell_seed(cfg.seed, {static_cast<std::uint64_t>(n), static_cast<std::uint64_t>(rep)});
    const auto seq = perturbed_sequence(params, cfg.steps, cfg.node_fraction, cfg.edge_fraction, seed);
    std::vector<Graph> graphs;
    for (const auto& s : seq) graphs.push_back(s.graph);
    std::vector<detail::Baseline> baselines;
    if (cfg.oracle)
      for (std::size_t t = 0; t < steps; ++t) baselines.push_back(detail::sc_baseline(graphs[t], cfg, k, seed + t));

    for (std::size_t pi = 0; pi < ps.size(); ++pi) {
      const auto dcfg = detail::dynamic_config(cfg, n, k, ps[pi]);
      const auto result = run_sequence(graphs, dcfg, derive_seed(seed, stream::step));
      for (std::size_t t = 0; t < steps; ++t) {
        const auto& entry = result[t];
        const auto& diag = entry.diagnostics;
        std::optional<double> on_basis, excess;
        if (cfg.oracle) {
          on_basis = evaluate_on_basis(baselines[t].basis, entry.assignment);
          excess = (*on_basis - baselines[t].sc_cost) / baselines[t].sc_cost;
        }
        Record& r = slots[(pi * reps + rep) * steps + t];
        r.row = {format_number(ps[pi]),
                 std::to_string(n),
                 std::to_string(k),
                 std::to_string(d),
                 std::to_string(t + 1),
                 std::to_string(rep),
                 excess ? format_number(*excess) : "",
                 std::to_string(diag.matvecs),
                 diag.refined ? "1" : "0",
                 cfg.timing ? format_number(diag.wall_ms) : ""};
        r.diag = {{"p", ps[pi]},
                  {"rep", rep},
                  {"t", t + 1},
                  {"refined", diag.refined},
                  {"dichotomy_iters", diag.dichotomy_iters},
                  {"matvecs", diag.matvecs},
                  {"lambda_k", diag.lambda_k}};
        if (on_basis) r.diag["cost_on_basis"] = *on_basis;
        if (cfg.timing) r.diag["wall_ms"] = diag.wall_ms;
      }
    }
  });

  ExperimentOutput out;
  out.table.header = {"p", "n", "k", "d", "t", "rep", "cost_excess", "matvecs", "refined", "wall_ms"};
  for (auto& r : slots) {
    out.table.rows.push_back(std::move(r.row));
    out.diagnostics.push_back(std::move(r.diag));
  }
  return out;
}

/// Cold static CSC on every graph of the same sequences the dynamic
/// experiment uses.
inline ExperimentOutput run_static_csc(const ExperimentConfig& cfg) {
  cfg.validate();
  const int n = cfg.n, k = cfg.k, d = cfg.signals_for(n);
  const auto params = SbmParams::from_degree(n, k, cfg.s, cfg.e);
  const auto reps = static_cast<std::size_t>(cfg.replications);
  const auto steps = static_cast<std::size_t>(cfg.steps);
  std::vector<std::vector<std::string>> slots(reps * steps);
  CscConfig ccfg{d, cfg.filter, cfg.kmeans, 2.0, 1};
  parallel_for(reps, detail::workers_for(cfg), [&](std::size_t rep) {
    const std::uint64_t seed = cell_seed(cfg.seed, {static_cast<std::uint64_t>(n), static_cast<std::uint64_t>(rep)});
    const auto seq = perturbed_sequence(params, cfg.steps, cfg.node_fraction, cfg.edge_fraction, seed);
    for (std::size_t t = 0; t < steps; ++t) {
      const auto L = laplacian(seq[t].graph, cfg.variant);
      const auto r = csc_assign(L, k, ccfg, derive_seed(derive_seed(seed, stream::step), t + 1));
      std::string excess;
      if (cfg.oracle) {
        const auto b = detail::sc_baseline(seq[t].graph, cfg, k, seed + t);
        excess = format_number((evaluate_on_basis(b.basis, r.assignment) - b.sc_cost) / b.sc_cost);
      }
      slots[rep * steps + t] = {std::to_string(n),
                                std::to_string(k),
                                std::to_string(d),
                                std::to_string(t + 1),
                                std::to_string(rep),
                                excess,
                                std::to_string(r.diagnostics.matvecs),
                                std::to_string(r.diagnostics.dichotomy_iters),
                                cfg.timing ? format_number(r.diagnostics.wall_ms) : ""};
    }
  });
  ExperimentOutput out;
  out.table.header = {"n", "k", "d", "t", "rep", "cost_excess", "matvecs", "dichotomy_iters", "wall_ms"};
  out.table.rows = std::move(slots);
  return out;
}

/// Wall time of dense SC, static CSC and one dynamic step over an n sweep.
/// Replications run one at a time so timings do not compete for cores.
inline ExperimentOutput run_scaling(const ExperimentConfig& cfg) {
  cfg.validate();
  ExperimentOutput out;
  out.table.header = {"method", "n", "k", "d", "rep", "wall_ms", "matvecs"};
  for (int n : cfg.n_sweep()) {
    const int k = cfg.k_factor ? std::max(2, static_cast<int>(std::lround(*cfg.k_factor * std::log(n)))) : cfg.k;
    const int d = cfg.signals_for(n);
    const auto params = SbmParams::from_degree(n, k, cfg.s, cfg.e);
    for (int rep = 0; rep < cfg.replications; ++rep) {
      const std::uint64_t seed = cell_seed(cfg.seed, {static_cast<std::uint64_t>(n), static_cast<std::uint64_t>(rep)});
      const auto seq = perturbed_sequence(params, 2, cfg.node_fraction, cfg.edge_fraction, seed);
      const auto L = laplacian(seq[1].graph, cfg.variant);
      auto row = [&](const char* method, double ms, std::uint64_t matvecs) {
        out.table.rows.push_back({method, std::to_string(n), std::to_string(k), std::to_string(d), std::to_string(rep),
                                  format_number(ms), std::to_string(matvecs)});
      };
      if (n <= cfg.dense_cap) {
        const auto start = std::chrono::steady_clock::now();
        sc_assign(L, k, cfg.kmeans, seed, cfg.dense_cap);
        row("dense-sc", detail::elapsed_ms(start), 0);
      }
      const auto csc = csc_assign(L, k, CscConfig{d, cfg.filter, cfg.kmeans, 2.0, cfg.workers}, seed);
      row("csc", csc.diagnostics.wall_ms, csc.diagnostics.matvecs);
      auto dcfg = detail::dynamic_config(cfg, n, k, cfg.p);
      dcfg.workers = cfg.workers;
      auto init = dynamic_init(seq[0].graph, dcfg, seed);
      const auto step = dynamic_step(std::move(init.state), seq[1].graph, dcfg);
      row("dynamic-csc", step.diagnostics.wall_ms, step.diagnostics.matvecs);
    }
  }
  return out;
}

/// Least-squares slope of log(y) against log(x).
inline double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw ParameterError("loglog_slope: need >= 2 paired points");
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += std::log(x[i]);
    my += std::log(y[i]);
  }
  mx /= static_cast<double>(x.size());
  my /= static_cast<double>(x.size());
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (std::log(x[i]) - mx) * (std::log(y[i]) - my);
    sxx += (std::log(x[i]) - mx) * (std::log(x[i]) - mx);
  }
  return sxy / sxx;
}

inline ExperimentOutput run_experiment(const ExperimentConfig& cfg) {
  switch (cfg.kind) {
    case ExperimentKind::similarity: return run_similarity_study(cfg);
    case ExperimentKind::dynamic: return run_dynamic_experiment(cfg);
    case ExperimentKind::static_csc: return run_static_csc(cfg);
    case ExperimentKind::scaling: return run_scaling(cfg);
  }
  return {};
}

}  // namespace dcsc
