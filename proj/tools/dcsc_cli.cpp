// dcsc: graph generation, clustering and experiment runner.
//
// Exit codes: 0 success, 1 usage or parameter error, 2 runtime failure.

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "dcsc/config.hpp"
#include "dcsc/csc.hpp"
#include "dcsc/dynamic.hpp"
#include "dcsc/experiments.hpp"
#include "dcsc/graph.hpp"
#include "dcsc/spectral.hpp"

using namespace dcsc;

namespace {

struct UsageError : Error {
  using Error::Error;
};

Graph load_graph(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open graph '" + path + "'");
  return read_edge_list(in);
}

LabelVector load_labels(const std::string& path, int n) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open labels '" + path + "'");
  return read_labels(in, n);
}

std::string graph_text(const Graph& g) {
  std::ostringstream os;
  write_edge_list(os, g);
  return os.str();
}

std::string labels_text(const LabelVector& labels) {
  std::ostringstream os;
  write_labels(os, labels);
  return os.str();
}

void emit(const std::string& path, const std::string& contents) {
  if (path.empty() || path == "-")
    std::cout << contents;
  else
    write_atomic(path, contents);
}

// Flags shared by the clustering commands; unset flags leave the config alone.
struct Overrides {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<int> k, d, workers;
  std::optional<double> p;
  std::optional<std::string> variant;
  bool timing = false;

  ExperimentConfig resolve() const {
    ExperimentConfig c = config_path.empty() ? parse_config(Json::object()) : load_config(config_path);
    if (seed) c.seed = *seed;
    if (k) c.k = *k;
    if (d) c.d = *d;
    if (p) c.p = *p;
    if (workers) c.workers = *workers;
    if (variant) c.variant = parse_variant(*variant);
    if (timing) c.timing = true;
    if (c.k < 1) throw ParameterError("k must be >= 1");
    if (c.d && *c.d < 1) throw ParameterError("d must be >= 1");
    if (!(c.p >= 0.0 && c.p <= 0.5)) throw ParameterError("p must lie in [0, 0.5]");
    c.kmeans.workers = c.workers;
    return c;
  }
};

void add_common(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--config", o.config_path, "JSON config file")->check(CLI::ExistingFile);
  cmd->add_option("--seed", o.seed, "master seed, overrides the config");
  cmd->add_option("--workers", o.workers, "worker threads (default: DCSC_WORKERS or config)");
  cmd->add_option("--variant", o.variant, "laplacian: normalized | combinatorial");
  cmd->add_flag("--timing", o.timing, "report wall-clock times (outputs stop being byte-stable)");
}

Json csc_json(const CscResult& r, int n, int k, int d, bool timing) {
  const auto& g = r.diagnostics;
  Json j = {{"n", n},
            {"k", k},
            {"d", d},
            {"labels", r.assignment.labels},
            {"cluster_sizes", r.assignment.cluster_sizes},
            {"feature_cost", r.assignment.feature_cost},
            {"lambda_k", g.lambda_k},
            {"eigencount", g.eigencount},
            {"dichotomy_iters", g.dichotomy_iters},
            {"matvecs", g.matvecs},
            {"bound_t", g.bound_t},
            {"cost_bound_gap", g.cost_bound_gap},
            {"d_below_k", g.d_below_k}};
  if (timing) j["wall_ms"] = g.wall_ms;
  return j;
}

void summarize(const ExperimentConfig& cfg, const ExperimentOutput& out) {
  const auto& h = out.table.header;
  auto col = [&](const char* name) { return static_cast<std::size_t>(std::find(h.begin(), h.end(), name) - h.begin()); };
  std::map<std::string, std::vector<double>> groups;
  std::map<std::string, std::pair<int, int>> refine;
  switch (cfg.kind) {
    case ExperimentKind::similarity:
      for (const auto& r : out.table.rows) groups[r[col("model")] + " f=" + r[col("fraction")] + " n=" + r[col("n")] + " k=" + r[col("k")]].push_back(std::stod(r[col("rho")]));
      for (auto& [key, v] : groups) {
        std::sort(v.begin(), v.end());
        std::cerr << key << "  median rho " << v[v.size() / 2] << '\n';
      }
      break;
    case ExperimentKind::dynamic:
      for (const auto& r : out.table.rows) {
        const auto key = "p=" + r[col("p")];
        if (!r[col("cost_excess")].empty() && r[col("t")] != "1") groups[key].push_back(std::stod(r[col("cost_excess")]));
        if (r[col("t")] != "1") {
          refine[key].first += r[col("refined")] == "1";
          refine[key].second += 1;
        }
      }
      for (const auto& [key, counts] : refine) {
        std::cerr << key << "  refined " << counts.first << "/" << counts.second;
        if (auto it = groups.find(key); it != groups.end() && !it->second.empty()) {
          double s = 0;
          for (double v : it->second) s += v;
          std::cerr << "  mean cost excess " << s / static_cast<double>(it->second.size());
        }
        std::cerr << '\n';
      }
      break;
    case ExperimentKind::static_csc:
      for (const auto& r : out.table.rows)
        if (!r[col("cost_excess")].empty()) groups["static"].push_back(std::stod(r[col("cost_excess")]));
      for (const auto& [key, v] : groups) {
        double s = 0;
        for (double x : v) s += x;
        std::cerr << key << "  mean cost excess " << s / static_cast<double>(v.size()) << '\n';
      }
      break;
    case ExperimentKind::scaling: {
      std::map<std::string, std::map<int, std::vector<double>>> times;
      for (const auto& r : out.table.rows)
        times[r[col("method")]][std::stoi(r[col("n")])].push_back(std::stod(r[col("wall_ms")]));
      for (const auto& [method, by_n] : times) {
        std::vector<double> xs, ys;
        for (const auto& [n, v] : by_n) {
          xs.push_back(n);
          double s = 0;
          for (double x : v) s += x;
          ys.push_back(s / static_cast<double>(v.size()));
        }
        std::cerr << method;
        if (xs.size() >= 2) std::cerr << "  log-log slope " << loglog_slope(xs, ys);
        std::cerr << '\n';
      }
      break;
    }
  }
}

int run(int argc, char** argv) {
  CLI::App app{"Compressive and dynamic spectral clustering"};
  app.require_subcommand(1);
  app.footer(kConfigSchema);

  // generate
  auto* gen = app.add_subcommand("generate", "sample an SBM graph");
  int g_n = 0, g_k = 0;
  double g_s = 0, g_e = 0;
  std::uint64_t g_seed = 1;
  std::string g_out, g_labels;
  gen->add_option("--n", g_n, "nodes")->required();
  gen->add_option("--k", g_k, "planted clusters")->required();
  gen->add_option("--s", g_s, "average degree")->required();
  gen->add_option("--e", g_e, "ratio q2 / q1")->required();
  gen->add_option("--seed", g_seed, "seed");
  gen->add_option("-o,--output", g_out, "edge list path")->required();
  gen->add_option("--labels", g_labels, "planted labels path");

  // perturb
  auto* per = app.add_subcommand("perturb", "redraw edges and/or relabel nodes of an SBM graph");
  std::string p_graph, p_labels, p_out, p_labels_out;
  double p_s = 0, p_e = 0, p_edges = 0, p_nodes = 0;
  std::uint64_t p_seed = 1;
  per->add_option("--graph", p_graph, "input edge list")->required()->check(CLI::ExistingFile);
  per->add_option("--labels", p_labels, "input labels")->required()->check(CLI::ExistingFile);
  per->add_option("--s", p_s, "SBM average degree")->required();
  per->add_option("--e", p_e, "SBM ratio q2 / q1")->required();
  per->add_option("--edge-fraction", p_edges, "fraction of edges redrawn");
  per->add_option("--node-fraction", p_nodes, "fraction of nodes relabelled");
  per->add_option("--seed", p_seed, "seed");
  per->add_option("-o,--output", p_out, "output edge list")->required();
  per->add_option("--labels-out", p_labels_out, "output labels");

  // cluster-sc
  auto* sc = app.add_subcommand("cluster-sc", "dense spectral clustering baseline");
  Overrides sc_o;
  std::string sc_graph, sc_out;
  add_common(sc, sc_o);
  sc->add_option("--graph", sc_graph, "edge list")->required()->check(CLI::ExistingFile);
  sc->add_option("--k", sc_o.k, "clusters");
  sc->add_option("-o,--output", sc_out, "output JSON (default stdout)");

  // cluster-csc
  auto* csc = app.add_subcommand("cluster-csc", "compressive spectral clustering");
  Overrides csc_o;
  std::string csc_graph, csc_out;
  add_common(csc, csc_o);
  csc->add_option("--graph", csc_graph, "edge list")->required()->check(CLI::ExistingFile);
  csc->add_option("--k", csc_o.k, "clusters");
  csc->add_option("--d", csc_o.d, "random signals");
  csc->add_option("-o,--output", csc_out, "output JSON (default stdout)");

  // cluster-dynamic
  auto* dyn = app.add_subcommand("cluster-dynamic", "dynamic CSC over a graph sequence");
  Overrides dyn_o;
  std::vector<std::string> dyn_graphs;
  std::string dyn_out, dyn_diag;
  add_common(dyn, dyn_o);
  dyn->add_option("--graphs", dyn_graphs, "edge lists in time order")->required()->check(CLI::ExistingFile);
  dyn->add_option("--k", dyn_o.k, "clusters");
  dyn->add_option("--d", dyn_o.d, "random signals");
  dyn->add_option("--p", dyn_o.p, "reuse fraction in [0, 0.5]");
  dyn->add_option("-o,--output", dyn_out, "output JSON (default stdout)");
  dyn->add_option("--diagnostics", dyn_diag, "per-step JSON-lines diagnostics");

  // similarity
  auto* sim = app.add_subcommand("similarity", "spectral and edge similarity of two graphs");
  Overrides sim_o;
  std::string sim_a, sim_b, sim_out;
  add_common(sim, sim_o);
  sim->add_option("--graph-a", sim_a, "first edge list")->required()->check(CLI::ExistingFile);
  sim->add_option("--graph-b", sim_b, "second edge list")->required()->check(CLI::ExistingFile);
  sim->add_option("--k", sim_o.k, "subspace dimension");
  sim->add_option("-o,--output", sim_out, "output JSON (default stdout)");

  // bench
  auto* bench = app.add_subcommand("bench", "run an experiment from a JSON config");
  Overrides b_o;
  std::string b_out, b_diag, b_kind;
  bool full_scale = false;
  std::optional<int> b_reps;
  add_common(bench, b_o);
  bench->add_option("--kind", b_kind, "similarity | dynamic | static-csc | scaling");
  bench->add_option("--replications", b_reps, "override replications");
  bench->add_flag("--paper-scale", full_scale, "200 replications");
  bench->add_option("-o,--output", b_out, "CSV path (default: config output_csv, else stdout)");
  bench->add_option("--diagnostics", b_diag, "JSON-lines path (dynamic runs)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    std::cerr << '\n' << kConfigSchema;
    return 1;
  }

  if (gen->parsed()) {
    const auto sample = sbm_generate(SbmParams::from_degree(g_n, g_k, g_s, g_e), g_seed);
    write_atomic(g_out, graph_text(sample.graph));
    if (!g_labels.empty()) write_atomic(g_labels, labels_text(sample.labels));
    return 0;
  }

  if (per->parsed()) {
    const Graph g = load_graph(p_graph);
    const LabelVector labels = load_labels(p_labels, g.num_nodes());
    const int k = labels.empty() ? 1 : *std::max_element(labels.begin(), labels.end()) + 1;
    const auto params = SbmParams::from_degree(g.num_nodes(), k, p_s, p_e);
    LabeledGraph cur{g, labels};
    if (p_nodes > 0.0) cur = perturb_nodes(cur.graph, p_nodes, params, cur.labels, derive_seed(p_seed, stream::perturb_nodes));
    if (p_edges > 0.0)
      cur.graph = perturb_edges(cur.graph, p_edges, params, cur.labels, derive_seed(p_seed, stream::perturb_edges));
    write_atomic(p_out, graph_text(cur.graph));
    if (!p_labels_out.empty()) write_atomic(p_labels_out, labels_text(cur.labels));
    return 0;
  }

  if (sc->parsed()) {
    const auto cfg = sc_o.resolve();
    const auto L = laplacian(load_graph(sc_graph), cfg.variant);
    const auto basis = eigendecompose(L, cfg.k, cfg.dense_cap);
    const auto a = sc_assign(basis, cfg.kmeans, derive_seed(cfg.seed, stream::kmeans));
    Json j = {{"n", L.size()},           {"k", cfg.k},
              {"labels", a.labels},      {"cluster_sizes", a.cluster_sizes},
              {"sc_cost", a.feature_cost}, {"eigenvalues", basis.eigenvalues},
              {"next_eigenvalue", basis.next_eigenvalue}};
    emit(sc_out, j.dump(2) + '\n');
    return 0;
  }

  if (csc->parsed()) {
    const auto cfg = csc_o.resolve();
    const auto L = laplacian(load_graph(csc_graph), cfg.variant);
    const int d = cfg.signals_for(L.size());
    const auto r = csc_assign(L, cfg.k, CscConfig{d, cfg.filter, cfg.kmeans, 2.0, cfg.workers}, cfg.seed);
    emit(csc_out, csc_json(r, L.size(), cfg.k, d, cfg.timing).dump(2) + '\n');
    return 0;
  }

  if (dyn->parsed()) {
    const auto cfg = dyn_o.resolve();
    std::vector<Graph> graphs;
    for (const auto& path : dyn_graphs) graphs.push_back(load_graph(path));
    DynamicConfig dcfg;
    dcfg.p = cfg.p;
    dcfg.d = cfg.signals_for(graphs.front().num_nodes());
    dcfg.k = cfg.k;
    dcfg.variant = cfg.variant;
    dcfg.filter = cfg.filter;
    dcfg.kmeans = cfg.kmeans;
    dcfg.workers = cfg.workers;
    const auto entries = run_sequence(graphs, dcfg, cfg.seed);
    Json steps = Json::array();
    std::string diag;
    for (const auto& e : entries) {
      const auto& s = e.diagnostics;
      steps.push_back({{"t", s.t}, {"labels", e.assignment.labels}, {"feature_cost", e.assignment.feature_cost}});
      Json rec = {{"t", s.t},           {"refined", s.refined},   {"dichotomy_iters", s.dichotomy_iters},
                  {"matvecs", s.matvecs}, {"lambda_k", s.lambda_k}, {"reused", s.reused},
                  {"fresh", s.fresh}};
      if (cfg.timing) rec["wall_ms"] = s.wall_ms;
      diag += rec.dump() + '\n';
    }
    Json j = {{"n", graphs.front().num_nodes()}, {"k", dcfg.k}, {"d", dcfg.d}, {"p", dcfg.p}, {"steps", steps}};
    emit(dyn_out, j.dump(2) + '\n');
    if (!dyn_diag.empty()) write_atomic(dyn_diag, diag);
    return 0;
  }

  if (sim->parsed()) {
    const auto cfg = sim_o.resolve();
    const auto La = laplacian(load_graph(sim_a), cfg.variant);
    const auto Lb = laplacian(load_graph(sim_b), cfg.variant);
    const auto Ua = eigendecompose(La, cfg.k, cfg.dense_cap);
    const auto Ub = eigendecompose(Lb, cfg.k, cfg.dense_cap);
    Json j = {{"k", cfg.k},
              {"rho", spectral_similarity(Ua, Ub)},
              {"edge_sim", edge_similarity(La, Lb)},
              {"alpha", perturbation_eigengap(Ua, Ub)}};
    emit(sim_out, j.dump(2) + '\n');
    return 0;
  }

  if (bench->parsed()) {
    auto cfg = b_o.resolve();
    if (!b_o.workers && std::getenv("DCSC_WORKERS")) cfg.workers = default_workers();
    if (!b_kind.empty()) cfg.kind = parse_kind(b_kind);
    if (full_scale) cfg.replications = 200;
    if (b_reps) cfg.replications = *b_reps;
    if (cfg.kind == ExperimentKind::scaling) cfg.timing = true;
    cfg.kmeans.workers = 1;
    cfg.validate();
    const auto out = run_experiment(cfg);
    emit(b_out.empty() ? cfg.output_csv : b_out, out.table.csv());
    const std::string diag_path = b_diag.empty() ? cfg.output_jsonl : b_diag;
    if (!diag_path.empty() && !out.diagnostics.empty()) write_atomic(diag_path, out.jsonl());
    summarize(cfg, out);
    return 0;
  }
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const ParameterError& err) {
    std::cerr << "error: " << err.what() << "\n\n" << kConfigSchema;
    return 1;
  } catch (const Json::exception& err) {
    std::cerr << "error: config: " << err.what() << "\n\n" << kConfigSchema;
    return 1;
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << '\n';
    return 2;
  }
}
