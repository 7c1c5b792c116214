#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "dcsc/common.hpp"
#include "dcsc/filter.hpp"
#include "dcsc/kmeans.hpp"
#include "dcsc/laplacian.hpp"

namespace dcsc {

using Json = nlohmann::json;

enum class ExperimentKind { similarity, dynamic, static_csc, scaling };

inline std::string_view to_string(ExperimentKind k) {
  switch (k) {
    case ExperimentKind::similarity: return "similarity";
    case ExperimentKind::dynamic: return "dynamic";
    case ExperimentKind::static_csc: return "static-csc";
    case ExperimentKind::scaling: return "scaling";
  }
  return "dynamic";
}

inline ExperimentKind parse_kind(std::string_view s) {
  if (s == "similarity") return ExperimentKind::similarity;
  if (s == "dynamic") return ExperimentKind::dynamic;
  if (s == "static-csc") return ExperimentKind::static_csc;
  if (s == "scaling") return ExperimentKind::scaling;
  throw ParameterError("unknown experiment kind '" + std::string(s) +
                       "' (expected similarity|dynamic|static-csc|scaling)");
}

/// Everything a run needs, read from one JSON document. Missing keys keep
/// their defaults; unknown keys are rejected.
struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::dynamic;

  // SBM and perturbation model.
  int n = 1000;
  int k = 4;
  double s = 25.0;
  double e = 1.0 / 6.0;
  double edge_fraction = 0.03;
  double node_fraction = 0.01;

  // Sweeps; an empty list means "the scalar above".
  std::vector<int> n_values;
  std::vector<int> k_values;
  std::vector<double> fractions{0.0, 0.01, 0.03, 0.1};
  std::vector<std::string> models{"edges", "nodes", "combined"};
  std::vector<double> p_values{0.5};

  int steps = 10;  ///< tau, graphs per sequence
  int replications = 50;
  std::uint64_t seed = 1;

  // Clustering.
  std::optional<int> d;    ///< absolute signal count; otherwise d_factor * ln n
  double d_factor = 30.0;
  std::optional<double> k_factor;  ///< scaling runs: k = round(k_factor * ln n)
  double p = 0.5;                  ///< reuse fraction for single dynamic runs
  LaplacianVariant variant = LaplacianVariant::normalized;
  FilterConfig filter;
  KmeansConfig kmeans;

  bool oracle = true;   ///< dense SC baseline for cost excess
  bool timing = false;  ///< fill wall_ms; off keeps outputs byte-stable
  int workers = 1;
  int dense_cap = 5000;

  std::string output_csv;
  std::string output_jsonl;

  int signals_for(int nodes) const {
    if (d) return *d;
    return std::max(1, static_cast<int>(std::lround(d_factor * std::log(static_cast<double>(nodes)))));
  }
  std::vector<int> n_sweep() const { return n_values.empty() ? std::vector<int>{n} : n_values; }
  std::vector<int> k_sweep() const { return k_values.empty() ? std::vector<int>{k} : k_values; }

  void validate() const {
    if (replications < 1) throw ParameterError("replications must be >= 1");
    if (steps < 1) throw ParameterError("steps must be >= 1");
    if (d && *d < 1) throw ParameterError("csc.d must be >= 1");
    if (!(d_factor > 0.0)) throw ParameterError("csc.d_factor must be > 0");
    if (workers < 1) throw ParameterError("workers must be >= 1");
    for (double v : p_values)
      if (!(v >= 0.0 && v <= 0.5)) throw ParameterError("every p must lie in [0, 0.5]");
    if (!(p >= 0.0 && p <= 0.5)) throw ParameterError("dynamic.p must lie in [0, 0.5]");
    for (double f : fractions)
      if (!(f >= 0.0 && f <= 1.0)) throw ParameterError("fractions must lie in [0, 1]");
    for (const auto& m : models)
      if (m != "edges" && m != "nodes" && m != "combined")
        throw ParameterError("unknown perturbation model '" + m + "' (expected edges|nodes|combined)");
    if (filter.order < 1) throw ParameterError("filter.order must be >= 1");
    if (kmeans.restarts < 1) throw ParameterError("kmeans.restarts must be >= 1");
    const bool needs_oracle = kind == ExperimentKind::similarity || oracle;
    if (needs_oracle && kind != ExperimentKind::scaling)
      for (int nodes : n_sweep())
        if (nodes > dense_cap)
          throw ParameterError("oracle needs n <= dense_cap (" + std::to_string(dense_cap) + "), got " +
                               std::to_string(nodes));
  }
};

inline constexpr const char* kConfigSchema = R"(JSON config (every key optional):
{
  "experiment": {
    "kind": "similarity | dynamic | static-csc | scaling",
    "replications": 50, "steps": 10, "seed": 1, "workers": 1,
    "oracle": true, "timing": false, "dense_cap": 5000,
    "n_values": [250, 500, 1000], "k_values": [2, 4, 8],
    "fractions": [0, 0.01, 0.03, 0.1], "models": ["edges", "nodes", "combined"],
    "p_values": [0, 0.1, 0.2, 0.3, 0.4, 0.5], "k_factor": 2.0,
    "output_csv": "out.csv", "output_jsonl": "diag.jsonl"
  },
  "sbm": { "n": 1000, "k": 4, "s": 25, "e": 0.1667 },
  "perturbation": { "edge_fraction": 0.03, "node_fraction": 0.01 },
  "laplacian": "normalized | combinatorial",
  "filter": { "order": 100, "damping": "jackson | none", "shape": "step | sigmoid",
              "sigmoid_steepness": 200, "interval_tol": 0.001, "max_iters": 20 },
  "eigencount": { "tol": 0.1 },
  "kmeans": { "restarts": 10, "max_iters": 100, "tol": 1e-6 },
  "csc": { "d": 64, "d_factor": 30, "seed": 1 },
  "dynamic": { "p": 0.5 }
}
d defaults to round(d_factor * ln n) when csc.d is absent.
)";

namespace detail {

inline void reject_unknown(const Json& obj, std::initializer_list<const char*> keys, const std::string& where) {
  if (!obj.is_object()) throw ParameterError("config: '" + where + "' must be an object");
  for (const auto& [key, value] : obj.items()) {
    bool known = false;
    for (const char* k : keys) known = known || key == k;
    if (!known) throw ParameterError("config: unknown key '" + where + (where.empty() ? "" : ".") + key + "'");
  }
}

template <class T>
void read(const Json& obj, const char* key, T& out) {
  if (!obj.contains(key)) return;
  try {
    out = obj.at(key).get<T>();
  } catch (const Json::exception& err) {
    throw ParameterError(std::string("config: bad value for '") + key + "': " + err.what());
  }
}

}  // namespace detail

inline ExperimentConfig parse_config(const Json& j) {
  using detail::read;
  ExperimentConfig c;
  detail::reject_unknown(j, {"experiment", "sbm", "perturbation", "laplacian", "filter", "eigencount", "kmeans", "csc", "dynamic"}, "");
  if (j.contains("experiment")) {
    const auto& x = j["experiment"];
    detail::reject_unknown(x, {"kind", "replications", "steps", "seed", "workers", "oracle", "timing", "dense_cap",
                               "n_values", "k_values", "fractions", "models", "p_values", "k_factor",
                               "output_csv", "output_jsonl"},
                           "experiment");
    if (x.contains("kind")) c.kind = parse_kind(x["kind"].get<std::string>());
    read(x, "replications", c.replications);
    read(x, "steps", c.steps);
    read(x, "seed", c.seed);
    read(x, "workers", c.workers);
    read(x, "oracle", c.oracle);
    read(x, "timing", c.timing);
    read(x, "dense_cap", c.dense_cap);
    read(x, "n_values", c.n_values);
    read(x, "k_values", c.k_values);
    read(x, "fractions", c.fractions);
    read(x, "models", c.models);
    read(x, "p_values", c.p_values);
    if (x.contains("k_factor")) c.k_factor = x["k_factor"].get<double>();
    read(x, "output_csv", c.output_csv);
    read(x, "output_jsonl", c.output_jsonl);
  }
  if (j.contains("sbm")) {
    const auto& x = j["sbm"];
    detail::reject_unknown(x, {"n", "k", "s", "e"}, "sbm");
    read(x, "n", c.n);
    read(x, "k", c.k);
    read(x, "s", c.s);
    read(x, "e", c.e);
  }
  if (j.contains("perturbation")) {
    const auto& x = j["perturbation"];
    detail::reject_unknown(x, {"edge_fraction", "node_fraction"}, "perturbation");
    read(x, "edge_fraction", c.edge_fraction);
    read(x, "node_fraction", c.node_fraction);
  }
  if (j.contains("laplacian")) c.variant = parse_variant(j["laplacian"].get<std::string>());
  if (j.contains("filter")) {
    const auto& x = j["filter"];
    detail::reject_unknown(x, {"order", "damping", "shape", "sigmoid_steepness", "interval_tol", "max_iters"}, "filter");
    read(x, "order", c.filter.order);
    if (x.contains("damping")) c.filter.damping = parse_damping(x["damping"].get<std::string>());
    if (x.contains("shape")) c.filter.shape = parse_shape(x["shape"].get<std::string>());
    read(x, "sigmoid_steepness", c.filter.sigmoid_steepness);
    read(x, "interval_tol", c.filter.interval_tol);
    read(x, "max_iters", c.filter.max_iters);
  }
  if (j.contains("eigencount")) {
    detail::reject_unknown(j["eigencount"], {"tol"}, "eigencount");
    read(j["eigencount"], "tol", c.filter.eigencount_tol);
  }
  if (j.contains("kmeans")) {
    const auto& x = j["kmeans"];
    detail::reject_unknown(x, {"restarts", "max_iters", "tol"}, "kmeans");
    read(x, "restarts", c.kmeans.restarts);
    read(x, "max_iters", c.kmeans.max_iters);
    read(x, "tol", c.kmeans.tol);
  }
  if (j.contains("csc")) {
    const auto& x = j["csc"];
    detail::reject_unknown(x, {"d", "d_factor", "seed"}, "csc");
    if (x.contains("d")) c.d = x["d"].get<int>();
    read(x, "d_factor", c.d_factor);
    read(x, "seed", c.seed);
  }
  if (j.contains("dynamic")) {
    detail::reject_unknown(j["dynamic"], {"p"}, "dynamic");
    read(j["dynamic"], "p", c.p);
  }
  c.validate();
  return c;
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParameterError("config: cannot open '" + path + "'");
  Json j;
  try {
    in >> j;
  } catch (const Json::parse_error& err) {
    throw ParameterError("config: '" + path + "' is not valid JSON: " + err.what());
  }
  return parse_config(j);
}

}  // namespace dcsc
