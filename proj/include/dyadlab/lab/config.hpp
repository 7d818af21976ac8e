#pragma once

// Experiment configuration: JSON parsing, validation and seed expansion.

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <type_traits>
#include <vector>

#include "dyadlab/errors.hpp"
#include "dyadlab/serialize.hpp"

namespace dyadlab::lab {

enum class Experiment {
  counterexample_sweep,
  c2_sharpness,
  sibet_suite,
  wcet_suite,
  bellman_certify,
  redundancy_suite,
  adversarial_search,
};

enum class Format { csv, json };

enum class Objective { bet_norm_ratio, sred_ratio, red_ratio };

inline constexpr int kMaxConfigDepth = 12;
inline constexpr int kMaxConfigDim = 8;

inline const std::vector<std::pair<Experiment, std::string>>& experiment_names() {
  static const std::vector<std::pair<Experiment, std::string>> names{
      {Experiment::counterexample_sweep, "counterexample-sweep"},
      {Experiment::c2_sharpness, "c2-sharpness"},
      {Experiment::sibet_suite, "sibet-suite"},
      {Experiment::wcet_suite, "wcet-suite"},
      {Experiment::bellman_certify, "bellman-certify"},
      {Experiment::redundancy_suite, "redundancy-suite"},
      {Experiment::adversarial_search, "adversarial-search"},
  };
  return names;
}

inline std::string to_string(Experiment e) {
  for (const auto& [k, name] : experiment_names()) {
    if (k == e) return name;
  }
  throw ConfigError("unknown experiment");
}

inline Experiment parse_experiment(const std::string& s) {
  for (const auto& [k, name] : experiment_names()) {
    if (name == s) return k;
  }
  throw ConfigError("unknown experiment \"" + s + "\"");
}

inline std::string to_string(Format f) { return f == Format::csv ? "csv" : "json"; }

inline Format parse_format(const std::string& s) {
  if (s == "csv") return Format::csv;
  if (s == "json") return Format::json;
  throw ConfigError("format must be csv or json, got \"" + s + "\"");
}

inline std::string to_string(Objective o) {
  switch (o) {
    case Objective::bet_norm_ratio: return "bet_norm_ratio";
    case Objective::sred_ratio: return "sred_ratio";
    case Objective::red_ratio: return "red_ratio";
  }
  throw ConfigError("unknown objective");
}

inline Objective parse_objective(const std::string& s) {
  if (s == "bet_norm_ratio") return Objective::bet_norm_ratio;
  if (s == "sred_ratio") return Objective::sred_ratio;
  if (s == "red_ratio") return Objective::red_ratio;
  throw ConfigError("unknown objective \"" + s + "\"");
}

struct ExperimentConfig {
  Experiment experiment = Experiment::counterexample_sweep;
  int depth = 4;                       // suites draw depths from [min_depth, depth]
  std::optional<int> min_depth;        // defaults to depth
  int d = 2;                           // 0 cycles d through 1..4 by seed
  std::vector<std::uint64_t> seeds{0};
  std::size_t count = 0;               // > 0 expands seeds to seeds[0], …, seeds[0] + count − 1
  std::vector<double> eps_grid{1e-1, 1e-2, 1e-3, 1e-4};
  std::vector<double> thetas{0.0};
  double cond_cap = 1e6;
  std::string output_path;
  Format format = Format::json;
  std::size_t samples = 10000;         // bellman-certify point samples
  std::size_t cross_checks = 50;       // instances receiving the expensive cross-oracle checks
  std::size_t sweep_seeds = 10;        // random (f, g, α) per ε-sweep point in sibet-suite
  Objective objective = Objective::bet_norm_ratio;
  std::size_t budget = 10000;          // adversarial-search evaluations per seed
  std::size_t restarts = 4;
  std::vector<Json> instances;         // inline instances or {"path": file}

  int lowest_depth() const { return min_depth.value_or(depth); }

  std::vector<std::uint64_t> suite_seeds() const {
    if (count == 0) return seeds;
    std::vector<std::uint64_t> out(count);
    for (std::size_t i = 0; i < count; ++i) out[i] = seeds.front() + i;
    return out;
  }

  /// (depth, d) of the suite instance regenerated from seed.
  std::pair<int, int> shape(std::uint64_t seed) const {
    const int lo = lowest_depth();
    const int span = depth - lo + 1;
    const int dep = lo + static_cast<int>(seed % static_cast<std::uint64_t>(span));
    const int dim = d > 0 ? d : 1 + static_cast<int>(seed % 4);
    return {dep, dim};
  }
};

inline void validate(const ExperimentConfig& c) {
  if (c.depth < 0 || c.depth > kMaxConfigDepth) throw ConfigError("depth must lie in [0, 12]");
  if (c.lowest_depth() < 0 || c.lowest_depth() > c.depth) throw ConfigError("min_depth must lie in [0, depth]");
  if (c.d < 0 || c.d > kMaxConfigDim) throw ConfigError("d must lie in [0, 8]");
  if (c.seeds.empty()) throw ConfigError("seeds must be non-empty");
  if (c.eps_grid.empty()) throw ConfigError("eps_grid must be non-empty");
  for (double e : c.eps_grid) {
    if (!(e > 0.0 && e <= 1.0)) throw ConfigError("eps_grid entries must lie in (0, 1]");
  }
  if (c.thetas.empty()) throw ConfigError("thetas must be non-empty");
  if (!(c.cond_cap >= 1.0 && c.cond_cap <= 1e8)) throw ConfigError("cond_cap must lie in [1, 1e8]");
  if (c.samples < 1) throw ConfigError("samples must be >= 1");
  if (c.budget < 1) throw ConfigError("budget must be >= 1");
  if (c.restarts < 1) throw ConfigError("restarts must be >= 1");
}

namespace detail {

template <class T>
T get_as(const Json& j, const char* key) {
  try {
    if constexpr (std::is_unsigned_v<T>) {
      const Json& v = j.at(key);
      if (!v.is_number_integer() || v.get<std::int64_t>() < 0) throw ConfigError(std::string("config key \"") + key + "\" must be >= 0");
    }
    return j.at(key).get<T>();
  } catch (const Json::exception& e) {
    throw ConfigError(std::string("config key \"") + key + "\": " + e.what());
  }
}

}  // namespace detail

inline ExperimentConfig config_from_json(const Json& j) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  static const std::set<std::string> known{
      "experiment", "depth",        "min_depth",   "d",         "seeds",    "count",
      "eps_grid",   "thetas",       "cond_cap",    "output_path", "format", "samples",
      "cross_checks", "sweep_seeds", "objective",  "budget",    "restarts", "instances"};
  for (const auto& [key, value] : j.items()) {
    if (!known.count(key)) throw ConfigError("unknown config key \"" + key + "\"");
  }
  using detail::get_as;
  ExperimentConfig c;
  if (j.contains("experiment")) c.experiment = parse_experiment(get_as<std::string>(j, "experiment"));
  if (j.contains("depth")) c.depth = get_as<int>(j, "depth");
  if (j.contains("min_depth")) c.min_depth = get_as<int>(j, "min_depth");
  if (j.contains("d")) c.d = get_as<int>(j, "d");
  if (j.contains("seeds")) {
    const Json& s = j.at("seeds");
    if (!s.is_array()) throw ConfigError("config key \"seeds\" must be an array");
    for (const Json& v : s) {
      if (!v.is_number_integer() || v.get<std::int64_t>() < 0) throw ConfigError("config key \"seeds\" must hold integers >= 0");
    }
    c.seeds = s.get<std::vector<std::uint64_t>>();
  }
  if (j.contains("count")) c.count = get_as<std::size_t>(j, "count");
  if (j.contains("eps_grid")) c.eps_grid = get_as<std::vector<double>>(j, "eps_grid");
  if (j.contains("thetas")) c.thetas = get_as<std::vector<double>>(j, "thetas");
  if (j.contains("cond_cap")) c.cond_cap = get_as<double>(j, "cond_cap");
  if (j.contains("output_path")) c.output_path = get_as<std::string>(j, "output_path");
  if (j.contains("format")) c.format = parse_format(get_as<std::string>(j, "format"));
  if (j.contains("samples")) c.samples = get_as<std::size_t>(j, "samples");
  if (j.contains("cross_checks")) c.cross_checks = get_as<std::size_t>(j, "cross_checks");
  if (j.contains("sweep_seeds")) c.sweep_seeds = get_as<std::size_t>(j, "sweep_seeds");
  if (j.contains("objective")) c.objective = parse_objective(get_as<std::string>(j, "objective"));
  if (j.contains("budget")) c.budget = get_as<std::size_t>(j, "budget");
  if (j.contains("restarts")) c.restarts = get_as<std::size_t>(j, "restarts");
  if (j.contains("instances")) {
    if (!j.at("instances").is_array()) throw ConfigError("instances must be an array");
    c.instances = j.at("instances").get<std::vector<Json>>();
  }
  validate(c);
  return c;
}

inline Json to_json(const ExperimentConfig& c) {
  Json j{{"experiment", to_string(c.experiment)},
         {"depth", c.depth},
         {"min_depth", c.lowest_depth()},
         {"d", c.d},
         {"seeds", c.seeds},
         {"count", c.count},
         {"eps_grid", c.eps_grid},
         {"thetas", c.thetas},
         {"cond_cap", c.cond_cap},
         {"output_path", c.output_path},
         {"format", to_string(c.format)},
         {"samples", c.samples},
         {"cross_checks", c.cross_checks},
         {"sweep_seeds", c.sweep_seeds},
         {"objective", to_string(c.objective)},
         {"budget", c.budget},
         {"restarts", c.restarts}};
  if (!c.instances.empty()) j["instances"] = c.instances;
  return j;
}

inline ExperimentConfig load_config(const std::string& path) { return config_from_json(read_json_file(path)); }

}  // namespace dyadlab::lab
