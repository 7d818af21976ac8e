// lab <experiment> [--config path.json] [overrides]
// Exit codes: 0 pass, 1 acceptance failure, 2 config error, 3 numeric error.

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "dyadlab/lab/config.hpp"
#include "dyadlab/lab/experiments.hpp"
#include "dyadlab/lab/report.hpp"

namespace {

constexpr int kExitPass = 0;
constexpr int kExitFail = 1;
constexpr int kExitConfig = 2;
constexpr int kExitNumeric = 3;

struct Overrides {
  std::string config_path;
  std::vector<double> eps;
  std::vector<double> thetas;
  std::optional<int> depth, min_depth, d;
  std::vector<std::uint64_t> seeds;
  std::optional<std::size_t> count, budget, restarts, samples;
  std::optional<double> cond_cap;
  std::string out, format, objective;
};

dyadlab::lab::ExperimentConfig resolve(const std::string& experiment, const Overrides& o) {
  using namespace dyadlab::lab;
  ExperimentConfig cfg = o.config_path.empty() ? ExperimentConfig{} : load_config(o.config_path);
  cfg.experiment = parse_experiment(experiment);
  if (!o.eps.empty()) cfg.eps_grid = o.eps;
  if (!o.thetas.empty()) cfg.thetas = o.thetas;
  if (o.depth) cfg.depth = *o.depth;
  if (o.min_depth) cfg.min_depth = *o.min_depth;
  if (o.d) cfg.d = *o.d;
  if (!o.seeds.empty()) {
    cfg.seeds = o.seeds;
    if (!o.count) cfg.count = 0;
  }
  if (o.count) cfg.count = *o.count;
  if (o.budget) cfg.budget = *o.budget;
  if (o.restarts) cfg.restarts = *o.restarts;
  if (o.samples) cfg.samples = *o.samples;
  if (o.cond_cap) cfg.cond_cap = *o.cond_cap;
  if (!o.out.empty()) cfg.output_path = o.out;
  if (!o.format.empty()) cfg.format = parse_format(o.format);
  if (!o.objective.empty()) cfg.objective = parse_objective(o.objective);
  validate(cfg);
  return cfg;
}

void print_verdicts(const dyadlab::lab::LabReport& rep) {
  for (const auto& v : rep.verdicts) {
    std::fprintf(stderr, "%s %-40s value=%.6g bound=%.6g\n", v.passed ? "PASS" : "FAIL", v.name.c_str(), v.value,
                 v.bound);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"dyadlab experiment runner"};
  std::string experiment;
  Overrides o;
  std::vector<std::string> names;
  for (const auto& [k, name] : dyadlab::lab::experiment_names()) names.push_back(name);
  app.add_option("experiment", experiment, "Experiment to run")->required()->check(CLI::IsMember(names));
  app.add_option("--config", o.config_path, "Experiment config (JSON)")->check(CLI::ExistingFile);
  app.add_option("--eps", o.eps, "Override eps_grid");
  app.add_option("--theta", o.thetas, "Override thetas");
  app.add_option("--depth", o.depth, "Override depth");
  app.add_option("--min-depth", o.min_depth, "Override min_depth");
  app.add_option("--d", o.d, "Override d (0 cycles 1..4)");
  app.add_option("--seed", o.seeds, "Override seeds");
  app.add_option("--count", o.count, "Expand seeds to a run of this length");
  app.add_option("--cond-cap", o.cond_cap, "Override cond_cap");
  app.add_option("--samples", o.samples, "Override bellman-certify samples");
  app.add_option("--budget", o.budget, "Override adversarial-search budget");
  app.add_option("--restarts", o.restarts, "Override adversarial-search restarts");
  app.add_option("--objective", o.objective, "bet_norm_ratio, sred_ratio or red_ratio");
  app.add_option("--out", o.out, "Write the report here instead of stdout");
  app.add_option("--format", o.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitPass : kExitConfig;
  }

  try {
    const dyadlab::lab::ExperimentConfig cfg = resolve(experiment, o);
    const dyadlab::lab::LabReport rep = dyadlab::lab::run_experiment(cfg);
    if (cfg.output_path.empty()) std::cout << dyadlab::lab::render(rep, cfg.format);
    print_verdicts(rep);
    return rep.passed() ? kExitPass : kExitFail;
  } catch (const dyadlab::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfig;
  } catch (const dyadlab::Error& e) {
    std::fprintf(stderr, "numeric error: %s\n", e.what());
    return kExitNumeric;
  }
}
