#include <gtest/gtest.h>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include "dyadlab/lab/experiments.hpp"

using namespace dyadlab;
using namespace dyadlab::lab;

namespace {

ExperimentConfig small_suite(Experiment e, std::size_t count = 12) {
  ExperimentConfig c;
  c.experiment = e;
  c.depth = 4;
  c.min_depth = 1;
  c.d = 0;
  c.seeds = {100};
  c.count = count;
  c.cond_cap = 1e4;
  c.samples = 200;
  c.cross_checks = 4;
  c.sweep_seeds = 2;
  c.eps_grid = {1e-1, 1e-3};
  return c;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST(Config, DefaultsAndParsing) {
  const ExperimentConfig c = config_from_json(Json{{"experiment", "sibet-suite"},
                                                   {"depth", 6},
                                                   {"min_depth", 2},
                                                   {"d", 0},
                                                   {"seeds", {5}},
                                                   {"count", 3},
                                                   {"format", "csv"}});
  EXPECT_EQ(c.experiment, Experiment::sibet_suite);
  EXPECT_EQ(c.format, Format::csv);
  EXPECT_EQ(c.suite_seeds(), (std::vector<std::uint64_t>{5, 6, 7}));
  // depth cycles through [2, 6], d through 1..4.
  EXPECT_EQ(c.shape(5), (std::pair<int, int>{2, 2}));
  EXPECT_EQ(c.shape(7), (std::pair<int, int>{4, 4}));
  EXPECT_EQ(config_from_json(Json::object()).eps_grid.size(), 4u);
}

TEST(Config, RoundTrip) {
  const ExperimentConfig c = small_suite(Experiment::redundancy_suite);
  const ExperimentConfig back = config_from_json(to_json(c));
  EXPECT_EQ(to_json(back), to_json(c));
}

TEST(Config, Invariants) {
  EXPECT_THROW(config_from_json(Json{{"depth", 13}}), ConfigError);
  EXPECT_THROW(config_from_json(Json{{"d", 9}}), ConfigError);
  EXPECT_THROW(config_from_json(Json{{"eps_grid", Json::array()}}), ConfigError);
  EXPECT_THROW(config_from_json(Json{{"seeds", Json::array()}}), ConfigError);
  EXPECT_THROW(config_from_json(Json{{"eps_grid", {0.0}}}), ConfigError);
  EXPECT_THROW(config_from_json(Json{{"cond_cap", 1e9}}), ConfigError);
  EXPECT_THROW(config_from_json(Json{{"budget", 0}}), ConfigError);
  EXPECT_THROW(config_from_json(Json{{"count", -1}}), ConfigError);
  EXPECT_THROW(config_from_json(Json{{"seeds", {-1}}}), ConfigError);
  EXPECT_THROW(config_from_json(Json{{"seeds", {1.5}}}), ConfigError);
  EXPECT_THROW(config_from_json(Json{{"experiment", "nope"}}), ConfigError);
  EXPECT_THROW(config_from_json(Json{{"format", "xml"}}), ConfigError);
  EXPECT_THROW(config_from_json(Json{{"objective", "x"}}), ConfigError);
  EXPECT_THROW(config_from_json(Json{{"depht", 3}}), ConfigError);
  EXPECT_THROW(config_from_json(Json{{"depth", "four"}}), ConfigError);
  EXPECT_THROW(config_from_json(Json::array()), ConfigError);
}

TEST(Report, CounterexampleCsvColumnsAndRatios) {
  ExperimentConfig c;
  c.thetas = {0.0, std::numbers::pi / 4};
  const LabReport rep = run_experiment(c);
  EXPECT_TRUE(rep.passed());
  const std::string csv = to_csv(rep);
  EXPECT_EQ(csv.substr(0, csv.find('\n')),
            "eps,depth,intensity,a2,c2,f_norm,g_norm,bet_norm_sum,bet_inner_sum,ratio_norm,ratio_inner,"
            "ratio_over_sqrt_c2");
  ASSERT_EQ(rep.rows.size(), 8u);
  for (const Row& r : rep.rows) {
    const double eps = r.at("eps").get<double>();
    EXPECT_NEAR(r.at("ratio_norm").get<double>() * eps, 1.0, 1e-9);
  }
  // Header plus one line per row.
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 9);
}

TEST(Report, JsonSchema) {
  const LabReport rep = run_experiment(ExperimentConfig{});
  const Row j = to_json(rep);
  EXPECT_EQ(j.at("schema"), 1);
  EXPECT_EQ(j.at("experiment"), "counterexample-sweep");
  for (const char* key : {"config", "rows", "aggregates", "verdicts", "version"}) EXPECT_TRUE(j.contains(key)) << key;
  EXPECT_EQ(j.at("config").at("experiment"), "counterexample-sweep");
  EXPECT_TRUE(j.at("version").contains("eigen"));
}

TEST(Report, NumberFormatRoundTrips) {
  for (double x : {0.1, 1.0 / 3.0, 1e-300, 12345.678, -2.5e17}) {
    EXPECT_EQ(std::strtod(format_number(x).c_str(), nullptr), x);
  }
  EXPECT_EQ(format_number(std::nan("")), "nan");
}

TEST(Report, CsvQuoting) {
  LabReport rep;
  rep.columns = {"a", "b"};
  Row r;
  r["a"] = "x,y";
  r["b"] = "say \"hi\"";
  rep.rows.push_back(r);
  EXPECT_EQ(to_csv(rep), "a,b\n\"x,y\",\"say \"\"hi\"\"\"\n");
}

TEST(Report, ColumnStats) {
  std::vector<Row> rows(3);
  rows[0]["v"] = 3.0;
  rows[1]["v"] = 1.0;
  rows[2]["v"] = 2.0;
  const Row s = column_stats(rows, "v");
  EXPECT_EQ(s.at("max"), 3.0);
  EXPECT_EQ(s.at("median"), 2.0);
  EXPECT_EQ(s.at("count"), 3);
}

TEST(Report, InputsHashIsStable) {
  EXPECT_EQ(inputs_hash(Json{{"a", 1}}), inputs_hash(Json{{"a", 1}}));
  EXPECT_NE(inputs_hash(Json{{"a", 1}}), inputs_hash(Json{{"a", 2}}));
  EXPECT_EQ(inputs_hash(Json{{"a", 1}}).size(), 16u);
}

TEST(Experiments, DeterministicGivenConfig) {
  for (Experiment e : {Experiment::sibet_suite, Experiment::wcet_suite, Experiment::redundancy_suite,
                       Experiment::bellman_certify}) {
    const ExperimentConfig c = small_suite(e);
    EXPECT_EQ(to_json(run_experiment(c)).at("rows"), to_json(run_experiment(c)).at("rows")) << to_string(e);
  }
}

TEST(Experiments, SuitesPassOnSmallConfigs) {
  for (Experiment e : {Experiment::c2_sharpness, Experiment::sibet_suite, Experiment::wcet_suite,
                       Experiment::redundancy_suite, Experiment::bellman_certify}) {
    const LabReport rep = run_experiment(small_suite(e));
    for (const Verdict& v : rep.verdicts) EXPECT_TRUE(v.passed) << to_string(e) << " " << v.name << " " << v.value;
  }
}

// Regenerating a row from its seed reproduces the reported numbers.
TEST(Experiments, RowsRegenerateFromKey) {
  const LabReport rep = run_experiment(small_suite(Experiment::redundancy_suite));
  for (const Row& r : rep.rows) {
    const auto inst = random_instance(r.at("depth").get<int>(), r.at("d").get<int>(), r.at("seed").get<std::uint64_t>(),
                                      r.at("cond_cap").get<double>());
    const double sred = sred_constant(inst.w, inst.alpha);
    EXPECT_NEAR(r.at("sred").get<double>(), sred, 1e-12 * (1 + sred));
    EXPECT_EQ(r.at("inputs_hash").get<std::string>(),
              inputs_hash(lab::detail::instance_json(inst.w, inst.alpha, inst.seq, inst.f, inst.g)));
  }
}

TEST(Experiments, RedundancySuiteRecordsPerDimension) {
  const LabReport rep = run_experiment(small_suite(Experiment::redundancy_suite));
  for (const char* d : {"1", "2", "3", "4"}) EXPECT_TRUE(rep.aggregates.at("per_d").contains(d)) << d;
  EXPECT_LE(rep.verdict("sred_at_most_four").value, 4.0);
}

TEST(Experiments, BellmanCertifyHasZeroViolations) {
  const LabReport rep = run_experiment(small_suite(Experiment::bellman_certify));
  for (const Row& r : rep.rows) EXPECT_EQ(r.at("violations"), 0) << r.at("check");
  EXPECT_FALSE(rep.aggregates.at("matrix_candidate").at("asserted").get<bool>());
}

TEST(Experiments, ExternalInstances) {
  const auto inst = random_instance(3, 2, 77, 1e3);
  ExperimentConfig c = small_suite(Experiment::redundancy_suite, 1);
  c.instances.push_back(Json{{"weight", to_json(inst.w)}, {"alpha", to_json(inst.alpha)}, {"seq", to_json(inst.seq)}});
  const std::string path = ::testing::TempDir() + "dyadlab_instance.json";
  {
    std::ofstream out(path);
    out << Json{{"weight", to_json(inst.w)}}.dump();
  }
  c.instances.push_back(Json{{"path", path}});
  const LabReport rep = run_experiment(c);
  ASSERT_EQ(rep.rows.size(), 3u);
  EXPECT_EQ(rep.rows[1].at("instance"), 0);
  EXPECT_NEAR(rep.rows[1].at("sred").get<double>(), sred_constant(inst.w, inst.alpha), 1e-12);
  EXPECT_EQ(rep.rows[2].at("instance"), 1);
  std::remove(path.c_str());

  c.instances = {Json{{"alpha", to_json(inst.alpha)}}};
  EXPECT_THROW(run_experiment(c), ConfigError);
  c.instances = {Json{{"path", "/nonexistent/x.json"}}};
  EXPECT_THROW(run_experiment(c), ConfigError);
}

TEST(Experiments, NumericErrorsCarryRegenerationKey) {
  try {
    lab::detail::guarded("seed=9 depth=2", []() -> int { throw SingularityError("boom", 0.0); });
    FAIL();
  } catch (const NumericError& e) {
    EXPECT_NE(std::string(e.what()).find("seed=9 depth=2"), std::string::npos);
  }
  EXPECT_THROW(lab::detail::guarded("k", []() -> int { throw ConfigError("bad"); }), ConfigError);
}

TEST(Experiments, WritesReportToOutputPath) {
  ExperimentConfig c;
  c.output_path = ::testing::TempDir() + "dyadlab_report.csv";
  c.format = Format::csv;
  run_experiment(c);
  EXPECT_EQ(slurp(c.output_path).substr(0, 4), "eps,");
  std::remove(c.output_path.c_str());
}

TEST(Search, BudgetOneReturnsInitialObjective) {
  const SearchResult r = search(3, 2, 1, Objective::bet_norm_ratio, 1, 1e4);
  EXPECT_EQ(r.trace.size(), 1u);
  EXPECT_EQ(r.best_value, r.initial_value);
  // The seeded ε-family member with ε = cond_cap^{-1/2}.
  EXPECT_NEAR(r.initial_value, 100.0, 1e-9);
  EXPECT_NEAR(r.c2, 1e4, 1e-6);
  EXPECT_THROW(search(3, 2, 1, Objective::bet_norm_ratio, 0, 1e4), PreconditionError);
}

TEST(Search, BestSoFarIsMonotoneAndDeterministic) {
  for (Objective obj : {Objective::bet_norm_ratio, Objective::sred_ratio, Objective::red_ratio}) {
    const SearchResult a = search(3, 2, 5, obj, 600, 1e3, 3);
    const SearchResult b = search(3, 2, 5, obj, 600, 1e3, 3);
    ASSERT_EQ(a.trace.size(), 600u);
    for (std::size_t i = 1; i < a.trace.size(); ++i) EXPECT_GE(a.trace[i], a.trace[i - 1]);
    EXPECT_EQ(a.trace, b.trace);
    EXPECT_GE(a.best_value, a.initial_value);
    EXPECT_LE(a.c2, 1e3 * (1 + 1e-9));
  }
}

TEST(Search, BestInstanceRegenerates) {
  const SearchResult r = search(3, 2, 9, Objective::sred_ratio, 400, 1e3, 2);
  const SearchInstance s = realize(r.best);
  EXPECT_NEAR(evaluate(Objective::sred_ratio, s), r.best_value, 1e-12);
  EXPECT_NEAR(carleson_intensity(s.alpha), 1.0, 1e-12);
  // The serialized instance rebuilds the same weight.
  const MatrixWeight w = weight_from_json(to_json(r.best).at("weight"));
  EXPECT_NEAR(sred_constant(w, scalar_sequence_from_json(to_json(r.best).at("alpha"))), r.best_value, 1e-9);
}

TEST(Search, ReportCarriesVerdicts) {
  ExperimentConfig c;
  c.experiment = Experiment::adversarial_search;
  c.objective = Objective::sred_ratio;
  c.d = 1;
  c.depth = 3;
  c.seeds = {3};
  c.budget = 300;
  c.cond_cap = 1e4;
  const LabReport rep = run_experiment(c);
  EXPECT_TRUE(rep.passed());
  EXPECT_EQ(rep.rows.size(), 4u);
  EXPECT_TRUE(rep.aggregates.at("seed3").contains("best_instance"));
}

TEST(Search, GivensProductIsOrthogonal) {
  Vector angles(6);
  angles << 0.3, -1.2, 2.0, 0.7, -0.4, 1.5;
  const Matrix q = givens_product(angles, 4);
  EXPECT_LT((q.transpose() * q - Matrix::Identity(4, 4)).norm(), 1e-14);
}

#ifdef DYADLAB_LAB_BINARY
namespace {

int run_cli(const std::string& args) {
  const std::string cmd = std::string(DYADLAB_LAB_BINARY) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST(Cli, ExitCodes) {
  EXPECT_EQ(run_cli("counterexample-sweep"), 0);
  EXPECT_EQ(run_cli("counterexample-sweep --eps 0.1 --format csv"), 0);
  EXPECT_EQ(run_cli("counterexample-sweep --depth 13"), 2);
  EXPECT_EQ(run_cli("no-such-experiment"), 2);
  EXPECT_EQ(run_cli("counterexample-sweep --config /nonexistent.json"), 2);
  const std::string cfg = ::testing::TempDir() + "dyadlab_cli.json";
  {
    std::ofstream out(cfg);
    out << R"({"experiment": "redundancy-suite", "depth": 3, "d": 1, "seeds": [1], "count": 3})";
  }
  EXPECT_EQ(run_cli("redundancy-suite --config " + cfg), 0);
  // A singular instance weight is rejected while loading the config.
  {
    std::ofstream out(cfg);
    out << R"({"instances": [{"weight": {"depth": 0, "d": 2, "values": [[1, 0, 0, 1e-300]]}}]})";
  }
  EXPECT_EQ(run_cli("redundancy-suite --config " + cfg), 2);
  std::remove(cfg.c_str());
}

TEST(Cli, OutputFile) {
  const std::string out = ::testing::TempDir() + "dyadlab_cli_out.csv";
  EXPECT_EQ(run_cli("c2-sharpness --format csv --out " + out), 0);
  EXPECT_EQ(slurp(out).substr(0, 10), "eps,depth,");
  std::remove(out.c_str());
}
#endif
