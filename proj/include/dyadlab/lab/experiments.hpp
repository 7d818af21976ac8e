#pragma once

// The seven lab experiments. Every row carries the seed or ε that
// regenerates it; verdicts compare suite extremes with pinned tolerances and
// the committed regression constants.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "dyadlab/bellman.hpp"
#include "dyadlab/characteristics.hpp"
#include "dyadlab/constructions.hpp"
#include "dyadlab/embeddings.hpp"
#include "dyadlab/lab/config.hpp"
#include "dyadlab/lab/regression.hpp"
#include "dyadlab/lab/report.hpp"
#include "dyadlab/lab/search.hpp"
#include "dyadlab/redundancy.hpp"
#include "dyadlab/serialize.hpp"

namespace dyadlab::lab {

namespace tol {
inline constexpr double kIntensity = 1e-10;
inline constexpr double kNormRel = 1e-10;
inline constexpr double kBetNorm = 1e-9;
inline constexpr double kRatioRel = 1e-9;
inline constexpr double kA2 = 1e-10;
inline constexpr double kBetInner = 1e-9;
inline constexpr double kSharpness = 1e-9;
inline constexpr double kSweepGrowth = 1.05;
inline constexpr double kChain = 1e-9;
inline constexpr double kChoquetRel = 1e-10;
inline constexpr double kNecessityRel = 1e-8;
inline constexpr double kProbeRel = 1e-9;
inline constexpr double kRoundoff = 1e-9;
inline constexpr double kTelescoping = 1e-8;
inline constexpr double kIdentityRel = 1e-10;
inline constexpr double kSizeGap = -1e-9;
inline constexpr double kConcavityGap = -1e-8;
inline constexpr double kDmGapPerStep = -1e-4;
inline constexpr double kDynamicsGap = -1e-9;
inline constexpr double kRichardsonLow = 80.0;
inline constexpr double kRichardsonHigh = 120.0;
inline constexpr double kSearchFraction = 0.99;
}  // namespace tol

namespace detail {

inline std::string regen_key(std::uint64_t seed, int depth, int d, double cap) {
  std::ostringstream os;
  os << "seed=" << seed << " depth=" << depth << " d=" << d << " cond_cap=" << cap;
  return os.str();
}

/// Runs fn, re-raising library errors other than config errors as numeric
/// errors tagged with the instance's regeneration key.
template <class Fn>
auto guarded(const std::string& key, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw NumericError(std::string(e.what()) + " [regenerate: " + key + "]");
  }
}

inline Json instance_json(const MatrixWeight& w, const ScalarSequence& alpha, const MatrixSequence& seq,
                          const VectorField& f, const VectorField& g) {
  return {{"weight", dyadlab::to_json(w)}, {"alpha", dyadlab::to_json(alpha)}, {"seq", dyadlab::to_json(seq)},
          {"f", dyadlab::to_json(f)},      {"g", dyadlab::to_json(g)}};
}

inline std::string hash_of(const RandomInstance& inst) {
  return inputs_hash(instance_json(inst.w, inst.alpha, inst.seq, inst.f, inst.g));
}

/// Inline instance or {"path": file}. weight is required; alpha, seq, f and g
/// default to root-only unit data. Sequences are rescaled to intensity 1.
inline RandomInstance load_instance(const Json& entry, std::size_t index) {
  const Json j = entry.contains("path") ? read_json_file(entry.at("path").get<std::string>()) : entry;
  if (!j.contains("weight")) throw ConfigError("instance " + std::to_string(index) + ": missing \"weight\"");
  MatrixWeight w = weight_from_json(j.at("weight"));
  const int depth = w.depth(), d = w.dim();
  ScalarSequence alpha(depth);
  MatrixSequence seq(depth, d);
  if (j.contains("alpha")) {
    alpha = scalar_sequence_from_json(j.at("alpha"));
  } else {
    alpha.set(DyadicIndex::root(), 1.0);
  }
  if (j.contains("seq")) {
    seq = matrix_sequence_from_json(j.at("seq"));
  } else {
    seq.set(DyadicIndex::root(), SymMatrix::identity(d));
  }
  VectorField f = j.contains("f") ? field_from_json<Vector>(j.at("f")) : constant_vector_field(depth, Vector::Unit(d, 0));
  VectorField g = j.contains("g") ? field_from_json<Vector>(j.at("g")) : constant_vector_field(depth, Vector::Unit(d, 0));
  if (alpha.depth() != depth || seq.depth() != depth || f.depth() != depth || g.depth() != depth) {
    throw ConfigError("instance " + std::to_string(index) + ": depth mismatch");
  }
  if (seq.dim() != d || f.dim() != d || g.dim() != d) {
    throw ConfigError("instance " + std::to_string(index) + ": dimension mismatch");
  }
  const double ia = carleson_intensity(alpha), is = carleson_intensity(seq);
  if (!(ia > 0.0) || !(is > 0.0)) throw ConfigError("instance " + std::to_string(index) + ": empty sequence");
  return RandomInstance{index,          depth,                   d,           c2_conditioning(w), std::move(w),
                        seq.scaled(1.0 / is), alpha.scaled(1.0 / ia), std::move(f), std::move(g)};
}

struct SuiteInstance {
  RandomInstance inst;
  Row key;
  std::string key_text;
};

/// Seeded random instances followed by the config's external instances.
inline std::vector<SuiteInstance> suite_instances(const ExperimentConfig& cfg) {
  std::vector<SuiteInstance> out;
  for (std::uint64_t seed : cfg.suite_seeds()) {
    const auto [depth, d] = cfg.shape(seed);
    const std::string key = regen_key(seed, depth, d, cfg.cond_cap);
    Row k;
    k["seed"] = seed;
    k["depth"] = depth;
    k["d"] = d;
    k["cond_cap"] = cfg.cond_cap;
    out.push_back({guarded(key, [&] { return random_instance(depth, d, seed, cfg.cond_cap); }), std::move(k), key});
  }
  for (std::size_t i = 0; i < cfg.instances.size(); ++i) {
    const std::string key = "instance=" + std::to_string(i);
    Row k;
    k["instance"] = i;
    RandomInstance inst = load_instance(cfg.instances[i], i);
    k["depth"] = inst.depth;
    k["d"] = inst.d;
    out.push_back({std::move(inst), std::move(k), key});
  }
  return out;
}

inline Row keyed(const Row& key) {
  Row row;
  for (const auto& [k, v] : key.items()) row[k] = v;
  return row;
}

inline double column_max(const std::vector<Row>& rows, const std::string& col,
                         const std::function<bool(const Row&)>& keep = nullptr) {
  double best = -std::numeric_limits<double>::infinity();
  for (const Row& r : rows) {
    if (keep && !keep(r)) continue;
    if (r.contains(col) && r.at(col).is_number()) best = std::max(best, r.at(col).get<double>());
  }
  return best;
}

inline double column_min(const std::vector<Row>& rows, const std::string& col,
                         const std::function<bool(const Row&)>& keep = nullptr) {
  double best = std::numeric_limits<double>::infinity();
  for (const Row& r : rows) {
    if (keep && !keep(r)) continue;
    if (r.contains(col) && r.at(col).is_number()) best = std::min(best, r.at(col).get<double>());
  }
  return best;
}

inline double worst(const std::vector<Row>& rows, const std::function<double(const Row&)>& dev) {
  double w = 0.0;
  for (const Row& r : rows) w = std::max(w, dev(r));
  return w;
}

inline double num(const Row& r, const char* col) { return r.at(col).get<double>(); }

}  // namespace detail

inline const std::vector<std::string>& sweep_columns() {
  static const std::vector<std::string> cols{"eps",       "depth",         "intensity",     "a2",
                                             "c2",        "f_norm",        "g_norm",        "bet_norm_sum",
                                             "bet_inner_sum", "ratio_norm", "ratio_inner", "ratio_over_sqrt_c2"};
  return cols;
}

/// All counterexample quantities for one (ε, θ).
inline Row sweep_row(double eps, double theta, int depth) {
  std::ostringstream key;
  key << "eps=" << eps << " theta=" << theta << " depth=" << depth;
  return detail::guarded(key.str(), [&] {
    const EpsilonInstance inst = epsilon_family(eps, theta, depth);
    const double fn = l2_norm(inst.f), gn = l2_norm(inst.g);
    const double c2 = c2_conditioning(inst.w);
    const double bn = bet_norm_sum(inst.w, inst.seq_norm, inst.f, inst.g);
    const double bi = bet_inner_sum(inst.w, inst.seq_inner, inst.f, inst.g);
    Row row;
    row["eps"] = eps;
    row["depth"] = depth;
    row["intensity"] = carleson_intensity(inst.seq_norm);
    row["a2"] = a2_characteristic(inst.w);
    row["c2"] = c2;
    row["f_norm"] = fn;
    row["g_norm"] = gn;
    row["bet_norm_sum"] = bn;
    row["bet_inner_sum"] = bi;
    row["ratio_norm"] = bn / (fn * gn);
    row["ratio_inner"] = bi / (fn * gn);
    row["ratio_over_sqrt_c2"] = bn / (fn * gn) / std::sqrt(c2);
    row["theta"] = theta;
    row["intensity_inner"] = carleson_intensity(inst.seq_inner);
    return row;
  });
}

inline std::vector<Row> sweep_rows(const ExperimentConfig& cfg) {
  std::vector<Row> rows;
  for (double theta : cfg.thetas) {
    for (double eps : cfg.eps_grid) rows.push_back(sweep_row(eps, theta, cfg.depth));
  }
  return rows;
}

inline LabReport counterexample_sweep(const ExperimentConfig& cfg) {
  using detail::num;
  using detail::worst;
  LabReport rep;
  rep.columns = sweep_columns();
  rep.rows = sweep_rows(cfg);
  const auto& rows = rep.rows;
  rep.verdicts.push_back(at_most("intensity", worst(rows, [](const Row& r) {
    return std::max(std::abs(num(r, "intensity") - 1.0), std::abs(num(r, "intensity_inner") - 1.0));
  }), tol::kIntensity));
  rep.verdicts.push_back(at_most("f_norm_equals_eps", worst(rows, [](const Row& r) {
    return std::abs(num(r, "f_norm") / num(r, "eps") - 1.0);
  }), tol::kNormRel));
  rep.verdicts.push_back(at_most("g_norm_equals_one", worst(rows, [](const Row& r) {
    return std::abs(num(r, "g_norm") - 1.0);
  }), tol::kNormRel));
  rep.verdicts.push_back(at_most("bet_norm_sum_equals_one", worst(rows, [](const Row& r) {
    return std::abs(num(r, "bet_norm_sum") - 1.0);
  }), tol::kBetNorm));
  rep.verdicts.push_back(at_most("ratio_norm_equals_inverse_eps", worst(rows, [](const Row& r) {
    return std::abs(num(r, "ratio_norm") * num(r, "eps") - 1.0);
  }), tol::kRatioRel));
  rep.verdicts.push_back(at_most("a2_equals_one", worst(rows, [](const Row& r) {
    return std::abs(num(r, "a2") - 1.0);
  }), tol::kA2));
  rep.verdicts.push_back(at_most("bet_inner_sum_equals_half", worst(rows, [](const Row& r) {
    return std::abs(num(r, "bet_inner_sum") - 0.5);
  }), tol::kBetInner));
  rep.aggregates["ratio_norm"] = column_stats(rows, "ratio_norm");
  rep.aggregates["ratio_inner"] = column_stats(rows, "ratio_inner");
  return rep;
}

inline LabReport c2_sharpness(const ExperimentConfig& cfg) {
  using detail::num;
  using detail::worst;
  LabReport rep;
  rep.columns = {"eps", "depth", "c2", "f_norm", "g_norm", "bet_norm_sum", "ratio_norm", "ratio_over_sqrt_c2"};
  rep.rows = sweep_rows(cfg);
  rep.verdicts.push_back(at_most("ratio_over_sqrt_c2_equals_one", worst(rep.rows, [](const Row& r) {
    return std::abs(num(r, "ratio_over_sqrt_c2") - 1.0);
  }), tol::kSharpness));
  rep.verdicts.push_back(at_most("c2_equals_inverse_eps_squared", worst(rep.rows, [](const Row& r) {
    const double e = num(r, "eps");
    return std::abs(num(r, "c2") * e * e - 1.0);
  }), tol::kSharpness));
  rep.aggregates["ratio_over_sqrt_c2"] = column_stats(rep.rows, "ratio_over_sqrt_c2");
  return rep;
}

namespace detail {

/// Bilinear quantities, Choquet identity and proof-chain margins for (W, α, f, g).
inline void bilinear_columns(Row& row, const MatrixWeight& w, const ScalarSequence& alpha, const VectorField& f,
                             const VectorField& g) {
  const double fn = l2_norm(f), gn = l2_norm(g);
  const double c2 = c2_conditioning(w), root_c2 = std::sqrt(c2);
  const double inner = bet_inner_sum(w, alpha, f, g);
  const double norm = bet_norm_sum(w, alpha, f, g);
  const CubeFunctional fq = bet_functional(w, f, g);
  const ScalarField phi = phi_product(w, f, g);
  double pointwise = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < phi.size(); ++i) {
    for (const DyadicIndex& q : w.tree().ancestors_of_leaf(i)) pointwise = std::min(pointwise, root_c2 * phi[i] - fq[q]);
  }
  const ChoquetForms ch = choquet_integral(alpha, fq);
  row["f_norm"] = fn;
  row["g_norm"] = gn;
  row["c2"] = c2;
  row["a2"] = a2_characteristic(w);
  row["bet_inner_sum"] = inner;
  row["bet_norm_sum"] = norm;
  row["ratio_inner"] = inner / (fn * gn);
  row["ratio_c2bet"] = norm / (root_c2 * fn * gn);
  row["chain_pointwise_margin"] = pointwise;
  row["chain_integrated_margin"] = root_c2 * integral(phi, DyadicIndex::root()) - ch.sum_form;
  row["choquet_rel_err"] = std::abs(ch.sum_form - ch.level_form) / std::max(1.0, ch.sum_form);
}

}  // namespace detail

inline LabReport sibet_suite(const ExperimentConfig& cfg) {
  LabReport rep;
  rep.columns = {"kind", "seed", "eps", "theta", "depth", "d", "f_norm", "g_norm", "c2", "a2",
                 "bet_inner_sum", "bet_norm_sum", "ratio_inner", "ratio_c2bet", "chain_pointwise_margin",
                 "chain_integrated_margin", "choquet_rel_err", "inputs_hash"};
  for (const detail::SuiteInstance& s : detail::suite_instances(cfg)) {
    Row row = detail::keyed(s.key);
    row["kind"] = "random";
    detail::guarded(s.key_text, [&] { detail::bilinear_columns(row, s.inst.w, s.inst.alpha, s.inst.f, s.inst.g); });
    row["inputs_hash"] = detail::hash_of(s.inst);
    rep.rows.push_back(std::move(row));
  }
  // ε-sweep: the ε-family weight against seeded random (f, g, α), and the
  // witness data of the family itself.
  for (double theta : cfg.thetas) {
    for (double eps : cfg.eps_grid) {
      const EpsilonInstance fam = epsilon_family(eps, theta, cfg.depth);
      for (std::size_t k = 0; k < cfg.sweep_seeds; ++k) {
        const std::uint64_t seed = cfg.seeds.front() + k;
        Rng rng(seed);
        const ScalarSequence alpha = random_scalar_sequence(rng, cfg.depth);
        const VectorField f = random_vector_field(rng, cfg.depth, 2);
        const VectorField g = random_vector_field(rng, cfg.depth, 2);
        Row row;
        row["kind"] = "sweep";
        row["seed"] = seed;
        row["eps"] = eps;
        row["theta"] = theta;
        row["depth"] = cfg.depth;
        row["d"] = 2;
        std::ostringstream key;
        key << "sweep eps=" << eps << " theta=" << theta << " seed=" << seed;
        detail::guarded(key.str(), [&] { detail::bilinear_columns(row, fam.w, alpha, f, g); });
        rep.rows.push_back(std::move(row));
      }
      Row row;
      row["kind"] = "witness";
      row["eps"] = eps;
      row["theta"] = theta;
      row["depth"] = cfg.depth;
      row["d"] = 2;
      detail::bilinear_columns(row, fam.w, fam.alpha, fam.f, fam.g);
      rep.rows.push_back(std::move(row));
    }
  }

  auto kind = [](const char* k) { return [k](const Row& r) { return r.at("kind") == k; }; };
  const auto& rows = rep.rows;
  const double inner_max = detail::column_max(rows, "ratio_inner");
  rep.verdicts.push_back(at_most("sibet_regression", inner_max, regression::kSibetInner));
  const double sweep_max = detail::column_max(rows, "ratio_inner", kind("sweep"));
  const double d2_max = detail::column_max(rows, "ratio_inner", [](const Row& r) {
    return r.at("kind") == "random" && r.at("d") == 2;
  });
  rep.aggregates["sibet_sweep_max"] = sweep_max;
  rep.aggregates["sibet_random_d2_max"] = d2_max;
  if (std::isfinite(sweep_max) && std::isfinite(d2_max)) {
    rep.verdicts.push_back(at_most("sibet_sweep_within_d2_max", sweep_max, tol::kSweepGrowth * d2_max));
  }
  // Per seed, the spread of the sweep ratio across ε.
  std::map<std::uint64_t, std::pair<double, double>> spread;
  for (const Row& r : rows) {
    if (r.at("kind") != "sweep") continue;
    auto [it, fresh] = spread.try_emplace(r.at("seed").get<std::uint64_t>(), std::numeric_limits<double>::infinity(),
                                          0.0);
    it->second.first = std::min(it->second.first, detail::num(r, "ratio_inner"));
    it->second.second = std::max(it->second.second, detail::num(r, "ratio_inner"));
  }
  double growth = 1.0;
  for (const auto& [seed, mm] : spread) growth = std::max(growth, mm.second / mm.first);
  if (!spread.empty()) rep.verdicts.push_back(at_most("sibet_sweep_growth", growth, tol::kSweepGrowth));
  rep.verdicts.push_back(at_most("c2bet_regression", detail::column_max(rows, "ratio_c2bet"), regression::kC2bet));
  rep.verdicts.push_back(at_least("chain_pointwise", detail::column_min(rows, "chain_pointwise_margin"), -tol::kChain));
  rep.verdicts.push_back(
      at_least("chain_integrated", detail::column_min(rows, "chain_integrated_margin"), -tol::kChain));
  rep.verdicts.push_back(at_most("choquet_identity", detail::column_max(rows, "choquet_rel_err"), tol::kChoquetRel));
  rep.aggregates["ratio_inner"] = column_stats(rows, "ratio_inner");
  rep.aggregates["ratio_c2bet"] = column_stats(rows, "ratio_c2bet");
  rep.aggregates["random_instances"] =
      std::count_if(rows.begin(), rows.end(), [](const Row& r) { return r.at("kind") == "random"; });
  return rep;
}

inline LabReport wcet_suite(const ExperimentConfig& cfg) {
  LabReport rep;
  rep.columns = {"seed", "depth", "d", "testing", "cet_sum", "f_norm", "ratio_cet", "probe_at_maximizer",
                 "necessity_rel_err", "sampled_over_testing", "inputs_hash"};
  for (const detail::SuiteInstance& s : detail::suite_instances(cfg)) {
    Row row = detail::keyed(s.key);
    detail::guarded(s.key_text, [&] {
      const RandomInstance& inst = s.inst;
      const double testing = wcet_testing_constant(inst.w, inst.seq);
      const double cet = cet_sum(inst.w, inst.seq, inst.f);
      const double fn = l2_norm(inst.f);
      const TestingMaximizer m = testing_maximizer(inst.w, inst.seq);
      const double probe = necessity_probe(inst.w, inst.seq, m.cube, m.e);
      Rng rng(inst.seed + 0x51ed);
      const auto cubes = inst.w.tree().cubes();
      std::uniform_int_distribution<std::size_t> pick(0, cubes.size() - 1);
      double sampled = 0.0;
      for (int i = 0; i < 20; ++i) {
        sampled = std::max(sampled, necessity_probe(inst.w, inst.seq, cubes[pick(rng)], random_unit(rng, inst.d)));
      }
      row["testing"] = testing;
      row["cet_sum"] = cet;
      row["f_norm"] = fn;
      row["ratio_cet"] = cet / (testing * fn * fn);
      row["probe_at_maximizer"] = probe;
      row["necessity_rel_err"] = std::abs(probe - testing) / testing;
      row["sampled_over_testing"] = sampled / testing;
    });
    row["inputs_hash"] = detail::hash_of(s.inst);
    rep.rows.push_back(std::move(row));
  }
  rep.verdicts.push_back(
      at_most("necessity_identity", detail::column_max(rep.rows, "necessity_rel_err"), tol::kNecessityRel));
  rep.verdicts.push_back(
      at_most("probes_below_testing", detail::column_max(rep.rows, "sampled_over_testing"), 1.0 + tol::kProbeRel));
  rep.verdicts.push_back(at_most("wcet_regression", detail::column_max(rep.rows, "ratio_cet"), regression::kWcet));
  rep.aggregates["ratio_cet"] = column_stats(rep.rows, "ratio_cet");
  return rep;
}

namespace detail {

// U = V^{-1/2}(1 + sP)V^{-1/2} with P random PSD and s ∈ [0, 2] lies in the Bellman domain.
inline BellmanPoint sample_point(Rng& rng, int d, double cap) {
  const SymMatrix v = random_spd(rng, d, cap);
  const double s = std::uniform_real_distribution<double>(0.0, 2.0)(rng);
  const SymMatrix u = (SymMatrix::identity(d) + random_psd(rng, d) * s).congruence(spd_power(v, Power::inv_sqrt).matrix());
  return {u, v, std::uniform_real_distribution<double>(0.0, 1.0)(rng)};
}

struct CheckTally {
  std::size_t samples = 0;
  std::size_t violations = 0;
  double min_gap = std::numeric_limits<double>::infinity();

  void add(double gap, double threshold) {
    ++samples;
    min_gap = std::min(min_gap, gap);
    if (gap < threshold) ++violations;
  }
};

// Second differences of t ↦ B(U, V + tΔV, m + tΔm) against the Hessian form at t = 1e-3 and 1e-4.
inline double richardson_ratio() {
  const SymMatrix u = SymMatrix::identity(2) * 20.0;
  const SymMatrix v = SymMatrix::diagonal({0.1, 0.2});
  const SymMatrix dv = SymMatrix::identity(2);
  const double m = 0.3, dm = 0.5;
  const Matrix exact = bellman_hessian_form(v, dv, m, dm) / (m + 1.0);
  auto error = [&](double t) {
    const Matrix bp = bellman_value(u, v + dv * t, m + t * dm).matrix();
    const Matrix bm = bellman_value(u, v + dv * (-t), m - t * dm).matrix();
    const Matrix b0 = bellman_value(u, v, m).matrix();
    return (((bp + bm - 2.0 * b0) / (t * t)) - exact).norm();
  };
  return error(1e-3) / error(1e-4);
}

}  // namespace detail

inline LabReport bellman_certify(const ExperimentConfig& cfg) {
  LabReport rep;
  rep.columns = {"check", "seed", "depth", "d", "samples", "violations", "min_gap", "threshold"};
  const std::uint64_t seed = cfg.seeds.front();
  auto dim = [&](std::size_t i) { return cfg.d > 0 ? cfg.d : 1 + static_cast<int>(i % 4); };
  auto tally_row = [&](const char* check, const detail::CheckTally& t, double threshold) {
    Row row;
    row["check"] = check;
    row["seed"] = seed;
    row["d"] = cfg.d;
    row["samples"] = t.samples;
    row["violations"] = t.violations;
    row["min_gap"] = t.min_gap;
    row["threshold"] = threshold;
    rep.rows.push_back(std::move(row));
  };
  const std::string key = "bellman seed=" + std::to_string(seed);
  detail::guarded(key, [&] {
    Rng rng(seed);
    detail::CheckTally size, concavity, dm;
    for (std::size_t i = 0; i < cfg.samples; ++i) {
      const BellmanPoint p = detail::sample_point(rng, dim(i), cfg.cond_cap);
      const SizeGaps gaps = bellman_size_gaps(p);
      size.add(std::min(gaps.lower, gaps.upper), tol::kSizeGap);
    }
    for (std::size_t i = 0; i < cfg.samples; ++i) {
      const BellmanPoint p0 = detail::sample_point(rng, dim(i), cfg.cond_cap);
      const BellmanPoint p1 = detail::sample_point(rng, dim(i), cfg.cond_cap);
      concavity.add(bellman_concavity_gap(p0, p1), tol::kConcavityGap);
    }
    for (std::size_t i = 0; i < cfg.samples; ++i) {
      const BellmanPoint p = detail::sample_point(rng, dim(i), cfg.cond_cap);
      const double h = p.m > 0.5 ? -kDefaultDmStep : kDefaultDmStep;
      // Threshold −1e-4·|h| in units of ‖V⁻¹‖, reported as gap / (|h| ‖V⁻¹‖).
      const double scale = std::abs(h) * op_norm(spd_power(p.v, Power::inverse));
      dm.add(bellman_dm_gap(p, h) / scale, tol::kDmGapPerStep);
    }
    tally_row("size", size, tol::kSizeGap);
    tally_row("concavity", concavity, tol::kConcavityGap);
    tally_row("dm", dm, tol::kDmGapPerStep);
  });

  detail::CheckTally dynamics_all;
  for (const detail::SuiteInstance& s : detail::suite_instances(cfg)) {
    const double gap = detail::guarded(s.key_text, [&] { return bellman_min_dynamics_gap(s.inst.w, s.inst.alpha); });
    dynamics_all.add(gap, tol::kDynamicsGap);
    Row row = detail::keyed(s.key);
    row["check"] = "dynamics";
    row["samples"] = s.inst.w.tree().cube_count() - s.inst.w.tree().leaf_count();
    row["violations"] = gap < tol::kDynamicsGap ? 1 : 0;
    row["min_gap"] = gap;
    row["threshold"] = tol::kDynamicsGap;
    row["inputs_hash"] = detail::hash_of(s.inst);
    rep.rows.push_back(std::move(row));
  }

  const double ratio = detail::richardson_ratio();
  Row hrow;
  hrow["check"] = "hessian_richardson";
  hrow["samples"] = 1;
  hrow["violations"] = (ratio >= tol::kRichardsonLow && ratio <= tol::kRichardsonHigh) ? 0 : 1;
  hrow["min_gap"] = ratio;
  rep.rows.push_back(std::move(hrow));

  const CandidateProbeReport cand = matrix_candidate_concavity_probe(seed, std::min<std::size_t>(cfg.samples, 2000), 2);
  rep.aggregates["matrix_candidate"] = {{"samples", cand.samples}, {"violations", cand.violations},
                                        {"min_gap", cand.min_gap}, {"asserted", false}};

  auto violations = [&](const char* check) {
    double v = 0.0;
    for (const Row& r : rep.rows) {
      if (r.at("check") == check) v += r.at("violations").get<double>();
    }
    return v;
  };
  rep.verdicts.push_back(at_most("size_violations", violations("size"), 0.0));
  rep.verdicts.push_back(at_most("concavity_violations", violations("concavity"), 0.0));
  rep.verdicts.push_back(at_most("dm_violations", violations("dm"), 0.0));
  rep.verdicts.push_back(at_most("dynamics_violations", violations("dynamics"), 0.0));
  rep.verdicts.push_back(at_least("richardson_ratio_low", ratio, tol::kRichardsonLow));
  rep.verdicts.push_back(at_most("richardson_ratio_high", ratio, tol::kRichardsonHigh));
  rep.aggregates["dynamics_min_gap"] = dynamics_all.min_gap;
  rep.aggregates["dynamics_instances"] = dynamics_all.samples;
  return rep;
}

namespace detail {

inline MatrixSequence op_norm_relaxation(const MatrixSequence& b) {
  MatrixSequence out(b.depth(), b.dim());
  for (const auto& [q, m] : b.entries()) out.set(q, SymMatrix::identity(b.dim()) * op_norm(m));
  return out;
}

// Expensive cross-oracle checks: telescoped Bellman bound, op-norm relaxation,
// trace cycling (scalar b) and the substitution identity on two random (K, e).
inline void redundancy_cross_checks(Row& row, const RandomInstance& inst, double sred, const RedConstants& c) {
  const TelescopedBound tb = bellman_telescoped_bound(inst.w, inst.alpha);
  row["telescoped"] = tb.constant;
  row["telescoping_err"] = std::abs(tb.constant - sred) / (1.0 + sred);
  row["telescoping_margin"] = tb.min_margin;

  const MatrixSequence relaxed = op_norm_relaxation(inst.seq);
  const RedConstants hi = dyadlab::detail::red_constants_unchecked(inst.w, relaxed.scaled(1.0 / carleson_intensity(relaxed)));
  // B ⪯ ‖B‖1 termwise; after the common rescale by the relaxed intensity the
  // original constants shrink by the same factor.
  const double s = carleson_intensity(inst.seq) / carleson_intensity(relaxed);
  row["monotonicity_excess"] =
      std::max({c.c1 * s / hi.c1, c.c2 * s / hi.c2, c.c3 * s / hi.c3}) - 1.0;

  Rng rng(inst.seed + 0x7ace);
  const auto cubes = inst.w.tree().cubes();
  std::uniform_int_distribution<std::size_t> pick(0, cubes.size() - 1);
  double trace_err = 0.0;
  for (int i = 0; i < 20; ++i) {
    const DyadicIndex k = cubes[pick(rng)];
    const auto sub = inst.w.tree().subcubes(k);
    const DyadicIndex q = sub[std::uniform_int_distribution<std::size_t>(0, sub.size() - 1)(rng)];
    const Matrix& u = inst.w.w_avg(k).inv_sqrt.matrix();
    const Matrix& v = inst.w.winv_avg(q).inv_sqrt.matrix();
    const double b = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    const double lhs = (u * v * b * v * u).trace(), rhs = (v * u * b * u * v).trace();
    trace_err = std::max(trace_err, std::abs(lhs - rhs) / (1.0 + std::abs(lhs)));
  }
  row["trace_cycling_err"] = trace_err;

  double subst_err = 0.0;
  for (int i = 0; i < 2; ++i) {
    const DyadicIndex k = cubes[pick(rng)];
    const Vector e = random_unit(rng, inst.d);
    const RedForms f = red_forms(inst.w, inst.seq, k, e);
    subst_err = std::max({subst_err, std::abs(f.second - f.corollary) / (1.0 + f.second),
                          std::abs(f.corollary_rhs - e.squaredNorm()) / e.squaredNorm()});
  }
  row["substitution_err"] = subst_err;
  row["substitution_pairs"] = 2;
}

}  // namespace detail

inline LabReport redundancy_suite(const ExperimentConfig& cfg) {
  LabReport rep;
  rep.columns = {"seed", "depth", "d", "sred", "c1", "c2", "c3", "red_max", "ceiling_4d", "telescoped",
                 "telescoping_err", "telescoping_margin", "monotonicity_excess", "trace_cycling_err",
                 "substitution_err", "inputs_hash"};
  std::size_t n = 0;
  for (const detail::SuiteInstance& s : detail::suite_instances(cfg)) {
    Row row = detail::keyed(s.key);
    detail::guarded(s.key_text, [&] {
      const double sred = sred_constant(s.inst.w, s.inst.alpha);
      const RedConstants c = red_constants(s.inst.w, s.inst.seq);
      row["sred"] = sred;
      row["c1"] = c.c1;
      row["c2"] = c.c2;
      row["c3"] = c.c3;
      row["red_max"] = std::max({c.c1, c.c2, c.c3});
      row["ceiling_4d"] = 4.0 * s.inst.d;
      if (n < cfg.cross_checks) detail::redundancy_cross_checks(row, s.inst, sred, c);
    });
    row["inputs_hash"] = detail::hash_of(s.inst);
    rep.rows.push_back(std::move(row));
    ++n;
  }
  const auto& rows = rep.rows;
  rep.verdicts.push_back(at_most("sred_at_most_four", detail::column_max(rows, "sred"), 4.0 + tol::kRoundoff));
  rep.verdicts.push_back(at_most("red_at_most_4d", detail::worst(rows, [](const Row& r) {
    return detail::num(r, "red_max") / detail::num(r, "ceiling_4d");
  }), 1.0 + tol::kRoundoff));
  Row per_d = Row::object();
  for (int d = 1; d <= kMaxConfigDim; ++d) {
    auto same_d = [d](const Row& r) { return r.at("d") == d; };
    const double sred_max = detail::column_max(rows, "sred", same_d);
    if (!std::isfinite(sred_max)) continue;
    const double red_max = detail::column_max(rows, "red_max", same_d);
    per_d[std::to_string(d)] = {{"sred_max", sred_max}, {"red_max", red_max}};
    if (d <= 4) {
      const auto i = static_cast<std::size_t>(d - 1);
      rep.verdicts.push_back(at_most("sred_regression_d" + std::to_string(d), sred_max, regression::kSred[i]));
      rep.verdicts.push_back(at_most("red_regression_d" + std::to_string(d), red_max, regression::kRed[i]));
    }
  }
  rep.aggregates["per_d"] = per_d;
  if (cfg.cross_checks > 0 && !rows.empty()) {
    rep.verdicts.push_back(
        at_most("telescoping_agreement", detail::column_max(rows, "telescoping_err"), tol::kTelescoping));
    rep.verdicts.push_back(
        at_least("telescoping_margin", detail::column_min(rows, "telescoping_margin"), -tol::kRoundoff));
    rep.verdicts.push_back(
        at_most("op_norm_monotonicity", detail::column_max(rows, "monotonicity_excess"), tol::kIdentityRel));
    rep.verdicts.push_back(
        at_most("trace_cycling", detail::column_max(rows, "trace_cycling_err"), tol::kIdentityRel));
    rep.verdicts.push_back(
        at_most("substitution_identity", detail::column_max(rows, "substitution_err"), tol::kIdentityRel));
  }
  rep.aggregates["sred"] = column_stats(rows, "sred");
  rep.aggregates["red_max"] = column_stats(rows, "red_max");
  return rep;
}

/// Search verdicts: monotone trace; for bet_norm_ratio the best value reaches
/// 0.99 c2^{1/2} and stays within the slack of the suite constant C; for
/// sred_ratio at most 4; for red_ratio at most 4d.
inline void add_search_verdicts(LabReport& rep, Objective obj, int d) {
  const Row& a = rep.aggregates;
  rep.verdicts.push_back({"trace_monotone", a.at("trace_monotone").get<bool>(), 0.0, 0.0, "best-so-far non-decreasing"});
  const double best = a.at("best").get<double>();
  const double c2 = a.at("c2").get<double>();
  switch (obj) {
    case Objective::bet_norm_ratio:
      rep.verdicts.push_back(at_least("reaches_sqrt_c2", best / std::sqrt(c2), tol::kSearchFraction));
      rep.verdicts.push_back(
          at_most("within_suite_constant", best / std::sqrt(c2), regression::kSearchSlack * regression::kC2bet));
      break;
    case Objective::sred_ratio:
      rep.verdicts.push_back(at_most("sred_at_most_four", best, 4.0 + tol::kRoundoff));
      break;
    case Objective::red_ratio:
      rep.verdicts.push_back(at_most("red_at_most_4d", best, 4.0 * d + tol::kRoundoff));
      break;
  }
}

/// One search per seed; rows are the per-restart bests of every search.
inline LabReport adversarial_suite(const ExperimentConfig& cfg) {
  const int d = cfg.d > 0 ? cfg.d : 2;
  LabReport rep;
  bool first = true;
  for (std::uint64_t seed : cfg.suite_seeds()) {
    const std::string key = detail::regen_key(seed, cfg.depth, d, cfg.cond_cap);
    LabReport one = detail::guarded(
        key, [&] { return adversarial_search(cfg.depth, d, seed, cfg.objective, cfg.budget, cfg.cond_cap, cfg.restarts); });
    add_search_verdicts(one, cfg.objective, d);
    if (first) rep.columns = one.columns;
    for (Row& r : one.rows) rep.rows.push_back(std::move(r));
    for (Verdict v : one.verdicts) {
      v.name += "_seed" + std::to_string(seed);
      rep.verdicts.push_back(std::move(v));
    }
    rep.aggregates["seed" + std::to_string(seed)] = one.aggregates;
    first = false;
  }
  return rep;
}

/// Deterministic given the config. Writes the report to output_path when set.
inline LabReport run_experiment(const ExperimentConfig& cfg) {
  validate(cfg);
  LabReport rep;
  switch (cfg.experiment) {
    case Experiment::counterexample_sweep: rep = counterexample_sweep(cfg); break;
    case Experiment::c2_sharpness: rep = c2_sharpness(cfg); break;
    case Experiment::sibet_suite: rep = sibet_suite(cfg); break;
    case Experiment::wcet_suite: rep = wcet_suite(cfg); break;
    case Experiment::bellman_certify: rep = bellman_certify(cfg); break;
    case Experiment::redundancy_suite: rep = redundancy_suite(cfg); break;
    case Experiment::adversarial_search: rep = adversarial_suite(cfg); break;
  }
  rep.experiment = to_string(cfg.experiment);
  rep.config = to_json(cfg);
  if (!cfg.output_path.empty()) write_report(rep, cfg.output_path, cfg.format);
  return rep;
}

}  // namespace dyadlab::lab
