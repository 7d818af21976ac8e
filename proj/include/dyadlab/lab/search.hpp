#pragma once

// Coordinate hill-climb with random restarts over leaf spectra (log-eigenvalues
// and Givens angles), sequence weights and, for the bilinear objective, the
// test functions. Sequences are renormalized to Carleson intensity 1 before
// every evaluation.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <random>
#include <vector>

#include "dyadlab/characteristics.hpp"
#include "dyadlab/constructions.hpp"
#include "dyadlab/embeddings.hpp"
#include "dyadlab/lab/config.hpp"
#include "dyadlab/lab/report.hpp"
#include "dyadlab/redundancy.hpp"
#include "dyadlab/serialize.hpp"

namespace dyadlab::lab {

inline constexpr double kAbsentWeight = -40.0;  // log-weight treated as α_Q = 0
inline constexpr double kAbsentCutoff = -30.0;

struct SearchPoint {
  int depth = 0;
  int d = 1;
  std::vector<Vector> log_eigs;  // per leaf
  std::vector<Vector> angles;    // per leaf, d(d−1)/2 Givens angles
  std::vector<double> z;         // per cube (heap order): α_Q = |Q| e^{z_Q}
  std::vector<Vector> f, g;      // per leaf
  std::vector<Vector> dirs;      // per cube: B_Q = α_Q u uᵀ, u = dirs/‖dirs‖
};

struct SearchInstance {
  MatrixWeight w;
  ScalarSequence alpha;
  MatrixSequence bseq;
  VectorField f, g;
};

inline Matrix givens_product(const Vector& angles, int d) {
  Matrix q = Matrix::Identity(d, d);
  int k = 0;
  for (int i = 0; i < d; ++i) {
    for (int j = i + 1; j < d; ++j) {
      const double c = std::cos(angles(k)), s = std::sin(angles(k));
      ++k;
      for (int r = 0; r < d; ++r) {
        const double a = q(r, i), b = q(r, j);
        q(r, i) = c * a - s * b;
        q(r, j) = s * a + c * b;
      }
    }
  }
  return q;
}

inline SearchInstance realize(const SearchPoint& p) {
  const DyadicTree tree(p.depth);
  std::vector<EigenDecomposition> leaves;
  leaves.reserve(tree.leaf_count());
  for (std::size_t i = 0; i < tree.leaf_count(); ++i) {
    leaves.push_back(spectral(givens_product(p.angles[i], p.d), p.log_eigs[i].array().exp().matrix()));
  }
  MatrixWeight w = MatrixWeight::from_spectral(p.depth, std::move(leaves));

  ScalarSequence alpha(p.depth);
  MatrixSequence bseq(p.depth, p.d);
  for (const DyadicIndex& q : tree.cubes()) {
    const double zq = p.z[q.heap()];
    if (zq < kAbsentCutoff) continue;
    const double a = q.length() * std::exp(zq);
    alpha.set(q, a);
    const Vector u = p.dirs[q.heap()] / p.dirs[q.heap()].norm();
    bseq.set(q, SymMatrix::outer(u) * a);
  }
  if (alpha.empty()) {
    alpha.set(DyadicIndex::root(), 1.0);
    bseq.set(DyadicIndex::root(), SymMatrix::outer(Vector::Unit(p.d, 0)));
  }
  alpha = alpha.scaled(1.0 / carleson_intensity(alpha));
  bseq = bseq.scaled(1.0 / carleson_intensity(bseq));
  return {std::move(w), std::move(alpha), std::move(bseq), VectorField(p.depth, p.f), VectorField(p.depth, p.g)};
}

inline double evaluate(Objective obj, const SearchInstance& s) {
  switch (obj) {
    case Objective::bet_norm_ratio:
      return bet_norm_sum(s.w, s.alpha, s.f, s.g) / (l2_norm(s.f) * l2_norm(s.g));
    case Objective::sred_ratio:
      return sred_constant(s.w, s.alpha);
    case Objective::red_ratio: {
      const RedConstants c = red_constants(s.w, s.bseq);
      return std::max({c.c1, c.c2, c.c3});
    }
  }
  throw Error("unknown objective");
}

/// Restart 0: for bet_norm_ratio with d ≥ 2, the constant weight with
/// eigenvalues (1, ε², 1, …), ε = cond_cap^{-1/2}, f = ε e₂, g = e₁ and
/// α at the root only (a rotated-to-axes member of the ε-family). Otherwise
/// the identity weight with α at the root.
inline SearchPoint initial_point(Objective obj, int depth, int d, double cond_cap) {
  const DyadicTree tree(depth);
  SearchPoint p;
  p.depth = depth;
  p.d = d;
  p.log_eigs.assign(tree.leaf_count(), Vector::Zero(d));
  p.angles.assign(tree.leaf_count(), Vector::Zero(d * (d - 1) / 2));
  p.z.assign(tree.cube_count(), kAbsentWeight);
  p.z[0] = 0.0;
  p.dirs.assign(tree.cube_count(), Vector::Unit(d, 0));
  p.f.assign(tree.leaf_count(), Vector::Unit(d, 0));
  p.g.assign(tree.leaf_count(), Vector::Unit(d, 0));
  if (obj == Objective::bet_norm_ratio && d >= 2) {
    const double eps = 1.0 / std::sqrt(cond_cap);
    for (std::size_t i = 0; i < tree.leaf_count(); ++i) {
      p.log_eigs[i](1) = -std::log(cond_cap);
      p.f[i] = Vector::Unit(d, 1) * eps;
    }
  }
  return p;
}

inline SearchPoint random_point(Rng& rng, int depth, int d, double cond_cap) {
  const DyadicTree tree(depth);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> normal;
  SearchPoint p;
  p.depth = depth;
  p.d = d;
  const int na = d * (d - 1) / 2;
  for (std::size_t i = 0; i < tree.leaf_count(); ++i) {
    Vector l(d), a(na);
    for (int k = 0; k < d; ++k) l(k) = std::log(cond_cap) * unit(rng);
    for (int k = 0; k < na; ++k) a(k) = std::numbers::pi * (2.0 * unit(rng) - 1.0);
    p.log_eigs.push_back(l);
    p.angles.push_back(a);
    p.f.push_back(random_unit(rng, d));
    p.g.push_back(random_unit(rng, d));
  }
  for (std::size_t c = 0; c < tree.cube_count(); ++c) {
    p.z.push_back(unit(rng) < 0.35 ? std::log(unit(rng) + 1e-12) : kAbsentWeight);
    p.dirs.push_back(random_unit(rng, d));
  }
  if (std::all_of(p.z.begin(), p.z.end(), [](double z) { return z < kAbsentCutoff; })) p.z[0] = 0.0;
  return p;
}

inline bool within_cap(const Vector& log_eigs, double cond_cap) {
  return log_eigs.maxCoeff() - log_eigs.minCoeff() <= std::log(cond_cap) * (1.0 + 1e-12);
}

struct SearchResult {
  Objective objective = Objective::bet_norm_ratio;
  int depth = 0;
  int d = 1;
  std::uint64_t seed = 0;
  double cond_cap = 1.0;
  double initial_value = 0.0;
  double best_value = 0.0;
  double c2 = 1.0;
  double a2 = 1.0;
  std::size_t best_restart = 0;
  std::size_t best_iteration = 0;
  std::size_t evaluations = 0;
  std::size_t rejected = 0;
  std::vector<double> restart_best;
  std::vector<double> trace;  // best-so-far after each iteration
  SearchPoint best;

  double ratio_over_sqrt_c2() const { return best_value / std::sqrt(c2); }
};

namespace detail {

enum Group { kLogEig, kAngle, kWeight, kF, kG, kDir };

inline std::vector<Group> search_groups(Objective obj, int d) {
  std::vector<Group> out{kLogEig, kWeight};
  if (d >= 2) out.push_back(kAngle);
  if (obj == Objective::bet_norm_ratio) {
    out.push_back(kF);
    out.push_back(kG);
  }
  if (obj == Objective::red_ratio && d >= 2) out.push_back(kDir);
  return out;
}

// Proposes a perturbation of one coordinate block; false if infeasible.
inline bool propose(Rng& rng, SearchPoint& p, Group g, double step, double cond_cap) {
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto pick = [&](std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng); };
  switch (g) {
    case kLogEig: {
      Vector& l = p.log_eigs[pick(p.log_eigs.size())];
      l(static_cast<Eigen::Index>(pick(static_cast<std::size_t>(p.d)))) += step * normal(rng);
      return within_cap(l, cond_cap);
    }
    case kAngle: {
      Vector& a = p.angles[pick(p.angles.size())];
      a(static_cast<Eigen::Index>(pick(static_cast<std::size_t>(a.size())))) += step * normal(rng);
      return true;
    }
    case kWeight: {
      double& z = p.z[pick(p.z.size())];
      if (unit(rng) < 0.1) {
        z = z < kAbsentCutoff ? normal(rng) : kAbsentWeight;
      } else if (z >= kAbsentCutoff) {
        z += step * normal(rng);
      } else {
        return false;
      }
      return true;
    }
    case kF:
    case kG: {
      Vector& v = (g == kF ? p.f : p.g)[pick(p.f.size())];
      v(static_cast<Eigen::Index>(pick(static_cast<std::size_t>(p.d)))) += step * normal(rng);
      return v.norm() > 0.0;
    }
    case kDir: {
      Vector& v = p.dirs[pick(p.dirs.size())];
      v(static_cast<Eigen::Index>(pick(static_cast<std::size_t>(p.d)))) += step * normal(rng);
      return v.norm() > 1e-12;
    }
  }
  return false;
}

}  // namespace detail

/// Deterministic in all arguments. budget counts iterations (evaluations
/// plus rejected proposals) over all restarts; restart 0 receives the
/// remainder of the even split. budget = 1 evaluates the initial point only.
inline SearchResult search(int depth, int d, std::uint64_t seed, Objective obj, std::size_t budget,
                           double cond_cap = 1e4, std::size_t restarts = 4) {
  if (budget < 1) throw PreconditionError("adversarial_search: budget must be >= 1");
  if (restarts < 1) throw PreconditionError("adversarial_search: restarts must be >= 1");
  if (d < 1) throw DimensionError("adversarial_search: d must be >= 1");
  if (!(cond_cap >= 1.0 && cond_cap <= kMaxConditionCap)) {
    throw DomainError("adversarial_search: cond_cap must lie in [1, 1e8]", cond_cap);
  }
  SearchResult out;
  out.objective = obj;
  out.depth = depth;
  out.d = d;
  out.seed = seed;
  out.cond_cap = cond_cap;
  out.best_value = -std::numeric_limits<double>::infinity();
  out.trace.reserve(budget);

  const std::size_t active = std::min(restarts, budget);
  const std::size_t share = budget / active;
  const auto groups = detail::search_groups(obj, d);

  for (std::size_t r = 0; r < active; ++r) {
    const std::size_t iterations = r == 0 ? budget - share * (active - 1) : share;
    Rng rng(seed * 0x9E3779B97F4A7C15ull + r);
    SearchPoint cur = r == 0 ? initial_point(obj, depth, d, cond_cap) : random_point(rng, depth, d, cond_cap);
    double cur_value = evaluate(obj, realize(cur));
    ++out.evaluations;
    if (r == 0) out.initial_value = cur_value;
    auto record = [&](std::size_t it) {
      if (cur_value > out.best_value) {
        out.best_value = cur_value;
        out.best = cur;
        out.best_restart = r;
        out.best_iteration = it;
      }
      out.trace.push_back(out.best_value);
    };
    record(0);
    std::vector<double> steps(groups.size(), 0.5);
    std::uniform_int_distribution<std::size_t> pick_group(0, groups.size() - 1);
    for (std::size_t it = 1; it < iterations; ++it) {
      const std::size_t gi = pick_group(rng);
      SearchPoint next = cur;
      bool accepted = false;
      if (detail::propose(rng, next, groups[gi], steps[gi], cond_cap)) {
        try {
          const double v = evaluate(obj, realize(next));
          ++out.evaluations;
          if (std::isfinite(v) && v > cur_value) {
            cur = std::move(next);
            cur_value = v;
            accepted = true;
          }
        } catch (const NumericError&) {
          ++out.rejected;
        }
      } else {
        ++out.rejected;
      }
      steps[gi] = std::clamp(steps[gi] * (accepted ? 1.3 : 0.9), 1e-3, 2.0);
      record(it);
    }
    out.restart_best.push_back(cur_value);
  }
  const SearchInstance best = realize(out.best);
  out.c2 = c2_conditioning(best.w);
  out.a2 = a2_characteristic(best.w);
  return out;
}

inline Json to_json(const SearchPoint& p) {
  const SearchInstance s = realize(p);
  Json j{{"weight", dyadlab::to_json(s.w)}, {"alpha", dyadlab::to_json(s.alpha)}};
  j["bseq"] = dyadlab::to_json(s.bseq);
  j["f"] = dyadlab::to_json(s.f);
  j["g"] = dyadlab::to_json(s.g);
  return j;
}

/// Search report: one row per restart, the best instance in the aggregates,
/// and the best-so-far trace sampled at ≤ 101 points.
inline LabReport adversarial_search(int depth, int d, std::uint64_t seed, Objective obj, std::size_t budget,
                                    double cond_cap = 1e4, std::size_t restarts = 4) {
  const SearchResult res = search(depth, d, seed, obj, budget, cond_cap, restarts);
  LabReport rep;
  rep.experiment = "adversarial-search";
  rep.config = {{"depth", depth}, {"d", d},           {"seed", seed},       {"objective", to_string(obj)},
                {"budget", budget}, {"cond_cap", cond_cap}, {"restarts", restarts}};
  rep.columns = {"seed", "restart", "objective", "best"};
  for (std::size_t r = 0; r < res.restart_best.size(); ++r) {
    Row row;
    row["seed"] = seed;
    row["restart"] = r;
    row["objective"] = to_string(obj);
    row["best"] = res.restart_best[r];
    rep.rows.push_back(std::move(row));
  }
  Row& a = rep.aggregates;
  a["initial"] = res.initial_value;
  a["best"] = res.best_value;
  a["c2"] = res.c2;
  a["a2"] = res.a2;
  a["ratio_over_sqrt_c2"] = res.ratio_over_sqrt_c2();
  a["best_restart"] = res.best_restart;
  a["best_iteration"] = res.best_iteration;
  a["evaluations"] = res.evaluations;
  a["rejected"] = res.rejected;
  bool monotone = true;
  for (std::size_t i = 1; i < res.trace.size(); ++i) monotone = monotone && res.trace[i] >= res.trace[i - 1];
  a["trace_monotone"] = monotone;
  Row trace = Row::array();
  const std::size_t stride = std::max<std::size_t>(1, res.trace.size() / 100);
  for (std::size_t i = 0; i < res.trace.size(); i += stride) trace.push_back({i, res.trace[i]});
  trace.push_back({res.trace.size() - 1, res.trace.back()});
  a["trace"] = std::move(trace);
  a["best_instance"] = Row::parse(to_json(res.best).dump());
  return rep;
}

}  // namespace dyadlab::lab
