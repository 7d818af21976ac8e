#pragma once

// Embedding sums over the dyadic tree: the weighted Carleson sum, the two
// bilinear forms (norm products and inner products), the weighted maximal
// function and the level-set machinery used to bound the bilinear sums.

#include <algorithm>
#include <cmath>
#include <utility>
#include <vector>

#include "dyadlab/characteristics.hpp"
#include "dyadlab/dyadic.hpp"
#include "dyadlab/errors.hpp"
#include "dyadlab/matrix.hpp"
#include "dyadlab/sequences.hpp"
#include "dyadlab/weight.hpp"

namespace dyadlab {

/// Non-negative function on the cubes of a tree.
class CubeFunctional {
 public:
  explicit CubeFunctional(CubeMap<double> values) : values_(std::move(values)) {
    for (double v : values_.values()) {
      if (!(v >= 0.0)) throw DomainError("CubeFunctional: negative or NaN value", v);
    }
  }

  const DyadicTree& tree() const noexcept { return values_.tree(); }
  double operator[](const DyadicIndex& q) const { return values_[q]; }
  const CubeMap<double>& values() const noexcept { return values_; }

 private:
  CubeMap<double> values_;
};

inline double l2_norm(const VectorField& f) {
  double acc = 0.0;
  for (const Vector& v : f.values()) acc += v.squaredNorm();
  return std::sqrt(acc * f.tree().leaf_length());
}

inline double l2_norm(const ScalarField& f) {
  double acc = 0.0;
  for (double v : f.values()) acc += v * v;
  return std::sqrt(acc * f.tree().leaf_length());
}

/// (∫ ⟨W f, f⟩)^{1/2}
inline double weighted_l2_norm(const VectorField& f, const MatrixWeight& w) {
  detail::require_same_tree(f.tree(), w.tree(), "weighted_l2_norm");
  detail::require_dim(f.dim(), w.dim(), "weighted_l2_norm");
  double acc = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) acc += std::max(0.0, w.field()[i].quad(f[i]));
  return std::sqrt(acc * f.tree().leaf_length());
}

inline double weighted_l2_norm(const VectorField& f) { return l2_norm(f); }

/// ⟨W^{1/2} f⟩_Q for every cube.
inline CubeMap<Vector> sqrt_weighted_averages(const MatrixWeight& w, const VectorField& f) {
  detail::require_same_tree(f.tree(), w.tree(), "sqrt_weighted_averages");
  detail::require_dim(f.dim(), w.dim(), "sqrt_weighted_averages");
  std::vector<Vector> out;
  out.reserve(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) out.push_back(apply_power(w.leaf_spectrum(i), Power::sqrt, f[i]));
  return VectorField(f.depth(), std::move(out)).averages();
}

/// ⟨W⟩_Q⁻¹ ⟨W^{1/2} f⟩_Q for every cube. Applied to w.dual() and g this
/// gives ⟨W⁻¹⟩_Q⁻¹ ⟨W^{-1/2} g⟩_Q.
inline CubeMap<Vector> normalized_averages(const MatrixWeight& w, const VectorField& f) {
  CubeMap<Vector> out = sqrt_weighted_averages(w, f);
  for (const DyadicIndex& q : w.tree().cubes()) out[q] = apply_power(w.w_avg(q).eig, Power::inverse, out[q]);
  return out;
}

/// Σ_Q ‖A_Q^{1/2} ⟨W^{1/2} f⟩_Q‖²
inline double cet_sum(const MatrixWeight& w, const MatrixSequence& seq, const VectorField& f) {
  detail::require_same_tree(w.tree(), seq.tree(), "cet_sum");
  detail::require_dim(w.dim(), seq.dim(), "cet_sum");
  if (seq.empty()) return 0.0;
  const CubeMap<Vector> h = sqrt_weighted_averages(w, f);
  double acc = 0.0;
  for (const auto& [q, a] : seq.entries()) acc += std::max(0.0, a.quad(h[q]));
  return acc;
}

namespace detail {

struct BilinearAverages {
  CubeMap<Vector> x;  // ⟨W⟩_Q⁻¹ ⟨W^{1/2} f⟩_Q
  CubeMap<Vector> y;  // ⟨W⁻¹⟩_Q⁻¹ ⟨W^{-1/2} g⟩_Q
};

inline BilinearAverages bilinear_averages(const MatrixWeight& w, const VectorField& f,
                                          const VectorField& g) {
  return {normalized_averages(w, f), normalized_averages(w.dual(), g)};
}

template <class Seq>
void check_sequence(const MatrixWeight& w, const Seq& seq, const char* where) {
  require_same_tree(w.tree(), seq.tree(), where);
  if constexpr (std::is_same_v<Seq, MatrixSequence>) require_dim(w.dim(), seq.dim(), where);
}

}  // namespace detail

/// Σ_Q ‖A_Q^{1/2} ⟨W⟩_Q⁻¹⟨W^{1/2}f⟩_Q‖ ‖A_Q^{1/2} ⟨W⁻¹⟩_Q⁻¹⟨W^{-1/2}g⟩_Q‖
inline double bet_norm_sum(const MatrixWeight& w, const MatrixSequence& seq, const VectorField& f,
                           const VectorField& g) {
  detail::check_sequence(w, seq, "bet_norm_sum");
  if (seq.empty()) return 0.0;
  const auto [x, y] = detail::bilinear_averages(w, f, g);
  double acc = 0.0;
  for (const auto& [q, a] : seq.entries()) {
    acc += std::sqrt(std::max(0.0, a.quad(x[q]))) * std::sqrt(std::max(0.0, a.quad(y[q])));
  }
  return acc;
}

/// Scalar-sequence form: Σ_Q α_Q ‖⟨W⟩_Q⁻¹⟨W^{1/2}f⟩_Q‖ ‖⟨W⁻¹⟩_Q⁻¹⟨W^{-1/2}g⟩_Q‖.
inline double bet_norm_sum(const MatrixWeight& w, const ScalarSequence& alpha, const VectorField& f,
                           const VectorField& g) {
  detail::check_sequence(w, alpha, "bet_norm_sum");
  if (alpha.empty()) return 0.0;
  const auto [x, y] = detail::bilinear_averages(w, f, g);
  double acc = 0.0;
  for (const auto& [q, a] : alpha.entries()) acc += a * x[q].norm() * y[q].norm();
  return acc;
}

/// Σ_Q |⟨A_Q ⟨W⟩_Q⁻¹⟨W^{1/2}f⟩_Q, ⟨W⁻¹⟩_Q⁻¹⟨W^{-1/2}g⟩_Q⟩|
inline double bet_inner_sum(const MatrixWeight& w, const MatrixSequence& seq, const VectorField& f,
                            const VectorField& g) {
  detail::check_sequence(w, seq, "bet_inner_sum");
  if (seq.empty()) return 0.0;
  const auto [x, y] = detail::bilinear_averages(w, f, g);
  double acc = 0.0;
  for (const auto& [q, a] : seq.entries()) acc += std::abs((a * x[q]).dot(y[q]));
  return acc;
}

inline double bet_inner_sum(const MatrixWeight& w, const ScalarSequence& alpha,
                            const VectorField& f, const VectorField& g) {
  detail::check_sequence(w, alpha, "bet_inner_sum");
  if (alpha.empty()) return 0.0;
  const auto [x, y] = detail::bilinear_averages(w, f, g);
  double acc = 0.0;
  for (const auto& [q, a] : alpha.entries()) acc += a * std::abs(x[q].dot(y[q]));
  return acc;
}

/// M_W f(x) = sup_{Q ∋ x} ‖W^{1/2}(x) ⟨W⟩_Q⁻¹ ⟨W^{1/2} f⟩_Q‖, exact on the tree.
inline ScalarField maximal_function(const MatrixWeight& w, const VectorField& f) {
  const CubeMap<Vector> z = normalized_averages(w, f);
  const DyadicTree& tree = w.tree();
  std::vector<double> out(tree.leaf_count(), 0.0);
  for (std::size_t i = 0; i < out.size(); ++i) {
    const EigenDecomposition& leaf = w.leaf_spectrum(i);
    double best = 0.0;
    for (const DyadicIndex& q : tree.ancestors_of_leaf(i)) {
      best = std::max(best, apply_power(leaf, Power::sqrt, z[q]).norm());
    }
    out[i] = best;
  }
  return ScalarField(tree.depth(), std::move(out));
}

/// Φ(x) = M_W f(x) · M_{W⁻¹} g(x)
inline ScalarField phi_product(const MatrixWeight& w, const VectorField& f, const VectorField& g) {
  const ScalarField mf = maximal_function(w, f);
  const ScalarField mg = maximal_function(w.dual(), g);
  std::vector<double> out(mf.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = mf[i] * mg[i];
  return ScalarField(mf.depth(), std::move(out));
}

/// F(Q) = ‖⟨W⟩_Q⁻¹⟨W^{1/2}f⟩_Q‖ ‖⟨W⁻¹⟩_Q⁻¹⟨W^{-1/2}g⟩_Q‖
inline CubeFunctional bet_functional(const MatrixWeight& w, const VectorField& f,
                                     const VectorField& g) {
  const auto [x, y] = detail::bilinear_averages(w, f, g);
  CubeMap<double> out(w.tree(), 0.0);
  for (const DyadicIndex& q : w.tree().cubes()) out[q] = x[q].norm() * y[q].norm();
  return CubeFunctional(std::move(out));
}

struct ChoquetForms {
  double sum_form = 0.0;    // Σ_Q F(Q) α_Q
  double level_form = 0.0;  // ∫_0^∞ μ({F > λ}) dλ, μ(𝒦) = Σ_{Q∈𝒦} α_Q
};

/// Both sides of the layer-cake identity for the α-weighted counting measure.
/// The level form is the exact staircase over the distinct values of F.
inline ChoquetForms choquet_integral(const ScalarSequence& alpha, const CubeFunctional& f) {
  detail::require_same_tree(alpha.tree(), f.tree(), "choquet_integral");
  ChoquetForms out;
  std::vector<std::pair<double, double>> pts;  // (F(Q), α_Q)
  pts.reserve(alpha.entries().size());
  double mass = 0.0;
  for (const auto& [q, a] : alpha.entries()) {
    out.sum_form += f[q] * a;
    pts.emplace_back(f[q], a);
    mass += a;
  }
  std::sort(pts.begin(), pts.end());
  double prev = 0.0;
  std::size_t i = 0;
  while (i < pts.size()) {
    const double level = pts[i].first;
    // On (prev, level] every remaining cube has F > λ.
    out.level_form += (level - prev) * mass;
    while (i < pts.size() && pts[i].first == level) mass -= pts[i++].second;
    prev = level;
  }
  return out;
}

}  // namespace dyadlab
