#pragma once

// Best constants of the Carleson-type conditions and weight characteristics.
// Every supremum runs exhaustively over all cubes of the tree.

#include <algorithm>
#include <cmath>

#include "dyadlab/dyadic.hpp"
#include "dyadlab/errors.hpp"
#include "dyadlab/matrix.hpp"
#include "dyadlab/sequences.hpp"
#include "dyadlab/weight.hpp"

namespace dyadlab {

namespace detail {

inline void require_same_tree(const DyadicTree& a, const DyadicTree& b, const char* where) {
  if (a.depth() != b.depth()) throw DimensionError(std::string(where) + ": depth mismatch");
}

inline void require_dim(int a, int b, const char* where) {
  if (a != b) throw DimensionError(std::string(where) + ": dimension mismatch");
}

}  // namespace detail

/// sup_K λ_max(|K|⁻¹ Σ_{Q∈𝒟(K)} A_Q).
inline double carleson_intensity(const MatrixSequence& seq) {
  if (seq.empty()) return 0.0;
  const CubeMap<SymMatrix> sums = subtree_sums(seq.dense());
  double best = 0.0;
  for (const DyadicIndex& k : seq.tree().cubes()) {
    best = std::max(best, lambda_max(sums[k]) / k.length());
  }
  return best;
}

/// sup_K |K|⁻¹ Σ_{Q∈𝒟(K)} α_Q.
inline double carleson_intensity(const ScalarSequence& seq) {
  if (seq.empty()) return 0.0;
  const CubeMap<double> sums = subtree_sums(seq.dense());
  double best = 0.0;
  for (const DyadicIndex& k : seq.tree().cubes()) best = std::max(best, sums[k] / k.length());
  return best;
}

struct CarlesonEquivalents {
  double op_norm_intensity = 0.0;  // sup_K |K|⁻¹ Σ ‖B_Q‖_op
  double trace_intensity = 0.0;    // sup_K |K|⁻¹ Σ tr(B_Q)
};

/// Scalar surrogates of the matrix intensity. For PSD entries:
/// matrix ≤ op_norm_intensity ≤ trace_intensity ≤ d · matrix.
inline CarlesonEquivalents carleson_equivalents(const MatrixSequence& seq) {
  CubeMap<double> norms(seq.tree(), 0.0);
  CubeMap<double> traces(seq.tree(), 0.0);
  for (const auto& [q, a] : seq.entries()) {
    norms[q] = op_norm(a);
    traces[q] = a.trace();
  }
  const CubeMap<double> norm_sums = subtree_sums(norms);
  const CubeMap<double> trace_sums = subtree_sums(traces);
  CarlesonEquivalents out;
  for (const DyadicIndex& k : seq.tree().cubes()) {
    out.op_norm_intensity = std::max(out.op_norm_intensity, norm_sums[k] / k.length());
    out.trace_intensity = std::max(out.trace_intensity, trace_sums[k] / k.length());
  }
  return out;
}

/// sup_K λ_max(⟨W⟩_K^{-1/2} S_K ⟨W⟩_K^{-1/2}) with
/// S_K = |K|⁻¹ Σ_{Q∈𝒟(K)} ⟨W⟩_Q A_Q ⟨W⟩_Q.
inline double wcet_testing_constant(const MatrixWeight& w, const MatrixSequence& seq) {
  detail::require_same_tree(w.tree(), seq.tree(), "wcet_testing_constant");
  detail::require_dim(w.dim(), seq.dim(), "wcet_testing_constant");
  if (seq.empty()) return 0.0;
  CubeMap<SymMatrix> terms(seq.tree(), SymMatrix::zero(seq.dim()));
  for (const auto& [q, a] : seq.entries()) terms[q] = a.congruence(w.w_avg(q).avg.matrix());
  const CubeMap<SymMatrix> sums = subtree_sums(terms);
  double best = 0.0;
  for (const DyadicIndex& k : seq.tree().cubes()) {
    const double c = relative_lambda_max(sums[k], w.w_avg(k).inv_sqrt) / k.length();
    best = std::max(best, c);
  }
  return best;
}

/// sup_Q ‖⟨W⟩_Q^{1/2} ⟨W⁻¹⟩_Q^{1/2}‖²_op = sup_Q λ_max(⟨W⟩_Q^{1/2} ⟨W⁻¹⟩_Q ⟨W⟩_Q^{1/2}).
inline double a2_characteristic(const MatrixWeight& w) {
  double best = 0.0;
  for (const DyadicIndex& q : w.tree().cubes()) {
    // ‖⟨W⟩^{1/2}⟨W⁻¹⟩^{1/2}‖² through the factors Λ^{1/2} Qᵀ Q' Λ'^{1/2}.
    const EigenDecomposition& u = w.w_avg(q).eig;
    const EigenDecomposition& v = w.winv_avg(q).eig;
    const Matrix b = powered_values(u, Power::sqrt).asDiagonal() * (u.vectors.transpose() * v.vectors) *
                     powered_values(v, Power::sqrt).asDiagonal();
    best = std::max(best, lambda_max(SymMatrix(Matrix(b * b.transpose()))));
  }
  return best;
}

/// sup_x λ_max(W(x)) / λ_min(W(x)).
inline double c2_conditioning(const MatrixWeight& w) {
  const auto& c = w.leaf_conditioning();
  return *std::max_element(c.begin(), c.end());
}

}  // namespace dyadlab
