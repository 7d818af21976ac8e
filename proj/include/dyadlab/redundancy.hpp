#pragma once

// Best constants in the redundancy inequalities: a Carleson sequence of
// intensity ≤ 1 controls sums of ⟨W⁻¹⟩_Q⁻¹-weighted terms by ⟨W⟩_K.

#include <algorithm>
#include <sstream>

#include "dyadlab/characteristics.hpp"
#include "dyadlab/dyadic.hpp"
#include "dyadlab/errors.hpp"
#include "dyadlab/matrix.hpp"
#include "dyadlab/sequences.hpp"
#include "dyadlab/weight.hpp"

namespace dyadlab {

inline constexpr double kIntensityTolerance = 1e-12;

namespace detail {

inline void require_unit_intensity(double intensity, const char* where) {
  if (intensity > 1.0 + kIntensityTolerance) {
    std::ostringstream os;
    os << where << ": Carleson intensity " << intensity << " exceeds 1";
    throw PreconditionError(os.str());
  }
}

}  // namespace detail

/// sup_K λ_max(⟨W⟩_K^{-1/2} [|K|⁻¹ Σ_{Q∈𝒟(K)} α_Q ⟨W⁻¹⟩_Q⁻¹] ⟨W⟩_K^{-1/2}).
/// Requires intensity(α) ≤ 1; the result is then at most 4.
inline double sred_constant(const MatrixWeight& w, const ScalarSequence& alpha) {
  detail::require_same_tree(w.tree(), alpha.tree(), "sred_constant");
  detail::require_unit_intensity(carleson_intensity(alpha), "sred_constant");
  if (alpha.empty()) return 0.0;
  CubeMap<SymMatrix> terms(w.tree(), SymMatrix::zero(w.dim()));
  for (const auto& [q, a] : alpha.entries()) terms[q] = w.winv_avg(q).inv * a;
  const CubeMap<SymMatrix> sums = subtree_sums(terms);
  double best = 0.0;
  for (const DyadicIndex& k : w.tree().cubes()) {
    best = std::max(best, relative_lambda_max(sums[k], w.w_avg(k).inv_sqrt) / k.length());
  }
  return best;
}

struct RedConstants {
  double c1 = 0.0;  // first quadratic-form inequality
  double c2 = 0.0;  // second, conjugation order swapped
  double c3 = 0.0;  // operator form |K|⁻¹ Σ ⟨W⁻¹⟩_Q^{-1/2} B_Q ⟨W⁻¹⟩_Q^{-1/2} ⪯ c ⟨W⟩_K
};

namespace detail {

// No intensity check; the constants are linear in the sequence.
inline RedConstants red_constants_unchecked(const MatrixWeight& w, const MatrixSequence& bseq) {
  RedConstants out;
  if (bseq.empty()) return out;
  const DyadicTree& tree = w.tree();
  const int d = w.dim();

  // c3 factors through a single inner sum per K.
  CubeMap<SymMatrix> inner(tree, SymMatrix::zero(d));
  for (const auto& [q, b] : bseq.entries()) inner[q] = b.congruence(w.winv_avg(q).inv_sqrt.matrix());
  const CubeMap<SymMatrix> inner_sums = subtree_sums(inner);

  for (const DyadicIndex& k : tree.cubes()) {
    const Matrix& uk = w.w_avg(k).inv_sqrt.matrix();
    SymMatrix first = SymMatrix::zero(d);
    SymMatrix second = SymMatrix::zero(d);
    for (const auto& [q, b] : bseq.entries()) {
      if (!k.contains(q)) continue;
      const Matrix& vq = w.winv_avg(q).inv_sqrt.matrix();
      // ⟨B P e, P e⟩ = eᵀ Pᵀ B P e with P = ⟨W⟩_K^{-1/2}⟨W⁻¹⟩_Q^{-1/2} (first)
      // and P = ⟨W⁻¹⟩_Q^{-1/2}⟨W⟩_K^{-1/2} (second).
      first += b.congruence(vq * uk);
      second += b.congruence(uk * vq);
    }
    const double len = k.length();
    out.c1 = std::max(out.c1, lambda_max(first) / len);
    out.c2 = std::max(out.c2, lambda_max(second) / len);
    out.c3 = std::max(out.c3, relative_lambda_max(inner_sums[k], w.w_avg(k).inv_sqrt) / len);
  }
  return out;
}

}  // namespace detail

/// Best constants of the three matrix redundancy inequalities, each as the
/// sup over K of the λ_max of the normalized quadratic-form matrix.
inline RedConstants red_constants(const MatrixWeight& w, const MatrixSequence& bseq) {
  detail::require_same_tree(w.tree(), bseq.tree(), "red_constants");
  detail::require_dim(w.dim(), bseq.dim(), "red_constants");
  detail::require_unit_intensity(carleson_intensity(bseq), "red_constants");
  return detail::red_constants_unchecked(w, bseq);
}

struct RedForms {
  double first = 0.0;       // |K|⁻¹ Σ ⟨B_Q ⟨W⟩_K^{-1/2}⟨W⁻¹⟩_Q^{-1/2} e, same⟩
  double second = 0.0;      // |K|⁻¹ Σ ⟨B_Q ⟨W⁻¹⟩_Q^{-1/2}⟨W⟩_K^{-1/2} e, same⟩
  double corollary = 0.0;   // |K|⁻¹ Σ ⟨B_Q ⟨W⁻¹⟩_Q^{-1/2} f, same⟩ with f = ⟨W⟩_K^{-1/2} e
  double corollary_rhs = 0.0;  // ‖⟨W⟩_K^{1/2} f‖²
};

/// The quadratic forms of the redundancy inequalities at one (K, e).
inline RedForms red_forms(const MatrixWeight& w, const MatrixSequence& bseq, const DyadicIndex& k,
                          const Vector& e) {
  detail::require_same_tree(w.tree(), bseq.tree(), "red_forms");
  detail::require_dim(w.dim(), static_cast<int>(e.size()), "red_forms");
  w.tree().check(k);
  const SymMatrix& uk = w.w_avg(k).inv_sqrt;
  const Vector f = uk * e;
  RedForms out;
  for (const auto& [q, b] : bseq.entries()) {
    if (!k.contains(q)) continue;
    const SymMatrix& vq = w.winv_avg(q).inv_sqrt;
    out.first += b.quad(uk * (vq * e));
    out.second += b.quad(vq * (uk * e));
    out.corollary += b.quad(vq * f);
  }
  out.first /= k.length();
  out.second /= k.length();
  out.corollary /= k.length();
  out.corollary_rhs = w.w_avg(k).avg.quad(f);
  return out;
}

}  // namespace dyadlab
