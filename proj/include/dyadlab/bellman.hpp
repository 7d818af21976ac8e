#pragma once

// Numerical certification of the matrix Bellman function
//   B(U, V, m) = U − (m+1)⁻¹ V⁻¹
// on the domain 1 ⪯ V^{1/2} U V^{1/2}, 0 ≤ m ≤ 1, and of the dyadic dynamics
// inequality that telescopes into the scalar-sequence redundancy bound.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <sstream>
#include <tuple>

#include "dyadlab/characteristics.hpp"
#include "dyadlab/constructions.hpp"
#include "dyadlab/dyadic.hpp"
#include "dyadlab/errors.hpp"
#include "dyadlab/matrix.hpp"
#include "dyadlab/sequences.hpp"
#include "dyadlab/weight.hpp"

namespace dyadlab {

inline constexpr double kBellmanDomainTolerance = 1e-10;
inline constexpr double kMassTolerance = 1e-12;
inline constexpr double kDefaultDmStep = 1e-5;

struct BellmanPoint {
  SymMatrix u;
  SymMatrix v;
  double m = 0.0;
};

/// λ_min(V^{1/2} U V^{1/2} − 1).
inline double domain_margin(const BellmanPoint& p) {
  if (p.u.dim() != p.v.dim()) throw DimensionError("BellmanPoint: U and V differ in dimension");
  const SymMatrix root = spd_power(p.v, Power::sqrt);
  return psd_gap(p.u.congruence(root.matrix()), SymMatrix::identity(p.u.dim()));
}

/// The same margin from eigen-decompositions of U and V: V^{1/2} U V^{1/2} is
/// similar to B Bᵀ with B = Λ_U^{1/2} Q_Uᵀ Q_V Λ_V^{1/2}, which stays accurate
/// when U and V share eigenvectors.
inline double domain_margin(const EigenDecomposition& u, const EigenDecomposition& v) {
  if (u.values.size() != v.values.size()) throw DimensionError("domain_margin: U and V differ in dimension");
  const Matrix b = powered_values(u, Power::sqrt).asDiagonal() * (u.vectors.transpose() * v.vectors) *
                   powered_values(v, Power::sqrt).asDiagonal();
  return lambda_min(SymMatrix(Matrix(b * b.transpose()))) - 1.0;
}

inline void require_domain(const BellmanPoint& p, const char* where) {
  if (!(p.m >= -kMassTolerance && p.m <= 1.0 + kMassTolerance)) {
    std::ostringstream os;
    os << where << ": m = " << p.m << " outside [0, 1]";
    throw DomainError(os.str(), p.m < 0.0 ? p.m : 1.0 - p.m);
  }
  const double margin = domain_margin(p);
  if (margin < -kBellmanDomainTolerance) {
    std::ostringstream os;
    os << where << ": V^{1/2} U V^{1/2} - 1 has lambda_min " << margin;
    throw DomainError(os.str(), margin);
  }
}

/// B from U and an already inverted V.
inline SymMatrix bellman_value_inv(const SymMatrix& u, const SymMatrix& v_inv, double m) {
  return u - v_inv * (1.0 / (m + 1.0));
}

inline SymMatrix bellman_value(const SymMatrix& u, const SymMatrix& v, double m) {
  return bellman_value_inv(u, spd_power(v, Power::inverse), m);
}

inline SymMatrix bellman_eval(const BellmanPoint& p) {
  require_domain(p, "bellman_eval");
  return bellman_value(p.u, p.v, p.m);
}

struct SizeGaps {
  double lower = 0.0;  // psd_gap(B, 0)
  double upper = 0.0;  // psd_gap(U, B)
};

inline SizeGaps bellman_size_gaps(const BellmanPoint& p) {
  const SymMatrix b = bellman_eval(p);
  return {psd_gap(b, SymMatrix::zero(b.dim())), psd_gap(p.u, b)};
}

inline BellmanPoint midpoint(const BellmanPoint& p0, const BellmanPoint& p1) {
  return {(p0.u + p1.u) * 0.5, (p0.v + p1.v) * 0.5, 0.5 * (p0.m + p1.m)};
}

/// psd_gap(B(midpoint), ½B(p0) + ½B(p1)); ≥ −tol certifies midpoint concavity.
inline double bellman_concavity_gap(const BellmanPoint& p0, const BellmanPoint& p1) {
  if (p0.u.dim() != p1.u.dim()) throw DimensionError("bellman_concavity_gap: dimension mismatch");
  const SymMatrix b0 = bellman_eval(p0);
  const SymMatrix b1 = bellman_eval(p1);
  const BellmanPoint mid = midpoint(p0, p1);
  require_domain(mid, "bellman_concavity_gap (midpoint)");
  return psd_gap(bellman_value(mid.u, mid.v, mid.m), (b0 + b1) * 0.5);
}

/// psd_gap((B(m+h) − B(m))/h, ¼V⁻¹). h may be negative (backward difference)
/// so that the endpoint m = 1 can be probed; |h| ≤ 1e-4 and m+h ∈ [0, 1].
inline double bellman_dm_gap(const BellmanPoint& p, double h = kDefaultDmStep) {
  if (h == 0.0 || std::abs(h) > 1e-4) throw DomainError("bellman_dm_gap: need 0 < |h| <= 1e-4", h);
  const BellmanPoint shifted{p.u, p.v, p.m + h};
  const SymMatrix b0 = bellman_eval(p);
  const SymMatrix b1 = bellman_eval(shifted);
  return psd_gap((b1 - b0) * (1.0 / h), spd_power(p.v, Power::inverse) * 0.25);
}

/// Direction of the second variation of B along (ΔV, Δm), U fixed:
///   −2V⁻¹ΔV V⁻¹ΔV V⁻¹ − 2V⁻¹ΔV V⁻¹ (m+1)⁻¹Δm − 2(m+1)⁻² V⁻¹ (Δm)².
/// The exact second derivative of t ↦ B(U, V+tΔV, m+tΔm) at t = 0 is (m+1)⁻¹ times this.
inline Matrix bellman_hessian_form(const SymMatrix& v, const SymMatrix& dv, double m, double dm) {
  const Matrix vi = spd_power(v, Power::inverse).matrix();
  const Matrix& d = dv.matrix();
  const double s = m + 1.0;
  return -2.0 * vi * d * vi * d * vi - 2.0 * vi * d * vi * (dm / s) - 2.0 * vi * (dm * dm / (s * s));
}

/// Bellman data at K: U_K = ⟨W⟩_K, V_K = ⟨W⁻¹⟩_K, m_K = |K|⁻¹ Σ_{Q∈𝒟(K)} α_Q.
inline BellmanPoint dyadic_point(const MatrixWeight& w, const CubeMap<double>& alpha_sums,
                                 const DyadicIndex& k) {
  BellmanPoint p{w.w_avg(k).avg, w.winv_avg(k).avg, alpha_sums[k] / k.length()};
  const double margin = domain_margin(w.w_avg(k).eig, w.winv_avg(k).eig);
  // Matrix Jensen: ⟨W⟩_K ⪰ ⟨W⁻¹⟩_K⁻¹ always, so this only fires on numerical breakdown.
  if (margin < -kBellmanDomainTolerance) {
    throw DomainError("dyadic_point: averages on " + k.str() + " leave the Bellman domain", margin);
  }
  return p;
}

namespace detail {

inline CubeMap<double> checked_alpha_sums(const MatrixWeight& w, const ScalarSequence& alpha,
                                          const char* where) {
  require_same_tree(w.tree(), alpha.tree(), where);
  const double intensity = carleson_intensity(alpha);
  if (intensity > 1.0 + kMassTolerance) {
    std::ostringstream os;
    os << where << ": Carleson intensity " << intensity << " exceeds 1";
    throw PreconditionError(os.str());
  }
  return subtree_sums(alpha.dense());
}

// |K| B(K) − ¼ V_K⁻¹ α_K − |K₋| B(K₋) − |K₊| B(K₊); the child terms are absent on leaves.
inline SymMatrix dynamics_defect(const MatrixWeight& w, const ScalarSequence& alpha,
                                 const CubeMap<double>& sums, const DyadicIndex& k) {
  const BellmanPoint pk = dyadic_point(w, sums, k);
  SymMatrix out = bellman_value_inv(pk.u, w.winv_avg(k).inv, pk.m) * k.length() -
                  w.winv_avg(k).inv * (0.25 * alpha.at(k));
  if (!w.tree().is_leaf(k)) {
    for (const DyadicIndex& c : {k.left(), k.right()}) {
      const BellmanPoint pc = dyadic_point(w, sums, c);
      out -= bellman_value_inv(pc.u, w.winv_avg(c).inv, pc.m) * c.length();
    }
  }
  return out;
}

}  // namespace detail

/// psd_gap(|K| B(K), ¼V_K⁻¹α_K + |K₋| B(K₋) + |K₊| B(K₊)) for non-leaf K.
inline double bellman_dynamics_gap(const MatrixWeight& w, const ScalarSequence& alpha,
                                   const DyadicIndex& k) {
  const CubeMap<double> sums = detail::checked_alpha_sums(w, alpha, "bellman_dynamics_gap");
  w.tree().check(k);
  if (w.tree().is_leaf(k)) throw PreconditionError("bellman_dynamics_gap: K must not be a leaf");
  return lambda_min(detail::dynamics_defect(w, alpha, sums, k));
}

/// Smallest dynamics gap over all non-leaf cubes.
inline double bellman_min_dynamics_gap(const MatrixWeight& w, const ScalarSequence& alpha) {
  const CubeMap<double> sums = detail::checked_alpha_sums(w, alpha, "bellman_min_dynamics_gap");
  double best = std::numeric_limits<double>::infinity();
  for (const DyadicIndex& k : w.tree().cubes()) {
    if (w.tree().is_leaf(k)) continue;
    best = std::min(best, lambda_min(detail::dynamics_defect(w, alpha, sums, k)));
  }
  return best;
}

struct TelescopedBound {
  double constant = 0.0;    // sup_K λ_max(⟨W⟩_K^{-1/2} [4/|K| (|K|B(K) − Σ defects)] ⟨W⟩_K^{-1/2})
  double min_margin = 0.0;  // smallest eigenvalue among all defects and U_K − B(K)
};

/// Iterates the dynamics inequality down the tree. Summing the per-cube
/// defects G_Q over 𝒟(K) gives |K|B(K) − Σ G_Q = ¼ Σ_{Q∈𝒟(K)} α_Q ⟨W⁻¹⟩_Q⁻¹,
/// and every G_Q ⪰ 0 together with B(K) ⪯ U_K certifies the constant ≤ 4.
inline TelescopedBound bellman_telescoped_bound(const MatrixWeight& w, const ScalarSequence& alpha) {
  const CubeMap<double> sums = detail::checked_alpha_sums(w, alpha, "bellman_telescoped_bound");
  const DyadicTree& tree = w.tree();
  CubeMap<SymMatrix> defects(tree, SymMatrix::zero(w.dim()));
  TelescopedBound out;
  out.min_margin = std::numeric_limits<double>::infinity();
  for (const DyadicIndex& q : tree.cubes()) {
    defects[q] = detail::dynamics_defect(w, alpha, sums, q);
    out.min_margin = std::min(out.min_margin, lambda_min(defects[q]));
  }
  const CubeMap<SymMatrix> defect_sums = subtree_sums(defects);
  for (const DyadicIndex& k : tree.cubes()) {
    const BellmanPoint pk = dyadic_point(w, sums, k);
    const SymMatrix bk = bellman_value_inv(pk.u, w.winv_avg(k).inv, pk.m);
    out.min_margin = std::min(out.min_margin, psd_gap(pk.u, bk));
    const SymMatrix telescoped = (bk * k.length() - defect_sums[k]) * (4.0 / k.length());
    out.constant = std::max(out.constant, relative_lambda_max(telescoped, w.w_avg(k).inv_sqrt));
  }
  return out;
}

// Experimental: the candidate U − V^{-1/2}(M+1)⁻¹V^{-1/2} for matrix-valued mass M.
// Its concavity is not known; the probe reports what sampling finds and is never asserted.

inline SymMatrix matrix_candidate_value(const SymMatrix& u, const SymMatrix& v, const SymMatrix& m) {
  const SymMatrix inner = spd_power(m + SymMatrix::identity(m.dim()), Power::inverse);
  return u - inner.congruence(spd_power(v, Power::inv_sqrt).matrix());
}

struct CandidateProbeReport {
  std::size_t samples = 0;
  std::size_t violations = 0;  // midpoint gap below −1e-8
  double min_gap = std::numeric_limits<double>::infinity();
};

inline CandidateProbeReport matrix_candidate_concavity_probe(std::uint64_t seed, std::size_t samples,
                                                             int d, double cond_cap = 1e3) {
  Rng rng(seed);
  auto point = [&] {
    const SymMatrix v = random_spd(rng, d, cond_cap);
    const SymMatrix vis = spd_power(v, Power::inv_sqrt);
    // U = V^{-1/2}(1 + P)V^{-1/2} keeps V^{1/2} U V^{1/2} = 1 + P ⪰ 1.
    const SymMatrix u = (SymMatrix::identity(d) + random_psd(rng, d)).congruence(vis.matrix());
    // 0 ⪯ M ⪯ 1 via an orthogonal conjugation of a diagonal in [0, 1].
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    Vector diag(d);
    for (int i = 0; i < d; ++i) diag(i) = unit(rng);
    const SymMatrix m = SymMatrix::diagonal(diag).congruence(random_orthogonal(rng, d));
    return std::tuple{u, v, m};
  };
  CandidateProbeReport out;
  for (std::size_t i = 0; i < samples; ++i) {
    const auto [u0, v0, m0] = point();
    const auto [u1, v1, m1] = point();
    const SymMatrix mid = matrix_candidate_value((u0 + u1) * 0.5, (v0 + v1) * 0.5, (m0 + m1) * 0.5);
    const SymMatrix avg =
        (matrix_candidate_value(u0, v0, m0) + matrix_candidate_value(u1, v1, m1)) * 0.5;
    const double gap = psd_gap(mid, avg);
    out.min_gap = std::min(out.min_gap, gap);
    if (gap < -1e-8) ++out.violations;
    ++out.samples;
  }
  return out;
}

}  // namespace dyadlab
