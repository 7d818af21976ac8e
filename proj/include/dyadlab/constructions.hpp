#pragma once

// Inputs for the experiments: the two-dimensional constant-weight family with
// eigenvalues 1 and ε², seeded random instances, and the indicator-type
// testing probe for the weighted Carleson condition.

#include <cmath>
#include <cstdint>
#include <random>
#include <sstream>
#include <utility>
#include <vector>

#include "dyadlab/characteristics.hpp"
#include "dyadlab/dyadic.hpp"
#include "dyadlab/errors.hpp"
#include "dyadlab/matrix.hpp"
#include "dyadlab/sequences.hpp"
#include "dyadlab/weight.hpp"

namespace dyadlab {

inline constexpr double kMaxConditionCap = 1e8;

struct EpsilonInstance {
  double eps;
  double theta;
  Vector a;
  Vector b;
  MatrixWeight w;
  VectorField f;               // W^{1/2} b 1_{Q₀}
  VectorField g;               // W^{-1/2} a 1_{Q₀}
  MatrixSequence seq_norm;     // A_{Q₀} = identity
  MatrixSequence seq_inner;    // A_{Q₀} = ½ (a+b)(a+b)ᵀ
  ScalarSequence alpha;        // α_{Q₀} = 1
};

/// W = a aᵀ + ε² b bᵀ with a = (cos θ, sin θ), b = (−sin θ, cos θ), constant on [0,1].
inline EpsilonInstance epsilon_family(double eps, double theta = 0.0, int depth = 4) {
  if (!(eps > 0.0 && eps <= 1.0)) {
    std::ostringstream os;
    os << "epsilon_family: eps must lie in (0, 1], got " << eps;
    throw DomainError(os.str(), eps);
  }
  if (depth < 0) throw AddressError("epsilon_family: negative depth");
  Vector a(2), b(2);
  a << std::cos(theta), std::sin(theta);
  b << -std::sin(theta), std::cos(theta);
  Matrix basis(2, 2);
  basis << a, b;
  const EigenDecomposition factors = spectral(basis, Vector{{1.0, eps * eps}});
  MatrixWeight w = MatrixWeight::constant_spectral(depth, factors);

  VectorField f = VectorField::constant(depth, apply_power(factors, Power::sqrt, b));
  VectorField g = VectorField::constant(depth, apply_power(factors, Power::inv_sqrt, a));

  MatrixSequence seq_norm(depth, 2);
  seq_norm.set(DyadicIndex::root(), SymMatrix::identity(2));
  MatrixSequence seq_inner(depth, 2);
  seq_inner.set(DyadicIndex::root(), SymMatrix::outer(a + b) * 0.5);
  ScalarSequence alpha(depth);
  alpha.set(DyadicIndex::root(), 1.0);

  return EpsilonInstance{eps,          theta,          std::move(a),        std::move(b),
                         std::move(w), std::move(f),   std::move(g),        std::move(seq_norm),
                         std::move(seq_inner),         std::move(alpha)};
}

using Rng = std::mt19937_64;

inline Matrix random_orthogonal(Rng& rng, int d) {
  std::normal_distribution<double> normal;
  Matrix g(d, d);
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) g(i, j) = normal(rng);
  }
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ() * Matrix::Identity(d, d);
  const Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int j = 0; j < d; ++j) {
    if (r(j, j) < 0.0) q.col(j) *= -1.0;
  }
  return q;
}

inline Vector random_unit(Rng& rng, int d) {
  std::normal_distribution<double> normal;
  Vector v(d);
  do {
    for (int i = 0; i < d; ++i) v(i) = normal(rng);
  } while (v.norm() < 1e-8);
  return v / v.norm();
}

/// Q Λ Qᵀ with log-uniform eigenvalues spanning at most cond_cap, at a random
/// overall scale in [0.1, 10]. Resamples (boundedly) if rounding breaks the cap.
inline SymMatrix random_spd(Rng& rng, int d, double cond_cap) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int attempt = 0; attempt < 64; ++attempt) {
    const double scale = std::pow(10.0, 2.0 * unit(rng) - 1.0);
    Vector lambda(d);
    for (int i = 0; i < d; ++i) lambda(i) = scale * std::pow(cond_cap, unit(rng));
    const Matrix q = random_orthogonal(rng, d);
    const SymMatrix m(Matrix(q * lambda.asDiagonal() * q.transpose()));
    const Vector s = spectrum(m);
    if (s(d - 1) > kSingularThreshold && s(0) / s(d - 1) <= cond_cap) return m;
  }
  throw NumericError("random_spd: could not satisfy the conditioning cap");
}

/// Random PSD matrix G Gᵀ / d of random rank in [1, d].
inline SymMatrix random_psd(Rng& rng, int d) {
  std::normal_distribution<double> normal;
  std::uniform_int_distribution<int> rank_dist(1, d);
  const int r = rank_dist(rng);
  Matrix g(d, r);
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < r; ++j) g(i, j) = normal(rng);
  }
  return SymMatrix(Matrix(g * g.transpose() / d));
}

inline VectorField random_vector_field(Rng& rng, int depth, int d) {
  std::normal_distribution<double> normal;
  std::vector<Vector> vals(DyadicTree(depth).leaf_count(), Vector(d));
  for (Vector& v : vals) {
    for (int i = 0; i < d; ++i) v(i) = normal(rng);
  }
  return VectorField(depth, std::move(vals));
}

inline MatrixWeight random_weight(Rng& rng, int depth, int d, double cond_cap) {
  std::vector<SymMatrix> leaves;
  const std::size_t n = DyadicTree(depth).leaf_count();
  leaves.reserve(n);
  for (std::size_t i = 0; i < n; ++i) leaves.push_back(random_spd(rng, d, cond_cap));
  return MatrixWeight(MatrixField(depth, std::move(leaves)));
}

/// Sparse non-negative sequence, rescaled to Carleson intensity exactly 1.
inline ScalarSequence random_scalar_sequence(Rng& rng, int depth, double density = 0.35) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  ScalarSequence alpha(depth);
  for (const DyadicIndex& q : alpha.tree().cubes()) {
    if (unit(rng) < density) alpha.set(q, q.length() * unit(rng));
  }
  if (alpha.empty()) alpha.set(DyadicIndex::root(), 1.0);
  return alpha.scaled(1.0 / carleson_intensity(alpha));
}

/// Sparse PSD sequence, rescaled to Carleson intensity exactly 1.
inline MatrixSequence random_matrix_sequence(Rng& rng, int depth, int d, double density = 0.35) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  MatrixSequence seq(depth, d);
  for (const DyadicIndex& q : seq.tree().cubes()) {
    if (unit(rng) < density) seq.set(q, random_psd(rng, d) * q.length());
  }
  if (seq.empty()) seq.set(DyadicIndex::root(), SymMatrix::identity(d));
  return seq.scaled(1.0 / carleson_intensity(seq));
}

struct RandomInstance {
  std::uint64_t seed;
  int depth;
  int d;
  double cond_cap;
  MatrixWeight w;
  MatrixSequence seq;
  ScalarSequence alpha;
  VectorField f;
  VectorField g;
};

/// Deterministic in (depth, d, seed, cond_cap).
inline RandomInstance random_instance(int depth, int d, std::uint64_t seed, double cond_cap) {
  if (!(cond_cap >= 1.0 && cond_cap <= kMaxConditionCap)) {
    throw DomainError("random_instance: cond_cap must lie in [1, 1e8]", cond_cap);
  }
  if (d < 1) throw DimensionError("random_instance: d must be >= 1");
  Rng rng(seed);
  MatrixWeight w = random_weight(rng, depth, d, cond_cap);
  MatrixSequence seq = random_matrix_sequence(rng, depth, d);
  ScalarSequence alpha = random_scalar_sequence(rng, depth);
  VectorField f = random_vector_field(rng, depth, d);
  VectorField g = random_vector_field(rng, depth, d);
  return RandomInstance{seed,         depth,          d,              cond_cap,    std::move(w),
                        std::move(seq), std::move(alpha), std::move(f), std::move(g)};
}

/// [Σ_{Q∈𝒟(K)} ‖A_Q^{1/2} ⟨W⟩_Q e‖²] / (|K| ⟨⟨W⟩_K e, e⟩): the weighted Carleson
/// sum tested on f = W^{1/2} e 1_K, a lower bound for wcet_testing_constant.
inline double necessity_probe(const MatrixWeight& w, const MatrixSequence& seq,
                              const DyadicIndex& k, const Vector& e) {
  detail::require_same_tree(w.tree(), seq.tree(), "necessity_probe");
  detail::require_dim(w.dim(), seq.dim(), "necessity_probe");
  detail::require_dim(w.dim(), static_cast<int>(e.size()), "necessity_probe");
  if (std::abs(e.norm() - 1.0) > 1e-9) throw DomainError("necessity_probe: e must be a unit vector", e.norm());
  w.tree().check(k);
  double num = 0.0;
  for (const auto& [q, a] : seq.entries()) {
    if (k.contains(q)) num += std::max(0.0, a.quad(w.w_avg(q).avg * e));
  }
  const double den = k.length() * w.w_avg(k).avg.quad(e);
  if (!(den > 0.0)) throw SingularityError("necessity_probe: degenerate average on " + k.str(), den);
  return num / den;
}

struct TestingMaximizer {
  DyadicIndex cube;
  Vector e;
  double value;
};

/// (K, e) attaining wcet_testing_constant: the top eigenvector v of the
/// K-sandwich mapped back through e ∝ ⟨W⟩_K^{-1/2} v.
inline TestingMaximizer testing_maximizer(const MatrixWeight& w, const MatrixSequence& seq) {
  detail::require_same_tree(w.tree(), seq.tree(), "testing_maximizer");
  CubeMap<SymMatrix> terms(seq.tree(), SymMatrix::zero(seq.dim()));
  for (const auto& [q, a] : seq.entries()) terms[q] = a.congruence(w.w_avg(q).avg.matrix());
  const CubeMap<SymMatrix> sums = subtree_sums(terms);
  TestingMaximizer best{DyadicIndex::root(), Vector::Unit(seq.dim(), 0), -1.0};
  for (const DyadicIndex& k : seq.tree().cubes()) {
    const SymMatrix& s = w.w_avg(k).inv_sqrt;
    const EigenDecomposition eig = eigen_decompose(sums[k].congruence(s.matrix()));
    const double value = eig.values(0) / k.length();
    if (value > best.value) {
      Vector e = s * Vector(eig.vectors.col(0));
      best = {k, e / e.norm(), value};
    }
  }
  return best;
}

}  // namespace dyadlab
