#include <gtest/gtest.h>

#include <cmath>

#include "dyadlab/constructions.hpp"
#include "dyadlab/embeddings.hpp"
#include "support/oracles.hpp"

using namespace dyadlab;

namespace {

VectorField unit_field(int depth, int d, int axis) { return constant_vector_field(depth, Vector::Unit(d, axis)); }

MatrixSequence root_only(int depth, const SymMatrix& a) {
  MatrixSequence seq(depth, a.dim());
  seq.set(DyadicIndex::root(), a);
  return seq;
}

// Brute-force bet_norm_sum for scalar α: every cube average from raw leaf means.
double brute_bet_norm(const RandomInstance& inst) {
  const int depth = inst.depth;
  std::vector<Matrix> w, winv;
  std::vector<Vector> wf, wg;
  for (std::size_t i = 0; i < inst.w.field().size(); ++i) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(inst.w.field()[i].matrix());
    const Matrix& v = es.eigenvectors();
    const Vector s = es.eigenvalues();
    w.push_back(inst.w.field()[i].matrix());
    winv.push_back(v * s.cwiseInverse().asDiagonal() * v.transpose());
    wf.push_back(v * s.cwiseSqrt().asDiagonal() * v.transpose() * inst.f[i]);
    wg.push_back(v * s.cwiseSqrt().cwiseInverse().asDiagonal() * v.transpose() * inst.g[i]);
  }
  double acc = 0.0;
  for (const auto& [q, a] : inst.alpha.entries()) {
    const Matrix mw = oracle::leaf_mean(w, depth, q.level, q.position);
    const Matrix mwinv = oracle::leaf_mean(winv, depth, q.level, q.position);
    const Vector x = mw.ldlt().solve(oracle::leaf_mean(wf, depth, q.level, q.position));
    const Vector y = mwinv.ldlt().solve(oracle::leaf_mean(wg, depth, q.level, q.position));
    acc += a * x.norm() * y.norm();
  }
  return acc;
}

}  // namespace

TEST(WeightedNorm, Examples) {
  const auto inst = epsilon_family(0.1);
  EXPECT_NEAR(l2_norm(inst.f), 0.1, 1e-14);
  EXPECT_NEAR(l2_norm(inst.g), 1.0, 1e-14);
  EXPECT_NEAR(weighted_l2_norm(unit_field(4, 2, 1), inst.w), 0.1, 1e-14);
  EXPECT_NEAR(weighted_l2_norm(unit_field(4, 2, 0), inst.w), 1.0, 1e-14);
  EXPECT_NEAR(weighted_l2_norm(unit_field(3, 3, 2), MatrixWeight::identity(3, 3)), 1.0, 1e-15);
  EXPECT_DOUBLE_EQ(weighted_l2_norm(unit_field(3, 3, 2)), 1.0);
}

TEST(CetSum, Examples) {
  EXPECT_NEAR(cet_sum(MatrixWeight::identity(3, 2), root_only(3, SymMatrix::identity(2)), unit_field(3, 2, 0)),
              1.0, 1e-15);
  const auto inst = epsilon_family(0.1);
  EXPECT_NEAR(cet_sum(inst.w, inst.seq_norm, inst.f), 1e-4, 1e-16);
  EXPECT_EQ(cet_sum(inst.w, MatrixSequence(4, 2), inst.f), 0.0);
}

TEST(BetNormSum, EpsilonFamilyIsOneForEveryEps) {
  for (double eps : {1.0, 0.5, 0.1, 1e-2, 1e-3, 1e-4}) {
    for (double theta : {0.0, 0.4, 2.0}) {
      const auto inst = epsilon_family(eps, theta);
      EXPECT_NEAR(bet_norm_sum(inst.w, inst.seq_norm, inst.f, inst.g), 1.0, 1e-9) << eps;
      EXPECT_NEAR(bet_norm_sum(inst.w, inst.alpha, inst.f, inst.g), 1.0, 1e-9) << eps;
    }
  }
}

TEST(BetNormSum, OtherExamples) {
  const auto id = MatrixWeight::identity(3, 2);
  const auto e1 = unit_field(3, 2, 0);
  EXPECT_NEAR(bet_norm_sum(id, root_only(3, SymMatrix::identity(2)), e1, e1), 1.0, 1e-15);
  EXPECT_EQ(bet_norm_sum(id, MatrixSequence(3, 2), e1, e1), 0.0);
  EXPECT_EQ(bet_norm_sum(id, ScalarSequence(3), e1, e1), 0.0);
}

TEST(BetNormSum, MatchesLeafMeanOracle) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto inst = random_instance(1 + static_cast<int>(seed % 5), 1 + static_cast<int>(seed % 3), seed, 1e4);
    const double got = bet_norm_sum(inst.w, inst.alpha, inst.f, inst.g);
    EXPECT_NEAR(got, brute_bet_norm(inst), 1e-8 * (1 + got));
  }
}

TEST(BetInnerSum, Examples) {
  const auto inst = epsilon_family(0.01, 0.7);
  EXPECT_NEAR(bet_inner_sum(inst.w, inst.seq_inner, inst.f, inst.g), 0.5, 1e-9);
  EXPECT_NEAR(bet_inner_sum(inst.w, inst.seq_norm, inst.f, inst.g), 0.0, 1e-9);
  const auto e1 = unit_field(3, 2, 0);
  EXPECT_NEAR(bet_inner_sum(MatrixWeight::identity(3, 2), root_only(3, SymMatrix::identity(2)), e1, e1), 1.0,
              1e-15);
}

// |⟨A x, y⟩| ≤ ‖A^{1/2}x‖ ‖A^{1/2}y‖ termwise.
TEST(BetInnerSum, BoundedByNormSum) {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const auto inst = random_instance(4, 1 + static_cast<int>(seed % 4), seed, 1e5);
    EXPECT_LE(bet_inner_sum(inst.w, inst.seq, inst.f, inst.g),
              bet_norm_sum(inst.w, inst.seq, inst.f, inst.g) * (1 + 1e-12) + 1e-14);
    EXPECT_LE(bet_inner_sum(inst.w, inst.alpha, inst.f, inst.g),
              bet_norm_sum(inst.w, inst.alpha, inst.f, inst.g) * (1 + 1e-12) + 1e-14);
  }
}

TEST(MaximalFunction, Examples) {
  const ScalarField mf = maximal_function(MatrixWeight::identity(1, 1), VectorField(1, {Vector::Constant(1, 1.0),
                                                                                      Vector::Constant(1, 3.0)}));
  EXPECT_DOUBLE_EQ(mf[0], 2.0);
  EXPECT_DOUBLE_EQ(mf[1], 3.0);

  Rng rng(41);
  const MatrixWeight w = MatrixWeight::constant(3, random_spd(rng, 3, 1e3));
  const Vector v = random_unit(rng, 3) * 2.5;
  const ScalarField mv = maximal_function(w, constant_vector_field(3, v));
  for (double x : mv.values()) EXPECT_NEAR(x, 2.5, 1e-10);

  const ScalarField m0 = maximal_function(w, constant_vector_field(3, Vector::Zero(3)));
  for (double x : m0.values()) EXPECT_EQ(x, 0.0);
}

TEST(MaximalFunction, DominatesEveryContainingCubeTerm) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto inst = random_instance(5, 2, seed, 1e3);
    const ScalarField mf = maximal_function(inst.w, inst.f);
    const CubeMap<Vector> z = normalized_averages(inst.w, inst.f);
    for (const DyadicIndex& q : inst.w.tree().cubes()) {
      const auto [first, last] = inst.w.tree().leaf_range(q);
      for (std::size_t i = first; i < last; ++i) {
        EXPECT_LE((inst.w.sqrt_field()[i] * z[q]).norm(), mf[i] * (1 + 1e-12));
      }
    }
  }
}

// Fixed data refined from depth 4 to 10 keeps the L² ratio finite and unchanged
// up to the extra (finer) cubes, which can only add to the supremum.
TEST(MaximalFunction, BoundedUnderRefinement) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto inst = random_instance(4, 2, seed, 1e3);
    double prev = 0.0;
    for (int depth = 4; depth <= 10; depth += 2) {
      const MatrixWeight w(inst.w.field().refine(depth));
      const VectorField f = inst.f.refine(depth);
      const double ratio = l2_norm(maximal_function(w, f)) / l2_norm(f);
      EXPECT_TRUE(std::isfinite(ratio));
      EXPECT_GE(ratio, 1.0 - 1e-12);
      // Refining piecewise-constant data adds only cubes whose averages repeat leaf values.
      if (depth > 4) {
        EXPECT_NEAR(ratio, prev, 1e-10 * prev);
      }
      prev = ratio;
    }
  }
}

TEST(PhiProduct, Examples) {
  const auto e1 = unit_field(3, 2, 0);
  const ScalarField id_phi = phi_product(MatrixWeight::identity(3, 2), e1, e1);
  for (double x : id_phi.values()) EXPECT_NEAR(x, 1.0, 1e-15);

  // ε-family: M_W f ≡ ‖W^{1/2} b‖ = ε and M_{W⁻¹} g ≡ ‖W^{-1/2} a‖ = 1.
  const auto inst = epsilon_family(0.1);
  const ScalarField mf = maximal_function(inst.w, inst.f);
  const ScalarField mg = maximal_function(inst.w.dual(), inst.g);
  const ScalarField phi = phi_product(inst.w, inst.f, inst.g);
  for (double x : mf.values()) EXPECT_NEAR(x, 0.1, 1e-13);
  for (double x : mg.values()) EXPECT_NEAR(x, 1.0, 1e-13);
  for (double x : phi.values()) EXPECT_NEAR(x, 0.1, 1e-13);

  const auto zero = constant_vector_field(3, Vector::Zero(2));
  const ScalarField zero_phi = phi_product(MatrixWeight::identity(3, 2), zero, e1);
  for (double x : zero_phi.values()) EXPECT_EQ(x, 0.0);
}

TEST(Choquet, Examples) {
  const DyadicTree tree(1);
  ScalarSequence ones(1);
  CubeMap<double> f(tree, 0.0);
  f[DyadicIndex::root()] = 2.0;
  f[DyadicIndex::root().left()] = 1.0;
  f[DyadicIndex::root().right()] = 3.0;
  for (const DyadicIndex& q : tree.cubes()) ones.set(q, 1.0);
  auto out = choquet_integral(ones, CubeFunctional(f));
  EXPECT_DOUBLE_EQ(out.sum_form, 6.0);
  EXPECT_DOUBLE_EQ(out.level_form, 6.0);

  out = choquet_integral(ones, CubeFunctional(CubeMap<double>(tree, 0.0)));
  EXPECT_EQ(out.sum_form, 0.0);
  EXPECT_EQ(out.level_form, 0.0);

  ScalarSequence two(1);
  two.set(DyadicIndex::root(), 2.0);
  CubeMap<double> five(tree, 0.0);
  five[DyadicIndex::root()] = 5.0;
  out = choquet_integral(two, CubeFunctional(five));
  EXPECT_DOUBLE_EQ(out.sum_form, 10.0);
  EXPECT_DOUBLE_EQ(out.level_form, 10.0);
}

TEST(Choquet, IdentityOnRandomData) {
  Rng rng(43);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<int> level_of_value(0, 4);
  for (int trial = 0; trial < 1000; ++trial) {
    const int depth = 1 + trial % 6;
    const ScalarSequence alpha = random_scalar_sequence(rng, depth, 0.5).scaled(1 + 3 * unit(rng));
    CubeMap<double> f(alpha.tree(), 0.0);
    // Coarse values so ties occur.
    for (const DyadicIndex& q : alpha.tree().cubes()) f[q] = trial % 2 ? unit(rng) : 0.25 * level_of_value(rng);
    const auto out = choquet_integral(alpha, CubeFunctional(f));
    EXPECT_NEAR(out.level_form, out.sum_form, 1e-10 * std::max(1.0, out.sum_form));
  }
}

TEST(Choquet, RejectsNegativeFunctional) {
  CubeMap<double> f(DyadicTree(1), 0.0);
  f[DyadicIndex::root()] = -1.0;
  EXPECT_THROW(CubeFunctional{f}, DomainError);
}

// F(Q) ≤ c2^{1/2} Φ(x) for x ⊆ Q, and the integrated form.
TEST(ProofChain, PointwiseAndIntegrated) {
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    const auto inst = random_instance(4, 1 + static_cast<int>(seed % 4), seed, 1e4);
    const CubeFunctional fq = bet_functional(inst.w, inst.f, inst.g);
    const ScalarField phi = phi_product(inst.w, inst.f, inst.g);
    const double root_c2 = std::sqrt(c2_conditioning(inst.w));
    for (const DyadicIndex& q : inst.w.tree().cubes()) {
      const auto [first, last] = inst.w.tree().leaf_range(q);
      for (std::size_t i = first; i < last; ++i) EXPECT_LE(fq[q], root_c2 * phi[i] + 1e-9);
    }
    const double lhs = bet_norm_sum(inst.w, inst.alpha, inst.f, inst.g);
    EXPECT_NEAR(lhs, choquet_integral(inst.alpha, fq).sum_form, 1e-10 * (1 + lhs));
    EXPECT_LE(lhs, root_c2 * integral(phi, DyadicIndex::root()) + 1e-9);
  }
  // Tight on the ε-family: F(Q₀) = 1 = ε⁻¹ · ε.
  const auto inst = epsilon_family(0.01);
  const double root_c2 = std::sqrt(c2_conditioning(inst.w));
  EXPECT_NEAR(bet_functional(inst.w, inst.f, inst.g)[DyadicIndex::root()], 1.0, 1e-9);
  EXPECT_NEAR(root_c2 * phi_product(inst.w, inst.f, inst.g)[0], 1.0, 1e-9);
}
