#include <gtest/gtest.h>

#include <cmath>

#include "dyadlab/characteristics.hpp"
#include "dyadlab/constructions.hpp"
#include "support/oracles.hpp"

using namespace dyadlab;

namespace {

// sup_K |K|⁻¹ Σ_{Q ⊆ K} α_Q over interval containment.
double brute_scalar_intensity(const ScalarSequence& alpha) {
  const int depth = alpha.depth();
  double best = 0.0;
  oracle::for_each_cube(depth, [&](int kl, int kp) {
    double sum = 0.0;
    for (const auto& [q, a] : alpha.entries()) {
      if (oracle::inside(oracle::interval(q.level, q.position), oracle::interval(kl, kp))) sum += a;
    }
    best = std::max(best, sum / std::pow(2.0, -kl));
  });
  return best;
}

// Classical sup_Q ⟨w⟩_Q ⟨w⁻¹⟩_Q by direct leaf sums.
double brute_scalar_a2(const std::vector<double>& w, int depth) {
  std::vector<double> winv(w.size());
  for (std::size_t i = 0; i < w.size(); ++i) winv[i] = 1.0 / w[i];
  double best = 0.0;
  oracle::for_each_cube(depth, [&](int k, int p) {
    best = std::max(best, oracle::leaf_mean(w, depth, k, p) * oracle::leaf_mean(winv, depth, k, p));
  });
  return best;
}

}  // namespace

TEST(CarlesonIntensity, Examples) {
  MatrixSequence a(4, 2);
  a.set(DyadicIndex::root(), SymMatrix::identity(2));
  EXPECT_DOUBLE_EQ(carleson_intensity(a), 1.0);

  EXPECT_EQ(carleson_intensity(MatrixSequence(4, 2)), 0.0);
  EXPECT_EQ(carleson_intensity(ScalarSequence(4)), 0.0);

  ScalarSequence alpha(2);
  for (const DyadicIndex& q : alpha.tree().cubes()) alpha.set(q, q.length());
  EXPECT_DOUBLE_EQ(carleson_intensity(alpha), 3.0);
  EXPECT_DOUBLE_EQ(brute_scalar_intensity(alpha), 3.0);
}

TEST(CarlesonIntensity, ScalarMatchesBruteForceAndMatrixEmbedding) {
  Rng rng(17);
  for (int i = 0; i < 50; ++i) {
    const int depth = 1 + i % 7;
    ScalarSequence alpha(depth);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (const DyadicIndex& q : alpha.tree().cubes()) {
      if (unit(rng) < 0.4) alpha.set(q, unit(rng));
    }
    const double scalar = carleson_intensity(alpha);
    EXPECT_NEAR(scalar, brute_scalar_intensity(alpha), 1e-12 * (1 + scalar));
    for (int d : {1, 3}) {
      EXPECT_NEAR(carleson_intensity(MatrixSequence::from_scalar(alpha, d)), scalar,
                  1e-14 * (1 + scalar));
    }
  }
}

TEST(CarlesonIntensity, RejectsNegativeAndNonPsdEntries) {
  ScalarSequence alpha(2);
  EXPECT_THROW(alpha.set(DyadicIndex::root(), -1.0), DomainError);
  MatrixSequence a(2, 2);
  EXPECT_THROW(a.set(DyadicIndex::root(), SymMatrix::diagonal({1.0, -0.1})), DomainError);
  EXPECT_THROW(a.set(DyadicIndex::root(), SymMatrix::identity(3)), DimensionError);
}

TEST(CarlesonEquivalents, Examples) {
  MatrixSequence id(3, 2);
  id.set(DyadicIndex::root(), SymMatrix::identity(2));
  auto eq = carleson_equivalents(id);
  EXPECT_DOUBLE_EQ(eq.op_norm_intensity, 1.0);
  EXPECT_DOUBLE_EQ(eq.trace_intensity, 2.0);

  Vector u(2);
  u << std::cos(0.3), std::sin(0.3);
  MatrixSequence proj(3, 2);
  proj.set(DyadicIndex::root(), SymMatrix::outer(u));
  eq = carleson_equivalents(proj);
  EXPECT_NEAR(eq.op_norm_intensity, 1.0, 1e-15);
  EXPECT_NEAR(eq.trace_intensity, 1.0, 1e-15);

  eq = carleson_equivalents(MatrixSequence(3, 2));
  EXPECT_EQ(eq.op_norm_intensity, 0.0);
  EXPECT_EQ(eq.trace_intensity, 0.0);
}

// matrix ≤ op ≤ trace ≤ d·matrix on random sequences.
TEST(CarlesonEquivalents, EquivalenceChain) {
  Rng rng(23);
  for (int i = 0; i < 100; ++i) {
    const int d = 1 + i % 4;
    const MatrixSequence b = random_matrix_sequence(rng, 1 + i % 6, d);
    const double m = carleson_intensity(b);
    const auto eq = carleson_equivalents(b);
    EXPECT_LE(m, eq.op_norm_intensity * (1 + 1e-12));
    EXPECT_LE(eq.op_norm_intensity, eq.trace_intensity * (1 + 1e-12));
    EXPECT_LE(eq.trace_intensity, d * m * (1 + 1e-12));
  }
}

TEST(WcetTestingConstant, Examples) {
  MatrixSequence a(3, 2);
  a.set(DyadicIndex::root(), SymMatrix::identity(2));
  EXPECT_NEAR(wcet_testing_constant(MatrixWeight::identity(3, 2), a), 1.0, 1e-14);

  const auto inst = epsilon_family(0.1, 0.0, 3);
  EXPECT_NEAR(wcet_testing_constant(inst.w, inst.seq_norm), 1.0, 1e-12);

  EXPECT_EQ(wcet_testing_constant(inst.w, MatrixSequence(3, 2)), 0.0);
}

TEST(WcetTestingConstant, IdentityWeightReducesToIntensity) {
  Rng rng(29);
  for (int i = 0; i < 50; ++i) {
    const int d = 1 + i % 4, depth = 1 + i % 6;
    const MatrixSequence a = random_matrix_sequence(rng, depth, d).scaled(1.7);
    EXPECT_NEAR(wcet_testing_constant(MatrixWeight::identity(depth, d), a), carleson_intensity(a), 1e-10);
  }
}

TEST(A2Characteristic, Examples) {
  const auto inst = epsilon_family(0.1);
  EXPECT_NEAR(a2_characteristic(inst.w), 1.0, 1e-12);

  Rng rng(31);
  const MatrixWeight constant = MatrixWeight::constant(3, random_spd(rng, 3, 1e4));
  EXPECT_NEAR(a2_characteristic(constant), 1.0, 1e-10);

  const MatrixWeight scalar = MatrixWeight::scalar(1, {1.0, 3.0});
  EXPECT_NEAR(a2_characteristic(scalar), 4.0 / 3.0, 1e-14);
}

TEST(A2Characteristic, ScalarFormulaOracleAndLowerBound) {
  Rng rng(37);
  std::uniform_real_distribution<double> logu(-3.0, 3.0);
  for (int i = 0; i < 50; ++i) {
    const int depth = 1 + i % 7;
    std::vector<double> w(std::size_t{1} << depth);
    for (double& x : w) x = std::pow(10.0, logu(rng));
    const double a2 = a2_characteristic(MatrixWeight::scalar(depth, w));
    EXPECT_NEAR(a2, brute_scalar_a2(w, depth), 1e-10 * a2);
    EXPECT_GE(a2, 1.0 - 1e-12);
  }
  for (int i = 0; i < 50; ++i) {
    const MatrixWeight w = random_weight(rng, 1 + i % 5, 1 + i % 4, 1e6);
    EXPECT_GE(a2_characteristic(w), 1.0 - 1e-10);
    EXPECT_GE(c2_conditioning(w), 1.0);
  }
}

TEST(C2Conditioning, Examples) {
  // λ_max/λ_min = ε⁻² for W = diag(1, ε²).
  EXPECT_NEAR(c2_conditioning(epsilon_family(0.1).w), 100.0, 1e-10);
  EXPECT_DOUBLE_EQ(c2_conditioning(MatrixWeight::identity(2, 3)), 1.0);
  EXPECT_DOUBLE_EQ(c2_conditioning(MatrixWeight::scalar(1, {1.0, 3.0})), 1.0);
}

TEST(MatrixWeight, RejectsSingularLeaves) {
  std::vector<SymMatrix> leaves{SymMatrix::identity(2), SymMatrix::diagonal({1.0, 0.0})};
  EXPECT_THROW(MatrixWeight(MatrixField(1, leaves)), SingularityError);
}

TEST(MatrixWeight, SpectralConstructionAgreesWithMatrixConstruction) {
  Rng rng(59);
  std::vector<SymMatrix> leaves;
  std::vector<EigenDecomposition> spectra;
  for (int i = 0; i < 8; ++i) {
    leaves.push_back(random_spd(rng, 3, 1e3));
    spectra.push_back(eigen_decompose(leaves.back()));
  }
  const MatrixWeight a{MatrixField(3, leaves)};
  const MatrixWeight b = MatrixWeight::from_spectral(3, spectra);
  EXPECT_NEAR(a2_characteristic(a), a2_characteristic(b), 1e-9);
  EXPECT_NEAR(c2_conditioning(a), c2_conditioning(b), 1e-9 * c2_conditioning(a));
  for (const DyadicIndex& q : a.tree().cubes()) {
    EXPECT_LE((a.winv_avg(q).avg.matrix() - b.winv_avg(q).avg.matrix()).norm(),
              1e-10 * a.winv_avg(q).avg.matrix().norm());
  }
}

TEST(MatrixWeight, ConstantCubesReuseLeafFactors) {
  const auto inst = epsilon_family(1e-4, 0.785);
  for (const DyadicIndex& q : inst.w.tree().cubes()) {
    EXPECT_EQ(inst.w.w_avg(q).eig.values(1), 1e-8);
    EXPECT_EQ(inst.w.winv_avg(q).eig.values(0), 1e8);
  }
}
