#pragma once

#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "dyadlab/dyadic.hpp"
#include "dyadlab/errors.hpp"
#include "dyadlab/matrix.hpp"

namespace dyadlab {

/// Powers of a cube average that the embedding sums and characteristics reuse.
struct AverageFactors {
  SymMatrix avg;           // ⟨X⟩_Q
  SymMatrix inv;           // ⟨X⟩_Q^{-1}
  SymMatrix inv_sqrt;      // ⟨X⟩_Q^{-1/2}
  EigenDecomposition eig;  // of ⟨X⟩_Q
};

/// A leafwise SPD matrix weight W. On construction the leafwise powers
/// W^{±1/2}, W^{-1} and the factored averages of W and W^{-1} on every cube
/// are computed once; the object is immutable afterwards.
///
/// A cube whose two children carry bitwise-equal averages reuses the child's
/// factors, so a weight that is constant on a cube keeps the leaf spectrum
/// there. Weights built with from_spectral keep the given spectra exactly.
class MatrixWeight {
 public:
  explicit MatrixWeight(const MatrixField& w) : data_(std::make_shared<Data>(build(w, decompose_all(w)))) {}

  /// Weight from leafwise eigen-decompositions Q diag(λ) Qᵀ.
  static MatrixWeight from_spectral(int depth, std::vector<EigenDecomposition> leaves) {
    std::vector<SymMatrix> vals;
    vals.reserve(leaves.size());
    for (const EigenDecomposition& e : leaves) vals.push_back(compose(e));
    return MatrixWeight(MatrixField(depth, std::move(vals)), std::move(leaves));
  }

  static MatrixWeight constant_spectral(int depth, const EigenDecomposition& leaf) {
    return from_spectral(depth, std::vector<EigenDecomposition>(DyadicTree(depth).leaf_count(), leaf));
  }

  static MatrixWeight constant(int depth, const SymMatrix& w) {
    return MatrixWeight(MatrixField::constant(depth, w));
  }
  static MatrixWeight identity(int depth, int d) { return constant(depth, SymMatrix::identity(d)); }

  /// d = 1 weight from positive leaf values.
  static MatrixWeight scalar(int depth, const std::vector<double>& leaves) {
    std::vector<SymMatrix> vals;
    vals.reserve(leaves.size());
    for (double x : leaves) vals.push_back(SymMatrix(Matrix::Constant(1, 1, x)));
    return MatrixWeight(MatrixField(depth, std::move(vals)));
  }

  int depth() const noexcept { return side().w.depth(); }
  int dim() const { return side().w.dim(); }
  const DyadicTree& tree() const noexcept { return side().w.tree(); }

  const MatrixField& field() const noexcept { return side().w; }
  const MatrixField& inverse_field() const noexcept { return other().w; }
  const MatrixField& sqrt_field() const noexcept { return side().sqrt; }
  const MatrixField& inv_sqrt_field() const noexcept { return other().sqrt; }

  /// Eigen-decomposition of the leaf value W(x_i).
  const EigenDecomposition& leaf_spectrum(std::size_t i) const { return side().spectra.at(i); }

  /// Factors of ⟨W⟩_Q.
  const AverageFactors& w_avg(const DyadicIndex& q) const { return side().avg[q]; }
  /// Factors of ⟨W^{-1}⟩_Q.
  const AverageFactors& winv_avg(const DyadicIndex& q) const { return other().avg[q]; }

  /// W^{-1} viewed as a weight in its own right (shares storage).
  MatrixWeight dual() const {
    MatrixWeight out = *this;
    out.flipped_ = !flipped_;
    return out;
  }

  /// λ_max/λ_min of each leaf value.
  const std::vector<double>& leaf_conditioning() const noexcept { return data_->conditioning; }

 private:
  MatrixWeight(const MatrixField& w, std::vector<EigenDecomposition> spectra)
      : data_(std::make_shared<Data>(build(w, std::move(spectra)))) {}

  struct Side {
    MatrixField w;
    MatrixField sqrt;
    std::vector<EigenDecomposition> spectra;
    CubeMap<AverageFactors> avg;
  };
  struct Data {
    Side primal;
    Side inverse;
    std::vector<double> conditioning;
  };

  const Side& side() const noexcept { return flipped_ ? data_->inverse : data_->primal; }
  const Side& other() const noexcept { return flipped_ ? data_->primal : data_->inverse; }

  static AverageFactors factors(const SymMatrix& avg, EigenDecomposition eig) {
    SymMatrix inv = spd_power(eig, Power::inverse);
    SymMatrix inv_sqrt = spd_power(eig, Power::inv_sqrt);
    return AverageFactors{avg, std::move(inv), std::move(inv_sqrt), std::move(eig)};
  }

  static CubeMap<AverageFactors> factor_averages(const MatrixField& f,
                                                 const std::vector<EigenDecomposition>& spectra) {
    const CubeMap<SymMatrix> avgs = f.averages();
    const DyadicTree& tree = f.tree();
    const SymMatrix& z = avgs.at_heap(0);
    CubeMap<AverageFactors> out(tree, AverageFactors{z, z, z, {}});
    for (std::size_t i = 0; i < tree.leaf_count(); ++i) {
      try {
        out[tree.leaf(i)] = factors(avgs[tree.leaf(i)], spectra[i]);
      } catch (const SingularityError& e) {
        throw SingularityError("singular average on cube " + tree.leaf(i).str() + ": " + e.what(),
                               e.lambda_min());
      }
    }
    for (int lvl = tree.depth() - 1; lvl >= 0; --lvl) {
      for (int p = 0; p < (1 << lvl); ++p) {
        const DyadicIndex q{lvl, p};
        if (avgs[q.left()] == avgs[q.right()] && avgs[q] == avgs[q.left()]) {
          out[q] = out[q.left()];
          continue;
        }
        try {
          out[q] = factors(avgs[q], eigen_decompose(avgs[q]));
        } catch (const SingularityError& e) {
          throw SingularityError("singular average on cube " + q.str() + ": " + e.what(),
                                 e.lambda_min());
        }
      }
    }
    return out;
  }

  static std::vector<EigenDecomposition> decompose_all(const MatrixField& w) {
    std::vector<EigenDecomposition> out;
    out.reserve(w.size());
    for (const SymMatrix& m : w.values()) out.push_back(eigen_decompose(m));
    return out;
  }

  static Data build(const MatrixField& w, std::vector<EigenDecomposition> spectra) {
    if (spectra.size() != w.size()) throw DimensionError("MatrixWeight: spectrum count mismatch");
    std::vector<SymMatrix> inv, sqrt, inv_sqrt;
    std::vector<EigenDecomposition> inv_spectra;
    std::vector<double> cond;
    const std::size_t n = w.size();
    inv.reserve(n);
    sqrt.reserve(n);
    inv_sqrt.reserve(n);
    inv_spectra.reserve(n);
    cond.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
      const EigenDecomposition& eig = spectra[i];
      if (eig.values.size() != w.dim()) throw DimensionError("MatrixWeight: spectrum dimension mismatch");
      const double lmin = eig.values(eig.values.size() - 1);
      if (!(lmin > kSingularThreshold)) {
        throw SingularityError("weight leaf " + std::to_string(i) + " is not positive definite",
                               lmin);
      }
      inv_spectra.push_back(invert(eig));
      inv.push_back(compose(inv_spectra.back()));
      sqrt.push_back(spd_power(eig, Power::sqrt));
      inv_sqrt.push_back(spd_power(eig, Power::inv_sqrt));
      cond.push_back(eig.values(0) / lmin);
    }
    MatrixField inv_field(w.depth(), std::move(inv));
    MatrixField sqrt_field(w.depth(), std::move(sqrt));
    MatrixField inv_sqrt_field(w.depth(), std::move(inv_sqrt));
    CubeMap<AverageFactors> primal_avg = factor_averages(w, spectra);
    CubeMap<AverageFactors> inverse_avg = factor_averages(inv_field, inv_spectra);
    // On a leaf each side's inverse is the other side's value; reuse it so that
    // (W⁻¹)⁻¹ and W are the same matrix.
    for (std::size_t i = 0; i < n; ++i) {
      const DyadicIndex leaf = w.tree().leaf(i);
      primal_avg[leaf].inv = inv_field[i];
      inverse_avg[leaf].inv = w[i];
    }
    return Data{Side{w, sqrt_field, std::move(spectra), std::move(primal_avg)},
                Side{inv_field, inv_sqrt_field, std::move(inv_spectra), std::move(inverse_avg)},
                std::move(cond)};
  }

  std::shared_ptr<const Data> data_;
  bool flipped_ = false;
};

/// Leafwise product X(x) v(x).
inline VectorField apply(const MatrixField& x, const VectorField& v) {
  if (x.depth() != v.depth()) throw DimensionError("apply: depth mismatch");
  if (x.dim() != v.dim()) throw DimensionError("apply: dimension mismatch");
  std::vector<Vector> out;
  out.reserve(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out.push_back(x[i] * v[i]);
  return VectorField(v.depth(), std::move(out));
}

}  // namespace dyadlab
