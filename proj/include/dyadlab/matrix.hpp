#pragma once

// Dense symmetric matrix primitives. Everything here is derived from one
// symmetric eigen-decomposition: spectra, fractional powers, operator norms
// and PSD-order margins.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <initializer_list>
#include <sstream>
#include <string>
#include <vector>

#include "dyadlab/errors.hpp"

namespace dyadlab {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

inline constexpr double kSymmetryTolerance = 1e-9;
inline constexpr double kSingularThreshold = 1e-12;
inline constexpr double kPsdClamp = 1e-12;

class SymMatrix {
 public:
  SymMatrix() = default;

  /// Symmetrizes (M + Mᵀ)/2. Throws DimensionError on non-square input and
  /// NumericError when the asymmetry exceeds 1e-9 relative to the largest entry.
  explicit SymMatrix(const Matrix& m) : m_(m) {
    if (m.rows() != m.cols()) {
      throw DimensionError("SymMatrix: matrix is not square");
    }
    if (!m.allFinite()) {
      throw NumericError("SymMatrix: non-finite entry");
    }
    if (m.size() > 0) {
      const double scale = m.cwiseAbs().maxCoeff();
      const double asym = (m - m.transpose()).cwiseAbs().maxCoeff();
      if (asym > kSymmetryTolerance * scale) {
        std::ostringstream os;
        os << "SymMatrix: asymmetry " << asym << " exceeds tolerance (scale " << scale << ")";
        throw NumericError(os.str());
      }
      m_ = 0.5 * (m + m.transpose());
    }
  }

  static SymMatrix identity(int d) { return SymMatrix(Matrix::Identity(d, d)); }
  static SymMatrix zero(int d) { return SymMatrix(Matrix::Zero(d, d)); }
  static SymMatrix diagonal(const Vector& diag) { return SymMatrix(Matrix(diag.asDiagonal())); }
  static SymMatrix diagonal(std::initializer_list<double> diag) {
    Vector v(static_cast<Eigen::Index>(diag.size()));
    Eigen::Index i = 0;
    for (double x : diag) v(i++) = x;
    return diagonal(v);
  }
  static SymMatrix outer(const Vector& v) { return SymMatrix(Matrix(v * v.transpose())); }

  int dim() const noexcept { return static_cast<int>(m_.rows()); }
  const Matrix& matrix() const noexcept { return m_; }
  double operator()(int i, int j) const { return m_(i, j); }

  double trace() const { return m_.trace(); }

  // xᵀ M x
  double quad(const Vector& x) const {
    check_dim(x.size());
    return x.dot(m_ * x);
  }

  /// P M Pᵀ
  SymMatrix congruence(const Matrix& p) const {
    if (p.cols() != m_.rows()) throw DimensionError("SymMatrix::congruence: dimension mismatch");
    return SymMatrix(Matrix(p * m_ * p.transpose()));
  }

  Vector operator*(const Vector& x) const {
    check_dim(x.size());
    return m_ * x;
  }

  SymMatrix& operator+=(const SymMatrix& o) {
    check_dim(o.dim());
    m_ += o.m_;
    return *this;
  }
  SymMatrix& operator-=(const SymMatrix& o) {
    check_dim(o.dim());
    m_ -= o.m_;
    return *this;
  }
  SymMatrix& operator*=(double s) {
    m_ *= s;
    return *this;
  }

  friend SymMatrix operator+(SymMatrix a, const SymMatrix& b) { return a += b; }
  friend SymMatrix operator-(SymMatrix a, const SymMatrix& b) { return a -= b; }
  friend SymMatrix operator*(SymMatrix a, double s) { return a *= s; }
  friend SymMatrix operator*(double s, SymMatrix a) { return a *= s; }

  friend bool operator==(const SymMatrix& a, const SymMatrix& b) { return a.m_ == b.m_; }

 private:
  void check_dim(Eigen::Index n) const {
    if (n != m_.rows()) throw DimensionError("SymMatrix: dimension mismatch");
  }

  Matrix m_;
};

/// Eigenvalues in descending order with matching eigenvector columns.
struct EigenDecomposition {
  Vector values;
  Matrix vectors;
};

inline EigenDecomposition eigen_decompose(const SymMatrix& m) {
  if (!m.matrix().allFinite()) throw NumericError("eigen_decompose: non-finite entry");
  Eigen::SelfAdjointEigenSolver<Matrix> solver(m.matrix());
  if (solver.info() != Eigen::Success) {
    throw NumericError("eigen_decompose: symmetric eigen-solver did not converge");
  }
  // Eigen returns ascending order.
  EigenDecomposition out;
  out.values = solver.eigenvalues().reverse();
  out.vectors = solver.eigenvectors().rowwise().reverse();
  return out;
}

inline Vector spectrum(const SymMatrix& m) { return eigen_decompose(m).values; }

inline double lambda_max(const SymMatrix& m) { return spectrum(m)(0); }
inline double lambda_min(const SymMatrix& m) {
  const Vector s = spectrum(m);
  return s(s.size() - 1);
}

inline double op_norm(const SymMatrix& m) { return spectrum(m).cwiseAbs().maxCoeff(); }

enum class Power { sqrt, inv_sqrt, inverse };

inline double power_exponent(Power p) {
  switch (p) {
    case Power::sqrt:
      return 0.5;
    case Power::inv_sqrt:
      return -0.5;
    case Power::inverse:
      return -1.0;
  }
  return 0.0;
}

/// λᵖ for each eigenvalue, with the same checks as spd_power.
inline Vector powered_values(const EigenDecomposition& eig, Power p) {
  const double lmin = eig.values(eig.values.size() - 1);
  Vector powered(eig.values.size());
  if (p == Power::sqrt) {
    if (lmin < -kPsdClamp) {
      std::ostringstream os;
      os << "spd_power: square root of a non-PSD matrix (lambda_min = " << lmin << ")";
      throw NumericError(os.str());
    }
    for (Eigen::Index i = 0; i < powered.size(); ++i) {
      powered(i) = std::sqrt(std::max(eig.values(i), 0.0));
    }
  } else {
    if (!(lmin > kSingularThreshold)) {
      std::ostringstream os;
      os << "spd_power: negative power of a singular matrix (lambda_min = " << lmin << ")";
      throw SingularityError(os.str(), lmin);
    }
    const double e = power_exponent(p);
    for (Eigen::Index i = 0; i < powered.size(); ++i) {
      powered(i) = std::pow(eig.values(i), e);
    }
  }
  return powered;
}

/// Spectral calculus on an already decomposed matrix.
inline SymMatrix spd_power(const EigenDecomposition& eig, Power p) {
  const Vector powered = powered_values(eig, p);
  return SymMatrix(Matrix(eig.vectors * powered.asDiagonal() * eig.vectors.transpose()));
}

/// Mᵖ v evaluated as Q (λᵖ ∘ Qᵀv) without forming Mᵖ. For badly conditioned
/// M this keeps the small-eigenvalue components at full relative accuracy.
inline Vector apply_power(const EigenDecomposition& eig, Power p, const Vector& v) {
  if (v.size() != eig.values.size()) throw DimensionError("apply_power: dimension mismatch");
  const Vector powered = powered_values(eig, p);
  return eig.vectors * powered.cwiseProduct(eig.vectors.transpose() * v);
}

/// Q Λ Qᵀ
inline SymMatrix compose(const EigenDecomposition& eig) {
  return SymMatrix(Matrix(eig.vectors * eig.values.asDiagonal() * eig.vectors.transpose()));
}

/// Decomposition of M⁻¹ from that of M (same vectors, reversed order).
inline EigenDecomposition invert(const EigenDecomposition& eig) {
  const double lmin = eig.values(eig.values.size() - 1);
  if (!(lmin > kSingularThreshold)) throw SingularityError("invert: singular matrix", lmin);
  return {eig.values.cwiseInverse().reverse(), eig.vectors.rowwise().reverse()};
}

/// Decomposition from given orthonormal eigenvectors (columns) and eigenvalues,
/// reordered to descending.
inline EigenDecomposition spectral(const Matrix& vectors, const Vector& values) {
  const Eigen::Index d = values.size();
  if (vectors.rows() != d || vectors.cols() != d) throw DimensionError("spectral: shape mismatch");
  if (!vectors.allFinite() || !values.allFinite()) throw NumericError("spectral: non-finite input");
  if ((vectors.transpose() * vectors - Matrix::Identity(d, d)).cwiseAbs().maxCoeff() > 1e-12) {
    throw NumericError("spectral: eigenvectors are not orthonormal");
  }
  std::vector<Eigen::Index> order(static_cast<std::size_t>(d));
  for (Eigen::Index i = 0; i < d; ++i) order[static_cast<std::size_t>(i)] = i;
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return values(a) > values(b); });
  EigenDecomposition out{Vector(d), Matrix(d, d)};
  for (Eigen::Index i = 0; i < d; ++i) {
    out.values(i) = values(order[static_cast<std::size_t>(i)]);
    out.vectors.col(i) = vectors.col(order[static_cast<std::size_t>(i)]);
  }
  return out;
}

inline SymMatrix spd_power(const SymMatrix& m, Power p) { return spd_power(eigen_decompose(m), p); }

/// λ_min(a − b). a ⪰ b iff the result is ≥ −tol; the tolerance is the caller's.
inline double psd_gap(const SymMatrix& a, const SymMatrix& b) {
  if (a.dim() != b.dim()) throw DimensionError("psd_gap: dimension mismatch");
  return lambda_min(a - b);
}

/// λ_max(outer^{-1/2} inner outer^{-1/2}): best c with inner ⪯ c·outer.
inline double relative_lambda_max(const SymMatrix& inner, const SymMatrix& outer_inv_sqrt) {
  return lambda_max(inner.congruence(outer_inv_sqrt.matrix()));
}

inline double condition_number(const SymMatrix& m) {
  const Vector s = spectrum(m);
  const double lmin = s(s.size() - 1);
  if (!(lmin > kSingularThreshold)) {
    throw SingularityError("condition_number: singular matrix", lmin);
  }
  return s(0) / lmin;
}

}  // namespace dyadlab
