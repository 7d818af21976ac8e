#pragma once

// Sparse cube-indexed Carleson sequences: PSD matrices A_Q or non-negative
// scalars α_Q. Absent entries are zero.

#include <cmath>
#include <map>
#include <sstream>
#include <utility>

#include "dyadlab/dyadic.hpp"
#include "dyadlab/errors.hpp"
#include "dyadlab/matrix.hpp"

namespace dyadlab {

inline constexpr double kPsdEntryTolerance = 1e-12;

class ScalarSequence {
 public:
  explicit ScalarSequence(int depth) : tree_(depth) {}

  const DyadicTree& tree() const noexcept { return tree_; }
  int depth() const noexcept { return tree_.depth(); }

  void set(const DyadicIndex& q, double value) {
    tree_.check(q);
    if (!(value >= 0.0) || !std::isfinite(value)) {
      std::ostringstream os;
      os << "ScalarSequence: entry at " << q.str() << " must be finite and non-negative, got "
         << value;
      throw DomainError(os.str(), value);
    }
    if (value == 0.0) {
      entries_.erase(q);
    } else {
      entries_[q] = value;
    }
  }

  double at(const DyadicIndex& q) const {
    tree_.check(q);
    const auto it = entries_.find(q);
    return it == entries_.end() ? 0.0 : it->second;
  }

  const std::map<DyadicIndex, double>& entries() const noexcept { return entries_; }
  bool empty() const noexcept { return entries_.empty(); }

  ScalarSequence scaled(double s) const {
    ScalarSequence out(depth());
    for (const auto& [q, v] : entries_) out.set(q, v * s);
    return out;
  }

  CubeMap<double> dense() const {
    CubeMap<double> out(tree_, 0.0);
    for (const auto& [q, v] : entries_) out[q] = v;
    return out;
  }

 private:
  DyadicTree tree_;
  std::map<DyadicIndex, double> entries_;
};

class MatrixSequence {
 public:
  MatrixSequence(int depth, int d) : tree_(depth), d_(d) {
    if (d < 1) throw DimensionError("MatrixSequence: d must be >= 1");
  }

  /// α_Q·identity
  static MatrixSequence from_scalar(const ScalarSequence& alpha, int d) {
    MatrixSequence out(alpha.depth(), d);
    for (const auto& [q, v] : alpha.entries()) out.set(q, SymMatrix::identity(d) * v);
    return out;
  }

  const DyadicTree& tree() const noexcept { return tree_; }
  int depth() const noexcept { return tree_.depth(); }
  int dim() const noexcept { return d_; }

  void set(const DyadicIndex& q, const SymMatrix& value) {
    tree_.check(q);
    if (value.dim() != d_) throw DimensionError("MatrixSequence: entry dimension mismatch");
    const double lmin = lambda_min(value);
    if (lmin < -kPsdEntryTolerance) {
      std::ostringstream os;
      os << "MatrixSequence: entry at " << q.str() << " is not PSD (lambda_min = " << lmin << ")";
      throw DomainError(os.str(), lmin);
    }
    entries_[q] = value;
  }

  SymMatrix at(const DyadicIndex& q) const {
    tree_.check(q);
    const auto it = entries_.find(q);
    return it == entries_.end() ? SymMatrix::zero(d_) : it->second;
  }

  const std::map<DyadicIndex, SymMatrix>& entries() const noexcept { return entries_; }
  bool empty() const noexcept { return entries_.empty(); }

  MatrixSequence scaled(double s) const {
    if (!(s >= 0.0)) throw DomainError("MatrixSequence::scaled: negative factor", s);
    MatrixSequence out(depth(), d_);
    for (const auto& [q, v] : entries_) out.entries_[q] = v * s;
    return out;
  }

  CubeMap<SymMatrix> dense() const {
    CubeMap<SymMatrix> out(tree_, SymMatrix::zero(d_));
    for (const auto& [q, v] : entries_) out[q] = v;
    return out;
  }

 private:
  DyadicTree tree_;
  int d_;
  std::map<DyadicIndex, SymMatrix> entries_;
};

}  // namespace dyadlab
