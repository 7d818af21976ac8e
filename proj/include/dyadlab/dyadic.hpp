#pragma once

// Dyadic subintervals of [0,1] to a fixed depth, cube-indexed storage and
// piecewise-constant (leafwise) fields with exact averages.

#include <cmath>
#include <compare>
#include <cstddef>
#include <functional>
#include <sstream>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

#include "dyadlab/errors.hpp"
#include "dyadlab/matrix.hpp"

namespace dyadlab {

inline constexpr int kMaxDepth = 20;

struct DyadicIndex {
  int level = 0;
  int position = 0;

  static constexpr DyadicIndex root() { return {0, 0}; }

  constexpr DyadicIndex left() const { return {level + 1, 2 * position}; }
  constexpr DyadicIndex right() const { return {level + 1, 2 * position + 1}; }
  constexpr DyadicIndex parent() const { return {level - 1, position / 2}; }

  /// |Q| = 2^{-level}
  double length() const { return std::ldexp(1.0, -level); }

  /// Heap order: root 0, children of i are 2i+1 and 2i+2.
  constexpr std::size_t heap() const {
    return (std::size_t{1} << level) - 1 + static_cast<std::size_t>(position);
  }

  static DyadicIndex from_heap(std::size_t i) {
    int level = 0;
    while ((std::size_t{2} << level) - 1 <= i) ++level;
    return {level, static_cast<int>(i - ((std::size_t{1} << level) - 1))};
  }

  // q ⊆ *this
  constexpr bool contains(const DyadicIndex& q) const {
    return q.level >= level && (q.position >> (q.level - level)) == position;
  }

  std::string str() const {
    std::ostringstream os;
    os << "(" << level << "," << position << ")";
    return os.str();
  }

  friend constexpr auto operator<=>(const DyadicIndex&, const DyadicIndex&) = default;
};

class DyadicTree {
 public:
  explicit DyadicTree(int depth = 6) : depth_(depth) {
    if (depth < 0 || depth > kMaxDepth) {
      throw AddressError("DyadicTree: depth out of range");
    }
  }

  int depth() const noexcept { return depth_; }
  std::size_t cube_count() const noexcept { return (std::size_t{2} << depth_) - 1; }
  std::size_t leaf_count() const noexcept { return std::size_t{1} << depth_; }
  double leaf_length() const { return std::ldexp(1.0, -depth_); }

  bool valid(const DyadicIndex& q) const noexcept {
    return q.level >= 0 && q.level <= depth_ && q.position >= 0 &&
           static_cast<std::size_t>(q.position) < (std::size_t{1} << q.level);
  }

  void check(const DyadicIndex& q) const {
    if (!valid(q)) {
      throw AddressError("cube " + q.str() + " outside tree of depth " + std::to_string(depth_));
    }
  }

  bool is_leaf(const DyadicIndex& q) const noexcept { return q.level == depth_; }

  DyadicIndex leaf(std::size_t i) const { return {depth_, static_cast<int>(i)}; }

  /// Leaves under q as the half-open range [first, last).
  std::pair<std::size_t, std::size_t> leaf_range(const DyadicIndex& q) const {
    check(q);
    const int shift = depth_ - q.level;
    const std::size_t first = static_cast<std::size_t>(q.position) << shift;
    return {first, first + (std::size_t{1} << shift)};
  }

  std::vector<DyadicIndex> cubes() const {
    std::vector<DyadicIndex> out;
    out.reserve(cube_count());
    for (int k = 0; k <= depth_; ++k) {
      for (int p = 0; p < (1 << k); ++p) out.push_back({k, p});
    }
    return out;
  }

  /// 𝒟(K): K and all of its dyadic descendants in the tree.
  std::vector<DyadicIndex> subcubes(const DyadicIndex& k) const {
    check(k);
    std::vector<DyadicIndex> out;
    out.reserve((std::size_t{2} << (depth_ - k.level)) - 1);
    for (int lvl = k.level; lvl <= depth_; ++lvl) {
      const int shift = lvl - k.level;
      const int first = k.position << shift;
      for (int p = first; p < first + (1 << shift); ++p) out.push_back({lvl, p});
    }
    return out;
  }

  /// Chain of cubes containing leaf i, from the root down to the leaf.
  std::vector<DyadicIndex> ancestors_of_leaf(std::size_t i) const {
    std::vector<DyadicIndex> out;
    out.reserve(depth_ + 1);
    for (int lvl = 0; lvl <= depth_; ++lvl) {
      out.push_back({lvl, static_cast<int>(i >> (depth_ - lvl))});
    }
    return out;
  }

  friend bool operator==(const DyadicTree&, const DyadicTree&) = default;

 private:
  int depth_;
};

/// Dense storage of one value per cube, heap-ordered.
template <class T>
class CubeMap {
 public:
  CubeMap(DyadicTree tree, T fill) : tree_(tree), values_(tree.cube_count(), std::move(fill)) {}

  const DyadicTree& tree() const noexcept { return tree_; }
  int depth() const noexcept { return tree_.depth(); }

  const T& operator[](const DyadicIndex& q) const { return values_[checked(q)]; }
  T& operator[](const DyadicIndex& q) { return values_[checked(q)]; }

  const T& at_heap(std::size_t i) const { return values_.at(i); }
  T& at_heap(std::size_t i) { return values_.at(i); }

  const std::vector<T>& values() const noexcept { return values_; }

 private:
  std::size_t checked(const DyadicIndex& q) const {
    tree_.check(q);
    return q.heap();
  }

  DyadicTree tree_;
  std::vector<T> values_;
};

/// Σ_{Q ∈ 𝒟(K)} values[Q] for every K, bottom-up.
template <class T>
CubeMap<T> subtree_sums(const CubeMap<T>& values) {
  CubeMap<T> out = values;
  const DyadicTree& tree = values.tree();
  for (int lvl = tree.depth() - 1; lvl >= 0; --lvl) {
    for (int p = 0; p < (1 << lvl); ++p) {
      const DyadicIndex q{lvl, p};
      out[q] = out[q] + out[q.left()] + out[q.right()];
    }
  }
  return out;
}

namespace detail {

template <class T>
inline int value_dim(const T& v) {
  if constexpr (std::is_arithmetic_v<T>) {
    (void)v;
    return 1;
  } else if constexpr (std::is_same_v<T, SymMatrix>) {
    return v.dim();
  } else {
    return static_cast<int>(v.size());
  }
}

}  // namespace detail

/// Piecewise-constant field on the leaves of a dyadic tree. Entries are
/// double, Vector (ℝ^d) or SymMatrix.
template <class T>
class StepField {
 public:
  StepField(int depth, std::vector<T> values) : tree_(depth), values_(std::move(values)) {
    if (values_.size() != tree_.leaf_count()) {
      throw DimensionError("StepField: expected " + std::to_string(tree_.leaf_count()) +
                           " leaf values, got " + std::to_string(values_.size()));
    }
    for (const T& v : values_) {
      if (detail::value_dim(v) != detail::value_dim(values_.front())) {
        throw DimensionError("StepField: leaf values of mixed dimension");
      }
    }
  }

  static StepField constant(int depth, const T& value) {
    return StepField(depth, std::vector<T>(DyadicTree(depth).leaf_count(), value));
  }

  const DyadicTree& tree() const noexcept { return tree_; }
  int depth() const noexcept { return tree_.depth(); }
  int dim() const { return detail::value_dim(values_.front()); }
  std::size_t size() const noexcept { return values_.size(); }

  const T& operator[](std::size_t leaf) const { return values_.at(leaf); }
  const std::vector<T>& values() const noexcept { return values_; }

  /// Exact mean of the leaf values under q.
  T average(const DyadicIndex& q) const {
    const auto [first, last] = tree_.leaf_range(q);
    T acc = values_[first];
    for (std::size_t i = first + 1; i < last; ++i) acc = acc + values_[i];
    return acc * (1.0 / static_cast<double>(last - first));
  }

  T integral(const DyadicIndex& q) const { return average(q) * q.length(); }

  /// Averages over every cube, via the martingale relation ⟨F⟩_Q = ½(⟨F⟩_{Q₋} + ⟨F⟩_{Q₊}).
  CubeMap<T> averages() const {
    CubeMap<T> out(tree_, values_.front());
    for (std::size_t i = 0; i < values_.size(); ++i) out[tree_.leaf(i)] = values_[i];
    for (int lvl = tree_.depth() - 1; lvl >= 0; --lvl) {
      for (int p = 0; p < (1 << lvl); ++p) {
        const DyadicIndex q{lvl, p};
        out[q] = (out[q.left()] + out[q.right()]) * 0.5;
      }
    }
    return out;
  }

  template <class Fn>
  auto map(Fn&& fn) const -> StepField<std::decay_t<std::invoke_result_t<Fn, const T&>>> {
    using U = std::decay_t<std::invoke_result_t<Fn, const T&>>;
    std::vector<U> out;
    out.reserve(values_.size());
    for (const T& v : values_) out.push_back(fn(v));
    return StepField<U>(depth(), std::move(out));
  }

  /// Same step function represented on a deeper tree.
  StepField refine(int new_depth) const {
    if (new_depth < depth()) throw AddressError("StepField::refine: cannot coarsen");
    const std::size_t repeat = std::size_t{1} << (new_depth - depth());
    std::vector<T> out;
    out.reserve(values_.size() * repeat);
    for (const T& v : values_) {
      for (std::size_t r = 0; r < repeat; ++r) out.push_back(v);
    }
    return StepField(new_depth, std::move(out));
  }

 private:
  DyadicTree tree_;
  std::vector<T> values_;
};

using ScalarField = StepField<double>;
using VectorField = StepField<Vector>;
using MatrixField = StepField<SymMatrix>;

template <class T>
T average(const StepField<T>& field, const DyadicIndex& q) {
  return field.average(q);
}

template <class T>
T integral(const StepField<T>& field, const DyadicIndex& q) {
  return field.integral(q);
}

/// v·1_{Q₀}
inline VectorField constant_vector_field(int depth, const Vector& v) {
  return VectorField::constant(depth, v);
}

}  // namespace dyadlab
