#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "rowsplit/dense.hpp"

namespace rowsplit {

using Index = std::int32_t;

struct Triplet {
  Index row;
  Index col;
  double value;
};

/// Compressed sparse column matrix.
///
/// Invariants (checked by validate()): col_ptr has ncols+1 non-decreasing
/// entries starting at 0 and ending at nnz; row indices inside a column are
/// strictly increasing and lie in [0, nrows); no stored value is exactly zero.
class CscMatrix {
 public:
  CscMatrix() : col_ptr_(1, 0) {}

  /// All-zero matrix of the given shape.
  CscMatrix(Index nrows, Index ncols);

  /// Takes ownership of raw CSC arrays and validates them.
  CscMatrix(Index nrows, Index ncols, std::vector<Index> col_ptr, std::vector<Index> row_idx,
            std::vector<double> values);

  /// Builds from unordered coordinates. Duplicates are summed and entries
  /// that end up exactly zero are dropped.
  static CscMatrix from_triplets(Index nrows, Index ncols, std::span<const Triplet> entries);
  static CscMatrix from_dense(const DenseMatrix& dense);
  static CscMatrix identity(Index n);

  Index nrows() const noexcept { return nrows_; }
  Index ncols() const noexcept { return ncols_; }
  Index nnz() const noexcept { return static_cast<Index>(row_idx_.size()); }

  std::span<const Index> col_ptr() const noexcept { return col_ptr_; }
  std::span<const Index> row_idx() const noexcept { return row_idx_; }
  std::span<const double> values() const noexcept { return values_; }

  std::span<const Index> column_rows(Index j) const {
    return {row_idx_.data() + col_ptr_[j], static_cast<std::size_t>(col_ptr_[j + 1] - col_ptr_[j])};
  }
  std::span<const double> column_values(Index j) const {
    return {values_.data() + col_ptr_[j], static_cast<std::size_t>(col_ptr_[j + 1] - col_ptr_[j])};
  }

  CscMatrix transpose() const;
  DenseMatrix to_dense() const;
  double frobenius_norm() const;

  /// Throws Error describing the first violated structural invariant.
  void validate() const;

 private:
  Index nrows_ = 0;
  Index ncols_ = 0;
  std::vector<Index> col_ptr_;
  std::vector<Index> row_idx_;
  std::vector<double> values_;
};

/// Sparse vector: `pattern[k]` holds the index of `values[k]`.
struct SparseVector {
  std::vector<Index> pattern;
  std::vector<double> values;
};

/// Bijection on [0, n). `forward()[k]` is the original index placed at
/// position k; `inverse()[i]` is the position of original index i.
class Permutation {
 public:
  Permutation() = default;
  explicit Permutation(Index n);
  explicit Permutation(std::vector<Index> forward);

  Index size() const noexcept { return static_cast<Index>(perm_.size()); }
  Index operator[](Index k) const { return perm_[k]; }
  Index position_of(Index original) const { return inv_[original]; }

  std::span<const Index> forward() const noexcept { return perm_; }
  std::span<const Index> inverse() const noexcept { return inv_; }

  bool is_identity() const;

  /// y[k] = x[forward[k]]
  std::vector<double> gather(std::span<const double> x) const;
  /// x[forward[k]] = y[k]
  std::vector<double> scatter(std::span<const double> y) const;

 private:
  std::vector<Index> perm_;
  std::vector<Index> inv_;
};

// Dense vector helpers. Reductions run in index order so results are
// reproducible.
double dot(std::span<const double> x, std::span<const double> y);
double norm2(std::span<const double> x);
double norm_inf(std::span<const double> x);
/// y += a x
void axpy(double a, std::span<const double> x, std::span<double> y);

/// Returns A x.
std::vector<double> matvec(const CscMatrix& A, std::span<const double> x);
/// Returns A^T y.
std::vector<double> matvec_transpose(const CscMatrix& A, std::span<const double> y);

/// Per-column 2-norm scaling factors (the original column norms).
struct ColumnScaling {
  std::vector<double> scale;

  /// Maps a solution of the scaled problem back to the original variables.
  std::vector<double> unscale_solution(std::span<const double> x_scaled) const;
};

struct ScaledMatrix {
  CscMatrix matrix;
  ColumnScaling scaling;
};

/// Scales every column to unit 2-norm. Throws ZeroColumnError on an all-zero
/// column.
ScaledMatrix column_scale(const CscMatrix& A);

/// Estimates ||A||_2 by power iteration on A^T A started from a seeded random
/// vector. Each step costs one product with A and one with A^T.
double power_method_norm2(const CscMatrix& A, int iters = 100, std::uint64_t seed = 42);

/// Same iteration, returning the estimate after every step.
std::vector<double> power_method_history(const CscMatrix& A, int iters, std::uint64_t seed);

/// Deterministic uniform samples in [-1, 1] from a seeded 64-bit generator.
/// The mapping from generator output to doubles is fixed here rather than
/// delegated to std::uniform_real_distribution, so values agree across
/// standard libraries.
std::vector<double> uniform_vector(std::size_t n, std::uint64_t seed);

}  // namespace rowsplit
