#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace rowsplit {

/// Column-major dense matrix.
class DenseMatrix {
 public:
  DenseMatrix() = default;
  DenseMatrix(std::size_t nrows, std::size_t ncols, double fill = 0.0)
      : nrows_(nrows), ncols_(ncols), values_(nrows * ncols, fill) {}

  static DenseMatrix identity(std::size_t n);

  std::size_t nrows() const noexcept { return nrows_; }
  std::size_t ncols() const noexcept { return ncols_; }

  double& operator()(std::size_t i, std::size_t j) { return values_[i + j * nrows_]; }
  double operator()(std::size_t i, std::size_t j) const { return values_[i + j * nrows_]; }

  std::span<double> column(std::size_t j) { return {values_.data() + j * nrows_, nrows_}; }
  std::span<const double> column(std::size_t j) const {
    return {values_.data() + j * nrows_, nrows_};
  }

  std::span<const double> values() const noexcept { return values_; }

  /// y = M x
  std::vector<double> multiply(std::span<const double> x) const;

 private:
  std::size_t nrows_ = 0;
  std::size_t ncols_ = 0;
  std::vector<double> values_;
};

/// Unblocked right-looking Cholesky. Returns the lower factor G with S = G G^T;
/// only the lower triangle of S is read. Throws NotSpdError on a non-positive
/// pivot.
DenseMatrix cholesky_factorize(const DenseMatrix& S);

/// Solves G G^T w = b given the lower factor from cholesky_factorize.
std::vector<double> cholesky_solve(const DenseMatrix& factor, std::span<const double> b);

/// Extends a Cholesky factor of S by one bordered row/column. `offdiag` is the
/// new column of S above the diagonal, `diag` its new diagonal entry. Throws
/// NotSpdError when the new pivot is not positive.
DenseMatrix cholesky_border(const DenseMatrix& factor, std::span<const double> offdiag,
                            double diag);

}  // namespace rowsplit
