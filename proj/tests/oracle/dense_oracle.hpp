#pragma once

#include <memory>
#include <span>
#include <vector>

#include "rowsplit/dense.hpp"
#include "rowsplit/sparse.hpp"

/// Dense reference implementations for checking the sparse code on small
/// problems, evaluated in long double. Every routine refuses inputs with more
/// than 200 columns.
namespace rowsplit::oracle {

struct DenseLsSolution {
  std::vector<double> x_true;
  /// b - A x_true
  std::vector<double> residual;
};

/// Least-squares solution from a Cholesky factorization of A^T A, with one
/// step of iterative refinement on the normal equations. Throws
/// RankDeficientError if a column-pivoted QR finds A rank deficient and
/// NotSpdError if the Cholesky factorization still fails.
DenseLsSolution dense_lls_solve(const DenseMatrix& A, std::span<const double> b);

/// Squared A^T A-norm errors of trial iterates against the least-squares
/// solution, with the reference solution and the difference kept in long
/// double so the result stays accurate well below the double rounding level.
class LsErrorOracle {
 public:
  LsErrorOracle(const DenseMatrix& A, std::span<const double> b);
  ~LsErrorOracle();
  LsErrorOracle(LsErrorOracle&&) noexcept;
  LsErrorOracle& operator=(LsErrorOracle&&) noexcept;

  /// ||A (x_true - x)||^2.
  double squared_error(std::span<const double> x) const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

struct DenseLu {
  /// row_perm[k] is the row of A placed at position k.
  std::vector<Index> row_perm;
  /// m x n unit lower trapezoidal.
  DenseMatrix L;
  /// n x n upper triangular.
  DenseMatrix U;
};

/// Partial-pivoting LU of an m x n matrix, m >= n: P A = L U. Ties in the
/// pivot magnitude go to the smaller row. Throws SingularError on an exactly
/// zero pivot column.
DenseLu dense_lu_pp(const DenseMatrix& A);

struct WoodburyCorrection {
  /// C1^{-1} (I - A2^T S^{-1} A2 C1^{-1}) z with z = A1^T r1 + A2^T r2.
  std::vector<double> delta;
  /// C1^{-1} (A1^T r1 - A2^T S^{-1} (A2 C1^{-1} A1^T r1 - r2)).
  std::vector<double> delta_split;
};

/// Both closed forms of the additive correction for the row split
/// A = [A1; A2], C1 = A1^T A1, S = I + A2 C1^{-1} A2^T. A1 must have full
/// column rank. C1 is applied through a QR factorization of A1.
WoodburyCorrection dense_woodbury_correction(const DenseMatrix& A1, const DenseMatrix& A2,
                                             std::span<const double> r1, std::span<const double> r2);

/// (A^T A)^{-1} z, via QR of A.
std::vector<double> dense_normal_solve(const DenseMatrix& A, std::span<const double> z);

/// ||A v||, the A^T A-norm of v.
double ata_norm(const DenseMatrix& A, std::span<const double> v);

/// Rows of A stacked in the given order.
DenseMatrix permute_rows(const DenseMatrix& A, std::span<const Index> order);

/// Rows [first, last) of A.
DenseMatrix row_block(const DenseMatrix& A, std::size_t first, std::size_t last);

}  // namespace rowsplit::oracle
