#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "rowsplit/sparse.hpp"

namespace rowsplit {

struct QuasiSquareOptions {
  double mu = 0.1;
  double small = 1e-10;
  /// Largest m-n for which S is formed.
  std::size_t dense_s_cap = 20000;
};

struct QuasiSquareSolution {
  /// Least-squares solution in the original (unscaled) variables.
  std::vector<double> x;
  /// Solution of S w = b2 - Y b1, length m-n.
  std::vector<double> w;
  /// (max G_ii / min G_ii)^2 over the Cholesky factor G of S; a cheap lower
  /// bound on cond_2(S). 1 when S is empty.
  double s_condition = 1.0;
};

/// Direct least-squares solve through a complete row-split LU factorization:
/// S w = b2 - Y b1, then L1 U x = b1 + Y^T w. Columns are scaled internally.
/// Throws RankDeficientError if the factorization needs a modified pivot and
/// SizeCapError if m-n exceeds the cap.
QuasiSquareSolution solve_quasi_square_direct(const CscMatrix& A, std::span<const double> b,
                                              const QuasiSquareOptions& options = {});

}  // namespace rowsplit
