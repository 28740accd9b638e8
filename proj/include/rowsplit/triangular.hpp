#pragma once

#include <span>
#include <vector>

#include "rowsplit/sparse.hpp"

namespace rowsplit {

/// Solves L v = b for square lower-triangular L in CSC form. With `unit_diag`
/// the diagonal is implied and any stored diagonal entry is ignored.
std::vector<double> lower_solve(const CscMatrix& L, std::span<const double> b, bool unit_diag);

/// Solves L^T v = b without forming L^T.
std::vector<double> lower_transpose_solve(const CscMatrix& L, std::span<const double> b,
                                          bool unit_diag);

/// Solves U h = b for square upper-triangular U. Every diagonal entry must be
/// stored and nonzero.
std::vector<double> upper_solve(const CscMatrix& U, std::span<const double> b);

/// Solves U^T v = b without forming U^T.
std::vector<double> upper_transpose_solve(const CscMatrix& U, std::span<const double> b);

/// Gilbert-Peierls triangular solve with a sparse right-hand side.
///
/// The matrix may be lower or upper triangular; what matters is that its
/// column graph (edge j -> i for every stored T(i, j), i != j) is acyclic. A
/// depth-first search from the pattern of b yields the reachable set in
/// topological order, which is then the pattern of the solution. Workspace is
/// reused across calls, so one solver instance should serve many
/// right-hand sides.
class SparseTriangularSolver {
 public:
  SparseTriangularSolver(const CscMatrix& T, bool unit_diag);

  /// Reachable set of `pattern`, in topological order.
  std::vector<Index> reach(std::span<const Index> pattern);

  /// Returns x with T x = b. The result pattern is the reachable set of b's
  /// pattern, sorted ascending; numerically cancelled entries are kept.
  SparseVector solve(std::span<const Index> pattern, std::span<const double> values);

 private:
  const CscMatrix* T_;
  bool unit_diag_;
  std::vector<Index> diag_pos_;
  std::vector<unsigned> mark_;
  unsigned stamp_ = 0;
  std::vector<double> work_;
};

/// One-shot convenience wrapper around SparseTriangularSolver.
SparseVector sparse_solve_sparse_rhs(const CscMatrix& T, std::span<const Index> pattern,
                                     std::span<const double> values, bool unit_diag);

}  // namespace rowsplit
