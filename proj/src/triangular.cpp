#include "rowsplit/triangular.hpp"

#include <algorithm>
#include <string>

#include "reach.hpp"
#include "rowsplit/errors.hpp"

namespace rowsplit {
namespace {

void require_square(const CscMatrix& T, std::size_t b_len, const char* who) {
  if (T.nrows() != T.ncols()) throw DimensionError(std::string(who) + ": matrix is not square");
  if (b_len != static_cast<std::size_t>(T.ncols())) {
    throw DimensionError(std::string(who) + ": right-hand side length mismatch");
  }
}

double stored_diagonal(const CscMatrix& T, Index j, const char* who) {
  const auto rows = T.column_rows(j);
  const auto it = std::lower_bound(rows.begin(), rows.end(), j);
  if (it == rows.end() || *it != j) {
    throw SingularError(std::string(who) + ": missing diagonal entry in column " + std::to_string(j));
  }
  return T.column_values(j)[static_cast<std::size_t>(it - rows.begin())];
}

}  // namespace

std::vector<double> lower_solve(const CscMatrix& L, std::span<const double> b, bool unit_diag) {
  require_square(L, b.size(), "lower_solve");
  std::vector<double> x(b.begin(), b.end());
  for (Index j = 0; j < L.ncols(); ++j) {
    if (!unit_diag) x[j] /= stored_diagonal(L, j, "lower_solve");
    const double xj = x[j];
    if (xj == 0.0) continue;
    const auto rows = L.column_rows(j);
    const auto vals = L.column_values(j);
    for (std::size_t p = 0; p < rows.size(); ++p) {
      if (rows[p] > j) x[rows[p]] -= vals[p] * xj;
    }
  }
  return x;
}

std::vector<double> lower_transpose_solve(const CscMatrix& L, std::span<const double> b,
                                          bool unit_diag) {
  require_square(L, b.size(), "lower_transpose_solve");
  std::vector<double> x(b.begin(), b.end());
  for (Index j = L.ncols(); j-- > 0;) {
    const auto rows = L.column_rows(j);
    const auto vals = L.column_values(j);
    double s = x[j];
    for (std::size_t p = 0; p < rows.size(); ++p) {
      if (rows[p] > j) s -= vals[p] * x[rows[p]];
    }
    x[j] = unit_diag ? s : s / stored_diagonal(L, j, "lower_transpose_solve");
  }
  return x;
}

std::vector<double> upper_solve(const CscMatrix& U, std::span<const double> b) {
  require_square(U, b.size(), "upper_solve");
  std::vector<double> x(b.begin(), b.end());
  for (Index j = U.ncols(); j-- > 0;) {
    const double d = stored_diagonal(U, j, "upper_solve");
    if (d == 0.0) throw SingularError("upper_solve: zero diagonal in column " + std::to_string(j));
    x[j] /= d;
    const double xj = x[j];
    if (xj == 0.0) continue;
    const auto rows = U.column_rows(j);
    const auto vals = U.column_values(j);
    for (std::size_t p = 0; p < rows.size() && rows[p] < j; ++p) x[rows[p]] -= vals[p] * xj;
  }
  return x;
}

std::vector<double> upper_transpose_solve(const CscMatrix& U, std::span<const double> b) {
  require_square(U, b.size(), "upper_transpose_solve");
  std::vector<double> x(b.begin(), b.end());
  for (Index j = 0; j < U.ncols(); ++j) {
    const auto rows = U.column_rows(j);
    const auto vals = U.column_values(j);
    double s = x[j];
    for (std::size_t p = 0; p < rows.size() && rows[p] < j; ++p) s -= vals[p] * x[rows[p]];
    x[j] = s / stored_diagonal(U, j, "upper_transpose_solve");
  }
  return x;
}

SparseTriangularSolver::SparseTriangularSolver(const CscMatrix& T, bool unit_diag)
    : T_(&T),
      unit_diag_(unit_diag),
      diag_pos_(static_cast<std::size_t>(T.ncols()), -1),
      mark_(static_cast<std::size_t>(T.ncols()), 0u),
      work_(static_cast<std::size_t>(T.ncols()), 0.0) {
  if (T.nrows() != T.ncols()) throw DimensionError("sparse triangular solve: matrix is not square");
  for (Index j = 0; j < T.ncols(); ++j) {
    const auto rows = T.column_rows(j);
    const auto it = std::lower_bound(rows.begin(), rows.end(), j);
    if (it != rows.end() && *it == j) diag_pos_[j] = T.col_ptr()[j] + static_cast<Index>(it - rows.begin());
  }
}

std::vector<Index> SparseTriangularSolver::reach(std::span<const Index> pattern) {
  for (Index i : pattern) {
    if (i < 0 || i >= T_->ncols()) throw DimensionError("sparse right-hand side index out of range");
  }
  stamp_ = detail::next_stamp(mark_, stamp_);
  std::vector<Index> order;
  const CscMatrix& T = *T_;
  detail::depth_first_reach(
      pattern, [&T](Index j) { return T.column_rows(j); }, mark_, stamp_, order);
  return order;
}

SparseVector SparseTriangularSolver::solve(std::span<const Index> pattern,
                                           std::span<const double> values) {
  if (pattern.size() != values.size()) throw DimensionError("sparse rhs pattern/value mismatch");
  std::vector<Index> order = reach(pattern);
  for (std::size_t k = 0; k < pattern.size(); ++k) work_[pattern[k]] += values[k];

  const auto rows_all = T_->row_idx();
  const auto vals_all = T_->values();
  const auto cp = T_->col_ptr();
  for (Index j : order) {
    if (!unit_diag_) {
      if (diag_pos_[j] < 0 || vals_all[diag_pos_[j]] == 0.0) {
        throw SingularError("sparse triangular solve: zero diagonal in column " + std::to_string(j));
      }
      work_[j] /= vals_all[diag_pos_[j]];
    }
    const double xj = work_[j];
    for (Index p = cp[j]; p < cp[j + 1]; ++p) {
      if (rows_all[p] != j) work_[rows_all[p]] -= vals_all[p] * xj;
    }
  }

  std::sort(order.begin(), order.end());
  SparseVector x;
  x.values.reserve(order.size());
  for (Index j : order) {
    x.values.push_back(work_[j]);
    work_[j] = 0.0;
  }
  x.pattern = std::move(order);
  return x;
}

SparseVector sparse_solve_sparse_rhs(const CscMatrix& T, std::span<const Index> pattern,
                                     std::span<const double> values, bool unit_diag) {
  SparseTriangularSolver solver(T, unit_diag);
  return solver.solve(pattern, values);
}

}  // namespace rowsplit
