#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "rowsplit/sparse.hpp"

namespace rowsplit {

/// Controls for the rectangular ILUP(p, tau) factorization.
struct IlupParams {
  /// Maximum entries kept per column below the diagonal of L and above the
  /// diagonal of U.
  Index p = 10;
  /// Absolute drop tolerance.
  double tau = 0.0;
  /// Threshold partial pivoting parameter, 0 < mu <= 1.
  double mu = 0.1;
  /// Minimum admissible |U_jj|.
  double small = 1e-10;
  /// Optional column pre-order (P_c). Columns are eliminated in the order
  /// column_order[0], column_order[1], ...; empty means natural order.
  std::optional<Permutation> column_order;

  void validate() const;
};

/// P_r A P_c ~= [L1; L2] U with L1 unit lower triangular (diagonal implied,
/// not stored), L2 the remaining m-n rows and U upper triangular with stored
/// diagonal.
struct IlupFactors {
  Permutation row_perm;
  std::optional<Permutation> col_perm;
  CscMatrix L1;
  CscMatrix L2;
  CscMatrix U;
  /// Number of pivots replaced by the modification rule.
  Index nmod = 0;
  /// Row count of the chosen pivot row at each elimination step.
  std::vector<Index> pivot_row_counts;

  Index m() const noexcept { return row_perm.size(); }
  Index n() const noexcept { return U.ncols(); }

  /// Checks shapes, triangularity, |U_jj| >= small and, when params are given,
  /// the per-column dropping limits. Throws Error on violation.
  void validate(const IlupParams* params = nullptr) const;
};

/// Column-wise left-looking ILUP(p, tau) with threshold partial pivoting,
/// row-count tie breaking and small-pivot modification. Requires m >= n >= 1.
/// A breakdown never raises; it is absorbed by pivot modification (nmod > 0).
IlupFactors ilup_factorize(const CscMatrix& A, const IlupParams& params);

/// Picks the pivot among `rows`/`values` (the active sub-column): the entries
/// with |v| >= mu * max|v| form the candidate set, from which the row with the
/// smallest row count wins; remaining ties go to the smallest row index.
/// `row_counts` is indexed by row. Throws Error if the column is empty.
Index choose_pivot(std::span<const Index> rows, std::span<const double> values,
                   std::span<const Index> row_counts, double mu);

/// Replacement pivot for column `j` (1-based) of `n`:
/// max(beta * col_inf_norm, small) with beta = 10^(-2 (1 - j/n)).
double modify_pivot(Index j, Index n, double col_inf_norm, double small);

/// Dual dropping on (index, value) pairs: removes entries with |v| < tau (and
/// exact zeros), then keeps the p largest magnitudes. Ties at the cut keep the
/// smaller index. Order of the survivors is unspecified.
void apply_dual_dropping(std::vector<std::pair<Index, double>>& entries, Index p, double tau);

/// Per-row counts of the stored entries of A restricted to the columns not
/// yet eliminated, maintained incrementally.
class RowCounts {
 public:
  explicit RowCounts(const CscMatrix& A);

  /// Removes column j's contribution.
  void eliminate_column(const CscMatrix& A, Index j);

  std::span<const Index> counts() const noexcept { return counts_; }
  Index operator[](Index row) const { return counts_[row]; }

 private:
  std::vector<Index> counts_;
};

}  // namespace rowsplit
