#include "rowsplit/ilup.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "reach.hpp"
#include "rowsplit/errors.hpp"

namespace rowsplit {

void IlupParams::validate() const {
  if (p < 1) throw Error("ilup: p must be at least 1");
  if (!(tau >= 0.0)) throw Error("ilup: tau must be non-negative");
  if (!(mu > 0.0 && mu <= 1.0)) throw Error("ilup: mu must lie in (0, 1]");
  if (!(small > 0.0)) throw Error("ilup: small must be positive");
}

void IlupFactors::validate(const IlupParams* params) const {
  const Index m_ = m();
  const Index n_ = n();
  if (U.nrows() != n_ || L1.nrows() != n_ || L1.ncols() != n_) throw Error("factor shapes disagree");
  if (L2.nrows() != m_ - n_ || L2.ncols() != n_) throw Error("L2 shape disagrees");
  if (col_perm && col_perm->size() != n_) throw Error("column permutation size disagrees");
  L1.validate();
  L2.validate();
  U.validate();
  for (Index j = 0; j < n_; ++j) {
    const auto l1 = L1.column_rows(j);
    if (!l1.empty() && l1.front() <= j) throw Error("L1 has an entry on or above the diagonal");
    const auto ur = U.column_rows(j);
    if (ur.empty() || ur.back() != j) throw Error("U diagonal missing in column " + std::to_string(j));
    const double ujj = U.column_values(j).back();
    if (params) {
      if (std::fabs(ujj) < params->small) throw Error("|U_jj| < small in column " + std::to_string(j));
      const auto lsize = static_cast<Index>(l1.size() + L2.column_rows(j).size());
      if (lsize > params->p) throw Error("L column exceeds p entries");
      if (static_cast<Index>(ur.size()) - 1 > params->p) throw Error("U column exceeds p entries");
      auto check_tau = [&](std::span<const double> vals) {
        for (double v : vals) {
          if (std::fabs(v) < params->tau) throw Error("entry below tau survived dropping");
        }
      };
      check_tau(L1.column_values(j));
      check_tau(L2.column_values(j));
      check_tau(U.column_values(j).first(ur.size() - 1));
    }
  }
}

Index choose_pivot(std::span<const Index> rows, std::span<const double> values,
                   std::span<const Index> row_counts, double mu) {
  if (rows.empty()) throw Error("choose_pivot: empty column");
  double vmax = 0.0;
  for (double v : values) vmax = std::max(vmax, std::fabs(v));
  const double threshold = mu * vmax;
  Index best = -1;
  for (std::size_t k = 0; k < rows.size(); ++k) {
    if (std::fabs(values[k]) < threshold) continue;
    const Index r = rows[k];
    if (best < 0 || row_counts[r] < row_counts[best] ||
        (row_counts[r] == row_counts[best] && r < best)) {
      best = r;
    }
  }
  return best;
}

double modify_pivot(Index j, Index n, double col_inf_norm, double small) {
  const double beta = std::pow(10.0, -2.0 * (1.0 - static_cast<double>(j) / static_cast<double>(n)));
  return std::max(beta * col_inf_norm, small);
}

void apply_dual_dropping(std::vector<std::pair<Index, double>>& entries, Index p, double tau) {
  std::erase_if(entries, [tau](const auto& e) { return e.second == 0.0 || std::fabs(e.second) < tau; });
  if (static_cast<Index>(entries.size()) <= p) return;
  auto larger = [](const auto& a, const auto& b) {
    const double fa = std::fabs(a.second);
    const double fb = std::fabs(b.second);
    return fa > fb || (fa == fb && a.first < b.first);
  };
  std::nth_element(entries.begin(), entries.begin() + p, entries.end(), larger);
  entries.resize(static_cast<std::size_t>(p));
}

RowCounts::RowCounts(const CscMatrix& A) : counts_(static_cast<std::size_t>(A.nrows()), 0) {
  for (Index r : A.row_idx()) ++counts_[r];
}

void RowCounts::eliminate_column(const CscMatrix& A, Index j) {
  for (Index r : A.column_rows(j)) --counts_[r];
}

namespace {

using Entries = std::vector<std::pair<Index, double>>;

void sort_by_index(Entries& e) {
  std::sort(e.begin(), e.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
}

}  // namespace

IlupFactors ilup_factorize(const CscMatrix& A, const IlupParams& params) {
  params.validate();
  const Index m = A.nrows();
  const Index n = A.ncols();
  if (m == 0 || n == 0) throw DimensionError("ilup: empty matrix");
  if (m < n) throw DimensionError("ilup: matrix has fewer rows than columns");
  if (params.column_order && params.column_order->size() != n) {
    throw DimensionError("ilup: column order has the wrong size");
  }

  RowCounts rc(A);
  // pinv[i] is the elimination step at which original row i became pivot, or
  // -1. Row interchanges stay implicit: L keeps original row indices until the
  // end, so the unfactored part of A never has to be moved.
  std::vector<Index> pinv(static_cast<std::size_t>(m), -1);

  std::vector<Index> Lp{0};
  std::vector<Index> Li;
  std::vector<double> Lx;
  std::vector<Index> Up{0};
  std::vector<Index> Ui;
  std::vector<double> Ux;

  std::vector<double> x(static_cast<std::size_t>(m), 0.0);
  std::vector<unsigned> mark(static_cast<std::size_t>(m), 0u);
  unsigned stamp = 0;
  std::vector<Index> order;
  Entries ucol;
  Entries lcol;
  std::vector<Index> cand_rows;
  std::vector<double> cand_vals;

  IlupFactors f;
  f.pivot_row_counts.reserve(static_cast<std::size_t>(n));

  auto children = [&](Index row) -> std::span<const Index> {
    const Index k = pinv[row];
    if (k < 0) return {};
    return {Li.data() + Lp[k], static_cast<std::size_t>(Lp[k + 1] - Lp[k])};
  };

  for (Index j = 0; j < n; ++j) {
    const Index col = params.column_order ? (*params.column_order)[j] : j;
    const auto arows = A.column_rows(col);
    const auto avals = A.column_values(col);

    // Symbolic: rows reachable from A(:, col) through the columns of L built so
    // far. Numeric: solve with L for the U part and update the rest.
    stamp = detail::next_stamp(mark, stamp);
    order.clear();
    detail::depth_first_reach(arows, children, mark, stamp, order);
    for (std::size_t q = 0; q < arows.size(); ++q) x[arows[q]] = avals[q];
    for (Index i : order) {
      const Index k = pinv[i];
      if (k < 0) continue;
      const double xi = x[i];
      if (xi == 0.0) continue;
      for (Index q = Lp[k]; q < Lp[k + 1]; ++q) x[Li[q]] -= Lx[q] * xi;
    }

    ucol.clear();
    lcol.clear();
    for (Index i : order) {
      if (pinv[i] >= 0) {
        ucol.emplace_back(pinv[i], x[i]);
      } else if (x[i] != 0.0) {
        lcol.emplace_back(i, x[i]);
      }
      x[i] = 0.0;
    }

    // U is dropped only after it has been used to update the L part.
    apply_dual_dropping(ucol, params.p, params.tau);
    sort_by_index(ucol);

    Index pivot = -1;
    double pivot_value = 0.0;
    if (lcol.empty()) {
      // Null active column: promote the unpivoted row with the fewest entries.
      for (Index i = 0; i < m; ++i) {
        if (pinv[i] >= 0) continue;
        if (pivot < 0 || rc[i] < rc[pivot]) pivot = i;
      }
      pivot_value = modify_pivot(j + 1, n, norm_inf(avals), params.small);
      ++f.nmod;
    } else {
      cand_rows.clear();
      cand_vals.clear();
      for (const auto& [r, v] : lcol) {
        cand_rows.push_back(r);
        cand_vals.push_back(v);
      }
      pivot = choose_pivot(cand_rows, cand_vals, rc.counts(), params.mu);
      const auto it = std::find_if(lcol.begin(), lcol.end(), [pivot](const auto& e) { return e.first == pivot; });
      pivot_value = it->second;
      if (std::fabs(pivot_value) < params.small) {
        pivot_value = modify_pivot(j + 1, n, norm_inf(avals), params.small);
        ++f.nmod;
      }
    }
    pinv[pivot] = j;
    f.pivot_row_counts.push_back(rc[pivot]);

    std::erase_if(lcol, [pivot](const auto& e) { return e.first == pivot; });
    for (auto& e : lcol) e.second /= pivot_value;
    apply_dual_dropping(lcol, params.p, params.tau);
    sort_by_index(lcol);
    for (const auto& [r, v] : lcol) {
      Li.push_back(r);
      Lx.push_back(v);
    }
    Lp.push_back(static_cast<Index>(Li.size()));

    for (const auto& [k, v] : ucol) {
      Ui.push_back(k);
      Ux.push_back(v);
    }
    Ui.push_back(j);
    Ux.push_back(pivot_value);
    Up.push_back(static_cast<Index>(Ui.size()));

    rc.eliminate_column(A, col);
  }

  // Rows never chosen as pivots form the second block, in original order.
  Index next = n;
  for (Index i = 0; i < m; ++i) {
    if (pinv[i] < 0) pinv[i] = next++;
  }
  std::vector<Index> forward(static_cast<std::size_t>(m));
  for (Index i = 0; i < m; ++i) forward[pinv[i]] = i;
  f.row_perm = Permutation(std::move(forward));
  f.col_perm = params.column_order;

  std::vector<Index> L1p{0}, L1i, L2p{0}, L2i;
  std::vector<double> L1x, L2x;
  Entries top, bottom;
  for (Index k = 0; k < n; ++k) {
    top.clear();
    bottom.clear();
    for (Index q = Lp[k]; q < Lp[k + 1]; ++q) {
      const Index pos = pinv[Li[q]];
      if (pos < n) {
        top.emplace_back(pos, Lx[q]);
      } else {
        bottom.emplace_back(pos - n, Lx[q]);
      }
    }
    sort_by_index(top);
    sort_by_index(bottom);
    for (const auto& [r, v] : top) {
      L1i.push_back(r);
      L1x.push_back(v);
    }
    for (const auto& [r, v] : bottom) {
      L2i.push_back(r);
      L2x.push_back(v);
    }
    L1p.push_back(static_cast<Index>(L1i.size()));
    L2p.push_back(static_cast<Index>(L2i.size()));
  }
  f.L1 = CscMatrix(n, n, std::move(L1p), std::move(L1i), std::move(L1x));
  f.L2 = CscMatrix(m - n, n, std::move(L2p), std::move(L2i), std::move(L2x));
  f.U = CscMatrix(n, n, std::move(Up), std::move(Ui), std::move(Ux));
  return f;
}

}  // namespace rowsplit
