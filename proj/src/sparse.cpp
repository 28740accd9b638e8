#include "rowsplit/sparse.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "rowsplit/errors.hpp"

namespace rowsplit {

CscMatrix::CscMatrix(Index nrows, Index ncols)
    : nrows_(nrows), ncols_(ncols), col_ptr_(static_cast<std::size_t>(ncols) + 1, 0) {
  if (nrows < 0 || ncols < 0) throw DimensionError("negative matrix dimension");
}

CscMatrix::CscMatrix(Index nrows, Index ncols, std::vector<Index> col_ptr,
                     std::vector<Index> row_idx, std::vector<double> values)
    : nrows_(nrows),
      ncols_(ncols),
      col_ptr_(std::move(col_ptr)),
      row_idx_(std::move(row_idx)),
      values_(std::move(values)) {
  validate();
}

CscMatrix CscMatrix::from_triplets(Index nrows, Index ncols, std::span<const Triplet> entries) {
  std::vector<Index> count(static_cast<std::size_t>(ncols) + 1, 0);
  for (const Triplet& t : entries) {
    if (t.row < 0 || t.row >= nrows || t.col < 0 || t.col >= ncols) {
      throw DimensionError("triplet (" + std::to_string(t.row) + ", " + std::to_string(t.col) +
                           ") outside " + std::to_string(nrows) + "x" + std::to_string(ncols));
    }
    ++count[t.col + 1];
  }
  std::partial_sum(count.begin(), count.end(), count.begin());

  // Bucket by column, then sort each column by row and merge duplicates.
  std::vector<std::pair<Index, double>> bucket(entries.size());
  std::vector<Index> next(count.begin(), count.end() - 1);
  for (const Triplet& t : entries) bucket[next[t.col]++] = {t.row, t.value};

  std::vector<Index> col_ptr(static_cast<std::size_t>(ncols) + 1, 0);
  std::vector<Index> rows;
  std::vector<double> vals;
  rows.reserve(entries.size());
  vals.reserve(entries.size());
  for (Index j = 0; j < ncols; ++j) {
    auto first = bucket.begin() + count[j];
    auto last = bucket.begin() + count[j + 1];
    std::stable_sort(first, last, [](const auto& a, const auto& b) { return a.first < b.first; });
    for (auto it = first; it != last;) {
      const Index r = it->first;
      double sum = 0.0;
      for (; it != last && it->first == r; ++it) sum += it->second;
      if (sum != 0.0) {
        rows.push_back(r);
        vals.push_back(sum);
      }
    }
    col_ptr[j + 1] = static_cast<Index>(rows.size());
  }
  return CscMatrix(nrows, ncols, std::move(col_ptr), std::move(rows), std::move(vals));
}

CscMatrix CscMatrix::from_dense(const DenseMatrix& dense) {
  const auto m = static_cast<Index>(dense.nrows());
  const auto n = static_cast<Index>(dense.ncols());
  std::vector<Index> col_ptr(static_cast<std::size_t>(n) + 1, 0);
  std::vector<Index> rows;
  std::vector<double> vals;
  for (Index j = 0; j < n; ++j) {
    for (Index i = 0; i < m; ++i) {
      const double v = dense(i, j);
      if (v != 0.0) {
        rows.push_back(i);
        vals.push_back(v);
      }
    }
    col_ptr[j + 1] = static_cast<Index>(rows.size());
  }
  return CscMatrix(m, n, std::move(col_ptr), std::move(rows), std::move(vals));
}

CscMatrix CscMatrix::identity(Index n) {
  std::vector<Index> col_ptr(static_cast<std::size_t>(n) + 1);
  std::iota(col_ptr.begin(), col_ptr.end(), 0);
  std::vector<Index> rows(static_cast<std::size_t>(n));
  std::iota(rows.begin(), rows.end(), 0);
  return CscMatrix(n, n, std::move(col_ptr), std::move(rows), std::vector<double>(n, 1.0));
}

CscMatrix CscMatrix::transpose() const {
  std::vector<Index> col_ptr(static_cast<std::size_t>(nrows_) + 1, 0);
  for (Index r : row_idx_) ++col_ptr[r + 1];
  std::partial_sum(col_ptr.begin(), col_ptr.end(), col_ptr.begin());
  std::vector<Index> next(col_ptr.begin(), col_ptr.end() - 1);
  std::vector<Index> rows(row_idx_.size());
  std::vector<double> vals(values_.size());
  for (Index j = 0; j < ncols_; ++j) {
    for (Index p = col_ptr_[j]; p < col_ptr_[j + 1]; ++p) {
      const Index q = next[row_idx_[p]]++;
      rows[q] = j;
      vals[q] = values_[p];
    }
  }
  return CscMatrix(ncols_, nrows_, std::move(col_ptr), std::move(rows), std::move(vals));
}

DenseMatrix CscMatrix::to_dense() const {
  DenseMatrix d(nrows_, ncols_);
  for (Index j = 0; j < ncols_; ++j) {
    for (Index p = col_ptr_[j]; p < col_ptr_[j + 1]; ++p) d(row_idx_[p], j) = values_[p];
  }
  return d;
}

double CscMatrix::frobenius_norm() const { return norm2(values_); }

void CscMatrix::validate() const {
  if (nrows_ < 0 || ncols_ < 0) throw Error("negative matrix dimension");
  if (col_ptr_.size() != static_cast<std::size_t>(ncols_) + 1) {
    throw Error("col_ptr length " + std::to_string(col_ptr_.size()) + " != ncols + 1");
  }
  if (col_ptr_.front() != 0) throw Error("col_ptr[0] != 0");
  if (row_idx_.size() != values_.size()) throw Error("row_idx and values lengths differ");
  if (static_cast<std::size_t>(col_ptr_.back()) != row_idx_.size()) {
    throw Error("col_ptr[ncols] != nnz");
  }
  for (Index j = 0; j < ncols_; ++j) {
    if (col_ptr_[j + 1] < col_ptr_[j]) throw Error("col_ptr decreases at column " + std::to_string(j));
    for (Index p = col_ptr_[j]; p < col_ptr_[j + 1]; ++p) {
      const Index r = row_idx_[p];
      if (r < 0 || r >= nrows_) {
        throw Error("row index " + std::to_string(r) + " out of range in column " + std::to_string(j));
      }
      if (p > col_ptr_[j] && row_idx_[p - 1] >= r) {
        throw Error("row indices not strictly increasing in column " + std::to_string(j));
      }
      if (values_[p] == 0.0) {
        throw Error("explicit zero at (" + std::to_string(r) + ", " + std::to_string(j) + ")");
      }
    }
  }
}

Permutation::Permutation(Index n) : perm_(static_cast<std::size_t>(n)), inv_(static_cast<std::size_t>(n)) {
  std::iota(perm_.begin(), perm_.end(), 0);
  std::iota(inv_.begin(), inv_.end(), 0);
}

Permutation::Permutation(std::vector<Index> forward)
    : perm_(std::move(forward)), inv_(perm_.size(), -1) {
  const auto n = static_cast<Index>(perm_.size());
  for (Index k = 0; k < n; ++k) {
    const Index i = perm_[k];
    if (i < 0 || i >= n || inv_[i] != -1) throw Error("not a permutation");
    inv_[i] = k;
  }
}

bool Permutation::is_identity() const {
  for (Index k = 0; k < size(); ++k) {
    if (perm_[k] != k) return false;
  }
  return true;
}

std::vector<double> Permutation::gather(std::span<const double> x) const {
  if (x.size() != perm_.size()) throw DimensionError("permutation size mismatch");
  std::vector<double> y(x.size());
  for (std::size_t k = 0; k < perm_.size(); ++k) y[k] = x[perm_[k]];
  return y;
}

std::vector<double> Permutation::scatter(std::span<const double> y) const {
  if (y.size() != perm_.size()) throw DimensionError("permutation size mismatch");
  std::vector<double> x(y.size());
  for (std::size_t k = 0; k < perm_.size(); ++k) x[perm_[k]] = y[k];
  return x;
}

double dot(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw DimensionError("dot: length mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
  return s;
}

double norm2(std::span<const double> x) {
  // Scaled accumulation avoids overflow/underflow for extreme entries.
  double scale = 0.0;
  double ssq = 1.0;
  for (double v : x) {
    if (v == 0.0) continue;
    const double a = std::fabs(v);
    if (scale < a) {
      ssq = 1.0 + ssq * (scale / a) * (scale / a);
      scale = a;
    } else {
      ssq += (a / scale) * (a / scale);
    }
  }
  return scale * std::sqrt(ssq);
}

double norm_inf(std::span<const double> x) {
  double m = 0.0;
  for (double v : x) m = std::max(m, std::fabs(v));
  return m;
}

void axpy(double a, std::span<const double> x, std::span<double> y) {
  if (x.size() != y.size()) throw DimensionError("axpy: length mismatch");
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += a * x[i];
}

std::vector<double> matvec(const CscMatrix& A, std::span<const double> x) {
  if (x.size() != static_cast<std::size_t>(A.ncols())) {
    throw DimensionError("matvec: x has length " + std::to_string(x.size()) + ", expected " +
                         std::to_string(A.ncols()));
  }
  std::vector<double> y(static_cast<std::size_t>(A.nrows()), 0.0);
  const auto cp = A.col_ptr();
  const auto ri = A.row_idx();
  const auto v = A.values();
  for (Index j = 0; j < A.ncols(); ++j) {
    const double xj = x[j];
    if (xj == 0.0) continue;
    for (Index p = cp[j]; p < cp[j + 1]; ++p) y[ri[p]] += v[p] * xj;
  }
  return y;
}

std::vector<double> matvec_transpose(const CscMatrix& A, std::span<const double> y) {
  if (y.size() != static_cast<std::size_t>(A.nrows())) {
    throw DimensionError("matvec_transpose: y has length " + std::to_string(y.size()) +
                         ", expected " + std::to_string(A.nrows()));
  }
  std::vector<double> x(static_cast<std::size_t>(A.ncols()), 0.0);
  const auto cp = A.col_ptr();
  const auto ri = A.row_idx();
  const auto v = A.values();
  for (Index j = 0; j < A.ncols(); ++j) {
    double s = 0.0;
    for (Index p = cp[j]; p < cp[j + 1]; ++p) s += v[p] * y[ri[p]];
    x[j] = s;
  }
  return x;
}

std::vector<double> uniform_vector(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::vector<double> out(n);
  for (double& v : out) {
    const double u = static_cast<double>(gen() >> 11) * 0x1.0p-53;  // [0, 1)
    v = 2.0 * u - 1.0;
  }
  return out;
}

}  // namespace rowsplit
