#include "rowsplit/dense.hpp"

#include <cmath>
#include <string>

#include "rowsplit/errors.hpp"

namespace rowsplit {

DenseMatrix DenseMatrix::identity(std::size_t n) {
  DenseMatrix I(n, n);
  for (std::size_t i = 0; i < n; ++i) I(i, i) = 1.0;
  return I;
}

std::vector<double> DenseMatrix::multiply(std::span<const double> x) const {
  if (x.size() != ncols_) throw DimensionError("dense multiply: length mismatch");
  std::vector<double> y(nrows_, 0.0);
  for (std::size_t j = 0; j < ncols_; ++j) {
    const double xj = x[j];
    const double* col = values_.data() + j * nrows_;
    for (std::size_t i = 0; i < nrows_; ++i) y[i] += col[i] * xj;
  }
  return y;
}

DenseMatrix cholesky_factorize(const DenseMatrix& S) {
  if (S.nrows() != S.ncols()) throw DimensionError("cholesky: matrix is not square");
  const std::size_t n = S.nrows();
  DenseMatrix G(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t i = j; i < n; ++i) G(i, j) = S(i, j);
  }
  for (std::size_t k = 0; k < n; ++k) {
    const double pivot = G(k, k);
    if (!(pivot > 0.0)) {
      throw NotSpdError("cholesky: non-positive pivot at " + std::to_string(k),
                        static_cast<std::int64_t>(k));
    }
    const double d = std::sqrt(pivot);
    G(k, k) = d;
    auto colk = G.column(k);
    for (std::size_t i = k + 1; i < n; ++i) colk[i] /= d;
    // Right-looking rank-1 update of the trailing lower triangle.
    for (std::size_t j = k + 1; j < n; ++j) {
      const double gjk = colk[j];
      if (gjk == 0.0) continue;
      auto colj = G.column(j);
      for (std::size_t i = j; i < n; ++i) colj[i] -= colk[i] * gjk;
    }
  }
  return G;
}

std::vector<double> cholesky_solve(const DenseMatrix& factor, std::span<const double> b) {
  const std::size_t n = factor.nrows();
  if (b.size() != n) throw DimensionError("cholesky_solve: length mismatch");
  std::vector<double> w(b.begin(), b.end());
  // G y = b, column-oriented forward substitution.
  for (std::size_t j = 0; j < n; ++j) {
    w[j] /= factor(j, j);
    const auto col = factor.column(j);
    const double wj = w[j];
    for (std::size_t i = j + 1; i < n; ++i) w[i] -= col[i] * wj;
  }
  // G^T w = y, dot-product form on the columns of G.
  for (std::size_t jj = n; jj-- > 0;) {
    const auto col = factor.column(jj);
    double s = w[jj];
    for (std::size_t i = jj + 1; i < n; ++i) s -= col[i] * w[i];
    w[jj] = s / col[jj];
  }
  return w;
}

DenseMatrix cholesky_border(const DenseMatrix& factor, std::span<const double> offdiag,
                            double diag) {
  const std::size_t n = factor.nrows();
  if (offdiag.size() != n) throw DimensionError("cholesky_border: length mismatch");
  // Solve G g = s for the new factor row.
  std::vector<double> g(offdiag.begin(), offdiag.end());
  for (std::size_t j = 0; j < n; ++j) {
    g[j] /= factor(j, j);
    const auto col = factor.column(j);
    for (std::size_t i = j + 1; i < n; ++i) g[i] -= col[i] * g[j];
  }
  double gg = 0.0;
  for (double v : g) gg += v * v;
  const double pivot = diag - gg;
  if (!(pivot > 0.0)) {
    throw NotSpdError("cholesky_border: non-positive pivot", static_cast<std::int64_t>(n));
  }
  DenseMatrix G(n + 1, n + 1);
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t i = j; i < n; ++i) G(i, j) = factor(i, j);
    G(n, j) = g[j];
  }
  G(n, n) = std::sqrt(pivot);
  return G;
}

}  // namespace rowsplit
