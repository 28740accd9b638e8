#include <cmath>
#include <string>

#include "rowsplit/errors.hpp"
#include "rowsplit/sparse.hpp"

namespace rowsplit {

ScaledMatrix column_scale(const CscMatrix& A) {
  std::vector<double> scale(static_cast<std::size_t>(A.ncols()));
  std::vector<double> vals(A.values().begin(), A.values().end());
  for (Index j = 0; j < A.ncols(); ++j) {
    const double s = norm2(A.column_values(j));
    if (s == 0.0) {
      throw ZeroColumnError("column " + std::to_string(j) + " is entirely zero", j);
    }
    scale[j] = s;
    for (Index p = A.col_ptr()[j]; p < A.col_ptr()[j + 1]; ++p) vals[p] /= s;
  }
  CscMatrix scaled(A.nrows(), A.ncols(), {A.col_ptr().begin(), A.col_ptr().end()},
                   {A.row_idx().begin(), A.row_idx().end()}, std::move(vals));
  return {std::move(scaled), ColumnScaling{std::move(scale)}};
}

std::vector<double> ColumnScaling::unscale_solution(std::span<const double> x_scaled) const {
  if (x_scaled.size() != scale.size()) throw DimensionError("unscale: length mismatch");
  std::vector<double> x(x_scaled.size());
  for (std::size_t j = 0; j < x.size(); ++j) x[j] = x_scaled[j] / scale[j];
  return x;
}

std::vector<double> power_method_history(const CscMatrix& A, int iters, std::uint64_t seed) {
  if (iters < 1) throw Error("power method needs at least one iteration");
  std::vector<double> history;
  history.reserve(static_cast<std::size_t>(iters));
  std::vector<double> v = uniform_vector(static_cast<std::size_t>(A.ncols()), seed);
  double nv = norm2(v);
  if (nv == 0.0) {
    v.assign(v.size(), 1.0);
    nv = norm2(v);
  }
  for (double& e : v) e /= nv;

  double estimate = 0.0;
  for (int it = 0; it < iters; ++it) {
    const std::vector<double> w = matvec(A, v);
    estimate = norm2(w);
    history.push_back(estimate);
    std::vector<double> z = matvec_transpose(A, w);
    const double nz = norm2(z);
    if (nz == 0.0) {
      // v lies in the null space; the remaining iterations cannot move it.
      history.resize(static_cast<std::size_t>(iters), estimate);
      break;
    }
    for (double& e : z) e /= nz;
    v = std::move(z);
  }
  return history;
}

double power_method_norm2(const CscMatrix& A, int iters, std::uint64_t seed) {
  return power_method_history(A, iters, seed).back();
}

}  // namespace rowsplit
