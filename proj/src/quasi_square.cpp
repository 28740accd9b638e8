#include "rowsplit/quasi_square.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "rowsplit/errors.hpp"
#include "rowsplit/ilup.hpp"
#include "rowsplit/precond.hpp"
#include "rowsplit/triangular.hpp"

namespace rowsplit {

QuasiSquareSolution solve_quasi_square_direct(const CscMatrix& A, std::span<const double> b,
                                              const QuasiSquareOptions& options) {
  if (b.size() != static_cast<std::size_t>(A.nrows())) throw DimensionError("quasi-square: b has the wrong length");
  const ScaledMatrix scaled = column_scale(A);

  IlupParams params;
  params.p = A.nrows();
  params.tau = 0.0;
  params.mu = options.mu;
  params.small = options.small;
  IlupFactors factors = ilup_factorize(scaled.matrix, params);
  if (factors.nmod > 0) {
    throw RankDeficientError("quasi-square: " + std::to_string(factors.nmod) +
                             " pivot(s) modified, A is numerically rank deficient");
  }

  PreconditionerOptions popts;
  popts.s_mode = DenseFactorS{};
  popts.y_mode = YMode::Explicit;
  popts.dense_s_cap = options.dense_s_cap;
  const RowSplitPreconditioner pre(std::move(factors), popts);
  const IlupFactors& f = pre.factors();
  const auto n = static_cast<std::size_t>(f.n());

  const std::vector<double> pb = f.row_perm.gather(b);
  const std::span<const double> b1(pb.data(), n);
  const std::span<const double> b2(pb.data() + n, pb.size() - n);

  QuasiSquareSolution sol;
  std::vector<double> u = pre.y_apply(b1);
  for (std::size_t i = 0; i < u.size(); ++i) u[i] = b2[i] - u[i];
  sol.w = pre.solve_s(u);

  std::vector<double> rhs = pre.y_apply_transpose(sol.w);
  for (std::size_t i = 0; i < n; ++i) rhs[i] += b1[i];
  std::vector<double> x = upper_solve(f.U, lower_solve(f.L1, rhs, true));
  if (f.col_perm) x = f.col_perm->scatter(x);
  sol.x = scaled.scaling.unscale_solution(x);

  if (const auto& g = pre.s_factor(); g && g->nrows() > 0) {
    double gmax = 0.0;
    double gmin = INFINITY;
    for (std::size_t i = 0; i < g->nrows(); ++i) {
      gmax = std::max(gmax, (*g)(i, i));
      gmin = std::min(gmin, (*g)(i, i));
    }
    sol.s_condition = (gmax / gmin) * (gmax / gmin);
  }
  return sol;
}

}  // namespace rowsplit
