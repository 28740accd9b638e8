#include "rowsplit/precond.hpp"

#include <algorithm>
#include <string>

#include "rowsplit/errors.hpp"
#include "rowsplit/triangular.hpp"

namespace rowsplit {
namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

// Returns A with one more row whose entries are `row` (pattern sorted).
CscMatrix append_row(const CscMatrix& A, const SparseVector& row) {
  const Index new_row = A.nrows();
  std::vector<Index> cp{0};
  std::vector<Index> ri;
  std::vector<double> vx;
  ri.reserve(static_cast<std::size_t>(A.nnz()) + row.pattern.size());
  vx.reserve(ri.capacity());
  std::size_t q = 0;
  for (Index j = 0; j < A.ncols(); ++j) {
    const auto rows = A.column_rows(j);
    const auto vals = A.column_values(j);
    ri.insert(ri.end(), rows.begin(), rows.end());
    vx.insert(vx.end(), vals.begin(), vals.end());
    while (q < row.pattern.size() && row.pattern[q] < j) ++q;
    if (q < row.pattern.size() && row.pattern[q] == j && row.values[q] != 0.0) {
      ri.push_back(new_row);
      vx.push_back(row.values[q]);
    }
    cp.push_back(static_cast<Index>(ri.size()));
  }
  return CscMatrix(A.nrows() + 1, A.ncols(), std::move(cp), std::move(ri), std::move(vx));
}

SparseVector drop_zeros(SparseVector v) {
  SparseVector out;
  for (std::size_t k = 0; k < v.pattern.size(); ++k) {
    if (v.values[k] != 0.0) {
      out.pattern.push_back(v.pattern[k]);
      out.values.push_back(v.values[k]);
    }
  }
  return out;
}

std::vector<double> densify(const SparseVector& v, Index n) {
  std::vector<double> d(static_cast<std::size_t>(n), 0.0);
  for (std::size_t k = 0; k < v.pattern.size(); ++k) d[v.pattern[k]] = v.values[k];
  return d;
}

}  // namespace

CscMatrix build_y_explicit(const IlupFactors& factors) {
  const Index n = factors.n();
  const Index k = factors.L2.nrows();
  const CscMatrix L1t = factors.L1.transpose();
  const CscMatrix L2t = factors.L2.transpose();
  SparseTriangularSolver solver(L1t, /*unit_diag=*/true);

  std::vector<Index> cp(static_cast<std::size_t>(k) + 1, 0);
  for (Index i = 0; i < k; ++i) {
    cp[i + 1] = cp[i] + static_cast<Index>(solver.reach(L2t.column_rows(i)).size());
  }
  std::vector<Index> ri;
  std::vector<double> vx;
  ri.reserve(static_cast<std::size_t>(cp[k]));
  vx.reserve(static_cast<std::size_t>(cp[k]));
  std::vector<Index> yt_cp{0};
  for (Index i = 0; i < k; ++i) {
    const SparseVector col = solver.solve(L2t.column_rows(i), L2t.column_values(i));
    for (std::size_t q = 0; q < col.pattern.size(); ++q) {
      if (col.values[q] == 0.0) continue;
      ri.push_back(col.pattern[q]);
      vx.push_back(col.values[q]);
    }
    yt_cp.push_back(static_cast<Index>(ri.size()));
  }
  const CscMatrix Yt(n, k, std::move(yt_cp), std::move(ri), std::move(vx));
  return Yt.transpose();
}

DenseMatrix assemble_s_dense(const CscMatrix& Y, std::size_t cap) {
  const auto k = static_cast<std::size_t>(Y.nrows());
  if (k > cap) {
    throw SizeCapError("dense S would be " + std::to_string(k) + "x" + std::to_string(k) +
                       ", above the cap of " + std::to_string(cap));
  }
  const CscMatrix Yt = Y.transpose();
  DenseMatrix S(k, k);
  std::vector<double> acc(k, 0.0);
  for (std::size_t i = 0; i < k; ++i) {
    // Column i of Y Y^T restricted to rows >= i: sum over y_i's pattern of
    // y_i[j] * Y(:, j).
    const auto pat = Yt.column_rows(static_cast<Index>(i));
    const auto val = Yt.column_values(static_cast<Index>(i));
    for (std::size_t q = 0; q < pat.size(); ++q) {
      const auto rows = Y.column_rows(pat[q]);
      const auto vals = Y.column_values(pat[q]);
      auto first = std::lower_bound(rows.begin(), rows.end(), static_cast<Index>(i));
      for (auto it = first; it != rows.end(); ++it) {
        acc[*it] += val[q] * vals[static_cast<std::size_t>(it - rows.begin())];
      }
    }
    S(i, i) = 1.0 + acc[i];
    acc[i] = 0.0;
    for (std::size_t r = i + 1; r < k; ++r) {
      S(r, i) = acc[r];
      S(i, r) = acc[r];
      acc[r] = 0.0;
    }
  }
  return S;
}

std::vector<double> s_matvec_implicit(const IlupFactors& factors, std::span<const double> v) {
  if (v.size() != static_cast<std::size_t>(factors.L2.nrows())) {
    throw DimensionError("s_matvec_implicit: length mismatch");
  }
  std::vector<double> t = matvec_transpose(factors.L2, v);
  t = lower_transpose_solve(factors.L1, t, /*unit_diag=*/true);
  t = lower_solve(factors.L1, t, /*unit_diag=*/true);
  std::vector<double> out = matvec(factors.L2, t);
  axpy(1.0, v, out);
  return out;
}

RowSplitPreconditioner::RowSplitPreconditioner(IlupFactors factors, const PreconditionerOptions& options)
    : factors_(std::move(factors)), s_mode_(options.s_mode), dense_s_cap_(options.dense_s_cap) {
  if (const auto* cg = std::get_if<InnerCgS>(&s_mode_); cg && cg->iters < 1) {
    throw Error("inner CG needs at least one iteration");
  }
  const bool dense = std::holds_alternative<DenseFactorS>(s_mode_);
  y_mode_ = options.y_mode.value_or(dense ? YMode::Explicit : YMode::Implicit);
  if (dense && static_cast<std::size_t>(m() - n()) > dense_s_cap_) {
    throw SizeCapError("dense S would be " + std::to_string(m() - n()) + " square, above the cap of " +
                       std::to_string(dense_s_cap_));
  }
  if (y_mode_ == YMode::Explicit) y_ = build_y_explicit(factors_);
  if (dense) s_factor_ = cholesky_factorize(assemble_s_dense());
  compute_psize();
}

RowSplitPreconditioner::RowSplitPreconditioner(IlupFactors factors, YMode y_mode, SMode s_mode,
                                               std::size_t cap, std::optional<CscMatrix> y,
                                               std::optional<DenseMatrix> s_factor)
    : factors_(std::move(factors)),
      y_mode_(y_mode),
      s_mode_(s_mode),
      dense_s_cap_(cap),
      y_(std::move(y)),
      s_factor_(std::move(s_factor)) {
  compute_psize();
}

void RowSplitPreconditioner::compute_psize() {
  psize_ = static_cast<std::int64_t>(factors_.L1.nnz()) + factors_.L2.nnz() + factors_.U.nnz();
  if (y_) psize_ += y_->nnz();
  if (s_factor_) {
    const auto k = static_cast<std::int64_t>(s_factor_->nrows());
    psize_ += k * (k + 1) / 2;
  }
}

std::vector<double> RowSplitPreconditioner::y_apply(std::span<const double> r1) const {
  if (r1.size() != static_cast<std::size_t>(n())) throw DimensionError("y_apply: length mismatch");
  if (y_) return matvec(*y_, r1);
  const std::vector<double> q1 = lower_solve(factors_.L1, r1, /*unit_diag=*/true);
  return matvec(factors_.L2, q1);
}

std::vector<double> RowSplitPreconditioner::y_apply_transpose(std::span<const double> w) const {
  if (w.size() != static_cast<std::size_t>(m() - n())) {
    throw DimensionError("y_apply_transpose: length mismatch");
  }
  if (y_) return matvec_transpose(*y_, w);
  const std::vector<double> t = matvec_transpose(factors_.L2, w);
  return lower_transpose_solve(factors_.L1, t, /*unit_diag=*/true);
}

std::vector<double> RowSplitPreconditioner::s_apply(std::span<const double> v) const {
  std::vector<double> out = y_apply(y_apply_transpose(v));
  axpy(1.0, v, out);
  return out;
}

std::vector<double> RowSplitPreconditioner::solve_s(std::span<const double> u) const {
  return std::visit(
      Overloaded{
          [&](const DenseFactorS&) { return cholesky_solve(*s_factor_, u); },
          [&](const IdentityS&) { return std::vector<double>(u.begin(), u.end()); },
          [&](const InnerCgS& cg) {
            // Fixed-count CG keeps the preconditioner a fixed linear operator.
            std::vector<double> w(u.size(), 0.0);
            std::vector<double> r(u.begin(), u.end());
            std::vector<double> p = r;
            double rr = dot(r, r);
            for (int it = 0; it < cg.iters && rr > 0.0; ++it) {
              const std::vector<double> q = s_apply(p);
              const double pq = dot(p, q);
              if (!(pq > 0.0)) break;
              const double alpha = rr / pq;
              axpy(alpha, p, w);
              axpy(-alpha, q, r);
              const double rr_next = dot(r, r);
              const double beta = rr_next / rr;
              for (std::size_t i = 0; i < p.size(); ++i) p[i] = r[i] + beta * p[i];
              rr = rr_next;
            }
            return w;
          }},
      s_mode_);
}

std::vector<double> RowSplitPreconditioner::apply(std::span<const double> r1,
                                                  std::span<const double> r2) const {
  if (r1.size() != static_cast<std::size_t>(n()) || r2.size() != static_cast<std::size_t>(m() - n())) {
    throw DimensionError("apply: residual components have the wrong lengths");
  }
  std::vector<double> y(r1.begin(), r1.end());
  if (!r2.empty()) {
    std::vector<double> u(r2.begin(), r2.end());
    axpy(-1.0, y_apply(r1), u);
    const std::vector<double> w = solve_s(u);
    axpy(1.0, y_apply_transpose(w), y);
  }
  const std::vector<double> v = lower_solve(factors_.L1, y, /*unit_diag=*/true);
  std::vector<double> h = upper_solve(factors_.U, v);
  if (factors_.col_perm) h = factors_.col_perm->scatter(h);
  return h;
}

std::vector<double> RowSplitPreconditioner::apply_residual(std::span<const double> r) const {
  const std::vector<double> rp = factors_.row_perm.gather(r);
  const std::span<const double> all(rp);
  return apply(all.first(static_cast<std::size_t>(n())), all.subspan(static_cast<std::size_t>(n())));
}

std::vector<double> RowSplitPreconditioner::apply_normal(std::span<const double> z) const {
  if (z.size() != static_cast<std::size_t>(n())) throw DimensionError("apply_normal: z has the wrong length");
  const std::vector<double> zp = factors_.col_perm ? factors_.col_perm->gather(z) : std::vector<double>(z.begin(), z.end());
  const std::vector<double> y = lower_transpose_solve(factors_.L1, upper_transpose_solve(factors_.U, zp), true);
  return apply(y, std::vector<double>(static_cast<std::size_t>(m() - n()), 0.0));
}

DenseMatrix RowSplitPreconditioner::assemble_s_dense() const {
  if (y_) return rowsplit::assemble_s_dense(*y_, dense_s_cap_);
  return rowsplit::assemble_s_dense(build_y_explicit(factors_), dense_s_cap_);
}

std::vector<double> apply_additive_correction(std::span<const double> z, const CscMatrix& A2,
                                              const SolveFn& solve_ma, const SolveFn& solve_mb) {
  if (z.size() != static_cast<std::size_t>(A2.ncols())) {
    throw DimensionError("apply_additive_correction: length mismatch");
  }
  const std::vector<double> u_a = solve_ma(z);
  if (A2.nrows() == 0) return u_a;
  const std::vector<double> w_b = matvec(A2, u_a);
  const std::vector<double> v_b = solve_mb(w_b);
  std::vector<double> w_a(z.begin(), z.end());
  axpy(-1.0, matvec_transpose(A2, v_b), w_a);
  return solve_ma(w_a);
}

RowSplitPreconditioner update_add_row(const RowSplitPreconditioner& pre, const SparseVector& a_new) {
  const IlupFactors& f = pre.factors();
  const Index n = f.n();
  if (a_new.pattern.size() != a_new.values.size()) throw DimensionError("update_add_row: malformed row");

  // Row entries in factor column order, sorted.
  std::vector<std::pair<Index, double>> entries;
  for (std::size_t q = 0; q < a_new.pattern.size(); ++q) {
    const Index j = a_new.pattern[q];
    if (j < 0 || j >= n) throw DimensionError("update_add_row: column index out of range");
    entries.emplace_back(f.col_perm ? f.col_perm->position_of(j) : j, a_new.values[q]);
  }
  std::sort(entries.begin(), entries.end());
  SparseVector a_perm;
  for (const auto& [j, v] : entries) {
    a_perm.pattern.push_back(j);
    a_perm.values.push_back(v);
  }

  // U^T l = a
  const CscMatrix Ut = f.U.transpose();
  const SparseVector l = drop_zeros(SparseTriangularSolver(Ut, false).solve(a_perm.pattern, a_perm.values));
  // L1^T y = l gives the new row of Y = L2 L1^{-1}.
  const CscMatrix L1t = f.L1.transpose();
  const SparseVector y_row = drop_zeros(SparseTriangularSolver(L1t, true).solve(l.pattern, l.values));

  IlupFactors g = f;
  g.L2 = append_row(f.L2, l);
  std::vector<Index> forward(f.row_perm.forward().begin(), f.row_perm.forward().end());
  forward.push_back(f.m());
  g.row_perm = Permutation(std::move(forward));

  std::optional<CscMatrix> y;
  if (pre.y()) y = append_row(*pre.y(), y_row);

  std::optional<DenseMatrix> s_factor;
  if (pre.s_factor()) {
    if (static_cast<std::size_t>(f.m() - n + 1) > pre.dense_s_cap()) {
      throw SizeCapError("update_add_row: dense S would exceed the size cap");
    }
    const std::vector<double> y_dense = densify(y_row, n);
    const std::vector<double> offdiag = pre.y_apply(y_dense);
    const double diag = 1.0 + dot(y_row.values, y_row.values);
    try {
      s_factor = cholesky_border(*pre.s_factor(), offdiag, diag);
    } catch (const NotSpdError&) {
      throw UpdateFailedError("update_add_row: bordered S is not positive definite; refactorize");
    }
  }
  return RowSplitPreconditioner(std::move(g), pre.y_mode(), pre.s_mode(), pre.dense_s_cap(), std::move(y),
                                std::move(s_factor));
}

}  // namespace rowsplit
