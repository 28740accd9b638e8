#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <variant>
#include <vector>

#include "rowsplit/dense.hpp"
#include "rowsplit/ilup.hpp"
#include "rowsplit/sparse.hpp"

namespace rowsplit {

/// How the (m-n)x(m-n) system S w = u is handled when the preconditioner is
/// applied, where S = I + Y Y^T and Y = L2 L1^{-1}.
struct DenseFactorS {};
struct InnerCgS {
  /// Fixed number of unpreconditioned CG steps from w = 0.
  int iters = 2;
};
struct IdentityS {};
using SMode = std::variant<DenseFactorS, InnerCgS, IdentityS>;

/// Whether Y is stored as a sparse matrix or applied through L1 and L2.
enum class YMode { Explicit, Implicit };

struct PreconditionerOptions {
  SMode s_mode = InnerCgS{};
  /// Defaults to Explicit for DenseFactorS and Implicit otherwise.
  std::optional<YMode> y_mode;
  /// Largest m-n for which S is assembled densely.
  std::size_t dense_s_cap = 20000;
};

/// Row-splitting preconditioner built from ILUP factors. Given the row-permuted
/// residual split into r1 (first n rows) and r2 (remaining m-n rows), apply()
/// returns h without forming A^T r:
///
///   u = r2 - Y r1;  solve S w = u;  y = r1 + Y^T w;  solve L1 U h = y.
///
/// With complete LU factors and an exact S solve, h = (A^T A)^{-1} A^T r.
/// With incomplete factors and an exact S solve, h = (B^T B)^{-1} B^T r for
/// B = [L1; L2] U, which differs from M^{-1} A^T r for every M once B != A.
/// apply_normal() applies M^{-1} = (B^T B)^{-1} to a given z = A^T r instead.
/// Immutable after construction.
class RowSplitPreconditioner {
 public:
  RowSplitPreconditioner(IlupFactors factors, const PreconditionerOptions& options = {});

  const IlupFactors& factors() const noexcept { return factors_; }
  YMode y_mode() const noexcept { return y_mode_; }
  const SMode& s_mode() const noexcept { return s_mode_; }
  std::size_t dense_s_cap() const noexcept { return dense_s_cap_; }
  /// Present in Explicit mode.
  const std::optional<CscMatrix>& y() const noexcept { return y_; }
  /// Lower Cholesky factor of S; present in DenseFactorS mode.
  const std::optional<DenseMatrix>& s_factor() const noexcept { return s_factor_; }

  Index m() const noexcept { return factors_.m(); }
  Index n() const noexcept { return factors_.n(); }

  /// Entries stored for applying the preconditioner: nnz(L1) + nnz(L2) +
  /// nnz(U), plus nnz(Y) when explicit, plus the packed triangle of the S
  /// factor when dense.
  std::int64_t psize() const noexcept { return psize_; }

  /// Y r1 (length m-n).
  std::vector<double> y_apply(std::span<const double> r1) const;
  /// Y^T w (length n).
  std::vector<double> y_apply_transpose(std::span<const double> w) const;
  /// v + Y (Y^T v).
  std::vector<double> s_apply(std::span<const double> v) const;
  /// Step 2 of the application, dispatched on the S mode.
  std::vector<double> solve_s(std::span<const double> u) const;

  /// h for residual components in factor row order (see class comment).
  std::vector<double> apply(std::span<const double> r1, std::span<const double> r2) const;
  /// h for a full residual in the original row order of A.
  std::vector<double> apply_residual(std::span<const double> r) const;
  /// M^{-1} z for z in the column space: solves U^T L1^T y = z and returns
  /// apply(y, 0). Symmetric positive definite in DenseFactorS mode.
  std::vector<double> apply_normal(std::span<const double> z) const;

  /// Dense S = I + Y Y^T; builds Y temporarily in Implicit mode.
  DenseMatrix assemble_s_dense() const;

 private:
  friend RowSplitPreconditioner update_add_row(const RowSplitPreconditioner&, const SparseVector&);
  RowSplitPreconditioner(IlupFactors factors, YMode y_mode, SMode s_mode, std::size_t cap,
                         std::optional<CscMatrix> y, std::optional<DenseMatrix> s_factor);
  void compute_psize();

  IlupFactors factors_;
  YMode y_mode_;
  SMode s_mode_;
  std::size_t dense_s_cap_;
  std::optional<CscMatrix> y_;
  std::optional<DenseMatrix> s_factor_;
  std::int64_t psize_ = 0;
};

/// Y = L2 L1^{-1}, computed as the sparse solutions of L1^T Y^T = L2^T column
/// by column. A symbolic pass sizes the storage before the numeric pass.
CscMatrix build_y_explicit(const IlupFactors& factors);

/// Dense I + Y Y^T. Throws SizeCapError if Y has more than `cap` rows.
DenseMatrix assemble_s_dense(const CscMatrix& Y, std::size_t cap = 20000);

/// v + L2 L1^{-1} L1^{-T} L2^T v, without forming Y.
std::vector<double> s_matvec_implicit(const IlupFactors& factors, std::span<const double> v);

using SolveFn = std::function<std::vector<double>(std::span<const double>)>;

/// Additive-correction preconditioner for a general row split A = [A1; A2]
/// with M_a ~ A1^T A1 and M_b ~ I + A2 C1^{-1} A2^T:
///
///   u_a = M_a^{-1} z;  v_b = M_b^{-1} (A2 u_a);  h = M_a^{-1} (z - A2^T v_b).
///
/// With exact solves, h = (A^T A)^{-1} z.
std::vector<double> apply_additive_correction(std::span<const double> z, const CscMatrix& A2,
                                              const SolveFn& solve_ma, const SolveFn& solve_mb);

/// Preconditioner for A with one extra row `a_new` (a sparse row indexed by
/// the columns of A) appended at the end of the row order. L1 and U are kept;
/// L2 gains the row l solving U^T l = a_new. An explicit Y gains the matching
/// row, and a dense S factor is extended by one bordered Cholesky step.
/// Throws UpdateFailedError if the bordered pivot is not positive.
RowSplitPreconditioner update_add_row(const RowSplitPreconditioner& pre, const SparseVector& a_new);

}  // namespace rowsplit
