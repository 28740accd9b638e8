#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <vector>

#include "rowsplit/precond.hpp"
#include "rowsplit/sparse.hpp"

namespace rowsplit {

struct CglsConfig {
  /// Stopping tolerance on ratio_PT.
  double delta_tol = 1e-10;
  int max_iters = 2000;
  /// Delay d of the error estimator: iterate i is judged once iterations
  /// i..i+d-1 have completed.
  int estimator_delay = 5;
  /// Estimate of ||A||_2 (see power_method_norm2). Must be positive.
  double norm_a = 0.0;
  /// Divide the squared-norm estimate itself instead of its square root.
  bool ratio_raw = false;
  /// Called with x_0 and then with every iterate x_k.
  std::function<void(int k, std::span<const double> x)> on_iterate;

  void validate() const;
};

enum class StopReason { Converged, IterationCap, Breakdown };

/// One evaluation of the stopping test.
struct RatioSample {
  /// Outer iteration at which the test ran.
  int iteration;
  /// Iterate whose error was estimated.
  int iterate;
  /// Estimate of the squared A^T A-norm error of that iterate.
  double estim;
  double ratio_pt;

  friend bool operator==(const RatioSample&, const RatioSample&) = default;
};

struct SolveReport {
  int its = 0;
  bool converged = false;
  StopReason stop = StopReason::IterationCap;
  /// Last evaluated ratio_PT; +infinity if the test never ran.
  double ratio_pt_final = std::numeric_limits<double>::infinity();
  std::vector<RatioSample> ratio_pt_history;
  std::int64_t psize = 0;
  Index nmod = 0;
  double residual_norm_final = 0.0;

  friend bool operator==(const SolveReport&, const SolveReport&) = default;
};

struct CglsResult {
  std::vector<double> x;
  SolveReport report;
};

/// Maps a full residual r (length m) to h = M^{-1} A^T r (length n).
using ResidualPreconditioner = std::function<std::vector<double>(std::span<const double>)>;

/// Left-preconditioned CGLS from x = 0. The preconditioner is applied to the
/// residual directly (the A^T product is folded into it); A^T r is still
/// formed for rho = (A^T r, h).
///
/// Stopping: after iteration k >= d the error of iterate i = k - d is
/// estimated by sum_{j=i}^{k-1} alpha_j rho_j, a lower bound on
/// ||x_true - x_i||^2 in the A^T A norm, and the solve stops with iterate k
/// once stopping_ratio(...) <= delta_tol. A vanishing rho means A^T r = 0
/// exactly, which stops with ratio 0. A rho with |rho| <= eps * rho_0 and
/// ||A^T r|| <= sqrt(eps) * ||A^T b|| is rounding noise: iterate k stops if
/// the ratio formed from |rho| passes, otherwise the iteration continues.
/// Any other nonpositive rho, or a zero step length, is reported as
/// breakdown, returning the current iterate.
CglsResult pcgls(const CscMatrix& A, std::span<const double> b, const ResidualPreconditioner& precondition,
                 const CglsConfig& config);

/// Same, with the row-splitting preconditioner; fills psize and nmod.
CglsResult pcgls(const CscMatrix& A, std::span<const double> b, const RowSplitPreconditioner& pre,
                 const CglsConfig& config);

/// sum_k alpha_k rho_k over the window.
double error_estimate(std::span<const double> alphas, std::span<const double> rhos);

/// sqrt(estim) / (norm_a x_norm + b_norm), or estim / (...) when `raw`.
/// Throws Error if the denominator is not positive.
double stopping_ratio(double estim, double norm_a, double x_norm, double b_norm, bool raw = false);

}  // namespace rowsplit
