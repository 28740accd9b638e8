#include "rowsplit/cgls.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "rowsplit/errors.hpp"

namespace rowsplit {

void CglsConfig::validate() const {
  if (!(delta_tol > 0.0)) throw Error("cgls: delta_tol must be positive");
  if (max_iters < 0) throw Error("cgls: max_iters must be non-negative");
  if (estimator_delay < 1) throw Error("cgls: estimator delay must be at least 1");
  if (!(norm_a > 0.0)) throw Error("cgls: norm_a must be a positive estimate of ||A||");
}

double error_estimate(std::span<const double> alphas, std::span<const double> rhos) {
  if (alphas.size() != rhos.size()) throw DimensionError("error_estimate: window lengths differ");
  double s = 0.0;
  for (std::size_t k = 0; k < alphas.size(); ++k) s += alphas[k] * rhos[k];
  return s;
}

double stopping_ratio(double estim, double norm_a, double x_norm, double b_norm, bool raw) {
  const double denom = norm_a * x_norm + b_norm;
  if (!(denom > 0.0)) throw Error("stopping_ratio: denominator is not positive");
  return (raw ? estim : std::sqrt(estim)) / denom;
}

CglsResult pcgls(const CscMatrix& A, std::span<const double> b, const ResidualPreconditioner& precondition,
                 const CglsConfig& config) {
  config.validate();
  const auto m = static_cast<std::size_t>(A.nrows());
  const auto n = static_cast<std::size_t>(A.ncols());
  if (b.size() != m) throw DimensionError("pcgls: b has the wrong length");

  CglsResult result;
  SolveReport& rep = result.report;
  rep.ratio_pt_final = std::numeric_limits<double>::infinity();
  std::vector<double>& x = result.x;
  x.assign(n, 0.0);
  std::vector<double> r(b.begin(), b.end());
  const double b_norm = norm2(b);
  if (config.on_iterate) config.on_iterate(0, x);

  std::vector<double> z = matvec_transpose(A, r);
  std::vector<double> h = precondition(r);
  if (h.size() != n) throw DimensionError("pcgls: preconditioner returned the wrong length");
  double rho = dot(z, h);

  auto finish = [&](StopReason why) {
    rep.stop = why;
    rep.converged = why == StopReason::Converged;
    rep.residual_norm_final = norm2(r);
    return result;
  };

  if (norm2(z) == 0.0) {
    rep.ratio_pt_final = 0.0;
    rep.ratio_pt_history.push_back({0, 0, 0.0, 0.0});
    return finish(StopReason::Converged);
  }
  if (!(rho > 0.0)) return finish(StopReason::Breakdown);

  const double eps = std::numeric_limits<double>::epsilon();
  const double rho_noise = eps * rho;
  const double z_noise = std::sqrt(eps) * norm2(z);
  std::vector<double> p = h;
  std::vector<double> alphas;
  std::vector<double> rhos;
  std::vector<double> x_norms{0.0};
  const auto d = static_cast<std::size_t>(config.estimator_delay);

  for (int k = 1; k <= config.max_iters; ++k) {
    const std::vector<double> q = matvec(A, p);
    const double qq = dot(q, q);
    if (!(qq > 0.0)) return finish(StopReason::Breakdown);
    const double alpha = rho / qq;
    axpy(alpha, p, x);
    axpy(-alpha, q, r);
    alphas.push_back(alpha);
    rhos.push_back(rho);
    x_norms.push_back(norm2(x));
    rep.its = k;
    if (config.on_iterate) config.on_iterate(k, x);

    z = matvec_transpose(A, r);
    h = precondition(r);
    const double rho_next = dot(z, h);

    if (norm2(z) == 0.0) {
      rep.ratio_pt_final = 0.0;
      rep.ratio_pt_history.push_back({k, k, 0.0, 0.0});
      return finish(StopReason::Converged);
    }
    if (alphas.size() >= d) {
      const std::size_t i = alphas.size() - d;
      const double estim = error_estimate(std::span(alphas).subspan(i), std::span(rhos).subspan(i));
      const double ratio = stopping_ratio(estim, config.norm_a, x_norms[i], b_norm, config.ratio_raw);
      rep.ratio_pt_final = ratio;
      rep.ratio_pt_history.push_back({k, static_cast<int>(i), estim, ratio});
      if (ratio <= config.delta_tol) return finish(StopReason::Converged);
    }
    // At the attainable accuracy rho and z are rounding noise and rho may
    // have either sign. The remaining estimator terms are then bounded by
    // |rho|, which is tested against the current iterate.
    const bool noise = std::fabs(rho_next) <= rho_noise && norm2(z) <= z_noise;
    if (noise) {
      const double ratio = stopping_ratio(std::fabs(rho_next), config.norm_a, x_norms.back(), b_norm, config.ratio_raw);
      if (ratio <= config.delta_tol) {
        rep.ratio_pt_final = ratio;
        rep.ratio_pt_history.push_back({k, k, std::fabs(rho_next), ratio});
        return finish(StopReason::Converged);
      }
    }
    if (!(rho_next > 0.0) && !noise) return finish(StopReason::Breakdown);

    const double beta = rho_next / rho;
    for (std::size_t t = 0; t < n; ++t) p[t] = h[t] + beta * p[t];
    rho = rho_next;
  }
  return finish(StopReason::IterationCap);
}

CglsResult pcgls(const CscMatrix& A, std::span<const double> b, const RowSplitPreconditioner& pre,
                 const CglsConfig& config) {
  if (pre.m() != A.nrows() || pre.n() != A.ncols()) {
    throw DimensionError("pcgls: preconditioner was built for a different shape");
  }
  CglsResult result = pcgls(
      A, b, [&pre](std::span<const double> r) { return pre.apply_residual(r); }, config);
  result.report.psize = pre.psize();
  result.report.nmod = pre.factors().nmod;
  return result;
}

}  // namespace rowsplit
