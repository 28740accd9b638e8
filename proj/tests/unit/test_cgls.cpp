#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <limits>

#include "dense_oracle.hpp"
#include "random_problems.hpp"
#include "rowsplit/cgls.hpp"
#include "rowsplit/errors.hpp"
#include "rowsplit/ilup.hpp"
#include "rowsplit/precond.hpp"

using namespace rowsplit;

namespace {

CglsConfig config(double norm_a, int delay = 5, double delta = 1e-10, int max_iters = 2000) {
  CglsConfig c;
  c.norm_a = norm_a;
  c.estimator_delay = delay;
  c.delta_tol = delta;
  c.max_iters = max_iters;
  return c;
}

ResidualPreconditioner unpreconditioned(const CscMatrix& A) {
  return [&A](std::span<const double> r) { return matvec_transpose(A, r); };
}

PreconditionerOptions dense_opts() {
  PreconditionerOptions o;
  o.s_mode = DenseFactorS{};
  return o;
}

}  // namespace

TEST(ErrorEstimate, Examples) {
  EXPECT_EQ(error_estimate(std::vector<double>{0.0, 0.0}, std::vector<double>{1.0, 2.0}), 0.0);
  EXPECT_EQ(error_estimate(std::vector<double>{2.0}, std::vector<double>{3.0}), 6.0);
  EXPECT_THROW(error_estimate(std::vector<double>{1.0}, std::vector<double>{}), DimensionError);
}

TEST(StoppingRatio, Examples) {
  EXPECT_EQ(stopping_ratio(0.0, 2.0, 1.0, 1.0), 0.0);
  EXPECT_NEAR(stopping_ratio(1e-20, 0.0, 0.0, 1.0), 1e-10, 1e-25);
  EXPECT_DOUBLE_EQ(stopping_ratio(4.0, 1.0, 1.0, 1.0), 1.0);
  EXPECT_DOUBLE_EQ(stopping_ratio(4.0, 1.0, 1.0, 1.0, true), 2.0);
  EXPECT_THROW(stopping_ratio(1.0, 1.0, 0.0, 0.0), Error);
}

TEST(StoppingRatio, ExactEstimateMatchesTightRatio) {
  fixtures::Rng rng(201);
  for (int trial = 0; trial < 20; ++trial) {
    const DenseMatrix A = fixtures::random_dense(rng, 15, 8);
    const auto b = fixtures::random_vector(rng, 15);
    const auto x = fixtures::random_vector(rng, 8);
    const auto sol = oracle::dense_lls_solve(A, b);
    std::vector<double> e = sol.x_true;
    axpy(-1.0, x, e);
    const double err = oracle::ata_norm(A, e);
    // ||A A^+ r|| with r = b - A x equals ||A (x_true - x)||.
    const CscMatrix As = CscMatrix::from_dense(A);
    std::vector<double> r = b;
    axpy(-1.0, matvec(As, x), r);
    const auto proj = matvec(As, oracle::dense_normal_solve(A, matvec_transpose(As, r)));
    const double norm_a = power_method_norm2(As, 200);
    const double lhs = norm2(proj) / (norm_a * norm2(x) + norm2(b));
    EXPECT_NEAR(stopping_ratio(err * err, norm_a, norm2(x), norm2(b)), lhs, 1e-12);
  }
}

TEST(CglsConfig, Validation) {
  CglsConfig c;
  EXPECT_THROW(c.validate(), Error);  // norm_a unset
  c.norm_a = 1.0;
  c.validate();
  c.estimator_delay = 0;
  EXPECT_THROW(c.validate(), Error);
  c.estimator_delay = 1;
  c.delta_tol = 0.0;
  EXPECT_THROW(c.validate(), Error);
}

TEST(Pcgls, IdentityConvergesInOneStep) {
  const CscMatrix I = CscMatrix::identity(5);
  const std::vector<double> b{1.0, -2.0, 0.5, 3.0, -1.0};
  const RowSplitPreconditioner pre(fixtures::complete_lu(I), dense_opts());
  const CglsResult res = pcgls(I, b, pre, config(1.0));
  EXPECT_EQ(res.report.its, 1);
  EXPECT_TRUE(res.report.converged);
  EXPECT_EQ(res.report.stop, StopReason::Converged);
  EXPECT_EQ(res.x, b);
  EXPECT_EQ(res.report.ratio_pt_final, 0.0);
  EXPECT_EQ(res.report.nmod, 0);
  EXPECT_EQ(res.report.psize, 5);
}

TEST(Pcgls, ZeroRightHandSide) {
  const CscMatrix I = CscMatrix::identity(3);
  const CglsResult res = pcgls(I, std::vector<double>(3, 0.0), unpreconditioned(I), config(1.0));
  EXPECT_EQ(res.report.its, 0);
  EXPECT_TRUE(res.report.converged);
  EXPECT_EQ(res.x, std::vector<double>(3, 0.0));
}

TEST(Pcgls, QuasiSquareExactPreconditionerTwoSteps) {
  fixtures::Rng rng(211);
  for (int trial = 0; trial < 20; ++trial) {
    const CscMatrix A0 = fixtures::random_sparse_full_rank(rng, 12, 10, 0.3);
    const ScaledMatrix s = column_scale(A0);
    const auto b = fixtures::random_vector(rng, 12);
    const RowSplitPreconditioner pre(fixtures::complete_lu(s.matrix), dense_opts());
    const CglsResult res = pcgls(s.matrix, b, pre, config(power_method_norm2(s.matrix), 1));
    EXPECT_TRUE(res.report.converged);
    EXPECT_LE(res.report.its, 2);
    EXPECT_LE(res.report.ratio_pt_final, 1e-10);
    const auto ref = oracle::dense_lls_solve(s.matrix.to_dense(), b);
    EXPECT_LT(fixtures::rel_diff(res.x, ref.x_true), 1e-10);
  }
}

TEST(Pcgls, UnpreconditionedMatchesTextbookCgls) {
  fixtures::Rng rng(223);
  const CscMatrix A = fixtures::random_sparse_full_rank(rng, 40, 25, 0.2);
  const auto b = fixtures::random_vector(rng, 40);
  std::vector<std::vector<double>> iterates;
  CglsConfig c = config(power_method_norm2(A), 5, 1e-300, 10);
  c.on_iterate = [&](int, std::span<const double> x) { iterates.emplace_back(x.begin(), x.end()); };
  pcgls(A, b, unpreconditioned(A), c);
  ASSERT_EQ(iterates.size(), 11u);

  // Textbook CGLS.
  std::vector<double> x(25, 0.0), r = b, s = matvec_transpose(A, r), p = s;
  double gamma = dot(s, s);
  std::vector<std::vector<double>> zs{s};
  for (int k = 1; k <= 10; ++k) {
    const auto q = matvec(A, p);
    const double alpha = gamma / dot(q, q);
    axpy(alpha, p, x);
    axpy(-alpha, q, r);
    s = matvec_transpose(A, r);
    const double g2 = dot(s, s);
    for (std::size_t i = 0; i < p.size(); ++i) p[i] = s[i] + g2 / gamma * p[i];
    gamma = g2;
    zs.push_back(s);
    EXPECT_LT(fixtures::rel_diff(iterates[static_cast<std::size_t>(k)], x), 1e-12);
  }
  // Successive normal-equation residuals are orthogonal.
  for (std::size_t k = 1; k < zs.size(); ++k) {
    EXPECT_LT(std::fabs(dot(zs[k], zs[k - 1])) / (norm2(zs[k]) * norm2(zs[k - 1])), 1e-8);
  }
}

TEST(Pcgls, ResidualNormNonIncreasing) {
  fixtures::Rng rng(227);
  const CscMatrix A = fixtures::random_sparse_full_rank(rng, 50, 30, 0.1);
  const auto b = fixtures::random_vector(rng, 50);
  std::vector<double> res_norms;
  CglsConfig c = config(power_method_norm2(A), 5, 1e-14, 200);
  c.on_iterate = [&](int, std::span<const double> x) {
    std::vector<double> r = b;
    axpy(-1.0, matvec(A, x), r);
    res_norms.push_back(norm2(r));
  };
  pcgls(A, b, unpreconditioned(A), c);
  for (std::size_t k = 1; k < res_norms.size(); ++k) EXPECT_LE(res_norms[k], res_norms[k - 1] * (1 + 1e-12));
}

// Lower bound up to the rounding of the iterate itself: a double x carries an
// error of about sqrt(floor) in the A^T A norm, floor being the smallest error
// reached.
TEST(Pcgls, EstimatorIsLowerBound) {
  fixtures::Rng rng(229);
  for (int trial = 0; trial < 10; ++trial) {
    const CscMatrix A = fixtures::random_sparse_full_rank(rng, 20, 12, 0.3);
    const auto b = fixtures::random_vector(rng, 20);
    const oracle::LsErrorOracle exact(A.to_dense(), b);
    std::vector<double> true_err;
    CglsConfig c = config(power_method_norm2(A), 3);
    c.on_iterate = [&](int, std::span<const double> x) { true_err.push_back(exact.squared_error(x)); };
    const CglsResult res = pcgls(A, b, unpreconditioned(A), c);
    ASSERT_TRUE(res.report.converged);
    const double floor = *std::min_element(true_err.begin(), true_err.end());
    for (const auto& s : res.report.ratio_pt_history) {
      // The terminal noise entry carries |rho|, not the delayed sum.
      if (s.iteration == s.iterate) continue;
      const double t = true_err[static_cast<std::size_t>(s.iterate)];
      const double bound = std::pow(std::sqrt(t) + std::sqrt(floor), 2);
      EXPECT_LE(s.estim, bound * (1 + 1e-6)) << "trial " << trial << " iterate " << s.iterate;
      if (s.iterate >= 3 && t > 1e3 * floor) {
        EXPECT_GE(s.estim, 0.5 * t) << "trial " << trial << " iterate " << s.iterate;
      }
    }
  }
}

// With an exact normal-equation preconditioner one step reaches the solution
// and the next rho is rounding noise of either sign.
TEST(Pcgls, NoiseRhoStopsOnCurrentIterate) {
  fixtures::Rng rng(231);
  for (int trial = 0; trial < 20; ++trial) {
    const CscMatrix A = fixtures::random_sparse_full_rank(rng, 6, 2, 0.5);
    const DenseMatrix D = A.to_dense();
    const auto b = fixtures::random_vector(rng, 6);
    const ResidualPreconditioner exact = [&](std::span<const double> r) {
      return oracle::dense_normal_solve(D, matvec_transpose(A, r));
    };
    const CglsResult res = pcgls(A, b, exact, config(power_method_norm2(A), 5));
    EXPECT_TRUE(res.report.converged) << "trial " << trial;
    EXPECT_LE(res.report.its, 2) << "trial " << trial;
    EXPECT_LT(fixtures::rel_max_diff(res.x, oracle::dense_lls_solve(D, b).x_true), 1e-12) << "trial " << trial;
  }
}

TEST(Pcgls, DelayedTestEvaluatesEarlierIterate) {
  fixtures::Rng rng(233);
  const CscMatrix A = fixtures::random_sparse_full_rank(rng, 30, 20, 0.2);
  const auto b = fixtures::random_vector(rng, 30);
  const CglsResult res = pcgls(A, b, unpreconditioned(A), config(power_method_norm2(A), 4));
  ASSERT_FALSE(res.report.ratio_pt_history.empty());
  EXPECT_EQ(res.report.ratio_pt_history.front().iteration, 4);
  const auto& hist = res.report.ratio_pt_history;
  for (std::size_t k = 0; k + 1 < hist.size(); ++k) EXPECT_EQ(hist[k].iteration - hist[k].iterate, 4);
  // The last entry is delayed, or the terminal noise test on iterate k.
  const int last_delay = hist.back().iteration - hist.back().iterate;
  EXPECT_TRUE(last_delay == 4 || last_delay == 0);
  EXPECT_TRUE(res.report.converged);
  EXPECT_EQ(res.report.ratio_pt_history.back().iteration, res.report.its);
  EXPECT_EQ(res.report.ratio_pt_final, res.report.ratio_pt_history.back().ratio_pt);
}

TEST(Pcgls, IterationCap) {
  fixtures::Rng rng(239);
  const CscMatrix A = fixtures::random_sparse_full_rank(rng, 60, 40, 0.1);
  const auto b = fixtures::random_vector(rng, 60);
  const CglsResult res = pcgls(A, b, unpreconditioned(A), config(power_method_norm2(A), 5, 1e-10, 3));
  EXPECT_FALSE(res.report.converged);
  EXPECT_EQ(res.report.stop, StopReason::IterationCap);
  EXPECT_EQ(res.report.its, 3);
  EXPECT_TRUE(res.report.ratio_pt_history.empty());
  EXPECT_EQ(res.report.ratio_pt_final, std::numeric_limits<double>::infinity());
}

TEST(Pcgls, NegativeRhoIsBreakdown) {
  const CscMatrix I = CscMatrix::identity(3);
  auto negate = [](std::span<const double> r) {
    std::vector<double> h(r.begin(), r.end());
    for (auto& v : h) v = -v;
    return h;
  };
  const CglsResult res = pcgls(I, std::vector<double>{1, 2, 3}, negate, config(1.0));
  EXPECT_EQ(res.report.stop, StopReason::Breakdown);
  EXPECT_FALSE(res.report.converged);
}

TEST(Pcgls, DimensionErrors) {
  const CscMatrix I = CscMatrix::identity(3);
  EXPECT_THROW(pcgls(I, std::vector<double>(2), unpreconditioned(I), config(1.0)), DimensionError);
  auto short_h = [](std::span<const double>) { return std::vector<double>(1); };
  EXPECT_THROW(pcgls(I, std::vector<double>(3, 1.0), short_h, config(1.0)), DimensionError);
  const RowSplitPreconditioner pre(fixtures::complete_lu(CscMatrix::identity(4)), dense_opts());
  EXPECT_THROW(pcgls(I, std::vector<double>(3, 1.0), pre, config(1.0)), DimensionError);
}

TEST(Pcgls, RawRatioIsSquareOfDefaultNumerator) {
  fixtures::Rng rng(241);
  const CscMatrix A = fixtures::random_sparse_full_rank(rng, 30, 20, 0.2);
  const auto b = fixtures::random_vector(rng, 30);
  CglsConfig c = config(power_method_norm2(A), 2, 1e-300, 6);
  const auto sq = pcgls(A, b, unpreconditioned(A), c).report;
  c.ratio_raw = true;
  const auto raw = pcgls(A, b, unpreconditioned(A), c).report;
  ASSERT_EQ(sq.ratio_pt_history.size(), raw.ratio_pt_history.size());
  for (std::size_t k = 0; k < sq.ratio_pt_history.size(); ++k) {
    EXPECT_EQ(sq.ratio_pt_history[k].estim, raw.ratio_pt_history[k].estim);
    const double den = std::sqrt(sq.ratio_pt_history[k].estim) / sq.ratio_pt_history[k].ratio_pt;
    EXPECT_NEAR(raw.ratio_pt_history[k].ratio_pt, sq.ratio_pt_history[k].estim / den,
                1e-12 * raw.ratio_pt_history[k].ratio_pt);
  }
}

TEST(Pcgls, BitIdenticalReruns) {
  fixtures::Rng rng(251);
  const CscMatrix A = fixtures::random_sparse_full_rank(rng, 50, 30, 0.15);
  const auto b = fixtures::random_vector(rng, 50);
  IlupParams ip;
  ip.p = 4;
  PreconditionerOptions o;
  o.s_mode = InnerCgS{2};
  const RowSplitPreconditioner pre(ilup_factorize(A, ip), o);
  const auto r1 = pcgls(A, b, pre, config(power_method_norm2(A)));
  const auto r2 = pcgls(A, b, pre, config(power_method_norm2(A)));
  EXPECT_EQ(r1.report, r2.report);
  EXPECT_EQ(r1.x, r2.x);
}
