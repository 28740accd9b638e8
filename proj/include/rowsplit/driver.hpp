#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "rowsplit/cgls.hpp"
#include "rowsplit/precond.hpp"
#include "rowsplit/sparse.hpp"

namespace rowsplit {

enum class OutputFormat { Json, Csv, Human };
enum class SModeName { Dense, Cg, Identity };
/// Fused: h from the residual, as in RowSplitPreconditioner::apply.
/// Normal: h = M^{-1} A^T r via apply_normal. With the dense S factor M is
/// symmetric positive definite even for incomplete factors; the cg and
/// identity S solves give no such M and may break down.
enum class ApplyForm { Fused, Normal };

/// Version of the JSON/CSV report layout. Bumped on any field change.
inline constexpr int kReportSchemaVersion = 1;

struct RunConfig {
  std::string matrix_path;
  Index p = 10;
  double tau = 0.0;
  double mu = 0.1;
  double small = 1e-10;
  SModeName s_mode = SModeName::Dense;
  /// Empty selects the default for the S mode.
  std::optional<YMode> y_mode;
  int inner_cg_iters = 2;
  double delta_tol = 1e-10;
  int max_iters = 2000;
  int estimator_delay = 5;
  std::uint64_t rhs_seed = 42;
  int power_iters = 100;
  std::size_t dense_s_cap = 20000;
  OutputFormat output_format = OutputFormat::Json;
  bool ratio_raw = false;
  ApplyForm apply = ApplyForm::Fused;
  /// Adds wall_time to reports, which makes them run-dependent.
  bool timing = false;

  /// Throws Error on an out-of-range field.
  void validate() const;
};

/// A matrix prepared for solving: scaled, with its right-hand side and norm
/// estimate. The same b is reused for every parameter setting.
struct Problem {
  std::string path;
  Index m = 0;
  Index n = 0;
  std::int64_t nnz = 0;
  bool transposed = false;
  CscMatrix scaled;
  ColumnScaling scaling;
  std::vector<double> b;
  double norm_a = 0.0;
};

/// Reads, transposes if wide, scales columns, draws b and estimates ||A||_2.
Problem prepare_problem(const std::string& path, std::uint64_t rhs_seed, int power_iters);

struct RunOutcome {
  std::string matrix_path;
  /// Set when the run failed before producing a report.
  std::optional<std::string> error_type;
  std::string error_message;
  Index m = 0;
  Index n = 0;
  std::int64_t nnz = 0;
  bool transposed = false;
  /// Mode actually used (after any dense-cap fallback).
  std::string s_mode_used;
  std::string y_mode_used;
  std::vector<std::string> warnings;
  SolveReport report;
  /// Solution in the original variables.
  std::vector<double> x;
  double wall_time = 0.0;

  bool ok() const noexcept { return !error_type.has_value(); }
  /// 0 converged, 2 accuracy not reached, 1 error.
  int exit_code() const noexcept;
};

/// Factorize, build the preconditioner and solve a prepared problem.
RunOutcome solve_problem(const Problem& problem, const RunConfig& config);

/// Whole pipeline for cfg.matrix_path. Never throws for solver or input
/// failures; they are captured in the outcome.
RunOutcome run_single(const RunConfig& config);

/// Report in the configured format, newline terminated.
std::string format_outcome(const RunConfig& config, const RunOutcome& outcome);

/// Two-column CSV "iteration,ratio_pt", one row per stopping-test evaluation.
void emit_convergence_plot_data(const SolveReport& report, std::ostream& out);

enum class BatchLayout { Flat, Paired };

struct BatchCell {
  std::size_t problem_index = 0;
  std::string problem_name;
  RunConfig config;
  RunOutcome outcome;
  /// Identity-S run of the same cell (paired layout only).
  std::optional<RunOutcome> outcome_b;
};

struct BatchResult {
  BatchLayout layout = BatchLayout::Flat;
  /// Cells ordered by increasing (m-n)/m of their problem, then manifest order.
  std::vector<BatchCell> cells;
};

/// Runs every problem x grid cell of a JSON manifest:
///
///   { "base": {<RunConfig fields>}, "problems": ["a.mtx", {"path": "b.mtx", "name": "b"}],
///     "grid": {"tau": [0.0, 0.1]}, "layout": "flat" | "paired" }
///
/// Relative problem paths are resolved against the manifest's directory. A
/// failing cell is recorded and the batch continues. With the paired layout
/// every cell runs twice, with cg and identity S modes. Throws IoError or
/// FormatError only for an unreadable or malformed manifest.
BatchResult run_batch(const std::filesystem::path& manifest_path);

/// CSV for a batch. Flat: one row per cell. Paired: problem, m, n, tau,
/// its_a, its_b, psize, ratio_a, ratio_b (a = cg, b = identity).
void write_batch_csv(const BatchResult& result, std::ostream& out);

SModeName parse_s_mode(const std::string& name);
std::string to_string(SModeName mode);
YMode parse_y_mode(const std::string& name);
std::string to_string(YMode mode);
OutputFormat parse_output_format(const std::string& name);
ApplyForm parse_apply_form(const std::string& name);
std::string to_string(ApplyForm form);

}  // namespace rowsplit
