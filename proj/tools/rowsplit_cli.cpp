// rowsplit: solve sparse least-squares problems with row-splitting ILU
// preconditioned CGLS.
//
//   rowsplit solve matrix.mtx [options]
//   rowsplit batch manifest.json [--out table.csv]

#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "rowsplit/driver.hpp"
#include "rowsplit/errors.hpp"

namespace {

int run_solve(const rowsplit::RunConfig& cfg, const std::string& history_csv) {
  const rowsplit::RunOutcome out = rowsplit::run_single(cfg);
  std::cout << rowsplit::format_outcome(cfg, out);
  for (const auto& w : out.warnings) std::cerr << "warning: " << w << '\n';
  if (!history_csv.empty() && out.ok()) {
    std::ofstream f(history_csv);
    if (!f) {
      std::cerr << "error: cannot write " << history_csv << '\n';
      return 1;
    }
    rowsplit::emit_convergence_plot_data(out.report, f);
  }
  return out.exit_code();
}

int run_batch(const std::string& manifest, const std::string& out_path) {
  try {
    const rowsplit::BatchResult res = rowsplit::run_batch(manifest);
    if (out_path.empty()) {
      rowsplit::write_batch_csv(res, std::cout);
    } else {
      std::ofstream f(out_path);
      if (!f) {
        std::cerr << "error: cannot write " << out_path << '\n';
        return 1;
      }
      rowsplit::write_batch_csv(res, f);
    }
  } catch (const rowsplit::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Row-splitting ILU preconditioned CGLS for sparse least squares"};
  app.require_subcommand(1);

  rowsplit::RunConfig cfg;
  std::string s_mode = "dense";
  std::string y_mode;
  std::string format = "json";
  std::string history_csv;
  std::string apply = "fused";

  CLI::App* solve = app.add_subcommand("solve", "Solve min ||b - Ax|| for one Matrix Market file");
  solve->add_option("matrix", cfg.matrix_path, "Matrix Market file (coordinate, real)")->required();
  solve->add_option("--p", cfg.p, "ILUP fill limit per column")->capture_default_str();
  solve->add_option("--tau", cfg.tau, "ILUP drop tolerance")->capture_default_str();
  solve->add_option("--mu", cfg.mu, "Threshold pivoting parameter in (0, 1]")->capture_default_str();
  solve->add_option("--small", cfg.small, "Smallest admissible pivot magnitude")->capture_default_str();
  solve->add_option("--s-mode", s_mode, "S solve: dense, cg or identity")
      ->check(CLI::IsMember({"dense", "cg", "identity"}))
      ->capture_default_str();
  solve->add_option("--y-mode", y_mode, "Y application: explicit or implicit")
      ->check(CLI::IsMember({"explicit", "implicit"}));
  solve->add_option("--cg-iters", cfg.inner_cg_iters, "Inner CG steps for --s-mode cg")->capture_default_str();
  solve->add_option("--delta", cfg.delta_tol, "Stopping tolerance on ratio_pt")->capture_default_str();
  solve->add_option("--max-iters", cfg.max_iters, "CGLS iteration cap")->capture_default_str();
  solve->add_option("--delay", cfg.estimator_delay, "Error estimator delay d")->capture_default_str();
  solve->add_option("--seed", cfg.rhs_seed, "Seed for b and the power method")->capture_default_str();
  solve->add_option("--power-iters", cfg.power_iters, "Power method steps for ||A||")->capture_default_str();
  solve->add_option("--dense-s-cap", cfg.dense_s_cap, "Largest m-n for a dense S factor")->capture_default_str();
  solve->add_option("--format", format, "Report format: json, csv or human")
      ->check(CLI::IsMember({"json", "csv", "human"}))
      ->capture_default_str();
  solve->add_option("--apply", apply, "Preconditioner form: fused (from r) or normal (M^{-1} A^T r)")
      ->check(CLI::IsMember({"fused", "normal"}))
      ->capture_default_str();
  solve->add_flag("--ratio-raw", cfg.ratio_raw, "Divide the squared error estimate, not its square root");
  solve->add_option("--history-csv", history_csv, "Write (iteration, ratio_pt) pairs to this file");
  solve->add_flag("--timing", cfg.timing, "Include wall time in the report");

  std::string manifest;
  std::string batch_out;
  CLI::App* batch = app.add_subcommand("batch", "Run a JSON manifest of problems x parameters, CSV out");
  batch->add_option("manifest", manifest, "Manifest file")->required();
  batch->add_option("--out", batch_out, "Write the CSV here instead of stdout");

  CLI11_PARSE(app, argc, argv);

  if (solve->parsed()) {
    cfg.s_mode = rowsplit::parse_s_mode(s_mode);
    if (!y_mode.empty()) cfg.y_mode = rowsplit::parse_y_mode(y_mode);
    cfg.output_format = rowsplit::parse_output_format(format);
    cfg.apply = rowsplit::parse_apply_form(apply);
    return run_solve(cfg, history_csv);
  }
  return run_batch(manifest, batch_out);
}
