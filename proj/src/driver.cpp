#include "rowsplit/driver.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <tuple>

#include "json.hpp"

#include "rowsplit/errors.hpp"
#include "rowsplit/ilup.hpp"
#include "rowsplit/matrix_market.hpp"

namespace rowsplit {

using nlohmann::json;

void RunConfig::validate() const {
  if (p < 1) throw Error("p must be at least 1");
  if (!(tau >= 0.0)) throw Error("tau must be non-negative");
  if (!(mu > 0.0 && mu <= 1.0)) throw Error("mu must lie in (0, 1]");
  if (!(small > 0.0)) throw Error("small must be positive");
  if (inner_cg_iters < 1) throw Error("cg-iters must be at least 1");
  if (!(delta_tol > 0.0)) throw Error("delta must be positive");
  if (max_iters < 0) throw Error("max-iters must be non-negative");
  if (estimator_delay < 1) throw Error("delay must be at least 1");
  if (power_iters < 1) throw Error("power-iters must be at least 1");
}

SModeName parse_s_mode(const std::string& name) {
  if (name == "dense") return SModeName::Dense;
  if (name == "cg") return SModeName::Cg;
  if (name == "identity") return SModeName::Identity;
  throw Error("unknown s-mode '" + name + "' (expected dense, cg or identity)");
}

ApplyForm parse_apply_form(const std::string& name) {
  if (name == "fused") return ApplyForm::Fused;
  if (name == "normal") return ApplyForm::Normal;
  throw Error("unknown apply form '" + name + "' (expected fused or normal)");
}

std::string to_string(ApplyForm form) { return form == ApplyForm::Fused ? "fused" : "normal"; }

std::string to_string(SModeName mode) {
  switch (mode) {
    case SModeName::Dense: return "dense";
    case SModeName::Cg: return "cg";
    case SModeName::Identity: return "identity";
  }
  return "?";
}

YMode parse_y_mode(const std::string& name) {
  if (name == "explicit") return YMode::Explicit;
  if (name == "implicit") return YMode::Implicit;
  throw Error("unknown y-mode '" + name + "' (expected explicit or implicit)");
}

std::string to_string(YMode mode) { return mode == YMode::Explicit ? "explicit" : "implicit"; }

OutputFormat parse_output_format(const std::string& name) {
  if (name == "json") return OutputFormat::Json;
  if (name == "csv") return OutputFormat::Csv;
  if (name == "human") return OutputFormat::Human;
  throw Error("unknown format '" + name + "' (expected json, csv or human)");
}

int RunOutcome::exit_code() const noexcept {
  if (!ok()) return 1;
  return report.converged ? 0 : 2;
}

Problem prepare_problem(const std::string& path, std::uint64_t rhs_seed, int power_iters) {
  LoadedMatrix loaded = read_matrix_market(path);
  Problem pr;
  pr.path = path;
  pr.m = loaded.matrix.nrows();
  pr.n = loaded.matrix.ncols();
  pr.nnz = loaded.matrix.nnz();
  pr.transposed = loaded.transposed;
  ScaledMatrix s = column_scale(loaded.matrix);
  pr.scaled = std::move(s.matrix);
  pr.scaling = std::move(s.scaling);
  pr.b = uniform_vector(static_cast<std::size_t>(pr.m), rhs_seed);
  pr.norm_a = power_method_norm2(pr.scaled, power_iters, rhs_seed);
  return pr;
}

namespace {

std::string error_kind(const std::exception& e) {
  if (dynamic_cast<const IoError*>(&e)) return "io";
  if (dynamic_cast<const FormatError*>(&e)) return "format";
  if (dynamic_cast<const DimensionError*>(&e)) return "dimension";
  if (dynamic_cast<const ZeroColumnError*>(&e)) return "zero_column";
  if (dynamic_cast<const SizeCapError*>(&e)) return "size_cap";
  if (dynamic_cast<const NotSpdError*>(&e)) return "not_spd";
  if (dynamic_cast<const SingularError*>(&e)) return "singular";
  if (dynamic_cast<const RankDeficientError*>(&e)) return "rank_deficient";
  if (dynamic_cast<const Error*>(&e)) return "invalid";
  return "internal";
}

void fill_problem_fields(RunOutcome& out, const Problem& pr) {
  out.m = pr.m;
  out.n = pr.n;
  out.nnz = pr.nnz;
  out.transposed = pr.transposed;
}

std::string stop_name(StopReason s) {
  switch (s) {
    case StopReason::Converged: return "converged";
    case StopReason::IterationCap: return "iteration_cap";
    case StopReason::Breakdown: return "breakdown";
  }
  return "?";
}

std::string fmt_double(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (std::isnan(v)) return "nan";
  // Shortest representation that round-trips.
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string short_double(double v) {
  if (!std::isfinite(v)) return fmt_double(v);
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", v);
  return buf;
}

json json_double(double v) {
  if (std::isfinite(v)) return v;
  return nullptr;
}

json config_to_json(const RunConfig& c) {
  json j;
  j["p"] = c.p;
  j["tau"] = c.tau;
  j["mu"] = c.mu;
  j["small"] = c.small;
  j["s_mode"] = to_string(c.s_mode);
  j["y_mode"] = c.y_mode ? json(to_string(*c.y_mode)) : json(nullptr);
  j["inner_cg_iters"] = c.inner_cg_iters;
  j["delta_tol"] = c.delta_tol;
  j["max_iters"] = c.max_iters;
  j["estimator_delay"] = c.estimator_delay;
  j["rhs_seed"] = c.rhs_seed;
  j["power_iters"] = c.power_iters;
  j["dense_s_cap"] = c.dense_s_cap;
  j["ratio_raw"] = c.ratio_raw;
  j["apply"] = to_string(c.apply);
  return j;
}

json outcome_to_json(const RunConfig& c, const RunOutcome& o) {
  json j;
  j["schema_version"] = kReportSchemaVersion;
  j["matrix"] = o.matrix_path;
  j["config"] = config_to_json(c);
  if (!o.ok()) {
    j["error"] = {{"type", *o.error_type}, {"message", o.error_message}};
    return j;
  }
  j["m"] = o.m;
  j["n"] = o.n;
  j["nnz"] = o.nnz;
  j["transposed"] = o.transposed;
  j["s_mode"] = o.s_mode_used;
  j["y_mode"] = o.y_mode_used;
  j["its"] = o.report.its;
  j["converged"] = o.report.converged;
  j["stop"] = stop_name(o.report.stop);
  j["ratio_pt"] = json_double(o.report.ratio_pt_final);
  json hist = json::array();
  for (const auto& s : o.report.ratio_pt_history) {
    hist.push_back({{"iteration", s.iteration},
                    {"iterate", s.iterate},
                    {"estim", json_double(s.estim)},
                    {"ratio_pt", json_double(s.ratio_pt)}});
  }
  j["ratio_pt_history"] = std::move(hist);
  j["psize"] = o.report.psize;
  j["nmod"] = o.report.nmod;
  j["residual_norm"] = json_double(o.report.residual_norm_final);
  j["warnings"] = o.warnings;
  if (c.timing) j["wall_time"] = o.wall_time;
  return j;
}

const char* kCsvHeader =
    "matrix,m,n,nnz,p,tau,mu,s_mode,y_mode,apply,its,converged,stop,ratio_pt,psize,nmod,residual_norm,error";

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char ch : s) {
    if (ch == '"') q += '"';
    q += ch;
  }
  return q + "\"";
}

std::string csv_row(const RunConfig& c, const RunOutcome& o) {
  std::ostringstream os;
  os << csv_escape(o.matrix_path) << ',' << o.m << ',' << o.n << ',' << o.nnz << ',' << c.p << ','
     << fmt_double(c.tau) << ',' << fmt_double(c.mu) << ',';
  if (o.ok()) {
    os << o.s_mode_used << ',' << o.y_mode_used << ',' << to_string(c.apply) << ',' << o.report.its << ',' << (o.report.converged ? 1 : 0)
       << ',' << stop_name(o.report.stop) << ',' << fmt_double(o.report.ratio_pt_final) << ','
       << o.report.psize << ',' << o.report.nmod << ',' << fmt_double(o.report.residual_norm_final) << ',';
  } else {
    os << to_string(c.s_mode) << ",," << to_string(c.apply) << ",,,,,,,,"
       << csv_escape(*o.error_type + ": " + o.error_message);
  }
  return os.str();
}

std::string human_report(const RunConfig& c, const RunOutcome& o) {
  std::ostringstream os;
  os << "matrix      " << o.matrix_path << '\n';
  if (!o.ok()) {
    os << "error       " << *o.error_type << ": " << o.error_message << '\n';
    return os.str();
  }
  os << "size        " << o.m << " x " << o.n << ", nnz " << o.nnz << (o.transposed ? " (transposed)" : "")
     << '\n';
  os << "ILU         p=" << c.p << " tau=" << c.tau << " mu=" << c.mu << '\n';
  os << "S mode      " << o.s_mode_used << " (Y " << o.y_mode_used << ", apply " << to_string(c.apply) << ")\n";
  for (const auto& w : o.warnings) os << "warning     " << w << '\n';
  os << "its         " << o.report.its << (o.report.converged ? "" : " (accuracy not reached)") << '\n';
  os << "stop        " << stop_name(o.report.stop) << '\n';
  os << "ratio_pt    " << short_double(o.report.ratio_pt_final) << '\n';
  os << "psize       " << o.report.psize << '\n';
  os << "nmod        " << o.report.nmod << '\n';
  os << "residual    " << short_double(o.report.residual_norm_final) << '\n';
  if (c.timing) os << "wall time   " << o.wall_time << " s\n";
  return os.str();
}

}  // namespace

RunOutcome solve_problem(const Problem& pr, const RunConfig& config) {
  const auto t0 = std::chrono::steady_clock::now();
  RunOutcome out;
  out.matrix_path = pr.path;
  fill_problem_fields(out, pr);
  try {
    config.validate();
    IlupParams ip;
    ip.p = config.p;
    ip.tau = config.tau;
    ip.mu = config.mu;
    ip.small = config.small;
    IlupFactors factors = ilup_factorize(pr.scaled, ip);

    PreconditionerOptions po;
    po.y_mode = config.y_mode;
    po.dense_s_cap = config.dense_s_cap;
    SModeName mode = config.s_mode;
    const auto k = static_cast<std::size_t>(pr.m - pr.n);
    if (mode == SModeName::Dense && k > config.dense_s_cap) {
      out.warnings.push_back("m-n = " + std::to_string(k) + " exceeds the dense S cap " +
                             std::to_string(config.dense_s_cap) + "; using cg(" +
                             std::to_string(config.inner_cg_iters) + ")");
      mode = SModeName::Cg;
      if (po.y_mode == YMode::Explicit) po.y_mode.reset();
    }
    switch (mode) {
      case SModeName::Dense: po.s_mode = DenseFactorS{}; break;
      case SModeName::Cg: po.s_mode = InnerCgS{config.inner_cg_iters}; break;
      case SModeName::Identity: po.s_mode = IdentityS{}; break;
    }
    const RowSplitPreconditioner pre(std::move(factors), po);
    out.s_mode_used = mode == SModeName::Cg ? "cg(" + std::to_string(config.inner_cg_iters) + ")" : to_string(mode);
    out.y_mode_used = to_string(pre.y_mode());

    CglsConfig cc;
    cc.delta_tol = config.delta_tol;
    cc.max_iters = config.max_iters;
    cc.estimator_delay = config.estimator_delay;
    cc.norm_a = pr.norm_a;
    cc.ratio_raw = config.ratio_raw;
    CglsResult res;
    if (config.apply == ApplyForm::Fused) {
      res = pcgls(pr.scaled, pr.b, pre, cc);
    } else {
      const CscMatrix& A = pr.scaled;
      res = pcgls(
          A, pr.b, [&](std::span<const double> r) { return pre.apply_normal(matvec_transpose(A, r)); }, cc);
      res.report.psize = pre.psize();
      res.report.nmod = pre.factors().nmod;
    }
    out.report = std::move(res.report);
    out.x = pr.scaling.unscale_solution(res.x);
  } catch (const std::exception& e) {
    out.error_type = error_kind(e);
    out.error_message = e.what();
  }
  out.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return out;
}

RunOutcome run_single(const RunConfig& config) {
  const auto t0 = std::chrono::steady_clock::now();
  Problem pr;
  try {
    config.validate();
    pr = prepare_problem(config.matrix_path, config.rhs_seed, config.power_iters);
  } catch (const std::exception& e) {
    RunOutcome out;
    out.matrix_path = config.matrix_path;
    out.error_type = error_kind(e);
    out.error_message = e.what();
    return out;
  }
  RunOutcome out = solve_problem(pr, config);
  out.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return out;
}

std::string format_outcome(const RunConfig& config, const RunOutcome& outcome) {
  switch (config.output_format) {
    case OutputFormat::Json: return outcome_to_json(config, outcome).dump(2) + "\n";
    case OutputFormat::Csv: return std::string(kCsvHeader) + "\n" + csv_row(config, outcome) + "\n";
    case OutputFormat::Human: return human_report(config, outcome);
  }
  return {};
}

void emit_convergence_plot_data(const SolveReport& report, std::ostream& out) {
  out << "iteration,ratio_pt\n";
  for (const auto& s : report.ratio_pt_history) out << s.iteration << ',' << fmt_double(s.ratio_pt) << '\n';
}

namespace {

void apply_config_field(RunConfig& c, const std::string& key, const json& v) {
  try {
    if (key == "p") c.p = v.get<Index>();
    else if (key == "tau") c.tau = v.get<double>();
    else if (key == "mu") c.mu = v.get<double>();
    else if (key == "small") c.small = v.get<double>();
    else if (key == "s_mode") c.s_mode = parse_s_mode(v.get<std::string>());
    else if (key == "y_mode") c.y_mode = v.is_null() ? std::nullopt : std::optional(parse_y_mode(v.get<std::string>()));
    else if (key == "inner_cg_iters") c.inner_cg_iters = v.get<int>();
    else if (key == "delta_tol") c.delta_tol = v.get<double>();
    else if (key == "max_iters") c.max_iters = v.get<int>();
    else if (key == "estimator_delay") c.estimator_delay = v.get<int>();
    else if (key == "rhs_seed") c.rhs_seed = v.get<std::uint64_t>();
    else if (key == "power_iters") c.power_iters = v.get<int>();
    else if (key == "dense_s_cap") c.dense_s_cap = v.get<std::size_t>();
    else if (key == "ratio_raw") c.ratio_raw = v.get<bool>();
    else if (key == "apply") c.apply = parse_apply_form(v.get<std::string>());
    else throw FormatError("manifest: unknown config field '" + key + "'");
  } catch (const json::exception& e) {
    throw FormatError("manifest: bad value for '" + key + "': " + e.what());
  } catch (const FormatError&) {
    throw;
  } catch (const Error& e) {
    throw FormatError(std::string("manifest: ") + e.what());
  }
}

void apply_config_object(RunConfig& c, const json& obj) {
  if (!obj.is_object()) throw FormatError("manifest: config must be an object");
  for (const auto& [key, v] : obj.items()) apply_config_field(c, key, v);
}

struct ManifestProblem {
  std::string path;
  std::string name;
};

}  // namespace

BatchResult run_batch(const std::filesystem::path& manifest_path) {
  std::ifstream in(manifest_path);
  if (!in) throw IoError("cannot open manifest " + manifest_path.string());
  json man;
  try {
    man = json::parse(in);
  } catch (const json::exception& e) {
    throw FormatError(std::string("manifest is not valid JSON: ") + e.what());
  }
  if (!man.is_object()) throw FormatError("manifest must be a JSON object");

  BatchResult result;
  RunConfig base;
  if (man.contains("base")) apply_config_object(base, man["base"]);
  if (man.contains("layout")) {
    const std::string layout = man["layout"].get<std::string>();
    if (layout == "flat") result.layout = BatchLayout::Flat;
    else if (layout == "paired") result.layout = BatchLayout::Paired;
    else throw FormatError("manifest: unknown layout '" + layout + "'");
  }

  const std::filesystem::path dir = manifest_path.parent_path();
  std::vector<ManifestProblem> problems;
  if (man.contains("problems")) {
    if (!man["problems"].is_array()) throw FormatError("manifest: problems must be an array");
    for (const auto& item : man["problems"]) {
      ManifestProblem mp;
      if (item.is_string()) {
        mp.path = item.get<std::string>();
      } else if (item.is_object() && item.contains("path")) {
        mp.path = item["path"].get<std::string>();
        if (item.contains("name")) mp.name = item["name"].get<std::string>();
      } else {
        throw FormatError("manifest: problem entries are paths or {\"path\": ...} objects");
      }
      std::filesystem::path pth(mp.path);
      if (pth.is_relative()) mp.path = (dir / pth).lexically_normal().string();
      if (mp.name.empty()) mp.name = pth.stem().string();
      problems.push_back(std::move(mp));
    }
  }

  // Cartesian product of the grid, keys in sorted order.
  std::vector<std::pair<std::string, std::vector<json>>> axes;
  if (man.contains("grid")) {
    if (!man["grid"].is_object()) throw FormatError("manifest: grid must be an object");
    for (const auto& [key, vals] : man["grid"].items()) {
      if (!vals.is_array() || vals.empty()) throw FormatError("manifest: grid axis '" + key + "' must be a non-empty array");
      if (result.layout == BatchLayout::Paired && key == "s_mode") {
        throw FormatError("manifest: the paired layout fixes s_mode");
      }
      axes.emplace_back(key, std::vector<json>(vals.begin(), vals.end()));
    }
  }
  std::vector<RunConfig> grid{base};
  for (const auto& [key, vals] : axes) {
    std::vector<RunConfig> next;
    for (const auto& c : grid) {
      for (const auto& v : vals) {
        RunConfig cc = c;
        apply_config_field(cc, key, v);
        next.push_back(std::move(cc));
      }
    }
    grid = std::move(next);
  }

  std::vector<double> order_key(problems.size(), INFINITY);
  for (std::size_t pi = 0; pi < problems.size(); ++pi) {
    std::map<std::pair<std::uint64_t, int>, Problem> prepared;
    std::optional<std::pair<std::string, std::string>> load_error;
    for (const auto& cfg0 : grid) {
      RunConfig cfg = cfg0;
      cfg.matrix_path = problems[pi].path;
      BatchCell cell;
      cell.problem_index = pi;
      cell.problem_name = problems[pi].name;
      cell.config = cfg;

      const auto key = std::make_pair(cfg.rhs_seed, cfg.power_iters);
      const Problem* pr = nullptr;
      try {
        auto it = prepared.find(key);
        if (it == prepared.end()) it = prepared.emplace(key, prepare_problem(cfg.matrix_path, cfg.rhs_seed, cfg.power_iters)).first;
        pr = &it->second;
        order_key[pi] = static_cast<double>(pr->m - pr->n) / static_cast<double>(pr->m);
      } catch (const std::exception& e) {
        cell.outcome.matrix_path = cfg.matrix_path;
        cell.outcome.error_type = error_kind(e);
        cell.outcome.error_message = e.what();
        if (result.layout == BatchLayout::Paired) cell.outcome_b = cell.outcome;
        result.cells.push_back(std::move(cell));
        continue;
      }
      if (result.layout == BatchLayout::Paired) {
        RunConfig ca = cfg;
        ca.s_mode = SModeName::Cg;
        RunConfig cb = cfg;
        cb.s_mode = SModeName::Identity;
        cell.config = ca;
        cell.outcome = solve_problem(*pr, ca);
        cell.outcome_b = solve_problem(*pr, cb);
      } else {
        cell.outcome = solve_problem(*pr, cfg);
      }
      result.cells.push_back(std::move(cell));
    }
  }
  std::stable_sort(result.cells.begin(), result.cells.end(), [&](const BatchCell& a, const BatchCell& b) {
    return order_key[a.problem_index] < order_key[b.problem_index];
  });
  return result;
}

void write_batch_csv(const BatchResult& result, std::ostream& out) {
  if (result.layout == BatchLayout::Flat) {
    out << "problem," << kCsvHeader << '\n';
    for (const auto& c : result.cells) out << csv_escape(c.problem_name) << ',' << csv_row(c.config, c.outcome) << '\n';
    return;
  }
  out << "problem,m,n,tau,its_a,its_b,psize,ratio_a,ratio_b,error\n";
  for (const auto& c : result.cells) {
    const RunOutcome& a = c.outcome;
    const RunOutcome& b = *c.outcome_b;
    out << csv_escape(c.problem_name) << ',' << a.m << ',' << a.n << ',' << fmt_double(c.config.tau) << ',';
    if (a.ok() && b.ok()) {
      // A trailing + marks a run that stopped short of the tolerance.
      auto its = [](const RunOutcome& o) { return std::to_string(o.report.its) + (o.report.converged ? "" : "+"); };
      out << its(a) << ',' << its(b) << ',' << a.report.psize << ',' << fmt_double(a.report.ratio_pt_final) << ','
          << fmt_double(b.report.ratio_pt_final) << ",\n";
    } else {
      const RunOutcome& bad = a.ok() ? b : a;
      out << ",,,,," << csv_escape(*bad.error_type + ": " + bad.error_message) << '\n';
    }
  }
}

}  // namespace rowsplit
