// tbs: command-line driver for the temporal Bell simulator.
//
//   tbs simulate --spec experiment.json [--seed N] [--runs N] [--out-dir D]
//   tbs exact    --config config.json
//   tbs optimize --objective ineq18 [--grid-deg 1] [--starts 32] [--out result.json]
//   tbs report   --records records.csv [--spec spec.json]
//   tbs sweep    [--step-deg 1] [--out sweep.csv]
//   tbs verify
//
// Exit status: 0 success, 1 configuration/usage error, 2 runtime failure.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "tbs/tbs.hpp"

namespace fs = std::filesystem;
using tbs::ConfigError;
using tbs::json;

namespace {

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("'" + path + "' is not valid JSON: " + e.what());
  }
}

std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  return out;
}

void print_summary(std::ostream& os, const tbs::ExperimentReport& rep) {
  os << "protocol " << tbs::name(rep.protocol) << ", model " << tbs::name(rep.model) << '\n';
  for (const auto& r : rep.inequalities) {
    os << std::left << std::setw(10) << tbs::name(r.variant) << " lhs " << std::setprecision(9) << r.lhs << " margin "
       << r.margin;
    if (r.z_score) os << " z " << std::setprecision(4) << *r.z_score;
    os << " [" << tbs::name(r.verdict) << "]\n";
  }
}

struct SimulateArgs {
  std::string spec;
  std::optional<std::uint64_t> seed;
  std::optional<std::uint64_t> runs;
  std::optional<unsigned> workers;
  std::string out_dir;
  std::string format = "json";
  bool timing = false;
};

int run_simulate(const SimulateArgs& a) {
  json raw = read_json_file(a.spec);
  tbs::ExperimentSpec spec = tbs::spec_from_json(raw);
  if (a.seed) spec.seed = *a.seed;
  if (a.runs) spec.n_runs = *a.runs;
  if (a.workers) spec.workers = *a.workers;
  if (!a.out_dir.empty()) spec.output.dir = a.out_dir;
  spec.validate();

  const auto t0 = std::chrono::steady_clock::now();
  tbs::ExperimentOutput out = tbs::run_experiment(spec);
  if (a.timing) out.report.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  const fs::path dir(spec.output.dir);
  {
    auto os = open_out(dir / spec.output.records);
    tbs::write_records_csv(os, out.records);
  }
  {
    auto os = open_out(dir / "spec.json");
    os << tbs::to_json(spec).dump(2) << '\n';
  }
  for (const auto& s : out.report.series) {
    const std::string file = out.report.series.size() == 1 ? spec.output.counts : s.name + "_" + spec.output.counts;
    auto os = open_out(dir / file);
    tbs::write_count_csv(os, s.table);
  }
  if (a.format == "csv") {
    auto os = open_out(dir / fs::path(spec.output.report).replace_extension(".csv"));
    tbs::write_report_csv(os, out.report);
  } else {
    auto os = open_out(dir / spec.output.report);
    os << tbs::to_json(out.report).dump(2) << '\n';
  }
  print_summary(std::cout, out.report);
  return 0;
}

int run_exact(const std::string& config_path) {
  const json raw = read_json_file(config_path);
  const json& cfg_json = raw.contains("config") ? raw["config"] : raw;
  const tbs::Config cfg = tbs::config_from_json(cfg_json);
  const tbs::StatePrep prep = raw.contains("prep") ? tbs::prep_from_json(raw["prep"])
                                                   : tbs::StatePrep{tbs::EigenstatePrep{tbs::Setting::A, tbs::Outcome::Plus}};
  const tbs::ProbTable probs = tbs::quantum_prob_table(tbs::resolve(prep, cfg), cfg);

  std::cout << std::setprecision(9);
  std::cout << "config " << cfg.a << ' ' << cfg.b << ' ' << cfg.c << (cfg.degenerate() ? " (degenerate)" : "") << '\n';
  const auto d = tbs::dots(cfg);
  std::cout << "a.b " << d.ab << " a.c " << d.ac << " b.c " << d.bc << '\n';
  std::cout << "ineq16 lhs " << tbs::quantum_lhs_16(cfg) << '\n';
  std::cout << "ineq18 lhs " << tbs::quantum_lhs_18(cfg) << '\n';
  for (const auto& r : {tbs::eval_prob_7(probs), tbs::eval_prob_8(probs), tbs::eval_expect_10(probs)}) {
    std::cout << tbs::name(r.variant) << " lhs " << r.lhs << " margin " << r.margin
              << (r.violated ? " violated" : " holds") << '\n';
  }
  return 0;
}

struct OptimizeArgs {
  std::string objective = "ineq18";
  double grid_deg = 1.0;
  std::size_t starts = 32;
  std::uint64_t seed = 1;
  double tolerance = 1e-10;
  std::uint64_t max_iter = 10000;
  std::string out;
};

int run_optimize(const OptimizeArgs& a) {
  const tbs::Objective obj = tbs::objective_by_name(a.objective);
  if (!(a.grid_deg > 0.0 && a.grid_deg <= 10.0)) throw ConfigError("--grid-deg must lie in (0, 10]");
  tbs::RefineOptions opt;
  opt.tolerance = a.tolerance;
  opt.max_iterations = a.max_iter;

  const tbs::OptimizationResult main = tbs::grid_then_refine(obj, a.grid_deg, opt);
  json j = tbs::to_json(main);
  if (a.starts > 0) {
    const tbs::OptimizationResult multi = tbs::multi_start_refine(obj, a.starts, a.seed, opt);
    j["multi_start"] = json{{"starts", a.starts},
                            {"seed", a.seed},
                            {"best_value", multi.best_value},
                            {"best_config", tbs::to_json(multi.best_config)},
                            {"agreement", std::abs(multi.best_value - main.best_value)}};
  }
  std::cout << std::setprecision(12) << a.objective << " best " << main.best_value << " (grid "
            << main.method_params.at("grid_best_value") << ")\n";
  if (j.contains("multi_start")) std::cout << "multi-start best " << j["multi_start"]["best_value"].get<double>() << '\n';
  if (!main.converged) std::cerr << "warning: " << main.warning << '\n';
  if (!a.out.empty()) {
    auto os = open_out(a.out);
    os << j.dump(2) << '\n';
  }
  return 0;
}

int run_report(const std::string& records_path, const std::string& spec_path, const std::string& out,
               const std::string& format) {
  std::ifstream in(records_path);
  if (!in) throw ConfigError("cannot open '" + records_path + "'");
  std::vector<tbs::RecordSeries> runs;
  try {
    runs = tbs::read_records_csv(in);
  } catch (const std::runtime_error& e) {
    throw ConfigError(e.what());
  }
  std::optional<tbs::ExperimentSpec> spec;
  if (!spec_path.empty()) spec = tbs::spec_from_json(read_json_file(spec_path));
  const tbs::ExperimentReport rep = tbs::report_from_records(runs, spec);

  std::ostringstream body;
  if (format == "csv") {
    tbs::write_report_csv(body, rep);
  } else {
    body << tbs::to_json(rep).dump(2) << '\n';
  }
  if (out.empty()) {
    std::cout << body.str();
  } else {
    auto os = open_out(out);
    os << body.str();
    print_summary(std::cout, rep);
  }
  return 0;
}

int run_sweep(double step, const std::string& out) {
  if (out.empty()) {
    tbs::write_sweep_csv(std::cout, step);
  } else {
    auto os = open_out(out);
    tbs::write_sweep_csv(os, step);
  }
  return 0;
}

int run_verify() {
  const auto c = tbs::verify_paper_configs();
  std::cout << std::setprecision(15) << "ineq16 lhs " << c.value16 << " expected " << c.expected16 << '\n'
            << "ineq18 lhs " << c.value18 << " expected " << c.expected18 << '\n'
            << (c.ok ? "ok" : "MISMATCH") << '\n';
  return c.ok ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Temporal Bell inequality simulator"};
  app.require_subcommand(1);

  SimulateArgs sim;
  auto* simulate = app.add_subcommand("simulate", "Run an experiment spec and persist records and report");
  simulate->add_option("--spec", sim.spec, "ExperimentSpec JSON file")->required();
  simulate->add_option("--seed", sim.seed, "Seed (overrides the spec and TBS_SEED)");
  simulate->add_option("--runs", sim.runs, "Number of runs (overrides the spec)");
  simulate->add_option("--workers", sim.workers, "Sampling workers");
  simulate->add_option("--out-dir", sim.out_dir, "Output directory");
  simulate->add_option("--format", sim.format, "Report format")->check(CLI::IsMember({"json", "csv"}));
  simulate->add_flag("--timing", sim.timing, "Include wall time in the report");

  std::string config_path;
  auto* exact = app.add_subcommand("exact", "Closed-form evaluation of all inequalities for a config");
  exact->add_option("--config", config_path, "Config JSON ({a,b,c} or {config, prep})")->required();

  OptimizeArgs opt;
  auto* optimize = app.add_subcommand("optimize", "Maximize a violation objective over configurations");
  optimize->add_option("--objective", opt.objective, "ineq16 or ineq18")->check(CLI::IsMember({"ineq16", "ineq18"}));
  optimize->add_option("--grid-deg", opt.grid_deg, "Grid resolution in degrees");
  optimize->add_option("--starts", opt.starts, "Random multi-starts for cross-checking (0 disables)");
  optimize->add_option("--seed", opt.seed, "Seed for multi-starts");
  optimize->add_option("--tolerance", opt.tolerance, "Refinement tolerance");
  optimize->add_option("--max-iter", opt.max_iter, "Refinement iteration budget");
  optimize->add_option("--out", opt.out, "JSON result file");

  std::string records_path, report_spec, report_out, report_format = "json";
  auto* report = app.add_subcommand("report", "Recompute a report from persisted run records");
  report->add_option("--records", records_path, "Run records CSV")->required();
  report->add_option("--spec", report_spec, "Spec used for the run (adds predictions)");
  report->add_option("--out", report_out, "Output file (stdout if omitted)");
  report->add_option("--format", report_format, "Report format")->check(CLI::IsMember({"json", "csv"}));

  double sweep_step = 1.0;
  std::string sweep_out;
  auto* sweep = app.add_subcommand("sweep", "Coplanar angle sweep of both closed forms as CSV");
  sweep->add_option("--step-deg", sweep_step, "Angle step in degrees");
  sweep->add_option("--out", sweep_out, "CSV file (stdout if omitted)");

  auto* verify = app.add_subcommand("verify", "Check the closed forms at the published configurations");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (*simulate) return run_simulate(sim);
    if (*exact) return run_exact(config_path);
    if (*optimize) return run_optimize(opt);
    if (*report) return run_report(records_path, report_spec, report_out, report_format);
    if (*sweep) return run_sweep(sweep_step, sweep_out);
    if (*verify) return run_verify();
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 1;
}
