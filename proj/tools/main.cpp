// Command-line front end: single-run integration, parameter sweeps, and the
// self-verification suites. All outputs are deterministic functions of
// (config, seed), so identical invocations produce byte-identical files.
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "eigenpath/errors.hpp"
#include "eigenpath/experiment.hpp"
#include "eigenpath/json_io.hpp"
#include "eigenpath/verify.hpp"

namespace fs = std::filesystem;

namespace {

int resolve_threads(int flag_value) {
  if (flag_value > 0) return flag_value;
  if (const char* env = std::getenv("POISSON_EIGENPATH_THREADS")) {
    int v = std::atoi(env);
    if (v > 0) return v;
  }
  return 1;
}

std::string join(const std::string& dir, const char* name) {
  return (fs::path(dir) / name).string();
}

struct CommonOpts {
  std::string config;
  std::string out = "out";
  std::uint64_t seed = 0;
  bool seed_set = false;
  int threads = 0;
  bool allow_violations = false;
};

void add_common(CLI::App* cmd, CommonOpts& opts, bool needs_config) {
  auto* c = cmd->add_option("--config", opts.config, "experiment config (JSON)");
  if (needs_config) c->required();
  cmd->add_option("--out", opts.out, "output directory (created if missing)");
  cmd->add_option("--seed", opts.seed, "master seed; overrides the config value")
      ->each([&opts](const std::string&) { opts.seed_set = true; });
  cmd->add_option("--threads", opts.threads,
                  "worker threads (env POISSON_EIGENPATH_THREADS, default 1)");
  cmd->add_flag("--allow-violations", opts.allow_violations,
                "exit 0 even when a bound report is violated");
}

int cmd_run(const CommonOpts& opts) {
  eigenpath::ExperimentConfig cfg =
      eigenpath::parse_experiment_config(eigenpath::load_json_file(opts.config));
  if (opts.seed_set) cfg.execution.master_seed = opts.seed;
  eigenpath::RunArtifacts art =
      eigenpath::run_experiment(cfg, resolve_threads(opts.threads));

  fs::create_directories(opts.out);
  eigenpath::write_text_file(join(opts.out, "run_result.json"),
                             eigenpath::run_result_to_json(art.run).dump(2) + "\n");
  eigenpath::write_text_file(join(opts.out, "bound_report.json"),
                             eigenpath::bound_outcome_to_json(art.bound).dump(2) + "\n");
  eigenpath::write_text_file(join(opts.out, "samples.csv"),
                             eigenpath::samples_csv(art.run));
  if (art.mc)
    eigenpath::write_text_file(join(opts.out, "trajectories.jsonl"),
                               eigenpath::trajectories_jsonl(*art.mc));

  bool satisfied = art.bound.satisfied.value_or(true);
  std::printf("final_fidelity %.6f  infidelity %.3e  bound %.3e  %s\n",
              art.run.final_fidelity, 1.0 - art.run.final_fidelity,
              art.bound.report.total, satisfied ? "satisfied" : "VIOLATED");
  std::printf("wrote %s\n", opts.out.c_str());
  if (!satisfied && !opts.allow_violations) return 3;
  return 0;
}

int cmd_sweep(const CommonOpts& opts) {
  eigenpath::ExperimentConfig cfg =
      eigenpath::parse_experiment_config(eigenpath::load_json_file(opts.config));
  if (opts.seed_set) cfg.execution.master_seed = opts.seed;
  eigenpath::SweepResult res =
      eigenpath::run_sweep(cfg, resolve_threads(opts.threads));

  fs::create_directories(opts.out);
  eigenpath::write_text_file(join(opts.out, "sweep.csv"), eigenpath::sweep_csv(res));
  eigenpath::Json summary;
  summary["axis"] = res.axis;
  if (res.slope) summary["slope"] = *res.slope;
  eigenpath::Json rows = eigenpath::Json::array();
  bool all_satisfied = true;
  for (const eigenpath::SweepRow& r : res.rows) {
    rows.push_back({{"value", r.value},
                    {"cost", r.cost},
                    {"final_fidelity", r.final_fidelity},
                    {"bound", r.bound},
                    {"satisfied", r.satisfied}});
    all_satisfied = all_satisfied && r.satisfied;
  }
  summary["rows"] = std::move(rows);
  eigenpath::write_text_file(join(opts.out, "sweep_summary.json"),
                             summary.dump(2) + "\n");

  for (const eigenpath::SweepRow& r : res.rows)
    std::printf("%s=%-10g cost %-12.5g fidelity %.6f bound %.3e %s\n", res.axis.c_str(),
                r.value, r.cost, r.final_fidelity, r.bound,
                r.satisfied ? "satisfied" : "VIOLATED");
  if (res.slope) std::printf("log-log cost slope vs %s: %.4f\n", res.axis.c_str(), *res.slope);
  std::printf("wrote %s\n", opts.out.c_str());
  if (!all_satisfied && !opts.allow_violations) return 3;
  return 0;
}

int cmd_verify(const CommonOpts& opts, const std::string& suite) {
  std::uint64_t seed = opts.seed_set ? opts.seed : 1;
  std::vector<eigenpath::SuiteReport> reports =
      eigenpath::run_verify(suite, seed, resolve_threads(opts.threads));

  fs::create_directories(opts.out);
  eigenpath::Json report = eigenpath::verify_report_json(reports);
  eigenpath::write_text_file(join(opts.out, "verify_report.json"),
                             report.dump(2) + "\n");

  bool pass = true;
  for (const eigenpath::SuiteReport& rep : reports) {
    std::printf("suite %s: %s\n", rep.suite.c_str(), rep.pass ? "pass" : "FAIL");
    for (const eigenpath::CheckResult& c : rep.checks)
      std::printf("  %-32s %s  margin %.3g  %s\n", c.name.c_str(),
                  c.pass ? "pass" : "FAIL", c.margin, c.detail.c_str());
    pass = pass && rep.pass;
  }
  std::printf("wrote %s\n", opts.out.c_str());
  return pass ? 0 : 3;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Randomised eigenpath traversal: density-matrix integration, jump-process "
      "sampling, and rigorous infidelity bounds for gapped eigenpath following."};
  app.require_subcommand(1);
  app.footer(
      "Output files:\n"
      "  run:   run_result.json, bound_report.json, samples.csv (columns: "
      "s,fidelity),\n"
      "         trajectories.jsonl in trajectories mode (one JSON object per "
      "line:\n"
      "         {seed, jump_count, time, fidelity})\n"
      "  sweep: sweep.csv (columns: value,cost,final_fidelity,bound,satisfied),\n"
      "         sweep_summary.json (adds the fitted log-log slope for axes N, "
      "kappa)\n"
      "  verify: verify_report.json\n"
      "Exit codes: 0 success, 2 invalid config or arguments, 3 numerical failure "
      "or violated bound/check.");

  CommonOpts run_opts, sweep_opts, verify_opts;
  std::string suite = "all";

  CLI::App* run = app.add_subcommand("run", "integrate one configured experiment");
  add_common(run, run_opts, true);
  CLI::App* sweep = app.add_subcommand("sweep", "run the config across sweep.values");
  add_common(sweep, sweep_opts, true);
  CLI::App* verify =
      app.add_subcommand("verify", "run the library's invariant suites");
  add_common(verify, verify_opts, false);
  verify->add_option("suite", suite,
                     "appendix_a | dynamics | stochastic | bounds | all");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (run->parsed()) return cmd_run(run_opts);
    if (sweep->parsed()) return cmd_sweep(sweep_opts);
    return cmd_verify(verify_opts, suite);
  } catch (const eigenpath::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const eigenpath::NumericalError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
