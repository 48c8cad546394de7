#include <doctest.h>
#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "eigenpath/experiment.hpp"
#include "eigenpath/json_io.hpp"

using namespace eigenpath;
namespace fs = std::filesystem;

namespace {

std::string cli() {
  const char* p = std::getenv("EIGENPATH_CLI");
  return p ? p : "";
}

int run_cli(const std::string& args) {
  std::string cmd = "\"" + cli() + "\" " + args + " >/dev/null 2>&1";
  int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

std::string scratch(const std::string& name) {
  fs::path dir = fs::path("cli_scratch") / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir.string();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string line;
  while (std::getline(ss, line)) out.push_back(line);
  return out;
}

const char* kGroverOde = R"({
  "instance": {"kind": "grover", "n": 8, "marked": [0]},
  "generator": {"kind": "jump", "unitary": "exp"},
  "schedule": {"kind": "constant", "value": 60.0},
  "execution": {"mode": "ode", "n_samples": 5}
})";

const char* kGroverTraj = R"({
  "instance": {"kind": "grover", "n": 8, "marked": [0]},
  "generator": {"kind": "jump", "unitary": "exp"},
  "schedule": {"kind": "constant", "value": 20.0},
  "execution": {"mode": "trajectories", "n_traj": 64, "master_seed": 3, "n_samples": 5}
})";

}  // namespace

TEST_CASE("fit_loglog_slope recovers a power law") {
  std::vector<double> x = {1.0, 2.0, 4.0, 8.0};
  std::vector<double> y;
  for (double v : x) y.push_back(3.0 * std::pow(v, 1.7));
  CHECK(fit_loglog_slope(x, y) == doctest::Approx(1.7).epsilon(1e-12));
}

TEST_CASE("cli run writes the documented artifacts") {
  REQUIRE(!cli().empty());
  std::string dir = scratch("run_ode");
  write_file(dir + "/config.json", kGroverOde);

  int rc = run_cli("run --config " + dir + "/config.json --out " + dir +
                   "/out --allow-violations");
  CHECK(rc == 0);
  CHECK(fs::exists(dir + "/out/run_result.json"));
  CHECK(fs::exists(dir + "/out/bound_report.json"));
  CHECK(fs::exists(dir + "/out/samples.csv"));
  CHECK(!fs::exists(dir + "/out/trajectories.jsonl"));  // ode mode has none

  Json run = Json::parse(slurp(dir + "/out/run_result.json"));
  CHECK(run.at("samples").size() == 5);
  CHECK(run.at("final_fidelity").get<double>() >= 0.0);
  CHECK(run.at("final_fidelity").get<double>() <= 1.0);
  CHECK(run.at("cost").at("jumps").get<double>() == doctest::Approx(60.0).epsilon(1e-9));

  Json bound = Json::parse(slurp(dir + "/out/bound_report.json"));
  CHECK(bound.at("family") == "jump_exp");
  CHECK(bound.at("total").get<double>() > 0.0);
  CHECK(bound.at("satisfied").get<bool>());

  std::vector<std::string> rows = lines_of(slurp(dir + "/out/samples.csv"));
  REQUIRE(rows.size() == 6);
  CHECK(rows[0] == "s,fidelity");
}

TEST_CASE("cli trajectories mode is seed- and thread-deterministic") {
  REQUIRE(!cli().empty());
  std::string dir = scratch("run_traj");
  write_file(dir + "/config.json", kGroverTraj);

  CHECK(run_cli("run --config " + dir + "/config.json --out " + dir + "/a --threads 1") == 0);
  CHECK(run_cli("run --config " + dir + "/config.json --out " + dir + "/b --threads 8") == 0);
  std::string ta = slurp(dir + "/a/trajectories.jsonl");
  CHECK(ta == slurp(dir + "/b/trajectories.jsonl"));
  CHECK(slurp(dir + "/a/run_result.json") == slurp(dir + "/b/run_result.json"));

  std::vector<std::string> rows = lines_of(ta);
  REQUIRE(rows.size() == 64);
  Json first = Json::parse(rows.front());
  CHECK(first.contains("seed"));
  CHECK(first.contains("jump_count"));
  CHECK(first.contains("time"));
  CHECK(first.contains("fidelity"));

  // --seed overrides the config seed and changes the realizations
  CHECK(run_cli("run --config " + dir + "/config.json --out " + dir + "/c --seed 5") == 0);
  CHECK(slurp(dir + "/c/trajectories.jsonl") != ta);
}

TEST_CASE("cli rejects invalid configs and arguments with exit 2") {
  REQUIRE(!cli().empty());
  std::string dir = scratch("bad_config");
  write_file(dir + "/eps.json", R"({
    "instance": {"kind": "grover", "n": 8, "marked": [0]},
    "generator": {"kind": "jump", "unitary": "exp"},
    "schedule": {"kind": "adaptive", "epsilon": 1.5, "p": 1.5},
    "execution": {"mode": "ode"}
  })");
  CHECK(run_cli("run --config " + dir + "/eps.json --out " + dir + "/out") == 2);
  CHECK(!fs::exists(dir + "/out/run_result.json"));

  write_file(dir + "/syntax.json", "{ not json");
  CHECK(run_cli("run --config " + dir + "/syntax.json --out " + dir + "/out2") == 2);

  CHECK(run_cli("run --out " + dir + "/out3") == 2);            // missing --config
  CHECK(run_cli("frobnicate") == 2);                            // unknown subcommand
  CHECK(run_cli("verify no_such_suite --out " + dir + "/v") == 2);
}

TEST_CASE("cli sweep emits csv, summary, and a slope for the N axis") {
  REQUIRE(!cli().empty());
  std::string dir = scratch("sweep");
  write_file(dir + "/config.json", R"({
    "instance": {"kind": "grover", "n": 4, "marked": [0]},
    "generator": {"kind": "liouville"},
    "schedule": {"kind": "adaptive", "p": 1.5, "epsilon": 0.1},
    "execution": {"mode": "ode", "n_samples": 2},
    "sweep": {"axis": "N", "values": [4, 8, 16]}
  })");
  CHECK(run_cli("sweep --config " + dir + "/config.json --out " + dir + "/out") == 0);

  std::vector<std::string> rows = lines_of(slurp(dir + "/out/sweep.csv"));
  REQUIRE(rows.size() == 4);
  CHECK(rows[0] == "value,cost,final_fidelity,bound,satisfied");

  Json summary = Json::parse(slurp(dir + "/out/sweep_summary.json"));
  CHECK(summary.at("axis") == "N");
  REQUIRE(summary.contains("slope"));
  CHECK(std::isfinite(summary.at("slope").get<double>()));
  REQUIRE(summary.at("rows").size() == 3);
  for (const Json& row : summary.at("rows")) {
    CHECK(row.at("satisfied").get<bool>());
    CHECK(row.at("cost").get<double>() > 0.0);
  }
}

TEST_CASE("cli verify reports suites and is byte-stable for a fixed seed") {
  REQUIRE(!cli().empty());
  std::string dir = scratch("verify");
  CHECK(run_cli("verify dynamics --seed 7 --out " + dir + "/a") == 0);
  CHECK(run_cli("verify dynamics --seed 7 --out " + dir + "/b") == 0);
  std::string ra = slurp(dir + "/a/verify_report.json");
  CHECK(ra == slurp(dir + "/b/verify_report.json"));

  Json rep = Json::parse(ra);
  CHECK(rep.at("pass").get<bool>());
  REQUIRE(rep.at("suites").size() == 1);
  CHECK(rep.at("suites")[0].at("suite") == "dynamics");
  CHECK(rep.at("suites")[0].at("seed").get<std::uint64_t>() == 7);
  CHECK(rep.at("suites")[0].at("checks").size() >= 5);
}

TEST_CASE("cli verify catches an injected right-hand-side defect") {
  REQUIRE(!cli().empty());
  std::string dir = scratch("verify_break");
  setenv("EIGENPATH_BREAK_RHS", "1", 1);
  int rc = run_cli("verify dynamics --out " + dir + "/out");
  unsetenv("EIGENPATH_BREAK_RHS");
  CHECK(rc == 3);
  Json rep = Json::parse(slurp(dir + "/out/verify_report.json"));
  CHECK(!rep.at("pass").get<bool>());
}

TEST_CASE("cli verify stochastic suite is thread-count invariant") {
  REQUIRE(!cli().empty());
  std::string dir = scratch("verify_threads");
  CHECK(run_cli("verify stochastic --seed 2 --threads 1 --out " + dir + "/t1") == 0);
  CHECK(run_cli("verify stochastic --seed 2 --threads 8 --out " + dir + "/t8") == 0);
  CHECK(slurp(dir + "/t1/verify_report.json") == slurp(dir + "/t8/verify_report.json"));
}
