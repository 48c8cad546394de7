#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "eigenpath/dynamics.hpp"
#include "eigenpath/json_io.hpp"
#include "eigenpath/paths.hpp"
#include "eigenpath/schedules.hpp"
#include "eigenpath/stochastic.hpp"

namespace eigenpath {

// Parsed and validated form of the experiment config file. Parsing rejects
// out-of-domain parameters (epsilon in (0,1), p in [1,2], step > 0, ...) with
// the offending config path in the message, before any matrix work starts.
struct InstanceConfig {
  std::string kind;  // grover | qlsp | qlsp_random | custom
  // grover
  int n = 0;
  std::vector<int> marked;
  std::string representation = "auto";
  // qlsp (fixed matrix) and qlsp_random
  ComplexMatrix matrix;
  ComplexVector b;
  double kappa_hint = 0.0;
  int dim = 0;
  double kappa = 0.0;
  std::uint64_t seed = 0;
  // custom
  ComplexMatrix h0, h1;
  double window_b0_start = 0.0, window_b0_end = 0.0;
  double window_b1_start = 0.0, window_b1_end = 0.0;
};

struct GeneratorConfig {
  std::string kind;     // liouville | jump | phase_rand
  std::string unitary;  // exp | qubitised | trotter
  double trotter_step = 0.0;
  int trotter_order = 2;
  std::string phi = "fejer";
  std::vector<std::pair<double, double>> phi_table;  // custom phi samples (u, phi)
};

struct ScheduleConfig {
  std::string kind;  // constant | adaptive
  double value = 0.0;
  double p = 1.5;
  double epsilon = 0.1;
};

struct ExecutionConfig {
  std::string mode = "ode";  // ode | trajectories
  double step_cap = 1e-2;
  int n_samples = 101;
  int n_traj = 0;
  std::uint64_t master_seed = 1;
};

struct SweepConfig {
  std::string axis;  // N | M | kappa | epsilon | lambda | p | h
  std::vector<double> values;
};

struct ExperimentConfig {
  InstanceConfig instance;
  GeneratorConfig generator;
  ScheduleConfig schedule;
  ExecutionConfig execution;
  std::optional<SweepConfig> sweep;
};

ExperimentConfig parse_experiment_config(const Json& j);

// Fully assembled run: generator with its schedule, the initial state, and
// everything eval_bound needs for the matching theorem family.
struct Experiment {
  Generator gen;
  ComplexVector initial_state;
  BoundFamily family = BoundFamily::Hamiltonian;
  OperatorPath bound_path;  // Hermitian source path the bound display reads
  GapModel bound_gap;       // gap model of bound_path (certified when adaptive)
  int m = 1;
  double trotter_step = 0.0;
  std::optional<ComplexVector> target;  // solution vector for overlap reporting
  std::string label;
};

Experiment build_experiment(const ExperimentConfig& cfg);

// Worst-case tracked cluster count along the path (33-point grid).
int tracked_cluster_count(const OperatorPath& path);

// Gap model estimated from the window projector on a uniform grid; a
// numerical stand-in for custom instances without an analytic model.
GapModel numeric_gap_model(const OperatorPath& path, int grid = 400);

struct RunArtifacts {
  RunResult run;
  BoundOutcome bound;
  std::optional<MonteCarloResult> mc;
};

RunArtifacts run_experiment(const ExperimentConfig& cfg, int n_threads);

struct SweepRow {
  double value = 0.0;
  double cost = 0.0;
  double final_fidelity = 0.0;
  double bound = 0.0;
  bool satisfied = false;
};

struct SweepResult {
  std::string axis;
  std::vector<SweepRow> rows;
  std::optional<double> slope;  // log-log cost slope, axes N and kappa only
};

SweepResult run_sweep(const ExperimentConfig& cfg, int n_threads);
std::string sweep_csv(const SweepResult& r);

double fit_loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace eigenpath
