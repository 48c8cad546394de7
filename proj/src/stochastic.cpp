#include "eigenpath/stochastic.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <thread>

#include "eigenpath/errors.hpp"

namespace eigenpath {

namespace {

constexpr int kEnvelopeGrid = 1000;
constexpr double kEnvelopeInflation = 1.01;
constexpr double kTauCutoff = 200.0;  // unit-gap truncation of the waiting density
constexpr double kTauTableStep = 1e-3;

double grid_max(const std::function<double(double)>& rate, int cells) {
  double hi = 0.0;
  for (int i = 0; i <= cells; ++i) {
    double r = rate(static_cast<double>(i) / cells);
    if (!(r >= 0.0))
      throw ValidationError("jump rate must be non-negative and finite");
    hi = std::max(hi, r);
  }
  return hi;
}

// Ascending thinning pass under a fixed dominating rate. Returns nullopt when
// the true rate beats the envelope, so the caller can refine and restart.
std::optional<PoissonRealization> try_thinning(
    const std::function<double(double)>& rate, double envelope, std::uint64_t seed) {
  PoissonRealization out;
  if (envelope == 0.0) return out;  // identically zero rate
  Rng rng(seed);
  double s = 0.0;
  for (;;) {
    s += rng.exponential(envelope);
    if (s >= 1.0) break;
    double accept = rng.uniform();  // drawn unconditionally to keep the
                                    // stream aligned across envelope retries
    double r = rate(s);
    if (r > envelope) return std::nullopt;
    if (accept * envelope < r) out.points.push_back(s);
  }
  return out;
}

// Magnitude table of the truncated squared-sinc density at unit gap:
// p(y) = (1/pi) (sin(y/2)/(y/2))^2 on [0, 200], trapezoidal CDF.
struct TauTable {
  std::vector<double> cdf;
  double mean_abs = 0.0;

  TauTable() {
    auto density = [](double y) {
      if (y == 0.0) return 1.0 / M_PI;
      double half = 0.5 * y;
      double sc = std::sin(half) / half;
      return sc * sc / M_PI;
    };
    const int n = static_cast<int>(kTauCutoff / kTauTableStep);
    cdf.resize(n + 1);
    cdf[0] = 0.0;
    double prev = density(0.0);
    double first_moment = 0.0;
    for (int i = 1; i <= n; ++i) {
      double y = i * kTauTableStep;
      double cur = density(y);
      cdf[i] = cdf[i - 1] + 0.5 * (prev + cur) * kTauTableStep;
      first_moment += 0.5 * ((y - kTauTableStep) * prev + y * cur) * kTauTableStep;
      prev = cur;
    }
    double total = cdf[n];
    for (double& c : cdf) c /= total;
    mean_abs = first_moment / total;
  }
};

const TauTable& tau_table() {
  static const TauTable table;
  return table;
}

}  // namespace

PoissonRealization sample_poisson(const std::function<double(double)>& rate,
                                  std::uint64_t seed) {
  double envelope = kEnvelopeInflation * grid_max(rate, kEnvelopeGrid);
  if (auto out = try_thinning(rate, envelope, seed)) return *out;
  envelope = kEnvelopeInflation * grid_max(rate, 10 * kEnvelopeGrid);
  if (auto out = try_thinning(rate, envelope, seed)) return *out;
  throw EnvelopeViolationError(
      "rate exceeds its grid envelope even after refinement; "
      "the rate appears to have structure below the 1e-4 grid scale");
}

double sample_tau(double g0, Rng& rng) {
  if (!(g0 > 0.0)) throw NonPositiveGapError("tau sampling needs g0 > 0");
  const TauTable& table = tau_table();
  double u = rng.uniform();
  auto it = std::lower_bound(table.cdf.begin(), table.cdf.end(), u);
  std::size_t hi = std::min<std::size_t>(it - table.cdf.begin(), table.cdf.size() - 1);
  double y;
  if (hi == 0) {
    y = 0.0;
  } else {
    double c0 = table.cdf[hi - 1], c1 = table.cdf[hi];
    double frac = (c1 > c0) ? (u - c0) / (c1 - c0) : 0.0;
    y = (hi - 1 + frac) * kTauTableStep;
  }
  double sign = (rng.uniform() < 0.5) ? -1.0 : 1.0;
  return sign * y / g0;
}

double truncated_mean_abs_tau() { return tau_table().mean_abs; }

TrajectoryResult run_trajectory_unitary(const OperatorPath& u,
                                        const PoissonRealization& jumps,
                                        const ComplexVector& psi0) {
  if (u.kind != OperatorPath::Kind::Unitary)
    throw ValidationError("jump trajectories need a unitary path");
  if (psi0.size() != u.dim)
    throw DimensionMismatchError("initial state does not match the path dimension");
  TrajectoryResult out;
  out.final_state = psi0 / psi0.norm();
  for (double s : jumps.points) {
    out.final_state = u.value(s) * out.final_state;
    out.final_state /= out.final_state.norm();
  }
  out.jump_count = static_cast<long>(jumps.points.size());
  return out;
}

TrajectoryResult run_trajectory_phase(const OperatorPath& h, const GapModel& gap,
                                      const PoissonRealization& jumps,
                                      const ComplexVector& psi0, Rng& rng) {
  if (h.kind != OperatorPath::Kind::Hermitian)
    throw ValidationError("phase trajectories need a Hermitian path");
  if (!gap.g0) throw GapModelMissingError("phase trajectories need a gap model");
  if (psi0.size() != h.dim)
    throw DimensionMismatchError("initial state does not match the path dimension");
  TrajectoryResult out;
  out.final_state = psi0 / psi0.norm();
  for (double s : jumps.points) {
    double tau = sample_tau(gap.g0(s), rng);
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(h.value(s));
    ComplexVector phases(h.dim);
    for (Eigen::Index j = 0; j < h.dim; ++j)
      phases[j] = std::exp(Complex(0.0, -tau * es.eigenvalues()[j]));
    out.final_state = es.eigenvectors() *
                      phases.asDiagonal() *
                      (es.eigenvectors().adjoint() * out.final_state);
    out.final_state /= out.final_state.norm();
    out.hamiltonian_time += std::abs(tau);
  }
  out.jump_count = static_cast<long>(jumps.points.size());
  return out;
}

TrajectoryResult run_trajectory_schrodinger(const OperatorPath& h, const Schedule& rate,
                                            const ComplexVector& psi0,
                                            double step_cap) {
  if (h.kind != OperatorPath::Kind::Hermitian)
    throw ValidationError("Schrodinger transport needs a Hermitian path");
  if (psi0.size() != h.dim)
    throw DimensionMismatchError("initial state does not match the path dimension");
  if (step_cap <= 0.0) throw ValidationError("step_cap must be positive");

  // Same stage memoisation trick as the density integrator: RK4 re-uses the
  // midpoint and the next step starts at this step's endpoint.
  struct Slot {
    double s = std::numeric_limits<double>::quiet_NaN();
    ComplexMatrix hmat;
  };
  std::array<Slot, 4> slots;
  std::size_t next = 0;
  auto h_at = [&](double s) -> const ComplexMatrix& {
    for (const auto& sl : slots)
      if (sl.s == s) return sl.hmat;
    slots[next] = {s, h.value(s)};
    const ComplexMatrix& out = slots[next].hmat;
    next = (next + 1) % slots.size();
    return out;
  };
  auto rhs = [&](double s, const ComplexVector& psi) -> ComplexVector {
    return Complex(0.0, -rate.lambda(s)) * (h_at(s) * psi);
  };

  TrajectoryResult out;
  ComplexVector psi = psi0 / psi0.norm();
  double s = 0.0;
  while (s < 1.0) {
    double hstep = std::min(step_cap, 1.0 - s);
    double r = rate.lambda(s);
    if (r > 0.0) hstep = std::min(hstep, 0.1 / r);
    // Absorb float crumbs into the closing step (same policy as integrate).
    const bool last = 1.0 - s - hstep < 1e-12;
    if (last) hstep = 1.0 - s;
    if (hstep < 1e-9)
      throw StepUnderflowError("required step below 1e-9 at s=" + std::to_string(s));
    double s_end = last ? 1.0 : s + hstep;
    ComplexVector k1 = rhs(s, psi);
    ComplexVector k2 = rhs(s + 0.5 * hstep, psi + (0.5 * hstep) * k1);
    ComplexVector k3 = rhs(s + 0.5 * hstep, psi + (0.5 * hstep) * k2);
    ComplexVector k4 = rhs(s_end, psi + hstep * k3);
    psi += (hstep / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    psi /= psi.norm();
    s = s_end;
  }
  out.final_state = psi;
  out.hamiltonian_time = simpson([&](double t) { return rate.lambda(t); }, 800);
  return out;
}

MonteCarloResult monte_carlo(const MonteCarloSpec& spec, int n_trajectories,
                             std::uint64_t master_seed,
                             const ComplexMatrix& final_projector, int n_threads) {
  if (n_trajectories < 1) throw ValidationError("need at least one trajectory");
  if (n_threads < 1) throw ValidationError("thread count must be positive");
  if (final_projector.rows() != spec.path.dim || final_projector.cols() != spec.path.dim)
    throw DimensionMismatchError("final projector does not match the path dimension");
  if (spec.kind == GeneratorKind::PhaseRandomisation && (!spec.gap || !spec.gap->g0))
    throw GapModelMissingError("phase-randomisation sampling needs a gap model");

  const int n = n_trajectories;
  std::vector<TrajectoryResult> results(n);

  auto run_one = [&](int i) {
    std::uint64_t seed = mix_seed(master_seed, static_cast<std::uint64_t>(i));
    TrajectoryResult tr;
    switch (spec.kind) {
      case GeneratorKind::JumpUnitary: {
        PoissonRealization jumps =
            sample_poisson([&](double s) { return spec.rate.lambda(s); }, seed);
        tr = run_trajectory_unitary(spec.path, jumps, spec.initial_state);
        break;
      }
      case GeneratorKind::PhaseRandomisation: {
        PoissonRealization jumps =
            sample_poisson([&](double s) { return spec.rate.lambda(s); }, seed);
        Rng tau_rng(mix_seed(seed, 1));
        tr = run_trajectory_phase(spec.path, *spec.gap, jumps, spec.initial_state,
                                  tau_rng);
        break;
      }
      case GeneratorKind::Liouville:
        tr = run_trajectory_schrodinger(spec.path, spec.rate, spec.initial_state,
                                        spec.step_cap);
        break;
    }
    tr.seed = seed;
    results[static_cast<std::size_t>(i)] = std::move(tr);
  };

  // Liouville transport consumes no randomness, so every trajectory is the
  // same deterministic solve; computing it once is exact deduplication.
  if (spec.kind == GeneratorKind::Liouville) {
    run_one(0);
    for (int i = 1; i < n; ++i) {
      results[i] = results[0];
      results[i].seed = mix_seed(master_seed, static_cast<std::uint64_t>(i));
    }
  } else if (n_threads == 1 || n < 4) {
    for (int i = 0; i < n; ++i) run_one(i);
  } else {
    std::vector<std::thread> pool;
    int workers = std::min(n_threads, n);
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        for (int i = w; i < n; i += workers) run_one(i);
      });
    }
    for (auto& t : pool) t.join();
  }

  // Index-ordered sequential reduction: identical output for any thread count.
  MonteCarloResult out;
  const Eigen::Index dim = spec.path.dim;
  out.mean_state = ComplexMatrix::Zero(dim, dim);
  std::vector<double> fidelities(n);
  out.per_trajectory.resize(n);
  double jump_sum = 0.0, time_sum = 0.0;
  for (int i = 0; i < n; ++i) {
    const ComplexVector& psi = results[i].final_state;
    out.mean_state.noalias() += psi * psi.adjoint();
    fidelities[i] = std::clamp((psi.adjoint() * final_projector * psi)(0).real(), 0.0, 1.0);
    out.per_trajectory[i] = {results[i].seed, results[i].jump_count,
                             results[i].hamiltonian_time, fidelities[i]};
    jump_sum += static_cast<double>(results[i].jump_count);
    time_sum += results[i].hamiltonian_time;
  }
  out.mean_state /= static_cast<double>(n);
  double fsum = 0.0;
  for (double f : fidelities) fsum += f;
  out.fidelity_mean = fsum / n;
  double var = 0.0;
  for (double f : fidelities) var += (f - out.fidelity_mean) * (f - out.fidelity_mean);
  out.fidelity_stderr = (n > 1) ? std::sqrt(var / (n - 1) / n) : 0.0;
  double purity = out.mean_state.squaredNorm();  // |rho|_F^2
  out.state_stderr =
      0.5 * std::sqrt(static_cast<double>(dim) * std::max(0.0, 1.0 - purity) / n);
  out.mean_jumps = jump_sum / n;
  out.mean_time = time_sum / n;
  out.n_trajectories = n;
  return out;
}

}  // namespace eigenpath
