#include "eigenpath/dynamics.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include "eigenpath/errors.hpp"

namespace eigenpath {

namespace {

constexpr double kTraceTol = 1e-9;
constexpr double kHermTol = 1e-10;
constexpr double kEigFloor = -1e-9;      // construction-time positivity slack
constexpr double kDriftFloor = -1e-6;    // integration-drift positivity slack
constexpr double kMinStep = 1e-9;

double min_eigenvalue(const ComplexMatrix& h) {
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(h, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

}  // namespace

DensityMatrix::DensityMatrix(ComplexMatrix m) : rho(std::move(m)) {
  if (rho.rows() != rho.cols() || rho.rows() == 0)
    throw ValidationError("density matrix must be square and non-empty");
  double tr_err = std::abs(rho.trace() - Complex(1.0, 0.0));
  if (tr_err > kTraceTol)
    throw NonPhysicalStateError("density matrix trace deviates from 1 by " +
                                std::to_string(tr_err));
  if (hermiticity_residual(rho) > kHermTol)
    throw NonPhysicalStateError("density matrix is not Hermitian");
  ComplexMatrix sym = 0.5 * (rho + rho.adjoint());
  if (min_eigenvalue(sym) < kEigFloor)
    throw NonPhysicalStateError("density matrix has a negative eigenvalue");
}

DensityMatrix DensityMatrix::pure(const ComplexVector& psi) {
  double nrm = psi.norm();
  if (nrm < 1e-12) throw ValidationError("cannot build a pure state from a zero vector");
  ComplexVector unit = psi / nrm;
  return DensityMatrix(ComplexMatrix(unit * unit.adjoint()));
}

std::string generator_kind_name(GeneratorKind kind) {
  switch (kind) {
    case GeneratorKind::Liouville: return "liouville";
    case GeneratorKind::JumpUnitary: return "jump_unitary";
    case GeneratorKind::PhaseRandomisation: return "phase_randomisation";
  }
  return "unknown";
}

double triangle_phi(double u) { return std::max(0.0, 1.0 - std::abs(u)); }

ComplexMatrix Generator::fidelity_projector(double s) const {
  if (projector_source) {
    SpectralOptions opt;
    opt.hermitian_hint = true;
    ProjectorPair pp = window_projector(projector_source->value(s),
                                        projector_source->window(s), opt);
    return embed ? embed(pp.p) : pp.p;
  }
  SpectralOptions opt;
  opt.hermitian_hint = (path.kind == OperatorPath::Kind::Hermitian);
  return window_projector(path.value(s), path.window(s), opt).p;
}

Generator make_liouville(OperatorPath h, Schedule rate) {
  if (h.kind != OperatorPath::Kind::Hermitian)
    throw ValidationError("Liouville generator needs a Hermitian path");
  Generator gen;
  gen.kind = GeneratorKind::Liouville;
  gen.path = std::move(h);
  gen.rate = std::move(rate);
  return gen;
}

Generator make_jump_unitary(OperatorPath u, Schedule rate,
                            std::optional<OperatorPath> projector_source,
                            std::function<ComplexMatrix(const ComplexMatrix&)> embed) {
  if (u.kind != OperatorPath::Kind::Unitary)
    throw ValidationError("jump generator needs a unitary path");
  if (projector_source && projector_source->kind != OperatorPath::Kind::Hermitian)
    throw ValidationError("projector source of a jump generator must be Hermitian");
  if (embed && !projector_source)
    throw ValidationError("an embedding map requires a projector source");
  Generator gen;
  gen.kind = GeneratorKind::JumpUnitary;
  gen.path = std::move(u);
  gen.rate = std::move(rate);
  gen.projector_source = std::move(projector_source);
  gen.embed = std::move(embed);
  return gen;
}

Generator make_phase_randomisation(OperatorPath h, Schedule rate, GapModel gap,
                                   std::function<double(double)> phi) {
  if (h.kind != OperatorPath::Kind::Hermitian)
    throw ValidationError("phase randomisation needs a Hermitian path");
  if (!gap.g0) throw GapModelMissingError("phase randomisation requires a gap model");
  Generator gen;
  gen.kind = GeneratorKind::PhaseRandomisation;
  gen.path = std::move(h);
  gen.rate = std::move(rate);
  gen.gap = std::move(gap);
  gen.phi = phi ? std::move(phi) : triangle_phi;
  return gen;
}

namespace {

// Per-s operator data shared by the RK4 stages. For jumps this is U(s); for
// phase randomisation, the eigenbasis of H(s) together with the entrywise
// damping profile of the averaged channel.
struct StageOps {
  double s = std::numeric_limits<double>::quiet_NaN();
  ComplexMatrix op;          // U or H
  bool has_phase = false;
  ComplexMatrix basis;       // eigenvectors of H(s)
  Eigen::MatrixXd damping;   // W - 1 with W the entrywise channel weight
};

// The averaged channel acts entrywise in the eigenbasis: tracked/tracked
// entries pass through (the P rho P block), tracked/untracked entries are
// removed, untracked/untracked entries pick up the characteristic function of
// the waiting density at the Bohr frequency.
Eigen::MatrixXd phase_damping(const Generator& gen, double s,
                              const RealVector& omega,
                              const std::vector<char>& inside) {
  const Eigen::Index n = omega.size();
  double g0 = gen.gap->g0(s);
  if (g0 <= 0.0) throw NonPositiveGapError("gap model returned g0 <= 0 at s=" +
                                           std::to_string(s));
  Eigen::MatrixXd damping(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index k = 0; k < n; ++k) {
      double w;
      if (inside[j] && inside[k]) w = 1.0;
      else if (inside[j] != inside[k]) w = 0.0;
      else w = gen.phi((omega[j] - omega[k]) / g0);
      damping(j, k) = w - 1.0;
    }
  }
  return damping;
}

StageOps eval_stage(const Generator& gen, double s) {
  StageOps st;
  st.s = s;
  st.op = gen.path.value(s);
  if (gen.kind == GeneratorKind::PhaseRandomisation) {
    SpectralDecomposition dec = eig_normal(st.op, /*hermitian_hint=*/true);
    const Eigen::Index n = dec.eigenvalues.size();
    SpectralWindow w = gen.path.window(s);
    std::vector<char> inside(n);
    bool any = false;
    for (Eigen::Index i = 0; i < n; ++i) {
      inside[i] = window_contains(w, dec.eigenvalues[i]);
      any = any || inside[i];
    }
    if (!any) throw EmptyWindowError("no eigenvalue inside the tracked window at s=" +
                                     std::to_string(s));
    RealVector omega = dec.eigenvalues.real();
    st.basis = dec.eigenvectors;
    st.damping = phase_damping(gen, s, omega, inside);
    st.has_phase = true;
  }
  return st;
}

ComplexMatrix stage_rhs(const Generator& gen, const StageOps& st,
                        const ComplexMatrix& rho) {
  double rate = gen.rate.lambda(st.s);
  switch (gen.kind) {
    case GeneratorKind::Liouville: {
      ComplexMatrix hr = st.op * rho;
      return Complex(0.0, -rate) * (hr - hr.adjoint());
    }
    case GeneratorKind::JumpUnitary:
      return rate * (st.op * rho * st.op.adjoint() - rho).eval();
    case GeneratorKind::PhaseRandomisation: {
      ComplexMatrix rho_hat = st.basis.adjoint() * rho * st.basis;
      ComplexMatrix mixed = st.damping.cast<Complex>().cwiseProduct(rho_hat);
      return rate * (st.basis * mixed * st.basis.adjoint()).eval();
    }
  }
  throw ValidationError("unknown generator kind");
}

// Exact-s memo of the last few stage evaluations; RK4 reuses s+h/2 twice and
// the next step starts where this one ended.
class StageCache {
 public:
  explicit StageCache(const Generator& gen) : gen_(gen) {}

  const StageOps& at(double s) {
    for (const auto& st : slots_)
      if (st.s == s) return st;
    slots_[next_] = eval_stage(gen_, s);
    const StageOps& out = slots_[next_];
    next_ = (next_ + 1) % slots_.size();
    ++misses_;
    return out;
  }

  long misses() const { return misses_; }

 private:
  const Generator& gen_;
  std::array<StageOps, 4> slots_;
  std::size_t next_ = 0;
  long misses_ = 0;
};

}  // namespace

ComplexMatrix liouville_rhs(const Generator& gen, double s, const ComplexMatrix& rho) {
  if (gen.kind != GeneratorKind::Liouville)
    throw ValidationError("generator is not of Liouville kind");
  return stage_rhs(gen, eval_stage(gen, s), rho);
}

ComplexMatrix jump_rhs(const Generator& gen, double s, const ComplexMatrix& rho) {
  if (gen.kind != GeneratorKind::JumpUnitary)
    throw ValidationError("generator is not of jump kind");
  return stage_rhs(gen, eval_stage(gen, s), rho);
}

ComplexMatrix phase_rand_rhs(const Generator& gen, double s, const ComplexMatrix& rho) {
  if (gen.kind != GeneratorKind::PhaseRandomisation)
    throw ValidationError("generator is not of phase-randomisation kind");
  return stage_rhs(gen, eval_stage(gen, s), rho);
}

ComplexMatrix generator_rhs(const Generator& gen, double s, const ComplexMatrix& rho) {
  return stage_rhs(gen, eval_stage(gen, s), rho);
}

double fidelity(const DensityMatrix& rho, const ComplexMatrix& projector) {
  if (projector.rows() != rho.rho.rows() || projector.cols() != rho.rho.cols())
    throw DimensionMismatchError("projector and state dimensions differ");
  double f = (projector * rho.rho).trace().real();
  return std::clamp(f, 0.0, 1.0);
}

double fidelity(const DensityMatrix& rho, const ProjectorPair& pp) {
  return fidelity(rho, pp.p);
}

RunResult integrate(const Generator& gen, const DensityMatrix& rho0,
                    const IntegrateOptions& opt) {
  if (opt.step_cap <= 0.0) throw ValidationError("step_cap must be positive");
  if (opt.n_samples < 2) throw ValidationError("need at least two fidelity samples");
  if (rho0.dim() != gen.path.dim)
    throw DimensionMismatchError("initial state dimension does not match the path");

  RunResult out;
  out.samples.reserve(opt.n_samples);

  ComplexMatrix rho = rho0.rho;
  StageCache cache(gen);

  auto record = [&](double s_at) {
    ComplexMatrix sym = 0.5 * (rho + rho.adjoint());
    if (opt.check_physical && min_eigenvalue(sym) < kDriftFloor)
      throw NonPhysicalStateError("state drifted non-positive at s=" +
                                  std::to_string(s_at));
    double f = (gen.fidelity_projector(s_at) * sym).trace().real();
    out.samples.emplace_back(s_at, std::clamp(f, 0.0, 1.0));
  };

  record(0.0);

  long steps = 0;
  double min_step = std::numeric_limits<double>::infinity();
  double s = 0.0;
  int next_sample = 1;
  while (next_sample < opt.n_samples) {
    double target = static_cast<double>(next_sample) / (opt.n_samples - 1);
    while (s < target) {
      double h = std::min(opt.step_cap, target - s);
      double rate = gen.rate.lambda(s);
      if (rate > 0.0) h = std::min(h, 0.1 / rate);
      // Absorb float crumbs into the closing step so s lands exactly on the
      // sample target instead of leaving a remainder below the step floor.
      const bool last = target - s - h < 1e-12;
      if (last) h = target - s;
      if (h < kMinStep)
        throw StepUnderflowError("required step below 1e-9 at s=" + std::to_string(s));
      const StageOps& st0 = cache.at(s);
      const StageOps& st1 = cache.at(s + 0.5 * h);
      ComplexMatrix k1 = stage_rhs(gen, st0, rho);
      ComplexMatrix k2 = stage_rhs(gen, st1, rho + (0.5 * h) * k1);
      ComplexMatrix k3 = stage_rhs(gen, st1, rho + (0.5 * h) * k2);
      double s_end = last ? target : s + h;
      const StageOps& st2 = cache.at(s_end);
      ComplexMatrix k4 = stage_rhs(gen, st2, rho + h * k3);
      rho += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
      rho = 0.5 * (rho + rho.adjoint()).eval();
      double tr = rho.trace().real();
      if (!(tr > 0.5)) throw NonPhysicalStateError("trace collapsed during integration");
      rho /= tr;
      min_step = std::min(min_step, h);
      ++steps;
      s = s_end;
    }
    record(s);
    ++next_sample;
  }

  out.final_fidelity = out.samples.back().second;
  out.cost = accumulate_cost(gen);
  out.diagnostics["steps"] = static_cast<double>(steps);
  out.diagnostics["operator_evaluations"] = static_cast<double>(cache.misses());
  out.diagnostics["min_step"] = min_step;
  out.diagnostics["step_cap"] = opt.step_cap;
  return out;
}

double step_doubling_delta(const Generator& gen, const DensityMatrix& rho0,
                           const IntegrateOptions& opt) {
  IntegrateOptions halved = opt;
  halved.step_cap = 0.5 * opt.step_cap;
  double coarse = integrate(gen, rho0, opt).final_fidelity;
  double fine = integrate(gen, rho0, halved).final_fidelity;
  return std::abs(coarse - fine);
}

CostRecord accumulate_cost(const Generator& gen, int quad_points) {
  CostRecord cost;
  double total_rate = simpson([&](double s) { return gen.rate.lambda(s); }, quad_points);
  switch (gen.kind) {
    case GeneratorKind::Liouville:
      cost.time = total_rate;
      break;
    case GeneratorKind::JumpUnitary:
      cost.jumps = total_rate;
      break;
    case GeneratorKind::PhaseRandomisation: {
      if (!gen.gap || !gen.gap->g0)
        throw GapModelMissingError("phase-randomisation cost needs a gap model");
      cost.jumps = total_rate;
      cost.time = kPhaseTimeConstant *
                  simpson([&](double s) { return gen.rate.lambda(s) / gen.gap->g0(s); },
                          quad_points);
      break;
    }
  }
  return cost;
}

}  // namespace eigenpath
