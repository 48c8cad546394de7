#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "eigenpath/core.hpp"
#include "eigenpath/paths.hpp"
#include "eigenpath/schedules.hpp"
#include "eigenpath/spectral.hpp"

namespace eigenpath {

// Density operator with construction-time physicality checks: unit trace to
// 1e-9, Hermitian to 1e-10, smallest eigenvalue >= -1e-9.
struct DensityMatrix {
  ComplexMatrix rho;

  explicit DensityMatrix(ComplexMatrix m);
  static DensityMatrix pure(const ComplexVector& psi);

  Eigen::Index dim() const { return rho.rows(); }
};

enum class GeneratorKind { Liouville, JumpUnitary, PhaseRandomisation };

std::string generator_kind_name(GeneratorKind kind);

// Master-equation generator over the path parameter s in [0, 1].
//
//   Liouville           d rho/ds = -i T(s) [H(s), rho]
//   JumpUnitary         d rho/ds = lambda(s) (U rho U* - rho)
//   PhaseRandomisation  d rho/ds = lambda(s) (P rho P + Phi_Q(rho) - rho)
//
// `path` carries H (Liouville, phase) or U (jump). `rate` supplies T or
// lambda. When the unitary was constructed from a Hermitian source whose
// tracked projector lives in a different space (qubitisation), set
// `projector_source` and `embed` so fidelity is measured against the embedded
// source projector rather than the window projector of U itself.
struct Generator {
  GeneratorKind kind = GeneratorKind::Liouville;
  OperatorPath path;
  Schedule rate;

  std::optional<OperatorPath> projector_source;
  std::function<ComplexMatrix(const ComplexMatrix&)> embed;

  // Phase randomisation only: the gap model sets the frequency scale of the
  // averaging density, and phi is the characteristic function of that density
  // in units of g0(s): phi(0) = 1 and phi(u) = 0 for |u| >= 1.
  std::optional<GapModel> gap;
  std::function<double(double)> phi;

  ComplexMatrix fidelity_projector(double s) const;
};

Generator make_liouville(OperatorPath h, Schedule rate);
Generator make_jump_unitary(OperatorPath u, Schedule rate,
                            std::optional<OperatorPath> projector_source = {},
                            std::function<ComplexMatrix(const ComplexMatrix&)> embed = nullptr);
Generator make_phase_randomisation(OperatorPath h, Schedule rate, GapModel gap,
                                   std::function<double(double)> phi = nullptr);

// Characteristic function of the triangular averaging profile,
// max(0, 1 - |u|); the transform of the squared-sinc waiting density.
double triangle_phi(double u);

// Right-hand sides at fixed s. Exposed for property tests; integrate() uses
// cached operator evaluations instead of calling these directly.
ComplexMatrix liouville_rhs(const Generator& gen, double s, const ComplexMatrix& rho);
ComplexMatrix jump_rhs(const Generator& gen, double s, const ComplexMatrix& rho);
ComplexMatrix phase_rand_rhs(const Generator& gen, double s, const ComplexMatrix& rho);
ComplexMatrix generator_rhs(const Generator& gen, double s, const ComplexMatrix& rho);

// Tr(P rho), clamped to [0, 1].
double fidelity(const DensityMatrix& rho, const ComplexMatrix& projector);
double fidelity(const DensityMatrix& rho, const ProjectorPair& pp);

struct CostRecord {
  double jumps = 0.0;  // expected jump count, integral of lambda
  double time = 0.0;   // Hamiltonian time (Liouville: integral of T;
                       // phase randomisation: 2.32132 * integral of lambda/g0)
};

struct RunResult {
  std::vector<std::pair<double, double>> samples;  // (s, fidelity)
  double final_fidelity = 0.0;
  CostRecord cost;
  std::map<std::string, double> diagnostics;
};

struct IntegrateOptions {
  double step_cap = 1e-2;  // ds additionally capped at 0.1 / rate(s)
  int n_samples = 101;     // fidelity recorded on a uniform s-grid
  bool check_physical = true;
};

// Classical RK4 over s in [0, 1] with ds <= min(step_cap, 0.1/rate(s)),
// landing exactly on the sample grid. The state is re-Hermitised and
// trace-renormalised after every step; at sample points the smallest
// eigenvalue is checked against -1e-6 (NonPhysicalStateError). Requires
// ds >= 1e-9 throughout (StepUnderflowError).
RunResult integrate(const Generator& gen, const DensityMatrix& rho0,
                    const IntegrateOptions& opt = {});

// Convergence diagnostic: |final fidelity at step_cap - at step_cap/2|.
double step_doubling_delta(const Generator& gen, const DensityMatrix& rho0,
                           const IntegrateOptions& opt = {});

// Expected resource usage by Simpson quadrature of the rate.
CostRecord accumulate_cost(const Generator& gen, int quad_points = 800);

}  // namespace eigenpath
