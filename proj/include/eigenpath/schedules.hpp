#pragma once
// Rate schedules lambda(s) (or time dilation T(s)), the certified gap-model
// constants behind adapted schedules, and numerical evaluation of the
// infidelity bounds for every supported evolution family.

#include <string>
#include <vector>

#include "eigenpath/paths.hpp"
#include "eigenpath/spectral.hpp"

namespace eigenpath {

// Cost model constant for phase randomisation: expected Hamiltonian time per
// jump is this over g0.
inline constexpr double kPhaseTimeConstant = 2.32132;

// Which analytic display applies.  Hamiltonian covers continuous Liouville
// evolution; the Jump* variants cover Poisson-distributed unitaries built in
// different ways; Phase covers Poisson-distributed phase randomisation.
enum class BoundFamily {
  Hamiltonian,
  JumpGeneric,
  JumpQubitised,
  JumpExp,
  JumpTrotter,
  Phase,
};

std::string bound_family_name(BoundFamily family);

struct Schedule {
  std::function<double(double)> lambda;            // rate, or T(s) for Liouville
  std::function<double(double)> inv_lambda_prime;  // d/ds of 1/lambda
  bool adaptive = false;
  double epsilon = 0.0;  // target infidelity (adaptive only)
  double C = 0.0;        // schedule constant (adaptive only)
  std::string name;
};

Schedule constant_schedule(double value);

// Certification of the gap-model integrals: B_p and B_{3-p} are the smallest
// constants with integral(g0^-p) <= B_p g0m^{1-p} and
// integral(g0^-(3-p)) <= B_{3-p} g0m^{p-2}, by Simpson quadrature.
struct AssumptionCertificate {
  double B_p = 0.0;
  double B_3mp = 0.0;
  double I_p = 0.0;     // raw integral of g0^-p
  double I_3mp = 0.0;   // raw integral of g0^-(3-p)
  double g0_grid_min = 0.0;
};

AssumptionCertificate certify_assumption(const GapModel& gap, int grid = 2000);

// Copy of the model with B_p / B_3mp filled in.
GapModel certified(const GapModel& gap, int grid = 2000);

// Copy of the model with exponent p and B_p / B_3mp filled in: from the
// model's family constant when one is available (and 1 < p < 2, keeping
// both exponents inside its domain), otherwise the minimal certified
// values. Family constants keep adapted schedules uniform across an
// instance family; minimal constants make the cost formula tight.
GapModel with_assumption_constants(const GapModel& gap, double p, int grid = 2000);

// sup-norms of the path derivatives over a uniform grid, inflated by a
// safety factor; these feed the schedule constant C.
PathNorms path_norm_profile(const OperatorPath& path, int grid = 1000, double inflate = 1.01);

// The constant C that makes lambda = C / (eps g0^q g0m^{2-p}) reach target
// infidelity eps.  `path` is the Hamiltonian path for Hamiltonian /
// JumpQubitised / JumpExp / Phase and the unitary path for JumpGeneric and
// JumpTrotter.  Requires a certified gap model.
double compute_C(BoundFamily family, const OperatorPath& path, const GapModel& gap, int m,
                 int grid = 1000);

// Same constant from supplied sup-norm bounds instead of a grid scan: valid
// whenever norms dominate the true path norms and dg0_bound dominates
// |g0'|. Family-level inputs give a C uniform across the instance family.
// value_norm_bound must dominate sup ||H(s)|| for JumpQubitised.
double compute_C(BoundFamily family, const PathNorms& norms, const GapModel& gap, int m,
                 double value_norm_bound = 0.0);

// q = p except for phase randomisation, where the time cost of a jump is
// itself 1/g0 and the exponent drops by one.
Schedule adaptive_schedule(BoundFamily family, const GapModel& gap, double epsilon, double C);

// Headline cost guaranteed for the adaptive schedule: expected jump count
// (or total time for Hamiltonian / Phase families).
double closed_form_cost(BoundFamily family, const GapModel& gap, double epsilon, double C);

struct BoundTerm {
  std::string name;
  double value = 0.0;
};

struct BoundReport {
  std::string family;
  std::string schedule;
  double total = 0.0;               // the infidelity bound
  double alternative_total = -1.0;  // jump family: the coarser second display
  std::vector<BoundTerm> terms;
  int m = 1;
};

// Numerical evaluation of the infidelity bound display for the family, by
// Simpson quadrature with analytic (1/lambda)'.  `path` follows the same
// convention as compute_C.  quad_points must be even (panel count).
// trotter_step must be set for JumpTrotter.
BoundReport eval_bound(BoundFamily family, const OperatorPath& path, const GapModel& gap, int m,
                       const Schedule& schedule, int quad_points = 800,
                       double trotter_step = 0.0);

// Scaling diagnostic for the gap-integral lemmas: across a doubling sweep of
// the instance parameter, the normalised integral must stay within a factor
// 2 band.  For p > 1 the normalisation is g0m^{1-p}; for p = 1 it is
// log(1/g0m), the model's own logarithmic scale.
struct GapIntegralReport {
  std::string kind;
  double p = 0.0;
  std::vector<double> parameter;  // N/M or kappa
  std::vector<double> integral;   // integral of g0^-p
  std::vector<double> ratio;      // normalised values
  double spread = 0.0;            // max ratio / min ratio
  bool pass = false;
};

enum class GapKind { Grover, Qlsp };

GapIntegralReport gap_integral_check(GapKind kind, double p);

// Simpson rule on [0,1] with n panels (n even).
double simpson(const std::function<double(double)>& f, int n = 800);

}  // namespace eigenpath
