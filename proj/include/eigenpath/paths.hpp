#pragma once

#include <functional>
#include <map>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "eigenpath/spectral.hpp"

namespace eigenpath {

// Smooth one-parameter operator family on s in [0, 1] with a tracked
// spectral window. value/derivative/second_derivative are pointwise
// evaluators; window(s) encloses the tracked eigenvalues at s.
struct OperatorPath {
  enum class Kind { Hermitian, Unitary };
  Kind kind = Kind::Hermitian;
  int dim = 0;
  std::function<ComplexMatrix(double)> value;
  std::function<ComplexMatrix(double)> derivative;
  std::function<ComplexMatrix(double)> second_derivative;
  std::function<SpectralWindow(double)> window;
  std::map<std::string, std::string> metadata;
};

// Certified lower-bound model of the tracked gap along a path.
// B_p / B_3mp are set by certify_assumption; negative means uncertified.
struct GapModel {
  std::function<double(double)> g0;
  std::function<double(double)> g0_prime;  // may be null; callers fall back to differences
  double g0m = 0.0;
  double dg0_bound = 0.0;
  double p = 1.5;
  double B_p = -1.0;
  double B_3mp = -1.0;
  // For the closed-form gap families: an instance-size-independent constant
  // with integral(g0^-q) <= family_constant(q) * g0m^{1-q} for every
  // 1 < q < 2. This is what makes adapted-schedule costs scale with 1/g0m
  // across a whole family instead of inheriting the slow approach of the
  // minimal constants to their asymptote. Null when only numerical
  // certification is available.
  std::function<double(double)> family_constant;
};

double gap_model_derivative(const GapModel& gap, double s);

// sup-norm bounds for the first and second path derivatives; either measured
// on a grid (path_norm_profile) or supplied as family-level constants.
struct PathNorms {
  double d1_max = 0.0;  // sup ||X'||
  double d2_max = 0.0;  // sup ||X''||
};

OperatorPath linear_path(const ComplexMatrix& h0, const ComplexMatrix& h1,
                         std::function<SpectralWindow(double)> window);

enum class GroverRepresentation { Auto, Full, Reduced };

// Unstructured-search interpolation between the projector complements of
// the uniform state and of the marked subspace. The tracked eigenvalue is
// the lower branch of the avoided crossing. For large N the dynamics lives
// in the two-dimensional span of the marked/unmarked uniform states; the
// reduced representation works there exactly, with identical eigenvalue
// branches and gap model.
struct GroverInstance {
  OperatorPath path;
  GapModel gap;
  ComplexVector initial_state;
  int n = 0;
  int n_marked = 0;
  bool reduced = false;
  // ||H1 - H0|| = sqrt(1 - M/N) < 1 and H'' = 0 for every instance; the
  // size-uniform bounds keep adapted-schedule constants uniform in N.
  PathNorms family_norms{1.0, 0.0};
};

GroverInstance grover_path(int n, const std::vector<int>& marked,
                           GroverRepresentation rep = GroverRepresentation::Auto);

// Gap models alone (no operators), for integral diagnostics and sweeps.
GapModel grover_gap_model(int n, int n_marked);
GapModel qlsp_gap_model(double kappa);

// Linear-system path: encodes A x = b as a frustration-free eigenvalue-0
// problem of dimension 4N whose null space follows the normalised solution
// of the interpolated system. A must be Hermitian and invertible (use
// hermitian_dilation otherwise); kappa >= 2 required.
struct QlspInstance {
  OperatorPath path;
  GapModel gap;
  ComplexVector initial_state;
  ComplexVector target_state;  // |0>(x)|x(1)> in the 4N-dimensional space
  double kappa = 0.0;
  ComplexMatrix a_rescaled;
  ComplexVector b;
  std::function<ComplexVector(double)> tracked_solution;  // |0>(x)|x(s)>
  // ||H1 - H0|| = ||(sigma_x (x) A - sigma_z (x) 1) Q|| <= sqrt(1 + ||A||^2)
  // = sqrt(2) after rescaling (the two terms anticommute), and H'' = 0; the
  // kappa-uniform bounds keep adapted-schedule constants uniform in kappa.
  PathNorms family_norms{std::numbers::sqrt2, 0.0};
};

QlspInstance qlsp_path(const ComplexMatrix& a, const ComplexVector& b,
                       std::optional<double> kappa_hint = std::nullopt);

// [[0, A], [A*, 0]] with right-hand side (b, 0); the solution of the
// dilated system carries A^{-1} b in its lower block.
std::pair<ComplexMatrix, ComplexVector> hermitian_dilation(const ComplexMatrix& a,
                                                           const ComplexVector& b);

// Unitary walk [[H, -S], [S, H]] with S = sqrt(1 - H^2); doubles the space,
// maps tracked eigenvalues w to w + i sqrt(1 - w^2) and preserves the gap.
// Requires ||H(s)|| <= 1 - 1e-6.
OperatorPath qubitised_path(const OperatorPath& h);

// U(s) = exp(-i pi H(s) / 2); requires ||H(s)|| <= 1/2 so eigenphase
// distances dominate eigenvalue distances.
OperatorPath exp_path(const OperatorPath& h);

// Product-formula unitary for a linear Hermitian path, order 1 or 2.
// Requires 0 < step < sqrt(g0) along the whole path.
OperatorPath trotter_path(const OperatorPath& h, const GapModel& gap, double step, int order);

// H - shift * I; windows shift, gaps are unchanged.
OperatorPath shift_path(const OperatorPath& h, double shift);

// factor * H; windows and gaps scale.
OperatorPath scale_path(const OperatorPath& h, double factor);
GapModel scale_gap_model(const GapModel& gap, double factor);

// Gap model of the order-2 product-formula unitary: step * (g0 - step^2).
GapModel trotter_gap_model(const GapModel& gap, double step);

// Embedding of tracked projectors for the doubled qubitised space.
ComplexMatrix qubitised_embed_projector(const ComplexMatrix& p);
ComplexVector qubitised_embed_state(const ComplexVector& psi);

}  // namespace eigenpath
