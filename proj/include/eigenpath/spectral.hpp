#pragma once

#include <string>
#include <variant>
#include <vector>

#include "eigenpath/core.hpp"

namespace eigenpath {

// Interval on the real axis, for Hermitian operators.
struct IntervalWindow {
  double b0, b1;
};

// Circle in the complex plane, for general normal operators.
struct ContourWindow {
  Complex center;
  double radius;
};

using SpectralWindow = std::variant<IntervalWindow, ContourWindow>;

struct EigenCluster {
  Complex value;  // cluster representative (mean of members)
  int multiplicity = 0;
  ComplexMatrix projector;
};

// Spectral projector onto the eigenvalues inside a window, plus its
// complement and the cluster structure of the tracked spectrum. m counts
// distinct eigenvalue clusters, not total multiplicity. gap is the minimum
// distance between tracked and untracked eigenvalues.
struct ProjectorPair {
  ComplexMatrix p, q;
  int m = 0;
  std::vector<EigenCluster> inside;
  double gap = 0.0;
};

struct SpectralOptions {
  double cluster_reltol = 1e-8;  // relative eigenvalue clustering tolerance
  double boundary_tol = 1e-10;   // minimum distance to the window boundary
  bool hermitian_hint = false;
};

// Open-set membership test (interval endpoints included, contour open).
bool window_contains(const SpectralWindow& w, Complex z);

ProjectorPair window_projector(const ComplexMatrix& a, const SpectralWindow& w,
                               const SpectralOptions& opt = {});

// Off-diagonal solution of [A, Y] = [P, X], evaluated entrywise in the
// eigenbasis of A. Throws SingularOperatorError when a tracked/untracked
// eigenvalue pair comes within 1e-8.
ComplexMatrix twiddle_spectral(const ComplexMatrix& a, const ProjectorPair& pp,
                               const ComplexMatrix& x, bool hermitian_hint = false);

// The same operator as a resolvent contour integral (1/2 pi i) * closed
// integral of R(z) X R(z) dz over the circle, by trapezoidal quadrature.
// quad_points = 0 selects the node count adaptively, doubling until the
// result is stable to 1e-10 relative. Uses LU solves only; independent of
// the eigendecomposition route.
ComplexMatrix twiddle_contour(const ComplexMatrix& a, const ContourWindow& w,
                              const ComplexMatrix& x, int quad_points = 0);

// Default circle enclosing a window with clearance gap/2 on both sides.
ContourWindow enclosing_contour(const SpectralWindow& w, double gap);
ContourWindow enclosing_contour(const ProjectorPair& pp);

// P'(s) from A'(s): the off-diagonal solution applied to A'.
ComplexMatrix projector_derivative(const ComplexMatrix& a, const ProjectorPair& pp,
                                   const ComplexMatrix& aprime, bool hermitian_hint = false);

// P''(s) from A'(s), A''(s).
ComplexMatrix projector_second_derivative(const ComplexMatrix& a, const ProjectorPair& pp,
                                          const ComplexMatrix& aprime, const ComplexMatrix& asecond,
                                          bool hermitian_hint = false);

// Derivative of s -> offdiag-solution of X(s) along A(s), evaluated from
// pointwise data (A, A', X, X').
ComplexMatrix twiddle_derivative(const ComplexMatrix& a, const ProjectorPair& pp,
                                 const ComplexMatrix& aprime, const ComplexMatrix& x,
                                 const ComplexMatrix& xprime, bool hermitian_hint = false);

struct BoundCheck {
  std::string name;
  double bound = 0.0;
  double measured = 0.0;
  bool satisfied = false;
  double margin = 0.0;  // bound - measured
};

// Evaluates the operator-norm inequalities of the block/offdiag calculus
// on one instance (first/second derivative data at a point). When a path
// evaluator t -> A(t) with A(0) = a, A'(0) = aprime, A''(0) = asecond is
// supplied, the second-derivative inequality is also checked against a
// finite-difference measurement; otherwise that check is omitted.
std::vector<BoundCheck> norm_bound_suite(const ComplexMatrix& a, const ProjectorPair& pp,
                                         const ComplexMatrix& aprime, const ComplexMatrix& asecond,
                                         const std::function<ComplexMatrix(double)>& path_value = nullptr,
                                         bool hermitian_hint = false);

}  // namespace eigenpath
