#pragma once

#include <functional>

#include "eigenpath/core.hpp"
#include "eigenpath/rng.hpp"
#include "eigenpath/spectral.hpp"

namespace eigenpath {

// Gaussian Hermitian matrix (unnormalised) and Haar unitary via phase-fixed QR.
ComplexMatrix random_hermitian(int dim, Rng& rng);
ComplexMatrix random_unitary(int dim, Rng& rng);
ComplexVector random_state(int dim, Rng& rng);

// One draw from the operator-calculus certification ensemble: a matrix that
// stays exactly normal along an analytic path through it, with its first two
// derivatives in closed form and a window that tracks a well-separated
// eigenvalue group (all spectral gaps >= 0.05 by construction).
//
// The path is A(t) = E(t) V D(t) V* E(t)* with E(t) = exp(tK) unitary,
// K anti-Hermitian and D(t) = D0 + t D1 + t^2/2 D2 diagonal, so
//   A'(0)  = [K, A] + V D1 V*
//   A''(0) = [K, [K, A]] + 2 [K, V D1 V*] + V D2 V*.
struct CalculusInstance {
  ComplexMatrix a, aprime, asecond;
  SpectralWindow window;
  std::function<ComplexMatrix(double)> path_value;
  bool hermitian = false;
  int dim = 0;
};

CalculusInstance random_calculus_instance(Rng& rng, bool hermitian);

// Hermitian matrix whose singular values lie in [1/kappa, 1] with both
// endpoints attained exactly; eigenvalue signs are random.
ComplexMatrix random_conditioned_hermitian(int dim, double kappa, Rng& rng);

}  // namespace eigenpath
