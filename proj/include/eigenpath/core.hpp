#pragma once

#include <Eigen/Dense>
#include <complex>
#include <functional>

#include "eigenpath/errors.hpp"

namespace eigenpath {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;

// Eigendecomposition of a normal matrix: A = V diag(w) V^* with V unitary
// and eigenvalues sorted by (real, imag).
struct SpectralDecomposition {
  ComplexVector eigenvalues;
  ComplexMatrix eigenvectors;
};

struct CoreTolerances {
  double normality = 1e-10;     // relative, on ||A A* - A* A||
  double pseudoinverse = 1e-10; // relative singular value cutoff
  double spectra_disjoint = 1e-8;
};

// Largest singular value.
double operator_norm(const ComplexMatrix& a);

double hermiticity_residual(const ComplexMatrix& a);
bool is_hermitian(const ComplexMatrix& a, double tol = 1e-10);

// Relative normality residual ||A A* - A* A|| / ||A||^2 (0 for ||A|| = 0).
double normality_residual(const ComplexMatrix& a);

// Eigendecomposition of a normal matrix. Hermitian inputs take the
// self-adjoint solver; general normal inputs go through a Schur
// decomposition whose triangular factor must be diagonal up to tolerance.
// Throws NonNormalError when the input is not normal, NoConvergenceError
// when the underlying solver fails.
SpectralDecomposition eig_normal(const ComplexMatrix& a, bool hermitian_hint = false,
                                 const CoreTolerances& tol = {});

// f(A) = V f(w) V^* for normal A.
ComplexMatrix matrix_function(const ComplexMatrix& a, const std::function<Complex(Complex)>& f,
                              bool hermitian_hint = false);

// Same, reusing a precomputed decomposition.
ComplexMatrix matrix_function(const SpectralDecomposition& dec,
                              const std::function<Complex(Complex)>& f);

// Moore-Penrose pseudoinverse of a normal matrix: eigenvalues with
// |w| <= cutoff * ||A|| invert to zero.
ComplexMatrix pseudoinverse_normal(const ComplexMatrix& a, double cutoff = 1e-10);

// Unique off-diagonal solution Y of [A, Y] = [P, X] with P Y P = Q Y Q = 0,
// where P is a spectral projector of the normal matrix A and Q = 1 - P.
// Solved as two Sylvester equations on the P/Q blocks via dense LU of the
// vectorised systems; no eigendecomposition of A is involved, which keeps
// this route independent from the spectral-formula evaluation. Throws
// SingularOperatorError when the restricted spectra come within 1e-8.
ComplexMatrix sylvester_block_solve(const ComplexMatrix& a, const ComplexMatrix& p,
                                    const ComplexMatrix& q, const ComplexMatrix& x,
                                    const CoreTolerances& tol = {});

// Orthonormal basis of the range of a Hermitian projector (columns).
ComplexMatrix projector_range_basis(const ComplexMatrix& p, double tol = 1e-8);

ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b);

// Scalar function with derivatives, applied to Hermitian operators.
struct ScalarFunction {
  std::function<Complex(double)> f;
  std::function<Complex(double)> df;
  std::function<Complex(double)> d2f;
};

ComplexMatrix hermitian_function(const ComplexMatrix& h, const ScalarFunction& f);

// First and second derivatives of s -> f(H(s)) from pointwise data, via
// divided differences in the eigenbasis of H.
ComplexMatrix hermitian_function_derivative(const ComplexMatrix& h, const ComplexMatrix& hprime,
                                            const ScalarFunction& f);
ComplexMatrix hermitian_function_second_derivative(const ComplexMatrix& h,
                                                   const ComplexMatrix& hprime,
                                                   const ComplexMatrix& hsecond,
                                                   const ScalarFunction& f);

}  // namespace eigenpath
