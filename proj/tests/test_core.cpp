#include <doctest.h>

#include <cmath>

#include "eigenpath/core.hpp"

using namespace eigenpath;

namespace {

ComplexMatrix mat2(Complex a, Complex b, Complex c, Complex d) {
  ComplexMatrix m(2, 2);
  m << a, b, c, d;
  return m;
}

const ComplexMatrix kSigmaX = mat2(0, 1, 1, 0);
const ComplexMatrix kSigmaZ = mat2(1, 0, 0, -1);

}  // namespace

TEST_CASE("operator_norm is the largest singular value") {
  CHECK(operator_norm(mat2(3, 0, 0, -4)) == doctest::Approx(4.0).epsilon(1e-14));
  CHECK(operator_norm(ComplexMatrix::Zero(3, 3)) == 0.0);
  // Jordan block [[1,1],[0,1]]: singular values are the golden ratio and its
  // reciprocal (A*A has eigenvalues (3 +- sqrt 5)/2).
  double golden = 0.5 * (1.0 + std::sqrt(5.0));
  CHECK(operator_norm(mat2(1, 1, 0, 1)) == doctest::Approx(golden).epsilon(1e-14));
  CHECK(operator_norm(mat2(0, Complex(0, 2), 0, 0)) == doctest::Approx(2.0).epsilon(1e-14));
}

TEST_CASE("hermiticity helpers") {
  CHECK(is_hermitian(kSigmaX));
  CHECK(is_hermitian(mat2(1, Complex(0, 1), Complex(0, -1), 2)));
  CHECK(!is_hermitian(mat2(0, 1, 0, 0)));
  CHECK(hermiticity_residual(kSigmaZ) == 0.0);
  // A - A* = [[0,1],[-1,0]], norm 1
  CHECK(hermiticity_residual(mat2(0, 1, 0, 0)) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("normality_residual separates normal from non-normal") {
  CHECK(normality_residual(kSigmaX) <= 1e-15);
  ComplexMatrix rot = mat2(0, -1, 1, 0);  // unitary, hence normal
  CHECK(normality_residual(rot) <= 1e-15);
  // AA* - A*A = diag(1, -1) for the nilpotent shift, and ||A|| = 1.
  CHECK(normality_residual(mat2(0, 1, 0, 0)) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("eig_normal reconstructs Hermitian input with sorted spectrum") {
  ComplexMatrix a = mat2(1, 2, 2, 1);  // eigenvalues -1, 3
  SpectralDecomposition dec = eig_normal(a, true);
  REQUIRE(dec.eigenvalues.size() == 2);
  CHECK(dec.eigenvalues(0).real() == doctest::Approx(-1.0).epsilon(1e-13));
  CHECK(dec.eigenvalues(1).real() == doctest::Approx(3.0).epsilon(1e-13));
  CHECK(std::abs(dec.eigenvalues(0).imag()) <= 1e-14);
  ComplexMatrix rec = dec.eigenvectors * dec.eigenvalues.asDiagonal() *
                      dec.eigenvectors.adjoint();
  CHECK(operator_norm(rec - a) <= 1e-13);
  ComplexMatrix gram = dec.eigenvectors.adjoint() * dec.eigenvectors;
  CHECK(operator_norm(gram - ComplexMatrix::Identity(2, 2)) <= 1e-13);
}

TEST_CASE("eig_normal handles general normal matrices via Schur") {
  ComplexMatrix rot = mat2(0, -1, 1, 0);  // eigenvalues +-i
  SpectralDecomposition dec = eig_normal(rot);
  REQUIRE(dec.eigenvalues.size() == 2);
  // sorted by (real, imag): -i before +i
  CHECK(std::abs(dec.eigenvalues(0) - Complex(0, -1)) <= 1e-13);
  CHECK(std::abs(dec.eigenvalues(1) - Complex(0, 1)) <= 1e-13);
  ComplexMatrix rec = dec.eigenvectors * dec.eigenvalues.asDiagonal() *
                      dec.eigenvectors.adjoint();
  CHECK(operator_norm(rec - rot) <= 1e-13);
}

TEST_CASE("eig_normal rejects non-normal input") {
  CHECK_THROWS_AS(eig_normal(mat2(0, 1, 0, 0)), NonNormalError);
}

TEST_CASE("matrix_function applies scalar functions spectrally") {
  ComplexMatrix e = matrix_function(kSigmaZ, [](Complex z) { return std::exp(z); }, true);
  CHECK(std::abs(e(0, 0) - std::exp(1.0)) <= 1e-13);
  CHECK(std::abs(e(1, 1) - std::exp(-1.0)) <= 1e-13);
  CHECK(std::abs(e(0, 1)) <= 1e-14);

  ComplexMatrix a = mat2(1, 2, 2, 1);
  ComplexMatrix sq = matrix_function(a, [](Complex z) { return z * z; }, true);
  CHECK(operator_norm(sq - a * a) <= 1e-12);
}

TEST_CASE("pseudoinverse_normal inverts away from the cutoff and zeroes below it") {
  ComplexMatrix pinv = pseudoinverse_normal(mat2(2, 0, 0, 0));
  CHECK(std::abs(pinv(0, 0) - 0.5) <= 1e-14);
  CHECK(std::abs(pinv(1, 1)) == 0.0);

  // eigenvalue 5e-11 sits below the relative cutoff 1e-10 * ||A||
  ComplexMatrix near = pseudoinverse_normal(mat2(1, 0, 0, 5e-11));
  CHECK(std::abs(near(1, 1)) == 0.0);

  ComplexMatrix a = mat2(1, 2, 2, 1);
  ComplexMatrix ap = pseudoinverse_normal(a);
  CHECK(operator_norm(a * ap * a - a) <= 1e-12);
}

TEST_CASE("sylvester_block_solve solves the off-diagonal commutator equation") {
  // A = sigma_z, P = diag(1,0), X = sigma_x: [P,X] = [[0,1],[-1,0]] and the
  // off-diagonal ansatz Y = [[0,y],[z,0]] gives [A,Y] = [[0,2y],[-2z,0]],
  // so Y = sigma_x / 2.
  ComplexMatrix p = mat2(1, 0, 0, 0);
  ComplexMatrix q = mat2(0, 0, 0, 1);
  ComplexMatrix y = sylvester_block_solve(kSigmaZ, p, q, kSigmaX);
  CHECK(operator_norm(y - 0.5 * kSigmaX) <= 1e-12);

  // residual identity [A, Y] = [P, X] on a non-trivial 3x3 instance
  ComplexMatrix a3(3, 3);
  a3 << 1, 0.5, Complex(0, 0.25), 0.5, -1, 0, Complex(0, -0.25), 0, 2;
  SpectralDecomposition dec = eig_normal(a3, true);
  ComplexMatrix p3 = dec.eigenvectors.col(0) * dec.eigenvectors.col(0).adjoint();
  ComplexMatrix q3 = ComplexMatrix::Identity(3, 3) - p3;
  ComplexMatrix x3(3, 3);
  x3 << 0, 1, 2, 1, 0, Complex(0, 1), 2, Complex(0, -1), 0;
  ComplexMatrix y3 = sylvester_block_solve(a3, p3, q3, x3);
  ComplexMatrix lhs = a3 * y3 - y3 * a3;
  ComplexMatrix rhs = p3 * x3 - x3 * p3;
  CHECK(operator_norm(lhs - rhs) <= 1e-10);
  CHECK(operator_norm(p3 * y3 * p3) <= 1e-10);
  CHECK(operator_norm(q3 * y3 * q3) <= 1e-10);
}

TEST_CASE("sylvester_block_solve rejects touching spectra") {
  // P and Q blocks carry eigenvalues within 5e-9 < 1e-8 of each other.
  ComplexMatrix a = mat2(1.0, 0, 0, 1.0 + 5e-9);
  ComplexMatrix p = mat2(1, 0, 0, 0);
  ComplexMatrix q = mat2(0, 0, 0, 1);
  CHECK_THROWS_AS(sylvester_block_solve(a, p, q, kSigmaX), SingularOperatorError);
}

TEST_CASE("projector_range_basis returns an orthonormal range basis") {
  ComplexMatrix p = ComplexMatrix::Zero(3, 3);
  p(0, 0) = 1.0;
  p(1, 1) = 1.0;
  ComplexMatrix b = projector_range_basis(p);
  REQUIRE(b.rows() == 3);
  REQUIRE(b.cols() == 2);
  CHECK(operator_norm(ComplexMatrix(b.adjoint() * b) - ComplexMatrix::Identity(2, 2)) <= 1e-13);
  CHECK(operator_norm(p * b - b) <= 1e-13);
}

TEST_CASE("kron matches the hand-expanded block layout") {
  ComplexMatrix a = mat2(1, 2, 3, 4);
  ComplexMatrix k = kron(a, kSigmaX);
  REQUIRE(k.rows() == 4);
  CHECK(std::abs(k(0, 1) - Complex(1)) <= 1e-15);
  CHECK(std::abs(k(0, 0)) == 0.0);
  CHECK(std::abs(k(0, 3) - Complex(2)) <= 1e-15);
  CHECK(std::abs(k(2, 1) - Complex(3)) <= 1e-15);
  CHECK(std::abs(k(3, 2) - Complex(4)) <= 1e-15);
}

TEST_CASE("hermitian_function derivatives match finite differences") {
  ScalarFunction exp_fn;
  exp_fn.f = [](double x) { return Complex(std::exp(x), 0.0); };
  exp_fn.df = exp_fn.f;
  exp_fn.d2f = exp_fn.f;

  ComplexMatrix h0 = kSigmaZ;
  ComplexMatrix hp = kSigmaX;                  // H(t) = sigma_z + t sigma_x
  ComplexMatrix hs = 0.3 * kSigmaZ;            // plus t^2/2 curvature
  auto h_at = [&](double t) { return ComplexMatrix(h0 + t * hp + 0.5 * t * t * hs); };

  CHECK(operator_norm(hermitian_function(h0, exp_fn) -
                      matrix_function(h0, [](Complex z) { return std::exp(z); }, true)) <= 1e-13);

  ComplexMatrix d1 = hermitian_function_derivative(h0, hp, exp_fn);
  double fd1_step = 1e-5;
  ComplexMatrix fd1 = (hermitian_function(h_at(fd1_step), exp_fn) -
                       hermitian_function(h_at(-fd1_step), exp_fn)) /
                      (2.0 * fd1_step);
  CHECK(operator_norm(d1 - fd1) <= 1e-8);

  ComplexMatrix d2 = hermitian_function_second_derivative(h0, hp, hs, exp_fn);
  double fd2_step = 1e-4;
  ComplexMatrix fd2 = (hermitian_function(h_at(fd2_step), exp_fn) -
                       2.0 * hermitian_function(h0, exp_fn) +
                       hermitian_function(h_at(-fd2_step), exp_fn)) /
                      (fd2_step * fd2_step);
  CHECK(operator_norm(d2 - fd2) <= 1e-6);
}

TEST_CASE("hermitian_function derivative handles degenerate eigenvalues") {
  // H = I has a single doubly-degenerate eigenvalue; the divided difference
  // collapses to f'(1) entrywise, so d/dt f(I + t X) = f'(1) X.
  ScalarFunction sq;
  sq.f = [](double x) { return Complex(x * x, 0.0); };
  sq.df = [](double x) { return Complex(2.0 * x, 0.0); };
  sq.d2f = [](double) { return Complex(2.0, 0.0); };
  ComplexMatrix eye = ComplexMatrix::Identity(2, 2);
  ComplexMatrix d = hermitian_function_derivative(eye, kSigmaX, sq);
  CHECK(operator_norm(d - 2.0 * kSigmaX) <= 1e-12);
}
