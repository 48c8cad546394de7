#include <doctest.h>

#include <cmath>
#include <complex>

#include "eigenpath/dynamics.hpp"

using namespace eigenpath;

namespace {

ComplexMatrix mat2(Complex a, Complex b, Complex c, Complex d) {
  ComplexMatrix m(2, 2);
  m << a, b, c, d;
  return m;
}

const Complex kI(0.0, 1.0);

OperatorPath constant_hermitian(const ComplexMatrix& h, SpectralWindow w) {
  OperatorPath p;
  p.kind = OperatorPath::Kind::Hermitian;
  p.dim = static_cast<int>(h.rows());
  p.value = [h](double) { return h; };
  p.derivative = [n = h.rows()](double) { return ComplexMatrix(ComplexMatrix::Zero(n, n)); };
  p.second_derivative = p.derivative;
  p.window = [w](double) { return w; };
  return p;
}

// H(s) = (1-s) sigma_z + s sigma_x; the tracked upper branch
// sqrt((1-s)^2 + s^2) stays in [1/sqrt(2), 1].
OperatorPath upper_branch() {
  ComplexMatrix sz = mat2(1, 0, 0, -1);
  ComplexMatrix sx = mat2(0, 1, 1, 0);
  return linear_path(sz, sx, [](double) { return SpectralWindow{IntervalWindow{0.1, 2.0}}; });
}

GapModel flat_gap(double value) {
  GapModel g;
  g.g0 = [value](double) { return value; };
  g.g0_prime = [](double) { return 0.0; };
  g.g0m = value;
  g.dg0_bound = 0.0;
  return g;
}

Schedule linear_rate() {
  Schedule s;
  s.lambda = [](double t) { return 1.0 + t; };
  s.inv_lambda_prime = [](double t) { return -1.0 / ((1.0 + t) * (1.0 + t)); };
  s.name = "linear";
  return s;
}

ComplexVector basis_state(int dim, int k) {
  ComplexVector v = ComplexVector::Zero(dim);
  v[k] = 1.0;
  return v;
}

}  // namespace

TEST_CASE("density matrix constructor enforces physicality") {
  CHECK_NOTHROW(DensityMatrix(ComplexMatrix(0.5 * ComplexMatrix::Identity(2, 2))));
  CHECK_THROWS_AS(DensityMatrix(mat2(0.6, 0, 0, 0.5)), NonPhysicalStateError);   // trace 1.1
  CHECK_THROWS_AS(DensityMatrix(mat2(1, 0.3, 0, 0)), NonPhysicalStateError);     // not Hermitian
  CHECK_THROWS_AS(DensityMatrix(mat2(1.5, 0, 0, -0.5)), NonPhysicalStateError);  // negative eig
  CHECK_THROWS_AS(DensityMatrix(ComplexMatrix(ComplexMatrix::Zero(2, 3))), ValidationError);

  DensityMatrix rho = DensityMatrix::pure(2.0 * basis_state(2, 0));  // normalises
  CHECK(rho.rho(0, 0).real() == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(rho.dim() == 2);
  CHECK_THROWS_AS(DensityMatrix::pure(ComplexVector::Zero(3)), ValidationError);
}

TEST_CASE("triangle_phi") {
  CHECK(triangle_phi(0.0) == 1.0);
  CHECK(triangle_phi(0.5) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(triangle_phi(-0.5) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(triangle_phi(1.0) == 0.0);
  CHECK(triangle_phi(3.0) == 0.0);
}

TEST_CASE("liouville_rhs is -i T [H, rho]") {
  ComplexMatrix sz = mat2(1, 0, 0, -1);
  Generator gen = make_liouville(constant_hermitian(sz, IntervalWindow{0.5, 1.5}),
                                 constant_schedule(2.0));
  ComplexMatrix plus = mat2(0.5, 0.5, 0.5, 0.5);
  // [sigma_z, |+><+|] = [[0, 1], [-1, 0]]
  ComplexMatrix expect = mat2(0, -2.0 * kI, 2.0 * kI, 0);
  CHECK((liouville_rhs(gen, 0.3, plus) - expect).norm() <= 1e-14);
}

TEST_CASE("jump_rhs is lambda (U rho U* - rho)") {
  ComplexMatrix sx = mat2(0, 1, 1, 0);
  OperatorPath u = constant_hermitian(sx, ContourWindow{Complex(1.0, 0.0), 0.5});
  u.kind = OperatorPath::Kind::Unitary;
  Generator gen = make_jump_unitary(u, constant_schedule(3.0));
  ComplexMatrix rho = mat2(1, 0, 0, 0);
  ComplexMatrix expect = mat2(-3, 0, 0, 3);
  CHECK((jump_rhs(gen, 0.0, rho) - expect).norm() <= 1e-14);
}

TEST_CASE("phase_rand_rhs damps coherences entrywise in the eigenbasis") {
  ComplexMatrix h = mat2(0, 0, 0, 1);
  OperatorPath path = constant_hermitian(h, IntervalWindow{-0.25, 0.25});

  // tracked/untracked coherence decays at the full rate
  Generator gen = make_phase_randomisation(path, constant_schedule(2.0), flat_gap(1.0));
  ComplexMatrix plus = mat2(0.5, 0.5, 0.5, 0.5);
  ComplexMatrix expect = mat2(0, -1, -1, 0);
  CHECK((phase_rand_rhs(gen, 0.4, plus) - expect).norm() <= 1e-13);

  // untracked/untracked pairs damp by phi(Bohr frequency / g0)
  ComplexMatrix h3 = ComplexMatrix::Zero(3, 3);
  h3(1, 1) = 0.4;
  h3(2, 2) = 1.0;
  OperatorPath path3 = constant_hermitian(h3, IntervalWindow{-0.1, 0.1});
  ComplexMatrix rho3 = ComplexMatrix::Constant(3, 3, Complex(1.0 / 3.0, 0.0));

  Generator g3 = make_phase_randomisation(path3, constant_schedule(1.0), flat_gap(1.0));
  ComplexMatrix r = phase_rand_rhs(g3, 0.0, rho3);
  CHECK(std::abs(r(0, 0)) <= 1e-14);
  CHECK(std::abs(r(1, 1)) <= 1e-14);
  CHECK(r(0, 1).real() == doctest::Approx(-1.0 / 3.0).epsilon(1e-13));
  CHECK(r(1, 2).real() == doctest::Approx((triangle_phi(0.6) - 1.0) / 3.0).epsilon(1e-13));

  // the frequency argument is measured in units of g0
  Generator g3w = make_phase_randomisation(path3, constant_schedule(1.0), flat_gap(2.0));
  ComplexMatrix rw = phase_rand_rhs(g3w, 0.0, rho3);
  CHECK(rw(1, 2).real() == doctest::Approx((triangle_phi(0.3) - 1.0) / 3.0).epsilon(1e-13));

  // custom characteristic function
  Generator g3c = make_phase_randomisation(path3, constant_schedule(1.0), flat_gap(1.0),
                                           [](double v) { return std::max(0.0, 1.0 - v * v); });
  ComplexMatrix rc = phase_rand_rhs(g3c, 0.0, rho3);
  CHECK(rc(1, 2).real() == doctest::Approx(-0.36 / 3.0).epsilon(1e-13));
}

TEST_CASE("rhs entry points reject the wrong generator kind") {
  ComplexMatrix sz = mat2(1, 0, 0, -1);
  OperatorPath h = constant_hermitian(sz, IntervalWindow{0.5, 1.5});
  Generator gen = make_liouville(h, constant_schedule(1.0));
  ComplexMatrix rho = mat2(1, 0, 0, 0);
  CHECK_THROWS_AS(jump_rhs(gen, 0.0, rho), ValidationError);
  CHECK_THROWS_AS(phase_rand_rhs(gen, 0.0, rho), ValidationError);
  CHECK((generator_rhs(gen, 0.0, rho) - liouville_rhs(gen, 0.0, rho)).norm() == 0.0);
}

TEST_CASE("generator factories validate their inputs") {
  ComplexMatrix sz = mat2(1, 0, 0, -1);
  OperatorPath h = constant_hermitian(sz, IntervalWindow{0.5, 1.5});
  OperatorPath u = h;
  u.kind = OperatorPath::Kind::Unitary;
  Schedule one = constant_schedule(1.0);

  CHECK_THROWS_AS(make_liouville(u, one), ValidationError);
  CHECK_THROWS_AS(make_jump_unitary(h, one), ValidationError);
  CHECK_THROWS_AS(make_jump_unitary(u, one, u), ValidationError);  // unitary projector source
  CHECK_THROWS_AS(make_jump_unitary(u, one, {}, [](const ComplexMatrix& p) { return p; }),
                  ValidationError);  // embedding without a source
  CHECK_THROWS_AS(make_phase_randomisation(u, one, flat_gap(1.0)), ValidationError);
  CHECK_THROWS_AS(make_phase_randomisation(h, one, GapModel{}), GapModelMissingError);

  // default averaging profile is the triangle
  Generator gen = make_phase_randomisation(h, one, flat_gap(1.0));
  CHECK(gen.phi(0.3) == doctest::Approx(0.7).epsilon(1e-15));
}

TEST_CASE("fidelity clamps and checks dimensions") {
  DensityMatrix rho = DensityMatrix::pure(basis_state(2, 0));
  CHECK(fidelity(rho, ComplexMatrix(2.0 * ComplexMatrix::Identity(2, 2))) == 1.0);
  CHECK(fidelity(rho, ComplexMatrix(-ComplexMatrix::Identity(2, 2))) == 0.0);
  CHECK_THROWS_AS(fidelity(rho, ComplexMatrix(ComplexMatrix::Identity(3, 3))),
                  DimensionMismatchError);

  ComplexMatrix sz = mat2(1, 0, 0, -1);
  ProjectorPair pp = window_projector(sz, IntervalWindow{0.5, 1.5});
  CHECK(fidelity(rho, pp) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("fidelity projector of an exponential path matches its Hermitian source") {
  OperatorPath hs = scale_path(upper_branch(), 0.5);
  Generator gen = make_jump_unitary(exp_path(hs), constant_schedule(1.0));
  SpectralOptions opt;
  opt.hermitian_hint = true;
  for (double s : {0.0, 0.3, 0.8}) {
    ComplexMatrix ph = window_projector(hs.value(s), hs.window(s), opt).p;
    CHECK((gen.fidelity_projector(s) - ph).norm() <= 1e-10);
  }
}

TEST_CASE("fidelity projector embeds the source projector for qubitised walks") {
  OperatorPath hs = scale_path(upper_branch(), 0.9);
  Generator gen = make_jump_unitary(qubitised_path(hs), constant_schedule(1.0), hs,
                                    qubitised_embed_projector);
  SpectralOptions opt;
  opt.hermitian_hint = true;
  ComplexMatrix p_src = window_projector(hs.value(0.0), hs.window(0.0), opt).p;
  CHECK((gen.fidelity_projector(0.0) - qubitised_embed_projector(p_src)).norm() <= 1e-12);

  DensityMatrix walk_state = DensityMatrix::pure(qubitised_embed_state(basis_state(2, 0)));
  CHECK(fidelity(walk_state, gen.fidelity_projector(0.0)) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("a zero-rate jump process leaves the state fixed under a moving projector") {
  OperatorPath u = exp_path(scale_path(upper_branch(), 0.5));
  Generator gen = make_jump_unitary(u, constant_schedule(0.0));
  DensityMatrix rho0 = DensityMatrix::pure(basis_state(2, 0));
  RunResult res = integrate(gen, rho0);
  REQUIRE(res.samples.size() == 101);
  for (int k : {0, 25, 50, 100}) {
    double s = res.samples[k].first;
    double expect = std::clamp((gen.fidelity_projector(s) * rho0.rho).trace().real(), 0.0, 1.0);
    CHECK(std::abs(res.samples[k].second - expect) <= 1e-12);
  }
  CHECK(res.cost.jumps == 0.0);
}

TEST_CASE("integrate matches an ordered midpoint product formula for Liouville flow") {
  OperatorPath h = upper_branch();
  const double t_rate = 3.0;
  Generator gen = make_liouville(h, constant_schedule(t_rate));
  DensityMatrix rho0 = DensityMatrix::pure(basis_state(2, 0));

  IntegrateOptions opt;
  opt.step_cap = 2.5e-3;
  opt.n_samples = 11;
  RunResult res = integrate(gen, rho0, opt);
  REQUIRE(res.samples.size() == 11);

  SpectralOptions sopt;
  sopt.hermitian_hint = true;
  const int steps = 4000;  // 400 per sample interval
  const double hstep = 1.0 / steps;
  ComplexMatrix rho = rho0.rho;
  auto expp = [](Complex z) { return std::exp(z); };
  for (int k = 0; k <= 10; ++k) {
    double s = 0.1 * k;
    CHECK(res.samples[k].first == doctest::Approx(s).epsilon(1e-15));
    ComplexMatrix p = window_projector(h.value(s), h.window(s), sopt).p;
    double f = (p * rho).trace().real();
    CHECK(std::abs(res.samples[k].second - f) <= 1e-6);
    if (k == 10) break;
    for (int j = 0; j < steps / 10; ++j) {
      double smid = s + (j + 0.5) * hstep;
      ComplexMatrix u = matrix_function(ComplexMatrix(-kI * t_rate * hstep * h.value(smid)), expp);
      rho = u * rho * u.adjoint();
    }
  }
  CHECK(res.cost.time == doctest::Approx(t_rate).epsilon(1e-12));
  CHECK(res.diagnostics.at("steps") >= 400);
}

TEST_CASE("integrate agrees with an independent fine RK4 for jump processes") {
  OperatorPath u = exp_path(scale_path(upper_branch(), 0.5));
  Generator gen = make_jump_unitary(u, constant_schedule(8.0));
  DensityMatrix rho0 = DensityMatrix::pure(basis_state(2, 0));
  RunResult res = integrate(gen, rho0);

  const int steps = 5000;
  const double h = 1.0 / steps;
  ComplexMatrix rho = rho0.rho;
  for (int j = 0; j < steps; ++j) {
    double s = j * h;
    ComplexMatrix k1 = generator_rhs(gen, s, rho);
    ComplexMatrix k2 = generator_rhs(gen, s + 0.5 * h, rho + (0.5 * h) * k1);
    ComplexMatrix k3 = generator_rhs(gen, s + 0.5 * h, rho + (0.5 * h) * k2);
    ComplexMatrix k4 = generator_rhs(gen, s + h, rho + h * k3);
    rho += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  double f = std::clamp((gen.fidelity_projector(1.0) * rho).trace().real(), 0.0, 1.0);
  CHECK(std::abs(res.final_fidelity - f) <= 1e-4);
  CHECK(res.cost.jumps == doctest::Approx(8.0).epsilon(1e-12));
}

TEST_CASE("phase randomisation conserves the tracked block exactly") {
  ComplexMatrix h = mat2(0, 0, 0, 1);
  OperatorPath path = constant_hermitian(h, IntervalWindow{-0.25, 0.25});
  Generator gen = make_phase_randomisation(path, constant_schedule(5.0), flat_gap(1.0));
  DensityMatrix rho0(mat2(0.5, 0.5, 0.5, 0.5));
  RunResult res = integrate(gen, rho0);
  for (const auto& [s, f] : res.samples) CHECK(f == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("accumulate_cost integrates the rate in the family's currency") {
  OperatorPath h = upper_branch();
  Generator liou = make_liouville(h, linear_rate());
  CostRecord c = accumulate_cost(liou);
  CHECK(c.time == doctest::Approx(1.5).epsilon(1e-12));
  CHECK(c.jumps == 0.0);

  OperatorPath u = exp_path(scale_path(h, 0.5));
  CostRecord cj = accumulate_cost(make_jump_unitary(u, linear_rate()));
  CHECK(cj.jumps == doctest::Approx(1.5).epsilon(1e-12));
  CHECK(cj.time == 0.0);

  Generator ph = make_phase_randomisation(h, linear_rate(), flat_gap(2.0));
  CostRecord cp = accumulate_cost(ph);
  CHECK(cp.jumps == doctest::Approx(1.5).epsilon(1e-12));
  CHECK(cp.time == doctest::Approx(kPhaseTimeConstant * 0.75).epsilon(1e-12));

  Generator broken = ph;
  broken.gap.reset();
  CHECK_THROWS_AS(accumulate_cost(broken), GapModelMissingError);
}

TEST_CASE("integrate validates its inputs and guards the step floor") {
  OperatorPath h = upper_branch();
  Generator gen = make_liouville(h, constant_schedule(1.0));
  DensityMatrix rho0 = DensityMatrix::pure(basis_state(2, 0));

  IntegrateOptions bad_step;
  bad_step.step_cap = 0.0;
  CHECK_THROWS_AS(integrate(gen, rho0, bad_step), ValidationError);

  IntegrateOptions bad_samples;
  bad_samples.n_samples = 1;
  CHECK_THROWS_AS(integrate(gen, rho0, bad_samples), ValidationError);

  DensityMatrix rho3(ComplexMatrix(ComplexMatrix::Identity(3, 3) / 3.0));
  CHECK_THROWS_AS(integrate(gen, rho3), DimensionMismatchError);

  Generator stiff = make_liouville(h, constant_schedule(1e12));
  CHECK_THROWS_AS(integrate(stiff, rho0), StepUnderflowError);
}

TEST_CASE("step doubling detects a converged integration") {
  Generator gen = make_liouville(upper_branch(), constant_schedule(2.0));
  DensityMatrix rho0 = DensityMatrix::pure(basis_state(2, 0));
  CHECK(step_doubling_delta(gen, rho0) <= 1e-6);
}

TEST_CASE("integrate records the requested sample grid") {
  Generator gen = make_liouville(upper_branch(), constant_schedule(1.0));
  DensityMatrix rho0 = DensityMatrix::pure(basis_state(2, 0));
  IntegrateOptions opt;
  opt.n_samples = 5;
  RunResult res = integrate(gen, rho0, opt);
  REQUIRE(res.samples.size() == 5);
  for (int k = 0; k < 5; ++k)
    CHECK(res.samples[k].first == doctest::Approx(0.25 * k).epsilon(1e-15));
  CHECK(res.final_fidelity == res.samples.back().second);
}
