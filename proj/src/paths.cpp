#include "eigenpath/paths.hpp"

#include <Eigen/LU>
#include <algorithm>
#include <cmath>
#include <memory>
#include <set>

namespace eigenpath {

namespace {

constexpr double kPi = 3.14159265358979323846;

void probe_norm_limit(const OperatorPath& h, double limit, const char* what) {
  for (int k = 0; k <= 40; ++k) {
    double s = k / 40.0;
    if (operator_norm(h.value(s)) > limit)
      throw NormTooLargeError(std::string(what) + ": ||H(s)|| exceeds " + std::to_string(limit));
  }
}

Complex centroid(const std::vector<Complex>& zs) {
  Complex c = 0.0;
  for (Complex z : zs) c += z;
  return c / static_cast<double>(zs.size());
}

double spread_around(const std::vector<Complex>& zs, Complex c) {
  double r = 0.0;
  for (Complex z : zs) r = std::max(r, std::abs(z - c));
  return r;
}

}  // namespace

double gap_model_derivative(const GapModel& gap, double s) {
  if (gap.g0_prime) return gap.g0_prime(s);
  const double h = 1e-6;
  double lo = std::max(0.0, s - h), hi = std::min(1.0, s + h);
  return (gap.g0(hi) - gap.g0(lo)) / (hi - lo);
}

OperatorPath linear_path(const ComplexMatrix& h0, const ComplexMatrix& h1,
                         std::function<SpectralWindow(double)> window) {
  if (h0.rows() != h0.cols() || h1.rows() != h1.cols() || h0.rows() != h1.rows())
    throw DimensionMismatchError("linear_path: endpoint dimensions mismatch");
  OperatorPath path;
  path.kind = OperatorPath::Kind::Hermitian;
  path.dim = static_cast<int>(h0.rows());
  ComplexMatrix diff = h1 - h0;
  ComplexMatrix zero = ComplexMatrix::Zero(h0.rows(), h0.cols());
  path.value = [h0, diff](double s) -> ComplexMatrix { return h0 + s * diff; };
  path.derivative = [diff](double) -> ComplexMatrix { return diff; };
  path.second_derivative = [zero](double) -> ComplexMatrix { return zero; };
  path.window = std::move(window);
  path.metadata["construction"] = "linear";
  return path;
}

GapModel grover_gap_model(int n, int n_marked) {
  if (n < 2 || n_marked < 1 || n_marked >= n)
    throw InvalidMarkedSetError("grover_gap_model: need 0 < marked < n");
  const double ratio = 1.0 - static_cast<double>(n_marked) / n;
  GapModel gap;
  gap.g0 = [ratio](double s) { return std::sqrt(1.0 - 4.0 * ratio * s * (1.0 - s)); };
  gap.g0_prime = [ratio, g0 = gap.g0](double s) {
    return -2.0 * ratio * (1.0 - 2.0 * s) / g0(s);
  };
  gap.g0m = std::sqrt(static_cast<double>(n_marked) / n);
  gap.dg0_bound = 2.0;
  // Uniform-in-N constant: split each half of the symmetric well at distance
  // g0m from the centre. The inner piece contributes at most g0m^{1-q}; on
  // the outer piece g >= 2 g0m and |ds/dg| <= 2/3 (for M/N <= 1/4), leaving
  // (2/3) (2 g0m)^{1-q} / (q-1). For M/N > 1/4 the crude bound g0m^{-q}
  // < 2 g0m^{1-q} is already below this constant.
  gap.family_constant = [](double q) {
    return 2.0 + (4.0 / 3.0) * std::pow(2.0, 1.0 - q) / (q - 1.0);
  };
  return gap;
}

GapModel qlsp_gap_model(double kappa) {
  if (kappa < 2.0)
    throw KappaTooSmallError("qlsp_gap_model: condition number below 2");
  const double kap2 = kappa * kappa;
  GapModel gap;
  gap.g0 = [kap2](double s) { return std::sqrt((1.0 - s) * (1.0 - s) + s * s / kap2); };
  gap.g0_prime = [kap2, g0 = gap.g0](double s) { return (s / kap2 - (1.0 - s)) / g0(s); };
  gap.g0m = 1.0 / (2.0 * kappa);
  gap.dg0_bound = std::sqrt(1.0 + 1.0 / kap2);
  // Uniform-in-kappa constant: completing the square, g0^2 = c (s - s0)^2 +
  // d^2 with c = 1 + 1/kappa^2, s0 = 1/c and well depth d = 1/sqrt(kappa^2+1)
  // >= g0m. Left of s0 the full-line envelope gives
  // d^{1-q} * (1/2) integral (1+v^2)^{-q/2} dv; the piece right of s0 has
  // length d^2 and integrand at most d^{-q}.
  gap.family_constant = [](double q) {
    return 0.5 * std::sqrt(kPi) * std::tgamma(0.5 * (q - 1.0)) / std::tgamma(0.5 * q) + 1.0;
  };
  return gap;
}

GroverInstance grover_path(int n, const std::vector<int>& marked, GroverRepresentation rep) {
  if (n < 2) throw ValidationError("grover_path: need n >= 2");
  if (marked.empty()) throw InvalidMarkedSetError("grover_path: marked set is empty");
  std::set<int> mset(marked.begin(), marked.end());
  if (mset.size() != marked.size()) throw InvalidMarkedSetError("grover_path: duplicate marked index");
  if (*mset.begin() < 0 || *mset.rbegin() >= n)
    throw InvalidMarkedSetError("grover_path: marked index out of range");
  const int mcount = static_cast<int>(mset.size());
  if (mcount >= n) throw InvalidMarkedSetError("grover_path: all states marked");

  const double ratio = 1.0 - static_cast<double>(mcount) / n;
  GroverInstance inst;
  inst.n = n;
  inst.n_marked = mcount;
  inst.gap = grover_gap_model(n, mcount);
  auto window = [g0 = inst.gap.g0](double s) -> SpectralWindow {
    double g = g0(s);
    double lam1 = 0.5 * (1.0 - g);
    return IntervalWindow{lam1 - 0.5 * g, lam1 + 0.5 * g};
  };

  // With several marked states the full operator has an eigenvalue branch
  // 1 - s that lands exactly on the tracked-window boundary at s = 1/2, so
  // only the two-dimensional pencil restriction (which the dynamics never
  // leaves) is usable there.
  bool reduced = rep == GroverRepresentation::Reduced ||
                 (rep == GroverRepresentation::Auto && (n > 32 || mcount > 1));
  if (!reduced && mcount > 1)
    throw ValidationError(
        "grover_path: full representation is limited to one marked state; "
        "use the reduced representation");
  inst.reduced = reduced;
  if (reduced) {
    const double a = std::sqrt(static_cast<double>(mcount) / n);
    const double b = std::sqrt(ratio);
    ComplexMatrix h0(2, 2), h1(2, 2);
    h0 << 1.0 - a * a, -a * b, -a * b, 1.0 - b * b;
    h1 << 0.0, 0.0, 0.0, 1.0;
    inst.path = linear_path(h0, h1, window);
    inst.initial_state = ComplexVector(2);
    inst.initial_state << a, b;
    inst.path.metadata["instance"] = "grover_reduced";
  } else {
    ComplexVector u = ComplexVector::Constant(n, 1.0 / std::sqrt(static_cast<double>(n)));
    ComplexMatrix h0 = ComplexMatrix::Identity(n, n) - u * u.adjoint();
    ComplexMatrix h1 = ComplexMatrix::Identity(n, n);
    for (int i : mset) h1(i, i) = 0.0;
    inst.path = linear_path(h0, h1, window);
    inst.initial_state = u;
    inst.path.metadata["instance"] = "grover";
  }
  inst.path.metadata["n"] = std::to_string(n);
  inst.path.metadata["marked"] = std::to_string(mcount);
  return inst;
}

QlspInstance qlsp_path(const ComplexMatrix& a, const ComplexVector& b,
                       std::optional<double> kappa_hint) {
  if (a.rows() != a.cols()) throw ValidationError("qlsp_path: A must be square");
  if (b.size() != a.rows()) throw DimensionMismatchError("qlsp_path: b dimension mismatch");
  const double scale = std::max(1.0, a.norm());
  if (hermiticity_residual(a) > 1e-10 * scale)
    throw ValidationError("qlsp_path: A must be Hermitian (use hermitian_dilation first)");
  if (b.norm() == 0.0) throw ValidationError("qlsp_path: b is zero");

  const Eigen::Index nn = a.rows();
  const double anorm = operator_norm(a);
  if (anorm == 0.0) throw SingularMatrixError("qlsp_path: A is zero");
  ComplexMatrix ar = a / anorm;
  Eigen::JacobiSVD<ComplexMatrix> svd(ar);
  const double smin = svd.singularValues().minCoeff();
  if (smin < 1e-12) throw SingularMatrixError("qlsp_path: A is singular");
  double kappa = 1.0 / smin;
  if (kappa_hint) kappa = std::max(kappa, *kappa_hint);
  if (kappa < 2.0)
    throw KappaTooSmallError("qlsp_path: condition number below 2; gap model not applicable");

  ComplexVector bu = b / b.norm();

  // 2N-dimensional interpolated operator A(s) and the projector that
  // removes the (+, b) direction.
  const Eigen::Index n2 = 2 * nn;
  ComplexMatrix a0 = ComplexMatrix::Zero(n2, n2);
  a0.topLeftCorner(nn, nn) = ComplexMatrix::Identity(nn, nn);
  a0.bottomRightCorner(nn, nn) = -ComplexMatrix::Identity(nn, nn);
  ComplexMatrix a1 = ComplexMatrix::Zero(n2, n2);
  a1.topRightCorner(nn, nn) = ar;
  a1.bottomLeftCorner(nn, nn) = ar;
  ComplexVector bp(n2);
  bp.head(nn) = bu / std::sqrt(2.0);
  bp.tail(nn) = bu / std::sqrt(2.0);
  ComplexMatrix q2 = ComplexMatrix::Identity(n2, n2) - bp * bp.adjoint();

  // 4N-dimensional path: offdiagonal blocks A(s) Q and Q A(s).
  auto embed = [n2](const ComplexMatrix& upper) {
    ComplexMatrix h = ComplexMatrix::Zero(2 * upper.rows(), 2 * upper.cols());
    h.topRightCorner(upper.rows(), upper.cols()) = upper;
    h.bottomLeftCorner(upper.cols(), upper.rows()) = upper.adjoint();
    return h;
  };
  ComplexMatrix h0 = embed(a0 * q2);
  ComplexMatrix h1 = embed(a1 * q2);

  QlspInstance inst;
  inst.gap = qlsp_gap_model(kappa);
  auto window = [g0 = inst.gap.g0](double s) -> SpectralWindow {
    double g = g0(s);
    return IntervalWindow{-0.5 * g, 0.5 * g};
  };
  inst.path = linear_path(h0, h1, window);
  inst.path.metadata["instance"] = "qlsp";
  inst.kappa = kappa;
  inst.a_rescaled = ar;
  inst.b = bu;

  auto asys = [a0, a1](double s) -> ComplexMatrix { return (1.0 - s) * a0 + s * a1; };
  auto solution2n = [asys, bp](double s) -> ComplexVector {
    ComplexVector x = Eigen::PartialPivLU<ComplexMatrix>(asys(s)).solve(bp);
    return x / x.norm();
  };
  const Eigen::Index n4 = 2 * n2;
  inst.tracked_solution = [solution2n, n2, n4](double s) -> ComplexVector {
    ComplexVector v = ComplexVector::Zero(n4);
    v.head(n2) = solution2n(s);
    return v;
  };
  inst.initial_state = inst.tracked_solution(0.0);
  inst.target_state = inst.tracked_solution(1.0);
  return inst;
}

std::pair<ComplexMatrix, ComplexVector> hermitian_dilation(const ComplexMatrix& a,
                                                           const ComplexVector& b) {
  if (a.rows() != a.cols()) throw ValidationError("hermitian_dilation: A must be square");
  if (b.size() != a.rows()) throw DimensionMismatchError("hermitian_dilation: b dimension mismatch");
  const Eigen::Index n = a.rows();
  ComplexMatrix m = ComplexMatrix::Zero(2 * n, 2 * n);
  m.topRightCorner(n, n) = a;
  m.bottomLeftCorner(n, n) = a.adjoint();
  ComplexVector rhs = ComplexVector::Zero(2 * n);
  rhs.head(n) = b;
  return {m, rhs};
}

namespace {

SpectralOptions hermitian_opts() {
  SpectralOptions opt;
  opt.hermitian_hint = true;
  return opt;
}

// Window of a unitary construction: circle around the images of the
// tracked eigenvalues with clearance half the mapped gap.
SpectralWindow mapped_window(const OperatorPath& h, double s,
                             const std::function<Complex(double)>& map, double mapped_gap) {
  ProjectorPair pp = window_projector(h.value(s), h.window(s), hermitian_opts());
  std::vector<Complex> phases;
  for (const auto& ec : pp.inside) phases.push_back(map(ec.value.real()));
  Complex c = centroid(phases);
  double r = spread_around(phases, c);
  return ContourWindow{c, r + 0.5 * mapped_gap};
}

}  // namespace

OperatorPath exp_path(const OperatorPath& h) {
  if (h.kind != OperatorPath::Kind::Hermitian)
    throw ValidationError("exp_path: source path must be Hermitian");
  probe_norm_limit(h, 0.5 + 1e-9, "exp_path");

  ScalarFunction f;
  f.f = [](double x) { return std::exp(Complex(0.0, -0.5 * kPi * x)); };
  f.df = [f0 = f.f](double x) { return Complex(0.0, -0.5 * kPi) * f0(x); };
  f.d2f = [f0 = f.f](double x) { return Complex(-0.25 * kPi * kPi, 0.0) * f0(x); };

  OperatorPath u;
  u.kind = OperatorPath::Kind::Unitary;
  u.dim = h.dim;
  u.value = [h, f](double s) { return hermitian_function(h.value(s), f); };
  u.derivative = [h, f](double s) {
    return hermitian_function_derivative(h.value(s), h.derivative(s), f);
  };
  u.second_derivative = [h, f](double s) {
    return hermitian_function_second_derivative(h.value(s), h.derivative(s),
                                                h.second_derivative(s), f);
  };
  u.window = [h](double s) {
    ProjectorPair pp = window_projector(h.value(s), h.window(s), hermitian_opts());
    std::vector<Complex> phases;
    for (const auto& ec : pp.inside)
      phases.push_back(std::exp(Complex(0.0, -0.5 * kPi * ec.value.real())));
    Complex c = centroid(phases);
    return SpectralWindow{ContourWindow{c, spread_around(phases, c) + 0.5 * pp.gap}};
  };
  u.metadata = h.metadata;
  u.metadata["construction"] = "exp";
  return u;
}

OperatorPath qubitised_path(const OperatorPath& h) {
  if (h.kind != OperatorPath::Kind::Hermitian)
    throw ValidationError("qubitised_path: source path must be Hermitian");
  probe_norm_limit(h, 1.0 - 1e-6, "qubitised_path");

  ScalarFunction f;
  f.f = [](double x) { return Complex(std::sqrt(std::max(0.0, 1.0 - x * x)), 0.0); };
  f.df = [](double x) { return Complex(-x / std::sqrt(std::max(1e-300, 1.0 - x * x)), 0.0); };
  f.d2f = [](double x) {
    double r = std::sqrt(std::max(1e-300, 1.0 - x * x));
    return Complex(-1.0 / (r * r * r), 0.0);
  };

  const int n = h.dim;
  auto assemble = [n](const ComplexMatrix& hh, const ComplexMatrix& ss) {
    ComplexMatrix u(2 * n, 2 * n);
    u.topLeftCorner(n, n) = hh;
    u.topRightCorner(n, n) = -ss;
    u.bottomLeftCorner(n, n) = ss;
    u.bottomRightCorner(n, n) = hh;
    return u;
  };

  OperatorPath u;
  u.kind = OperatorPath::Kind::Unitary;
  u.dim = 2 * n;
  u.value = [h, f, assemble](double s) {
    ComplexMatrix hh = h.value(s);
    return assemble(hh, hermitian_function(hh, f));
  };
  u.derivative = [h, f, assemble](double s) {
    return assemble(h.derivative(s),
                    hermitian_function_derivative(h.value(s), h.derivative(s), f));
  };
  u.second_derivative = [h, f, assemble](double s) {
    return assemble(h.second_derivative(s),
                    hermitian_function_second_derivative(h.value(s), h.derivative(s),
                                                         h.second_derivative(s), f));
  };
  u.window = [h](double s) {
    ProjectorPair pp = window_projector(h.value(s), h.window(s), hermitian_opts());
    std::vector<Complex> plus, minus;
    for (const auto& ec : pp.inside) {
      double w = ec.value.real();
      double r = std::sqrt(std::max(0.0, 1.0 - w * w));
      plus.push_back(Complex(w, r));
      minus.push_back(Complex(w, -r));
    }
    Complex c = centroid(plus);
    double radius = spread_around(plus, c) + 0.5 * pp.gap;
    for (Complex z : minus)
      if (std::abs(z - c) < radius + 0.25 * pp.gap)
        throw NumericalError(
            "qubitised_path: conjugate branch of a tracked eigenvalue meets the window");
    return SpectralWindow{ContourWindow{c, radius}};
  };
  u.metadata = h.metadata;
  u.metadata["construction"] = "qubitised";
  return u;
}

ComplexMatrix qubitised_embed_projector(const ComplexMatrix& p) {
  ComplexMatrix y(2, 2);
  y << Complex(0.5, 0.0), Complex(0.0, 0.5), Complex(0.0, -0.5), Complex(0.5, 0.0);
  return kron(y, p);
}

ComplexVector qubitised_embed_state(const ComplexVector& psi) {
  const Eigen::Index n = psi.size();
  ComplexVector out(2 * n);
  out.head(n) = psi / std::sqrt(2.0);
  out.tail(n) = Complex(0.0, -1.0) * psi / std::sqrt(2.0);
  return out;
}

namespace {

struct TrotterFactor {
  SpectralDecomposition dec;
  ComplexMatrix hmat;
  double theta0, theta1;  // exponent scale: theta(s) = theta0 + theta1 * s (times -i pi/2... folded in)

  // exp(c(s) * H) with c(s) = -i * (theta0 + theta1 * s)
  ComplexMatrix at(double s) const {
    Complex c(0.0, -(theta0 + theta1 * s));
    ComplexVector e(dec.eigenvalues.size());
    for (Eigen::Index i = 0; i < e.size(); ++i)
      e(i) = std::exp(c * dec.eigenvalues(i).real());
    return dec.eigenvectors * e.asDiagonal() * dec.eigenvectors.adjoint();
  }
  // d/ds exp(c(s) H) = c'(s) H exp(c(s) H); c' = -i theta1.
  Complex cprime() const { return Complex(0.0, -theta1); }
};

}  // namespace

OperatorPath trotter_path(const OperatorPath& h, const GapModel& gap, double step, int order) {
  if (h.kind != OperatorPath::Kind::Hermitian)
    throw ValidationError("trotter_path: source path must be Hermitian");
  if (order != 1 && order != 2) throw ValidationError("trotter_path: order must be 1 or 2");
  if (step <= 0.0) throw StepTooLargeError("trotter_path: step must be positive");
  double gmin = gap.g0m;
  for (int k = 0; k <= 40; ++k) gmin = std::min(gmin, gap.g0(k / 40.0));
  if (step * step >= gmin)
    throw StepTooLargeError("trotter_path: step^2 must stay below the gap floor");

  ComplexMatrix h0 = h.value(0.0), h1 = h.value(1.0);
  double scale = std::max(1.0, h0.norm() + h1.norm());
  if ((h.value(0.5) - 0.5 * (h0 + h1)).norm() > 1e-9 * scale)
    throw ValidationError("trotter_path: source path must be linear");

  // theta(s) values multiply -i: factor_j = exp(-i theta_j(s) H_j).
  // Order 1: theta_a = pi step (1-s)/2 on H0, theta_b = pi step s/2 on H1.
  // Order 2 splits the H0 factor around the H1 factor.
  auto mk = [](const ComplexMatrix& hh, double t0, double t1) {
    TrotterFactor f;
    f.dec = eig_normal(hh, true);
    f.hmat = hh;
    f.theta0 = t0;
    f.theta1 = t1;
    return f;
  };
  const double half = 0.5 * kPi * step;
  std::vector<TrotterFactor> factors;
  if (order == 1) {
    factors.push_back(mk(h0, half, -half));
    factors.push_back(mk(h1, 0.0, half));
  } else {
    factors.push_back(mk(h0, 0.5 * half, -0.5 * half));
    factors.push_back(mk(h1, 0.0, half));
    factors.push_back(mk(h0, 0.5 * half, -0.5 * half));
  }
  auto shared = std::make_shared<std::vector<TrotterFactor>>(std::move(factors));

  OperatorPath u;
  u.kind = OperatorPath::Kind::Unitary;
  u.dim = h.dim;
  u.value = [shared](double s) {
    ComplexMatrix acc = (*shared)[0].at(s);
    for (size_t j = 1; j < shared->size(); ++j) acc = acc * (*shared)[j].at(s);
    return acc;
  };
  u.derivative = [shared](double s) {
    const auto& fs = *shared;
    std::vector<ComplexMatrix> vals(fs.size());
    for (size_t j = 0; j < fs.size(); ++j) vals[j] = fs[j].at(s);
    ComplexMatrix acc = ComplexMatrix::Zero(vals[0].rows(), vals[0].cols());
    for (size_t j = 0; j < fs.size(); ++j) {
      ComplexMatrix term = fs[j].cprime() * (fs[j].hmat * vals[j]);
      for (size_t k = j; k-- > 0;) term = vals[k] * term;
      for (size_t k = j + 1; k < fs.size(); ++k) term = term * vals[k];
      acc += term;
    }
    return acc;
  };
  u.second_derivative = [shared](double s) {
    const auto& fs = *shared;
    const size_t nf = fs.size();
    std::vector<ComplexMatrix> d0(nf), d1(nf), d2(nf);
    for (size_t j = 0; j < nf; ++j) {
      d0[j] = fs[j].at(s);
      d1[j] = fs[j].cprime() * (fs[j].hmat * d0[j]);
      d2[j] = fs[j].cprime() * fs[j].cprime() * (fs[j].hmat * (fs[j].hmat * d0[j]));
    }
    ComplexMatrix acc = ComplexMatrix::Zero(d0[0].rows(), d0[0].cols());
    for (size_t j = 0; j < nf; ++j) {
      for (size_t k = 0; k < nf; ++k) {
        if (j > k) continue;
        ComplexMatrix term;
        double mult = (j == k) ? 1.0 : 2.0;
        term = ComplexMatrix::Identity(d0[0].rows(), d0[0].cols());
        for (size_t t = 0; t < nf; ++t) {
          const ComplexMatrix& piece = (t == j && t == k) ? d2[t] : ((t == j || t == k) ? d1[t] : d0[t]);
          term = term * piece;
        }
        acc += mult * term;
      }
    }
    return acc;
  };
  u.window = [h, gap, step](double s) {
    ProjectorPair pp = window_projector(h.value(s), h.window(s), hermitian_opts());
    std::vector<Complex> phases;
    for (const auto& ec : pp.inside)
      phases.push_back(std::exp(Complex(0.0, -0.5 * kPi * step * ec.value.real())));
    Complex c = centroid(phases);
    // Product-formula phases sit within step^3/2 of the ideal images, and the
    // surviving clearance to the rest of the spectrum is step*(g0 - step^2).
    double radius = spread_around(phases, c) + 0.5 * step * step * step +
                    0.5 * step * (gap.g0(s) - step * step);
    return SpectralWindow{ContourWindow{c, radius}};
  };
  u.metadata = h.metadata;
  u.metadata["construction"] = "trotter";
  u.metadata["order"] = std::to_string(order);
  u.metadata["step"] = std::to_string(step);
  return u;
}

OperatorPath shift_path(const OperatorPath& h, double shift) {
  OperatorPath out = h;
  const int n = h.dim;
  out.value = [h, shift, n](double s) -> ComplexMatrix {
    return h.value(s) - shift * ComplexMatrix::Identity(n, n);
  };
  out.window = [h, shift](double s) -> SpectralWindow {
    SpectralWindow w = h.window(s);
    if (std::holds_alternative<IntervalWindow>(w)) {
      auto iv = std::get<IntervalWindow>(w);
      return IntervalWindow{iv.b0 - shift, iv.b1 - shift};
    }
    auto cw = std::get<ContourWindow>(w);
    return ContourWindow{cw.center - shift, cw.radius};
  };
  out.metadata["shift"] = std::to_string(shift);
  return out;
}

OperatorPath scale_path(const OperatorPath& h, double factor) {
  if (factor <= 0.0) throw ValidationError("scale_path: factor must be positive");
  OperatorPath out = h;
  out.value = [h, factor](double s) -> ComplexMatrix { return factor * h.value(s); };
  out.derivative = [h, factor](double s) -> ComplexMatrix { return factor * h.derivative(s); };
  out.second_derivative = [h, factor](double s) -> ComplexMatrix {
    return factor * h.second_derivative(s);
  };
  out.window = [h, factor](double s) -> SpectralWindow {
    SpectralWindow w = h.window(s);
    if (std::holds_alternative<IntervalWindow>(w)) {
      auto iv = std::get<IntervalWindow>(w);
      return IntervalWindow{factor * iv.b0, factor * iv.b1};
    }
    auto cw = std::get<ContourWindow>(w);
    return ContourWindow{factor * cw.center, factor * cw.radius};
  };
  out.metadata["scale"] = std::to_string(factor);
  return out;
}

GapModel scale_gap_model(const GapModel& gap, double factor) {
  if (factor <= 0.0) throw ValidationError("scale_gap_model: factor must be positive");
  GapModel out = gap;
  out.g0 = [g = gap.g0, factor](double s) { return factor * g(s); };
  if (gap.g0_prime)
    out.g0_prime = [gp = gap.g0_prime, factor](double s) { return factor * gp(s); };
  out.g0m = factor * gap.g0m;
  out.dg0_bound = factor * gap.dg0_bound;
  if (gap.B_p > 0.0) out.B_p = gap.B_p / factor;
  if (gap.B_3mp > 0.0) out.B_3mp = gap.B_3mp / factor;
  if (gap.family_constant)
    out.family_constant = [f = gap.family_constant, factor](double q) { return f(q) / factor; };
  return out;
}

GapModel trotter_gap_model(const GapModel& gap, double step) {
  GapModel out;
  out.g0 = [g = gap.g0, step](double s) { return step * (g(s) - step * step); };
  if (gap.g0_prime)
    out.g0_prime = [gp = gap.g0_prime, step](double s) { return step * gp(s); };
  out.g0m = step * (gap.g0m - step * step);
  out.dg0_bound = step * gap.dg0_bound;
  out.p = gap.p;
  if (out.g0m <= 0.0)
    throw StepTooLargeError("trotter_gap_model: step^2 exceeds the gap floor");
  if (gap.family_constant) {
    // g - step^2 >= g (1 - step^2/g0m) pointwise, so subtracting the shift
    // costs a factor 1/(1 - step^2/g0m) on the family constant and the
    // overall scale by `step` another 1/step.
    const double shrink = (1.0 - step * step / gap.g0m) * step;
    out.family_constant = [f = gap.family_constant, shrink](double q) { return f(q) / shrink; };
  }
  return out;
}

}  // namespace eigenpath
