#include "eigenpath/spectral.hpp"

#include <Eigen/LU>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <limits>

namespace eigenpath {

bool window_contains(const SpectralWindow& w, Complex z) {
  if (std::holds_alternative<IntervalWindow>(w)) {
    const auto& iv = std::get<IntervalWindow>(w);
    return z.real() >= iv.b0 && z.real() <= iv.b1;
  }
  const auto& c = std::get<ContourWindow>(w);
  return std::abs(z - c.center) < c.radius;
}

namespace {

double boundary_distance(const SpectralWindow& w, Complex z) {
  if (std::holds_alternative<IntervalWindow>(w)) {
    const auto& iv = std::get<IntervalWindow>(w);
    return std::min(std::abs(z.real() - iv.b0), std::abs(z.real() - iv.b1));
  }
  const auto& c = std::get<ContourWindow>(w);
  return std::abs(std::abs(z - c.center) - c.radius);
}

ComplexMatrix commutator(const ComplexMatrix& a, const ComplexMatrix& b) {
  return a * b - b * a;
}

}  // namespace

ProjectorPair window_projector(const ComplexMatrix& a, const SpectralWindow& w,
                               const SpectralOptions& opt) {
  SpectralDecomposition dec = eig_normal(a, opt.hermitian_hint);
  const Eigen::Index n = dec.eigenvalues.size();
  double scale = std::max(1.0, dec.eigenvalues.cwiseAbs().maxCoeff());

  std::vector<Eigen::Index> in_idx, out_idx;
  for (Eigen::Index i = 0; i < n; ++i) {
    Complex ww = dec.eigenvalues(i);
    if (boundary_distance(w, ww) < opt.boundary_tol * scale)
      throw BoundaryEigenvalueError("window_projector: eigenvalue on the window boundary");
    (window_contains(w, ww) ? in_idx : out_idx).push_back(i);
  }
  if (in_idx.empty()) throw EmptyWindowError("window_projector: window contains no eigenvalue");
  if (out_idx.empty())
    throw ValidationError("window_projector: window contains the whole spectrum");

  ProjectorPair pp;
  pp.p = ComplexMatrix::Zero(n, n);
  for (Eigen::Index i : in_idx)
    pp.p += dec.eigenvectors.col(i) * dec.eigenvectors.col(i).adjoint();
  pp.q = ComplexMatrix::Identity(n, n) - pp.p;

  // Cluster the tracked eigenvalues: sorted single-linkage with relative
  // tolerance; m is the number of distinct clusters.
  std::vector<Eigen::Index> sorted_in = in_idx;
  std::sort(sorted_in.begin(), sorted_in.end(), [&](Eigen::Index i, Eigen::Index j) {
    Complex x = dec.eigenvalues(i), y = dec.eigenvalues(j);
    if (x.real() != y.real()) return x.real() < y.real();
    return x.imag() < y.imag();
  });
  const double ctol = opt.cluster_reltol * scale;
  std::vector<std::vector<Eigen::Index>> clusters;
  for (Eigen::Index i : sorted_in) {
    if (!clusters.empty() &&
        std::abs(dec.eigenvalues(clusters.back().back()) - dec.eigenvalues(i)) <= ctol)
      clusters.back().push_back(i);
    else
      clusters.push_back({i});
  }
  for (const auto& cl : clusters) {
    EigenCluster ec;
    Complex mean = 0.0;
    ec.projector = ComplexMatrix::Zero(n, n);
    for (Eigen::Index i : cl) {
      mean += dec.eigenvalues(i);
      ec.projector += dec.eigenvectors.col(i) * dec.eigenvectors.col(i).adjoint();
    }
    ec.value = mean / static_cast<double>(cl.size());
    ec.multiplicity = static_cast<int>(cl.size());
    pp.inside.push_back(std::move(ec));
  }
  pp.m = static_cast<int>(clusters.size());

  double gap = std::numeric_limits<double>::infinity();
  for (Eigen::Index i : in_idx)
    for (Eigen::Index j : out_idx)
      gap = std::min(gap, std::abs(dec.eigenvalues(i) - dec.eigenvalues(j)));
  pp.gap = gap;
  return pp;
}

ComplexMatrix twiddle_spectral(const ComplexMatrix& a, const ProjectorPair& pp,
                               const ComplexMatrix& x, bool hermitian_hint) {
  SpectralDecomposition dec = eig_normal(a, hermitian_hint);
  const Eigen::Index n = dec.eigenvalues.size();
  std::vector<bool> inside(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    double overlap = (dec.eigenvectors.col(i).adjoint() * pp.p * dec.eigenvectors.col(i))(0).real();
    inside[i] = overlap > 0.5;
  }
  ComplexMatrix xhat = dec.eigenvectors.adjoint() * x * dec.eigenvectors;
  ComplexMatrix out = ComplexMatrix::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      if (inside[i] == inside[j]) continue;
      Complex win = inside[i] ? dec.eigenvalues(i) : dec.eigenvalues(j);
      Complex wout = inside[i] ? dec.eigenvalues(j) : dec.eigenvalues(i);
      Complex denom = win - wout;
      if (std::abs(denom) < 1e-8)
        throw SingularOperatorError("twiddle_spectral: tracked/untracked eigenvalue collision");
      out(i, j) = xhat(i, j) / denom;
    }
  }
  return dec.eigenvectors * out * dec.eigenvectors.adjoint();
}

namespace {

ComplexMatrix twiddle_contour_fixed(const ComplexMatrix& a, const ContourWindow& w,
                                    const ComplexMatrix& x, int q) {
  const Eigen::Index n = a.rows();
  ComplexMatrix acc = ComplexMatrix::Zero(n, n);
  const double scale = std::max(1.0, a.norm());
  for (int k = 0; k < q; ++k) {
    double theta = 2.0 * M_PI * (k + 0.5) / q;
    Complex e(std::cos(theta), std::sin(theta));
    Complex z = w.center + w.radius * e;
    ComplexMatrix shifted = z * ComplexMatrix::Identity(n, n) - a;
    Eigen::PartialPivLU<ComplexMatrix> lu(shifted);
    // sigma_min estimate for the blowup guard
    double smin = Eigen::JacobiSVD<ComplexMatrix>(shifted).singularValues().minCoeff();
    if (smin < 1e-12 * scale)
      throw ResolventBlowupError("twiddle_contour: resolvent norm exceeds 1e12 on the contour");
    ComplexMatrix r = lu.solve(ComplexMatrix::Identity(n, n));
    acc += e * (r * x * r);
  }
  // dz = i r e^{i theta} d theta and the 1/(2 pi i) prefactor leave r/q.
  return (w.radius / q) * acc;
}

}  // namespace

ComplexMatrix twiddle_contour(const ComplexMatrix& a, const ContourWindow& w,
                              const ComplexMatrix& x, int quad_points) {
  if (quad_points > 0) return twiddle_contour_fixed(a, w, x, quad_points);
  int q = 128;
  ComplexMatrix prev = twiddle_contour_fixed(a, w, x, q);
  for (;;) {
    q *= 2;
    ComplexMatrix cur = twiddle_contour_fixed(a, w, x, q);
    if ((cur - prev).norm() <= 1e-10 * (1.0 + cur.norm())) return cur;
    if (q >= 1 << 15)
      throw NoConvergenceError("twiddle_contour: quadrature did not stabilise");
    prev = std::move(cur);
  }
}

ContourWindow enclosing_contour(const SpectralWindow& w, double gap) {
  if (std::holds_alternative<ContourWindow>(w)) return std::get<ContourWindow>(w);
  const auto& iv = std::get<IntervalWindow>(w);
  return ContourWindow{Complex(0.5 * (iv.b0 + iv.b1), 0.0), 0.5 * (iv.b1 - iv.b0) + 0.5 * gap};
}

ContourWindow enclosing_contour(const ProjectorPair& pp) {
  // Bounding-box midpoint of the tracked values. For a real spectrum the
  // circle then separates exactly: every untracked eigenvalue is at least
  // span/2 + gap from the midpoint, leaving gap/2 clearance on both sides.
  double re_lo = std::numeric_limits<double>::infinity(), re_hi = -re_lo;
  double im_lo = re_lo, im_hi = -re_lo;
  for (const auto& ec : pp.inside) {
    re_lo = std::min(re_lo, ec.value.real());
    re_hi = std::max(re_hi, ec.value.real());
    im_lo = std::min(im_lo, ec.value.imag());
    im_hi = std::max(im_hi, ec.value.imag());
  }
  Complex c(0.5 * (re_lo + re_hi), 0.5 * (im_lo + im_hi));
  double spread = 0.0;
  for (const auto& ec : pp.inside) spread = std::max(spread, std::abs(ec.value - c));
  return ContourWindow{c, spread + 0.5 * pp.gap};
}

ComplexMatrix projector_derivative(const ComplexMatrix& a, const ProjectorPair& pp,
                                   const ComplexMatrix& aprime, bool hermitian_hint) {
  return twiddle_spectral(a, pp, aprime, hermitian_hint);
}

ComplexMatrix projector_second_derivative(const ComplexMatrix& a, const ProjectorPair& pp,
                                          const ComplexMatrix& aprime, const ComplexMatrix& asecond,
                                          bool hermitian_hint) {
  ComplexMatrix pd = twiddle_spectral(a, pp, aprime, hermitian_hint);
  ComplexMatrix t2 = twiddle_spectral(a, pp, commutator(aprime, pd), hermitian_hint);
  return twiddle_spectral(a, pp, asecond, hermitian_hint) +
         (pp.q - pp.p) * (2.0 * pd * pd + t2);
}

ComplexMatrix twiddle_derivative(const ComplexMatrix& a, const ProjectorPair& pp,
                                 const ComplexMatrix& aprime, const ComplexMatrix& x,
                                 const ComplexMatrix& xprime, bool hermitian_hint) {
  ComplexMatrix xt = twiddle_spectral(a, pp, x, hermitian_hint);
  ComplexMatrix pd = twiddle_spectral(a, pp, aprime, hermitian_hint);
  return twiddle_spectral(a, pp, xprime, hermitian_hint) +
         (pp.q - pp.p) * (pd * xt + xt * pd +
                          twiddle_spectral(a, pp, commutator(aprime, xt), hermitian_hint) -
                          twiddle_spectral(a, pp, commutator(pd, x), hermitian_hint));
}

namespace {

double norm2x2(double a00, double a01, double a10, double a11) {
  Eigen::Matrix2d m;
  m << a00, a01, a10, a11;
  Eigen::JacobiSVD<Eigen::Matrix2d> svd(m);
  return svd.singularValues()(0);
}

}  // namespace

std::vector<BoundCheck> norm_bound_suite(const ComplexMatrix& a, const ProjectorPair& pp,
                                         const ComplexMatrix& aprime, const ComplexMatrix& asecond,
                                         const std::function<ComplexMatrix(double)>& path_value,
                                         bool hermitian_hint) {
  const double g = pp.gap;
  const double m = static_cast<double>(pp.m);
  const double sqm = std::sqrt(m);
  const double na1 = operator_norm(aprime);
  const double na2 = operator_norm(asecond);

  const ComplexMatrix& p = pp.p;
  const ComplexMatrix& q = pp.q;
  ComplexMatrix pd = twiddle_spectral(a, pp, aprime, hermitian_hint);
  ComplexMatrix pdd = projector_second_derivative(a, pp, aprime, asecond, hermitian_hint);
  const double npd = operator_norm(pd);
  const double npdd = operator_norm(pdd);

  std::vector<BoundCheck> checks;
  auto add = [&checks](const std::string& name, double bound, double measured) {
    BoundCheck c;
    c.name = name;
    c.bound = bound;
    c.measured = measured;
    c.margin = bound - measured;
    c.satisfied = measured <= bound * (1.0 + 1e-9) + 1e-12;
    checks.push_back(std::move(c));
  };

  // ||X|| against the 2x2 matrix of block norms, X = A'.
  add("block_norm",
      norm2x2(operator_norm(p * aprime * p), operator_norm(p * aprime * q),
              operator_norm(q * aprime * p), operator_norm(q * aprime * q)),
      na1);

  // Offdiag solution norm, X = A' (the solution is P').
  add("offdiag_norm",
      sqm * std::max(operator_norm(p * aprime * q), operator_norm(q * aprime * p)) / g, npd);

  // ||P'|| <= sqrt(m) ||A'|| / g.
  add("projector_derivative_norm", sqm * na1 / g, npd);

  // Derivative of the offdiag solution, X = A' (equals P'').
  add("offdiag_derivative_norm", sqm * na2 / g + 6.0 * m * na1 * na1 / (g * g), npdd);

  // Direct P'' estimate.
  add("projector_second_derivative_norm", sqm * na2 / g + 4.0 * m * na1 * na1 / (g * g), npdd);

  // Derivative of [P, P'] (equals [P, P'']).
  add("commutator_derivative_norm", sqm * na2 / g + 2.0 * m * na1 * na1 / (g * g),
      operator_norm(commutator(p, pdd)));

  // Derivative of the offdiag solution of [P, P'] (the coupling term).
  {
    ComplexMatrix xc = commutator(p, pd);
    ComplexMatrix xcprime = commutator(p, pdd);
    ComplexMatrix dtw = twiddle_derivative(a, pp, aprime, xc, xcprime, hermitian_hint);
    add("coupling_derivative_norm",
        m * operator_norm(p * asecond * q) / (g * g) + 5.0 * m * sqm * na1 * na1 / (g * g * g),
        operator_norm(dtw));
  }

  // Second derivative of the offdiag solution, X(t) = A'(t) along the path,
  // measured by central differences when the path is available.
  if (path_value) {
    const double h = 1e-4;
    auto solution_at = [&](double t) {
      // Continue the tracked subspace by eigenvector overlap with P(0)
      // rather than through a window: immune to the window geometry, and
      // unambiguous for |t| far below the gap.
      ComplexMatrix at = path_value(t);
      SpectralDecomposition dec = eig_normal(at, hermitian_hint);
      const Eigen::Index n = at.rows();
      ProjectorPair ppt;
      ppt.p = ComplexMatrix::Zero(n, n);
      for (Eigen::Index i = 0; i < n; ++i) {
        ComplexVector v = dec.eigenvectors.col(i);
        if ((v.adjoint() * p * v)(0).real() > 0.5) ppt.p += v * v.adjoint();
      }
      ppt.q = ComplexMatrix::Identity(n, n) - ppt.p;
      ComplexMatrix xt = aprime + t * asecond;
      return twiddle_spectral(at, ppt, xt, hermitian_hint);
    };
    ComplexMatrix fd2 = (solution_at(h) - 2.0 * solution_at(0.0) + solution_at(-h)) / (h * h);
    double bound = 64.0 * m * sqm * na1 * na1 * na1 / (g * g * g) +
                   6.0 * m * na2 * na1 / (g * g) + 12.0 * m * na1 * na2 / (g * g);
    add("offdiag_second_derivative_norm", bound, operator_norm(fd2));
  }

  return checks;
}

}  // namespace eigenpath
