#include "eigenpath/core.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <algorithm>
#include <numeric>
#include <vector>

namespace eigenpath {

double operator_norm(const ComplexMatrix& a) {
  if (a.rows() == 0 || a.cols() == 0) return 0.0;
  // sigma_max via the Gram matrix; cheaper than a full SVD and the top
  // singular value keeps full relative accuracy this way.
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es;
  if (a.rows() >= a.cols())
    es.compute(a.adjoint() * a, Eigen::EigenvaluesOnly);
  else
    es.compute(a * a.adjoint(), Eigen::EigenvaluesOnly);
  double top = es.eigenvalues().maxCoeff();
  return std::sqrt(std::max(0.0, top));
}

double hermiticity_residual(const ComplexMatrix& a) {
  return (a - a.adjoint()).norm();
}

bool is_hermitian(const ComplexMatrix& a, double tol) {
  double scale = std::max(1.0, a.norm());
  return hermiticity_residual(a) <= tol * scale;
}

double normality_residual(const ComplexMatrix& a) {
  double n = operator_norm(a);
  if (n == 0.0) return 0.0;
  return operator_norm(a * a.adjoint() - a.adjoint() * a) / (n * n);
}

namespace {

void sort_spectral(SpectralDecomposition& dec) {
  const Eigen::Index n = dec.eigenvalues.size();
  std::vector<Eigen::Index> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](Eigen::Index i, Eigen::Index j) {
    Complex a = dec.eigenvalues(i), b = dec.eigenvalues(j);
    if (a.real() != b.real()) return a.real() < b.real();
    return a.imag() < b.imag();
  });
  ComplexVector w(n);
  ComplexMatrix v(dec.eigenvectors.rows(), n);
  for (Eigen::Index k = 0; k < n; ++k) {
    w(k) = dec.eigenvalues(idx[k]);
    v.col(k) = dec.eigenvectors.col(idx[k]);
  }
  dec.eigenvalues = std::move(w);
  dec.eigenvectors = std::move(v);
}

}  // namespace

SpectralDecomposition eig_normal(const ComplexMatrix& a, bool hermitian_hint,
                                 const CoreTolerances& tol) {
  if (a.rows() != a.cols()) throw ValidationError("eig_normal: matrix must be square");
  const double scale = std::max(1.0, a.norm());

  SpectralDecomposition dec;
  if (hermitian_hint || hermiticity_residual(a) <= 1e-12 * scale) {
    if (hermiticity_residual(a) > 1e-8 * scale)
      throw ValidationError("eig_normal: hermitian_hint set but matrix is not Hermitian");
    ComplexMatrix sym = 0.5 * (a + a.adjoint());
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(sym);
    if (es.info() != Eigen::Success) throw NoConvergenceError("eig_normal: self-adjoint solver failed");
    dec.eigenvalues = es.eigenvalues().cast<Complex>();
    dec.eigenvectors = es.eigenvectors();
  } else {
    if (normality_residual(a) > tol.normality)
      throw NonNormalError("eig_normal: matrix is not normal");
    Eigen::ComplexSchur<ComplexMatrix> schur(a);
    if (schur.info() != Eigen::Success) throw NoConvergenceError("eig_normal: Schur decomposition failed");
    // For normal input the triangular factor is diagonal up to roundoff.
    ComplexMatrix t = schur.matrixT();
    double offdiag = (t - ComplexMatrix(t.diagonal().asDiagonal())).norm();
    if (offdiag > 1e-8 * scale)
      throw NonNormalError("eig_normal: Schur factor not diagonal; matrix not normal");
    dec.eigenvalues = t.diagonal();
    dec.eigenvectors = schur.matrixU();
  }
  sort_spectral(dec);
  return dec;
}

ComplexMatrix matrix_function(const SpectralDecomposition& dec,
                              const std::function<Complex(Complex)>& f) {
  ComplexVector fw(dec.eigenvalues.size());
  for (Eigen::Index i = 0; i < fw.size(); ++i) fw(i) = f(dec.eigenvalues(i));
  return dec.eigenvectors * fw.asDiagonal() * dec.eigenvectors.adjoint();
}

ComplexMatrix matrix_function(const ComplexMatrix& a, const std::function<Complex(Complex)>& f,
                              bool hermitian_hint) {
  return matrix_function(eig_normal(a, hermitian_hint), f);
}

ComplexMatrix pseudoinverse_normal(const ComplexMatrix& a, double cutoff) {
  double n = operator_norm(a);
  double cut = cutoff * std::max(1.0, n);
  return matrix_function(a, [cut](Complex w) {
    return std::abs(w) <= cut ? Complex(0.0, 0.0) : Complex(1.0, 0.0) / w;
  });
}

ComplexMatrix projector_range_basis(const ComplexMatrix& p, double tol) {
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(0.5 * (p + p.adjoint()));
  if (es.info() != Eigen::Success)
    throw NoConvergenceError("projector_range_basis: eigensolver failed");
  std::vector<Eigen::Index> keep;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
    double ev = es.eigenvalues()(i);
    if (std::abs(ev - 1.0) <= tol)
      keep.push_back(i);
    else if (std::abs(ev) > tol)
      throw ValidationError("projector_range_basis: input is not a projector");
  }
  ComplexMatrix basis(p.rows(), static_cast<Eigen::Index>(keep.size()));
  for (size_t k = 0; k < keep.size(); ++k) basis.col(static_cast<Eigen::Index>(k)) = es.eigenvectors().col(keep[k]);
  return basis;
}

ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b) {
  ComplexMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

namespace {

// Solve M Z - Z N = R by dense LU of the vectorised system
// (I (x) M - N^T (x) I) vec(Z) = vec(R), column-major vec.
ComplexMatrix sylvester_dense(const ComplexMatrix& m, const ComplexMatrix& n,
                              const ComplexMatrix& r) {
  const Eigen::Index a = m.rows(), b = n.rows();
  ComplexMatrix sys = kron(ComplexMatrix::Identity(b, b), m) -
                      kron(n.transpose(), ComplexMatrix::Identity(a, a));
  Eigen::Map<const ComplexVector> rhs(r.data(), a * b);
  Eigen::FullPivLU<ComplexMatrix> lu(sys);
  if (!lu.isInvertible())
    throw SingularOperatorError("sylvester_block_solve: vectorised system is singular");
  ComplexVector z = lu.solve(rhs);
  return Eigen::Map<const ComplexMatrix>(z.data(), a, b);
}

}  // namespace

namespace {

// Divided differences of a scalar function, with analytic fallbacks for
// nearly coincident eigenvalues.
Complex dd1(const ScalarFunction& sf, double a, double b, double tol) {
  if (std::abs(a - b) <= tol) return sf.df(0.5 * (a + b));
  return (sf.f(a) - sf.f(b)) / (a - b);
}

Complex dd2(const ScalarFunction& sf, double a, double b, double c, double tol) {
  double ac = std::abs(a - c), ab = std::abs(a - b), bc = std::abs(b - c);
  double widest = std::max({ac, ab, bc});
  if (widest <= tol) return 0.5 * sf.d2f((a + b + c) / 3.0);
  // Divided differences are symmetric; divide across the widest pair.
  if (ac == widest) return (dd1(sf, a, b, tol) - dd1(sf, b, c, tol)) / (a - c);
  if (ab == widest) return (dd1(sf, a, c, tol) - dd1(sf, b, c, tol)) / (a - b);
  return (dd1(sf, a, b, tol) - dd1(sf, a, c, tol)) / (b - c);
}

constexpr double kDDTol = 1e-7;

}  // namespace

ComplexMatrix hermitian_function(const ComplexMatrix& h, const ScalarFunction& f) {
  SpectralDecomposition dec = eig_normal(h, true);
  return matrix_function(dec, [&f](Complex w) { return f.f(w.real()); });
}

ComplexMatrix hermitian_function_derivative(const ComplexMatrix& h, const ComplexMatrix& hprime,
                                            const ScalarFunction& f) {
  SpectralDecomposition dec = eig_normal(h, true);
  const Eigen::Index n = dec.eigenvalues.size();
  ComplexMatrix hp = dec.eigenvectors.adjoint() * hprime * dec.eigenvectors;
  ComplexMatrix out(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      out(i, j) = dd1(f, dec.eigenvalues(i).real(), dec.eigenvalues(j).real(), kDDTol) * hp(i, j);
  return dec.eigenvectors * out * dec.eigenvectors.adjoint();
}

ComplexMatrix hermitian_function_second_derivative(const ComplexMatrix& h,
                                                   const ComplexMatrix& hprime,
                                                   const ComplexMatrix& hsecond,
                                                   const ScalarFunction& f) {
  SpectralDecomposition dec = eig_normal(h, true);
  const Eigen::Index n = dec.eigenvalues.size();
  ComplexMatrix hp = dec.eigenvectors.adjoint() * hprime * dec.eigenvectors;
  ComplexMatrix hpp = dec.eigenvectors.adjoint() * hsecond * dec.eigenvectors;
  ComplexMatrix out(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    double wi = dec.eigenvalues(i).real();
    for (Eigen::Index j = 0; j < n; ++j) {
      double wj = dec.eigenvalues(j).real();
      Complex acc = dd1(f, wi, wj, kDDTol) * hpp(i, j);
      for (Eigen::Index k = 0; k < n; ++k)
        acc += 2.0 * dd2(f, wi, dec.eigenvalues(k).real(), wj, kDDTol) * hp(i, k) * hp(k, j);
      out(i, j) = acc;
    }
  }
  return dec.eigenvectors * out * dec.eigenvectors.adjoint();
}

ComplexMatrix sylvester_block_solve(const ComplexMatrix& a, const ComplexMatrix& p,
                                    const ComplexMatrix& q, const ComplexMatrix& x,
                                    const CoreTolerances& tol) {
  if (a.rows() != a.cols() || p.rows() != a.rows() || q.rows() != a.rows() || x.rows() != a.rows())
    throw ValidationError("sylvester_block_solve: dimension mismatch");

  ComplexMatrix vp = projector_range_basis(p);
  ComplexMatrix vq = projector_range_basis(q);
  if (vp.cols() == 0 || vq.cols() == 0)
    throw ValidationError("sylvester_block_solve: empty projector range");
  if (vp.cols() + vq.cols() != a.rows())
    throw ValidationError("sylvester_block_solve: P and Q do not partition the space");

  ComplexMatrix ap = vp.adjoint() * a * vp;
  ComplexMatrix aq = vq.adjoint() * a * vq;

  // Disjointness guard on the restricted spectra.
  Eigen::ComplexEigenSolver<ComplexMatrix> ep(ap), eq(aq);
  if (ep.info() != Eigen::Success || eq.info() != Eigen::Success)
    throw NoConvergenceError("sylvester_block_solve: restricted eigensolve failed");
  double mindist = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < ep.eigenvalues().size(); ++i)
    for (Eigen::Index j = 0; j < eq.eigenvalues().size(); ++j)
      mindist = std::min(mindist, std::abs(ep.eigenvalues()(i) - eq.eigenvalues()(j)));
  if (mindist < tol.spectra_disjoint)
    throw SingularOperatorError("sylvester_block_solve: block spectra are not disjoint");

  // Blockwise, [A, Y] = [P, X] reads A_P Z - Z A_Q = P X Q on the PQ block
  // and A_Q W - W A_P = -Q X P on the QP block.
  ComplexMatrix rhs_pq = vp.adjoint() * x * vq;
  ComplexMatrix rhs_qp = -(vq.adjoint() * x * vp);
  ComplexMatrix zpq = sylvester_dense(ap, aq, rhs_pq);
  ComplexMatrix zqp = sylvester_dense(aq, ap, rhs_qp);
  return vp * zpq * vq.adjoint() + vq * zqp * vp.adjoint();
}

}  // namespace eigenpath
