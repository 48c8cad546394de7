#include "eigenpath/instances.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "eigenpath/errors.hpp"

namespace eigenpath {

ComplexMatrix random_hermitian(int dim, Rng& rng) {
  if (dim < 1) throw ValidationError("dimension must be positive");
  ComplexMatrix h(dim, dim);
  for (int i = 0; i < dim; ++i) {
    h(i, i) = Complex(rng.normal(), 0.0);
    for (int j = i + 1; j < dim; ++j) {
      Complex z(rng.normal() * M_SQRT1_2, rng.normal() * M_SQRT1_2);
      h(i, j) = z;
      h(j, i) = std::conj(z);
    }
  }
  return h;
}

ComplexMatrix random_unitary(int dim, Rng& rng) {
  if (dim < 1) throw ValidationError("dimension must be positive");
  ComplexMatrix g(dim, dim);
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j) g(i, j) = Complex(rng.normal(), rng.normal());
  Eigen::HouseholderQR<ComplexMatrix> qr(g);
  ComplexMatrix q = qr.householderQ();
  ComplexMatrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  // Fixing the phases of R's diagonal makes the distribution Haar.
  for (int j = 0; j < dim; ++j) {
    Complex d = r(j, j);
    double mag = std::abs(d);
    q.col(j) *= (mag > 0.0) ? d / mag : Complex(1.0, 0.0);
  }
  return q;
}

ComplexVector random_state(int dim, Rng& rng) {
  if (dim < 1) throw ValidationError("dimension must be positive");
  ComplexVector v(dim);
  for (int i = 0; i < dim; ++i) v[i] = Complex(rng.normal(), rng.normal());
  return v / v.norm();
}

namespace {

// Diagonal entries with pairwise spectral separation >= 0.05 guaranteed by
// construction, not by rejection.
std::vector<double> separated_reals(int dim, Rng& rng) {
  std::vector<double> vals(dim);
  double x = -1.0 + 0.2 * rng.uniform();
  for (int i = 0; i < dim; ++i) {
    vals[i] = x;
    x += 0.06 + 0.34 * rng.uniform();
  }
  return vals;
}

// Complex eigenvalues on a jittered coarse grid: distinct cells of an 8x8
// partition of [-1,1]^2 keep every pair at least 0.15 apart.
std::vector<Complex> separated_complex(int dim, Rng& rng) {
  std::vector<int> cells(64);
  std::iota(cells.begin(), cells.end(), 0);
  for (int i = 63; i > 0; --i) std::swap(cells[i], cells[rng.below(i + 1)]);
  std::vector<Complex> vals(dim);
  for (int i = 0; i < dim; ++i) {
    int cx = cells[i] % 8, cy = cells[i] / 8;
    double re = -1.0 + 0.25 * cx + 0.125 + 0.05 * (2.0 * rng.uniform() - 1.0);
    double im = -1.0 + 0.25 * cy + 0.125 + 0.05 * (2.0 * rng.uniform() - 1.0);
    vals[i] = Complex(re, im);
  }
  return vals;
}

}  // namespace

CalculusInstance random_calculus_instance(Rng& rng, bool hermitian) {
  const int dim = 4 + static_cast<int>(rng.below(5));  // 4..8

  ComplexVector d0(dim), d1(dim), d2(dim);
  SpectralWindow window;
  if (hermitian) {
    std::vector<double> vals = separated_reals(dim, rng);
    for (int i = 0; i < dim; ++i) {
      d0[i] = Complex(vals[i], 0.0);
      d1[i] = Complex(2.0 * rng.uniform() - 1.0, 0.0);
      d2[i] = Complex(2.0 * rng.uniform() - 1.0, 0.0);
    }
    // Track a contiguous run of the sorted spectrum; put the interval edges
    // at the midpoints so the boundary clearance is at least 0.03.
    int lo = static_cast<int>(rng.below(dim));
    int hi = std::min(lo + 1 + static_cast<int>(rng.below(dim - 1)), dim);
    if (lo == 0 && hi == dim) {  // a window over the whole spectrum is invalid
      if (rng.uniform() < 0.5) --hi; else ++lo;
    }
    double b0 = (lo == 0) ? vals[0] - 0.2 : 0.5 * (vals[lo - 1] + vals[lo]);
    double b1 = (hi == dim) ? vals[dim - 1] + 0.2 : 0.5 * (vals[hi - 1] + vals[hi]);
    window = IntervalWindow{b0, b1};
  } else {
    std::vector<Complex> vals = separated_complex(dim, rng);
    // Sort by distance from a random reference point and track the k nearest;
    // retry the reference until the radial separation supports a circle with
    // >= 0.05 clearance on both sides.
    int k = 1 + static_cast<int>(rng.below(dim - 1));
    bool placed = false;
    for (int attempt = 0; attempt < 64 && !placed; ++attempt) {
      Complex z(2.0 * rng.uniform() - 1.0, 2.0 * rng.uniform() - 1.0);
      std::vector<int> order(dim);
      std::iota(order.begin(), order.end(), 0);
      std::sort(order.begin(), order.end(), [&](int a, int b) {
        return std::abs(vals[a] - z) < std::abs(vals[b] - z);
      });
      double rk = std::abs(vals[order[k - 1]] - z);
      double rk1 = std::abs(vals[order[k]] - z);
      if (rk1 - rk >= 0.1) {
        window = ContourWindow{z, 0.5 * (rk + rk1)};
        placed = true;
      }
    }
    if (!placed) {
      // Fall back to a small circle around the first eigenvalue; the 0.15
      // grid separation leaves 0.076 clearance outside a radius of 0.074.
      window = ContourWindow{vals[0], 0.074};
    }
    for (int i = 0; i < dim; ++i) {
      d0[i] = vals[i];
      d1[i] = Complex(2.0 * rng.uniform() - 1.0, 2.0 * rng.uniform() - 1.0) * 0.5;
      d2[i] = Complex(2.0 * rng.uniform() - 1.0, 2.0 * rng.uniform() - 1.0) * 0.5;
    }
  }

  ComplexMatrix v = random_unitary(dim, rng);
  ComplexMatrix gk = random_hermitian(dim, rng);
  gk *= 0.3 / std::max(1.0, operator_norm(gk));

  ComplexMatrix a = v * d0.asDiagonal() * v.adjoint();
  ComplexMatrix b1m = v * d1.asDiagonal() * v.adjoint();
  ComplexMatrix b2m = v * d2.asDiagonal() * v.adjoint();
  ComplexMatrix k = Complex(0.0, 1.0) * gk;  // anti-Hermitian rotation generator

  auto comm = [](const ComplexMatrix& x, const ComplexMatrix& y) {
    return (x * y - y * x).eval();
  };

  CalculusInstance inst;
  inst.dim = dim;
  inst.hermitian = hermitian;
  inst.a = a;
  inst.aprime = comm(k, a) + b1m;
  inst.asecond = comm(k, comm(k, a)) + 2.0 * comm(k, b1m) + b2m;
  inst.window = window;

  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(gk);
  ComplexMatrix w = es.eigenvectors();
  RealVector kvals = es.eigenvalues();
  inst.path_value = [=](double t) {
    ComplexVector rot(dim);
    for (int i = 0; i < dim; ++i) rot[i] = std::exp(Complex(0.0, 0.3 * t * kvals[i]));
    // exp(tK) = W exp(0.3 i t diag) W* since K = 0.3 i G and G = W diag W*.
    ComplexMatrix e = w * rot.asDiagonal() * w.adjoint();
    ComplexVector dt(dim);
    for (int i = 0; i < dim; ++i) dt[i] = d0[i] + t * d1[i] + 0.5 * t * t * d2[i];
    return ComplexMatrix(e * v * dt.asDiagonal() * v.adjoint() * e.adjoint());
  };
  return inst;
}

ComplexMatrix random_conditioned_hermitian(int dim, double kappa, Rng& rng) {
  if (dim < 2) throw ValidationError("need dimension >= 2 to pin both singular values");
  if (!(kappa >= 1.0)) throw ValidationError("condition number must be >= 1");
  RealVector mags(dim);
  mags[0] = 1.0;
  mags[1] = 1.0 / kappa;
  for (int i = 2; i < dim; ++i)
    mags[i] = 1.0 / kappa + (1.0 - 1.0 / kappa) * rng.uniform();
  ComplexVector eigs(dim);
  for (int i = 0; i < dim; ++i)
    eigs[i] = Complex((rng.uniform() < 0.5 ? -1.0 : 1.0) * mags[i], 0.0);
  ComplexMatrix v = random_unitary(dim, rng);
  return v * eigs.asDiagonal() * v.adjoint();
}

}  // namespace eigenpath
