#pragma once

// Small deterministic generators for property tests.

#include <cmath>
#include <complex>
#include <random>

#include <Eigen/Dense>

#include "sectcalc/types.hpp"

namespace gen {

using sectcalc::CMatrix;
using sectcalc::Complex;

inline std::mt19937_64 rng(std::uint64_t seed) { return std::mt19937_64(seed); }

inline double uniform(std::mt19937_64& g, double a, double b) {
  return std::uniform_real_distribution<double>(a, b)(g);
}

inline double logUniform(std::mt19937_64& g, double a, double b) {
  return std::exp(uniform(g, std::log(a), std::log(b)));
}

// Point with modulus log-uniform in [rmin, rmax] and |arg| <= frac * theta.
inline Complex inSector(std::mt19937_64& g, double theta, double rmin = 1e-2, double rmax = 1e2,
                        double frac = 0.95) {
  return std::polar(logUniform(g, rmin, rmax), uniform(g, -frac * theta, frac * theta));
}

inline CMatrix randomUnitary(std::mt19937_64& g, int n) {
  std::normal_distribution<double> nd;
  CMatrix m(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m(i, j) = Complex(nd(g), nd(g));
  Eigen::HouseholderQR<CMatrix> qr(m);
  return qr.householderQ() * CMatrix::Identity(n, n);
}

// Normal matrix U diag(d) U* with eigenvalues in the sector |arg| <= theta.
inline CMatrix normalInSector(std::mt19937_64& g, int n, double theta, Eigen::VectorXcd* eig = nullptr,
                              double rmin = 0.1, double rmax = 10.0) {
  CMatrix u = randomUnitary(g, n);
  Eigen::VectorXcd d(n);
  for (int i = 0; i < n; ++i) d(i) = std::polar(logUniform(g, rmin, rmax), uniform(g, -theta, theta));
  if (eig) *eig = d;
  return u * d.asDiagonal() * u.adjoint();
}

inline double relErr(Complex a, Complex b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

inline double relErr(const CMatrix& a, const CMatrix& b) { return (a - b).norm() / std::max(b.norm(), 1e-300); }

}  // namespace gen
