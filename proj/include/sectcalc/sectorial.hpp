#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "sectcalc/functions.hpp"
#include "sectcalc/quad.hpp"
#include "sectcalc/types.hpp"

namespace sectcalc {

// A = U T U* with T upper triangular. Resolvents and functions of A are
// formed on T and rotated back once; when T is diagonal to rounding (normal
// A) everything reduces to per-eigenvalue scalars.
template <typename Real>
struct SchurFormT {
  CMatrixT<Real> U, T;
  bool diagonal = false;

  SchurFormT() = default;
  explicit SchurFormT(const CMatrixT<Real>& a) {
    if (a.rows() != a.cols()) throw InputError("matrix must be square");
    const Eigen::Index n = a.rows();
    if (isDiagonal(a)) {
      U = CMatrixT<Real>::Identity(n, n);
      T = a;
      diagonal = true;
      return;
    }
    Eigen::ComplexSchur<CMatrixT<Real>> schur(a);
    if (schur.info() != Eigen::Success) throw Error("Schur decomposition failed");
    U = schur.matrixU();
    T = schur.matrixT();
    diagonal = isDiagonal(T);
    if (diagonal) T = CMatrixT<Real>(T.diagonal().asDiagonal());
  }

  Eigen::Index size() const { return T.rows(); }
  CVectorT<Real> eigenvalues() const { return T.diagonal(); }
  // U X U*
  CMatrixT<Real> toOriginal(const CMatrixT<Real>& x) const { return U * x * U.adjoint(); }
  CMatrixT<Real> toOriginal(const CVectorT<Real>& d) const { return U * d.asDiagonal() * U.adjoint(); }

 private:
  static bool isDiagonal(const CMatrixT<Real>& m) {
    const Real scale = m.cwiseAbs().maxCoeff();
    const Real tol = Real(64) * std::numeric_limits<Real>::epsilon() * (scale > 0 ? scale : Real(1));
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      for (Eigen::Index i = 0; i < m.rows(); ++i)
        if (i != j && std::abs(m(i, j)) > tol) return false;
    return true;
  }
};
using SchurForm = SchurFormT<double>;

// (A + z)^{-1} by a partially pivoted LU. Throws SingularMatrixError when the
// reciprocal condition estimate is below n eps; cond receives 1/rcond.
template <typename Derived>
CMatrixT<typename Derived::RealScalar> resolventSolve(const Eigen::MatrixBase<Derived>& a,
                                                      std::complex<typename Derived::RealScalar> z,
                                                      typename Derived::RealScalar* cond = nullptr) {
  using Real = typename Derived::RealScalar;
  const Eigen::Index n = a.rows();
  CMatrixT<Real> shifted = a;
  shifted.diagonal().array() += z;
  Eigen::PartialPivLU<CMatrixT<Real>> lu(shifted);
  const Real rcond = lu.rcond();
  if (cond) *cond = rcond > 0 ? Real(1) / rcond : std::numeric_limits<Real>::infinity();
  if (!(rcond > Real(n) * std::numeric_limits<Real>::epsilon()))
    throw SingularMatrixError("A + z is numerically singular", rcond > 0 ? Real(1) / rcond : kInf);
  return lu.solve(CMatrixT<Real>::Identity(n, n));
}

// Spectral norm of (A + z)^{-1}, i.e. 1 / sigma_min(A + z).
template <typename Derived>
typename Derived::RealScalar resolventNorm(const Eigen::MatrixBase<Derived>& a,
                                           std::complex<typename Derived::RealScalar> z) {
  using Real = typename Derived::RealScalar;
  CMatrixT<Real> shifted = a;
  shifted.diagonal().array() += z;
  Eigen::JacobiSVD<CMatrixT<Real>> svd(shifted);
  const Real smin = svd.singularValues()(svd.singularValues().size() - 1);
  return smin > 0 ? Real(1) / smin : std::numeric_limits<Real>::infinity();
}

// Ray sampling used for the constants M(A, omega').
struct CertifyGrid {
  int moduli = 61;
  double widen = 1e3;    // modulus range of the spectrum widened by this each way
  double safety = 1.05;  // multiplies every sampled supremum
  double argTolerance = 1e-10;
  // Angles omega' to tabulate; empty means omega + k (pi - omega) / 24, k = 1..23, plus pi/2.
  std::vector<double> omegaPrimes;
};

struct SectorialMatrix {
  CMatrix A;
  double omega = 0.0;
  // omega' -> M(A, omega'), sup of |z (A + z)^{-1}| on arg z = +-(pi - omega')
  std::map<double, double> constants;
  // sup over s > 0 of |s (A + s)^{-1}|
  double MA = kInf;
  bool injective = true;
  bool denseRange = true;
  CVector eigenvalues;
  double rMin = 0.0, rMax = 0.0;  // sampled modulus range
  int moduli = 61;                // ray sampling used at certification
  double safety = 1.05;
  SchurForm schur;

  Eigen::Index size() const { return A.rows(); }
  // M(A, beta) from the table: the nearest tabulated omega' <= beta, which
  // bounds M(A, beta) from above because M(A, .) is nonincreasing. Throws
  // HypothesisError when no tabulated omega' in (omega, beta] exists.
  double constantAt(double beta) const;
  // constantAt when the table covers beta, otherwise the rays at pi - beta
  // sampled on demand with the certification grid and safety factor.
  double constantOrSample(double beta) const;
};

// Throws HypothesisError when an eigenvalue leaves the closed sector, InputError
// for a non-square matrix or omega outside [0, pi).
SectorialMatrix certifySectorial(const CMatrix& A, double omega, const CertifyGrid& grid = {});

// sup of |z (A + z)^{-1}| over arg z = +-phi, |z| on the grid's modulus range
// (phi = 0 samples the positive axis only). Not multiplied by the safety factor.
double sampledRaySup(const SchurForm& schur, double phi, double rMin, double rMax, int count);
// |(A + z)^{-1}| through the Schur factor; per-eigenvalue when it is diagonal.
double resolventNorm(const SchurForm& schur, Complex z);

// (A + z)^{-1}. Throws SingularMatrixError near the spectrum.
CMatrix resolvent(const SectorialMatrix& S, Complex z);

// Kato's formula for (A^q + z)^{-1}, q in (0, 1), |arg z| < (1 - q) pi.
struct MatrixIntegral {
  CMatrix value;
  double errEstimate = 0.0;
  int evaluations = 0;
  bool converged = false;
};
MatrixIntegral fractionalResolventKato(const SectorialMatrix& S, double q, Complex z,
                                       const QuadratureConfig& quad = {});

enum class MatrixFunctionMethod { EigenOracle, Contour };

struct MatrixFunctionResult {
  CMatrix value;
  MatrixFunctionMethod method = MatrixFunctionMethod::EigenOracle;
  // cond(V) for the eigen oracle, max |(lambda - A)^{-1}| |lambda| on the contour
  double conditionEstimate = 1.0;
  bool converged = true;
  std::vector<std::string> warnings;
};

using ScalarFunction = std::function<Complex(Complex)>;

// g(A). The eigen oracle diagonalizes A and falls back to the contour when the
// eigenvector matrix has condition above 1e8. The contour is the boundary of
// {r_min/2 <= |lambda| <= 2 r_max, |arg lambda| <= phi_c} with phi_c halfway
// between the largest eigenvalue argument and pi; it needs 0 outside the spectrum.
// domainAngle caps phi_c for functions defined only on |arg| < domainAngle.
MatrixFunctionResult matrixFunction(const CMatrix& A, const ScalarFunction& g,
                                    MatrixFunctionMethod method = MatrixFunctionMethod::EigenOracle,
                                    const QuadratureConfig& quad = {}, double domainAngle = kPi);
MatrixFunctionResult matrixFunction(const SectorialMatrix& S, const Function& f,
                                    MatrixFunctionMethod method = MatrixFunctionMethod::EigenOracle,
                                    const QuadratureConfig& quad = {});

// Principal A^alpha.
CMatrix fractionalPower(const CMatrix& A, double alpha);

// Theoretical value against a sampled supremum.
struct BoundPoint {
  Complex z;
  double quantity = 0.0;
  double bound = 0.0;
  double margin() const { return bound - quantity; }
};

struct BoundReport {
  std::string formula;  // short name, e.g. "fractional power resolvent, q < 1"
  std::map<std::string, double> inputs;
  double theoretical = kInf;
  double measured = 0.0;
  double margin = kInf;  // theoretical - measured
  std::vector<BoundPoint> points;
  std::vector<std::string> notes;
  bool pass() const { return margin >= 0; }
  void finish();
};

// (sin pi q / pi q) ((pi q + psi) / sin(pi q + psi)) M / r, q in (0, 1), psi in (0, (1 - q) pi).
double fracPowerResolventBound(double M, double q, double psi, double r);
// Checks that bound against |(A^q + z)^{-1}| over a grid in the sector of angle psi.
BoundReport fracPowerResolventReport(const SectorialMatrix& S, double q, double psi, int count = 40);

struct MTilde {
  double value = kInf;
  double beta = 0.0;
  double MA = kInf;
  double MBeta = kInf;  // M(A, beta) from the table, or sampled when the table has no angle in (omega, beta]
};
// M(A) + 2 M(A, beta) / (pi cos(beta/2) cos(q beta/2)), beta = (omega + (pi - psi)/q)/2,
// for q > 1, q omega < pi, psi in [0, pi - q omega).
MTilde mTilde(const SectorialMatrix& S, double q, double psi);
double mTildeFormula(double MA, double MBeta, double beta, double q);
// mTilde against the sampled sup of |z (A^q + z)^{-1}| over the sector of angle psi (psi > 0).
BoundReport fracPowerSectorialBound(const SectorialMatrix& S, double q, double psi, int count = 40);

// Points of a sector grid: |arg z| in {0, +-psi/2, +-psi} (boundary rays first),
// moduli geometric on [rMin, rMax]; count points in total.
std::vector<Complex> sectorGrid(double psi, double rMin, double rMax, int count);

}  // namespace sectcalc
