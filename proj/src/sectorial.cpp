#include "sectcalc/sectorial.hpp"

#include <algorithm>
#include <cmath>

#include <unsupported/Eigen/MatrixFunctions>

#include "sectcalc/parallel.hpp"

namespace sectcalc {

namespace {

std::vector<double> geometric(double lo, double hi, int n) {
  std::vector<double> out(n);
  if (n == 1) {
    out[0] = std::sqrt(lo * hi);
    return out;
  }
  const double a = std::log(lo), b = std::log(hi);
  for (int i = 0; i < n; ++i) out[i] = std::exp(a + (b - a) * i / (n - 1));
  return out;
}

// (T + z)^{-1} for upper triangular T.
CMatrix shiftedTriangularInverse(const CMatrix& T, Complex z) {
  CMatrix s = T;
  s.diagonal().array() += z;
  return s.triangularView<Eigen::Upper>().solve(CMatrix::Identity(T.rows(), T.cols()));
}

}  // namespace

double SectorialMatrix::constantAt(double beta) const {
  double best = kInf;
  bool found = false;
  for (const auto& [w, m] : constants) {
    if (w > omega && w <= beta * (1 + 1e-14)) {
      best = m;  // map is ordered, so the last hit is the nearest below
      found = true;
    }
  }
  if (!found)
    throw HypothesisError("no tabulated angle in (omega, " + std::to_string(beta) + "] for M(A, beta)");
  return best;
}

double SectorialMatrix::constantOrSample(double beta) const {
  if (!(beta > omega && beta < kPi)) throw HypothesisError("M(A, beta) needs beta in (omega, pi)");
  for (const auto& [w, m] : constants)
    if (w > omega && w <= beta * (1 + 1e-14)) return constantAt(beta);
  return safety * sampledRaySup(schur, kPi - beta, rMin, rMax, moduli);
}

double resolventNorm(const SchurForm& schur, Complex z) {
  if (schur.diagonal) {
    double m = kInf;
    for (Eigen::Index i = 0; i < schur.size(); ++i) m = std::min(m, std::abs(schur.T(i, i) + z));
    return m > 0 ? 1 / m : kInf;
  }
  return resolventNorm(schur.T, z);
}

double sampledRaySup(const SchurForm& schur, double phi, double rMin, double rMax, int count) {
  double sup = 0.0;
  for (double r : geometric(rMin, rMax, count)) {
    sup = std::max(sup, r * resolventNorm(schur, std::polar(r, phi)));
    if (phi != 0.0) sup = std::max(sup, r * resolventNorm(schur, std::polar(r, -phi)));
  }
  return sup;
}

SectorialMatrix certifySectorial(const CMatrix& A, double omega, const CertifyGrid& grid) {
  if (A.rows() != A.cols() || A.rows() == 0) throw InputError("matrix must be square and nonempty", "/matrix");
  if (!A.allFinite()) throw InputError("matrix has non-finite entries", "/matrix");
  if (!(omega >= 0 && omega < kPi)) throw InputError("omega outside [0, pi)", "/omega");
  SectorialMatrix S;
  S.A = A;
  S.omega = omega;
  S.schur = SchurForm(A);
  S.eigenvalues = S.schur.eigenvalues();

  const double scale = std::max(A.cwiseAbs().maxCoeff(), 1e-300);
  double lo = kInf, hi = 0.0;
  for (Eigen::Index i = 0; i < S.eigenvalues.size(); ++i) {
    const Complex l = S.eigenvalues(i);
    if (std::abs(l) <= 1e-12 * scale) {
      S.injective = false;
      continue;
    }
    if (std::abs(std::arg(l)) > omega + grid.argTolerance)
      throw HypothesisError("eigenvalue " + std::to_string(l.real()) + (l.imag() < 0 ? "" : "+") +
                            std::to_string(l.imag()) + "i lies outside the closed sector of angle " +
                            std::to_string(omega));
    lo = std::min(lo, std::abs(l));
    hi = std::max(hi, std::abs(l));
  }
  // for matrices 0 in the spectrum breaks both properties at once
  S.denseRange = S.injective;
  if (hi == 0.0) lo = hi = scale;  // nilpotent: only the norm gives a scale
  S.rMin = lo / grid.widen;
  S.rMax = hi * grid.widen;
  S.moduli = grid.moduli;
  S.safety = grid.safety;

  std::vector<double> angles = grid.omegaPrimes;
  if (angles.empty()) {
    for (int k = 1; k < 24; ++k) angles.push_back(omega + k * (kPi - omega) / 24);
    angles.push_back(kPi / 2);
  }
  std::vector<double> keep;
  for (double w : angles)
    if (w > omega && w < kPi) keep.push_back(w);
  std::vector<double> values(keep.size());
  parallelFor(keep.size(), [&](std::size_t i) {
    values[i] = grid.safety * sampledRaySup(S.schur, kPi - keep[i], S.rMin, S.rMax, grid.moduli);
  });
  for (std::size_t i = 0; i < keep.size(); ++i) S.constants[keep[i]] = values[i];
  S.MA = grid.safety * sampledRaySup(S.schur, 0.0, S.rMin, S.rMax, grid.moduli);
  return S;
}

CMatrix resolvent(const SectorialMatrix& S, Complex z) {
  double cond = 0.0;
  CMatrix x = resolventSolve(S.A, z, &cond);
  CMatrix shifted = S.A;
  shifted.diagonal().array() += z;
  const double n = double(S.size());
  const double residual = (shifted * x - CMatrix::Identity(S.size(), S.size())).cwiseAbs().maxCoeff();
  if (residual > n * 1e-12 * std::max(1.0, cond))
    throw SingularMatrixError("resolvent residual " + std::to_string(residual) + " too large", cond);
  return x;
}

MatrixIntegral fractionalResolventKato(const SectorialMatrix& S, double q, Complex z, const QuadratureConfig& quad) {
  if (!(q > 0 && q < 1)) throw InputError("q must lie in (0, 1)", "/q");
  if (!(std::abs(z) > 0) || !(std::abs(std::arg(z)) < (1 - q) * kPi))
    throw InputError("z outside the sector |arg| < (1 - q) pi", "/z");
  const SchurForm& sf = S.schur;
  const Complex up = std::polar(1.0, kPi * q), down = std::conj(up);
  const double c = std::sin(kPi * q) / kPi;
  auto weight = [&](double t) {
    const double p = std::pow(t, q);
    return c * p / ((p * up + z) * (p * down + z));
  };
  const double centre = 0.5 * (std::log(S.rMin) + std::log(S.rMax));
  const HalfLineOrders orders{q, q, centre};
  MatrixIntegral out;
  if (sf.diagonal) {
    const CVector d = sf.T.diagonal();
    auto g = [&](double t) -> CVector { return weight(t) * (d.array() + t).inverse().matrix(); };
    auto r = integrateHalfLine(g, orders, quad);
    out.value = sf.toOriginal(r.value);
    out.errEstimate = r.errEstimate;
    out.evaluations = r.evaluations;
    out.converged = r.converged;
  } else {
    auto g = [&](double t) -> CMatrix { return weight(t) * shiftedTriangularInverse(sf.T, t); };
    auto r = integrateHalfLine(g, orders, quad);
    out.value = sf.toOriginal(r.value);
    out.errEstimate = r.errEstimate;
    out.evaluations = r.evaluations;
    out.converged = r.converged;
  }
  return out;
}

namespace {

MatrixFunctionResult contourFunction(const CMatrix& A, const ScalarFunction& g, const QuadratureConfig& quad,
                                     double domainAngle) {
  const SchurForm sf(A);
  const CVector ev = sf.eigenvalues();
  double rMin = kInf, rMax = 0.0, phiMax = 0.0;
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    const double r = std::abs(ev(i));
    rMin = std::min(rMin, r);
    rMax = std::max(rMax, r);
    phiMax = std::max(phiMax, std::abs(std::arg(ev(i))));
  }
  if (!(rMin > 1e-12 * std::max(rMax, 1e-300)))
    throw DomainError("contour needs 0 outside the spectrum");
  if (!(phiMax < domainAngle)) throw DomainError("spectrum reaches the edge of the function's domain");
  const double r1 = rMin / 2, r2 = 2 * rMax;
  const double phiC = phiMax + (domainAngle - phiMax) / 2;
  const Eigen::Index n = A.rows();
  const CMatrix I = CMatrix::Identity(n, n);

  // g(lambda) (lambda - T)^{-1} dlambda / (2 pi i); the arcs and rays below
  // trace the boundary counterclockwise.
  auto kernel = [&](Complex lambda, Complex dlambda) -> CMatrix {
    CMatrix s = -sf.T;
    s.diagonal().array() += lambda;
    CMatrix inv = s.triangularView<Eigen::Upper>().solve(I);
    return (g(lambda) * dlambda / Complex(0, 2 * kPi)) * inv;
  };
  auto oriented = [&](const auto& h, double a, double b) {
    if (a < b) return integrateInterval(h, a, b, quad);
    auto r = integrateInterval(h, b, a, quad);
    r.value = -r.value;
    return r;
  };
  auto arc = [&](double r, double a, double b) {
    auto h = [&](double phi) {
      const Complex l = std::polar(r, phi);
      return kernel(l, Complex(0, 1) * l);
    };
    return oriented(h, a, b);
  };
  auto ray = [&](double phi, double sa, double sb) {
    auto h = [&](double s) {
      const Complex l = std::polar(std::exp(s), phi);
      return kernel(l, l);
    };
    return oriented(h, sa, sb);
  };
  const double la = std::log(r1), lb = std::log(r2);
  auto outer = arc(r2, -phiC, phiC);
  auto top = ray(phiC, lb, la);
  auto inner = arc(r1, phiC, -phiC);
  auto bottom = ray(-phiC, la, lb);

  MatrixFunctionResult out;
  out.method = MatrixFunctionMethod::Contour;
  out.value = sf.toOriginal(CMatrix(outer.value + top.value + inner.value + bottom.value));
  out.converged = outer.converged && top.converged && inner.converged && bottom.converged;
  double cond = 0.0;
  for (Complex l : {std::polar(r1, 0.0), std::polar(r2, 0.0), std::polar(r1, phiC), std::polar(r2, phiC),
                    std::polar(std::sqrt(r1 * r2), phiC)})
    cond = std::max(cond, std::abs(l) * resolventNorm(sf, -l));
  out.conditionEstimate = cond;
  if (cond > 1e8) out.warnings.push_back("contour passes close to the spectrum (condition " + std::to_string(cond) + ")");
  if (!out.converged) out.warnings.push_back("contour quadrature did not converge");
  return out;
}

}  // namespace

MatrixFunctionResult matrixFunction(const CMatrix& A, const ScalarFunction& g, MatrixFunctionMethod method,
                                    const QuadratureConfig& quad, double domainAngle) {
  if (A.rows() != A.cols()) throw InputError("matrix must be square", "/matrix");
  if (method == MatrixFunctionMethod::Contour) return contourFunction(A, g, quad, domainAngle);

  MatrixFunctionResult out;
  const Eigen::Index n = A.rows();
  bool isDiag = true;
  for (Eigen::Index j = 0; j < n && isDiag; ++j)
    for (Eigen::Index i = 0; i < n; ++i)
      if (i != j && A(i, j) != 0.0) {
        isDiag = false;
        break;
      }
  if (isDiag) {
    CVector d(n);
    for (Eigen::Index i = 0; i < n; ++i) d(i) = g(A(i, i));
    out.value = d.asDiagonal();
    return out;
  }
  Eigen::ComplexEigenSolver<CMatrix> es(A);
  if (es.info() != Eigen::Success) {
    auto r = contourFunction(A, g, quad, domainAngle);
    r.warnings.insert(r.warnings.begin(), "eigensolver failed; used the contour");
    return r;
  }
  const CMatrix& V = es.eigenvectors();
  Eigen::JacobiSVD<CMatrix> svd(V);
  const auto& sv = svd.singularValues();
  const double cond = sv(n - 1) > 0 ? sv(0) / sv(n - 1) : kInf;
  if (!(cond <= 1e8)) {
    auto r = contourFunction(A, g, quad, domainAngle);
    r.warnings.insert(r.warnings.begin(),
                      "eigenvector condition " + std::to_string(cond) + " (defective or nearly so); used the contour");
    return r;
  }
  CVector d(n);
  for (Eigen::Index i = 0; i < n; ++i) d(i) = g(es.eigenvalues()(i));
  out.value = V * d.asDiagonal() * V.partialPivLu().inverse();
  out.conditionEstimate = cond;
  return out;
}

MatrixFunctionResult matrixFunction(const SectorialMatrix& S, const Function& f, MatrixFunctionMethod method,
                                    const QuadratureConfig& quad) {
  const double domain = f.has(Tag::CBF) ? kPi : kPi / 2;
  return matrixFunction(S.A, [&f](Complex z) { return f(z); }, method, quad, domain);
}

CMatrix fractionalPower(const CMatrix& A, double alpha) {
  if (alpha == 1.0) return A;
  if (alpha == 0.0) return CMatrix::Identity(A.rows(), A.cols());
  if (alpha == std::round(alpha) && alpha > 0) {
    CMatrix out = A;
    for (int k = 1; k < int(alpha); ++k) out = out * A;
    return out;
  }
  return A.pow(alpha);
}

void BoundReport::finish() {
  measured = 0.0;
  theoretical = kInf;
  margin = kInf;
  for (const BoundPoint& p : points) {
    measured = std::max(measured, p.quantity);
    theoretical = std::min(theoretical, p.bound);
    margin = std::min(margin, p.margin());
  }
}

std::vector<Complex> sectorGrid(double psi, double rMin, double rMax, int count) {
  std::vector<double> angles;
  if (psi > 0) angles = {psi, -psi, psi / 2, -psi / 2, 0.0};
  else angles = {0.0};
  const int per = std::max(1, int(std::ceil(double(count) / angles.size())));
  std::vector<Complex> out;
  for (double a : angles)
    for (double r : geometric(rMin, rMax, per)) out.push_back(std::polar(r, a));
  return out;
}

double fracPowerResolventBound(double M, double q, double psi, double r) {
  if (!(q > 0 && q < 1)) throw InputError("q must lie in (0, 1)", "/q");
  if (!(psi > 0 && psi < (1 - q) * kPi)) throw InputError("psi outside (0, (1 - q) pi)", "/psi");
  if (!(r > 0)) throw InputError("|z| must be positive", "/r");
  if (!(M >= 0)) throw InputError("M must be nonnegative", "/M");
  const double a = kPi * q;
  return std::sin(a) / a * ((a + psi) / std::sin(a + psi)) * M / r;
}

BoundReport fracPowerResolventReport(const SectorialMatrix& S, double q, double psi, int count) {
  BoundReport rep;
  rep.formula = "fractional power resolvent, q in (0,1)";
  rep.inputs = {{"q", q}, {"psi", psi}, {"M(A)", S.MA}};
  const double boundScaled = fracPowerResolventBound(S.MA, q, psi, 1.0);
  const SchurForm aq(fractionalPower(S.A, q));
  for (Complex z : sectorGrid(psi, std::pow(S.rMin, q), std::pow(S.rMax, q), count))
    rep.points.push_back({z, std::abs(z) * resolventNorm(aq, z), boundScaled});
  rep.notes.push_back("quantity is |z| |(A^q + z)^{-1}|; M(A) is a sampled value times the safety factor");
  rep.finish();
  return rep;
}

double mTildeFormula(double MA, double MBeta, double beta, double q) {
  return MA + 2 * MBeta / (kPi * std::cos(beta / 2) * std::cos(q * beta / 2));
}

MTilde mTilde(const SectorialMatrix& S, double q, double psi) {
  if (!(q > 1)) throw InputError("q must exceed 1", "/q");
  if (!(q * S.omega < kPi)) throw HypothesisError("q omega must stay below pi");
  if (!(psi >= 0 && psi < kPi - q * S.omega)) throw InputError("psi outside [0, pi - q omega)", "/psi");
  MTilde m;
  m.beta = (S.omega + (kPi - psi) / q) / 2;
  m.MA = S.MA;
  m.MBeta = S.constantOrSample(m.beta);
  m.value = mTildeFormula(m.MA, m.MBeta, m.beta, q);
  return m;
}

BoundReport fracPowerSectorialBound(const SectorialMatrix& S, double q, double psi, int count) {
  if (!(psi > 0)) throw InputError("psi must be positive", "/psi");
  const MTilde m = mTilde(S, q, psi);
  BoundReport rep;
  rep.formula = "fractional power sectoriality, q > 1";
  rep.inputs = {{"q", q}, {"psi", psi}, {"omega", S.omega}, {"beta", m.beta}, {"M(A)", m.MA}, {"M(A,beta)", m.MBeta}};
  const auto aqr = matrixFunction(S.A, [q](Complex z) { return std::pow(z, q); });
  for (const auto& w : aqr.warnings) rep.notes.push_back(w);
  const SchurForm aq(aqr.value);
  for (Complex z : sectorGrid(psi, std::pow(S.rMin, q), std::pow(S.rMax, q), count))
    rep.points.push_back({z, std::abs(z) * resolventNorm(aq, z), m.value});
  rep.notes.push_back("measured side samples the sector; table constants are sampled values times the safety factor");
  rep.finish();
  return rep;
}

}  // namespace sectcalc
