#include "sectcalc/opcalc.hpp"

#include <algorithm>
#include <cmath>

#include <unsupported/Eigen/MatrixFunctions>

#include "sectcalc/classcheck.hpp"
#include "sectcalc/parallel.hpp"

namespace sectcalc {

const char* opModeName(OpMode m) { return m == OpMode::General ? "general" : "cbf"; }

std::pair<double, double> admissibleQ(OpMode mode, double omega, double zArg) {
  const double floor = mode == OpMode::General ? 2.0 : 1.0;
  const double a = std::abs(zArg);
  const double lo = a < kPi ? std::max(floor, kPi / (kPi - a)) : kInf;
  const double hi = omega > 0 ? kPi / omega : kInf;
  return {lo, hi};
}

double pickQ(OpMode mode, double omega, double zArg) {
  const auto [lo, hi] = admissibleQ(mode, omega, zArg);
  if (!(lo < hi)) throw HypothesisError("no admissible q: need q in (" + std::to_string(lo) + ", " + std::to_string(hi) + ")");
  // lo may land a rounding error below an integer that is itself excluded
  const double k = std::floor(lo * (1 + 1e-12)) + 1;
  if (k < hi) return k;
  return 0.5 * (lo + hi);
}

OperatorRepChoice chooseOperatorRep(const Function& f, const SectorialMatrix& S, double zArg, OpMode mode) {
  OperatorRepChoice c;
  c.mode = mode;
  c.q = pickQ(mode, S.omega, zArg);
  c.form = chooseForm(f);
  c.qStrategy = QStrategy::IntegerPreferred;
  return c;
}

namespace {

void checkHypotheses(const Function& f, const SectorialMatrix& S, Complex z, const OperatorRepChoice& c) {
  const double q = c.q;
  if (c.mode == OpMode::General) {
    if (!(S.omega < kPi / 2)) throw HypothesisError("general mode needs omega < pi/2");
    if (!f.has(Tag::E) && !f.has(Tag::BF))
      throw HypothesisError("general mode needs a class E function, got " + f.describe());
    if (!S.injective && !f.has(Tag::BF))
      throw HypothesisError("0 is an eigenvalue, so the function must be Bernstein; " + f.describe() + " is not");
    if (!(q > 2)) throw InputError("q must exceed 2", "/q");
  } else {
    if (!f.has(Tag::CBF)) throw HypothesisError("cbf mode needs a complete Bernstein function, got " + f.describe());
    if (!(q > 1)) throw InputError("q must exceed 1", "/q");
  }
  if (!(q * S.omega < kPi)) throw InputError("q must stay below pi/omega", "/q");
  if (!(std::abs(z) > 0) || !(std::abs(std::arg(z)) < kPi - kPi / q))
    throw InputError("z outside the sector |arg| < pi - pi/q", "/z");
  const Limits& l = f.limits();
  const LimitValue& lim = c.form == RepForm::AtInfinity ? l.atInfinity : l.atZero;
  if (!lim.isDetermined())
    throw HypothesisError(std::string("limit needed by the ") + repFormName(c.form) + " form is undetermined");
}

double spectralNorm(const CMatrix& m) {
  Eigen::JacobiSVD<CMatrix> svd(m);
  return svd.singularValues()(0);
}

// 1 - e^{-x} without cancellation for small x
Complex oneMinusExpNeg(Complex x) {
  if (std::abs(x) < 1e-3) return x * (1.0 - x * (0.5 - x * (1.0 / 6 - x / 24.0)));
  return 1.0 - std::exp(-x);
}

CMatrix oneMinusExpNeg(const CMatrix& x) {
  const Eigen::Index n = x.rows();
  const CMatrix I = CMatrix::Identity(n, n);
  if (x.cwiseAbs().rowwise().sum().maxCoeff() < 0.5) {
    CMatrix term = x, sum = x;
    for (int k = 2; k < 40; ++k) {
      term = (-1.0 / k) * (term * x);
      sum += term;
      if (term.cwiseAbs().maxCoeff() <= 1e-18 * sum.cwiseAbs().maxCoeff()) break;
    }
    return sum;
  }
  return I - CMatrix((-x).exp());
}

}  // namespace

OperatorResolventResult operatorResolvent(const Function& f, const SectorialMatrix& S, Complex z,
                                          const OperatorRepChoice& choice, const QuadratureConfig& quad) {
  checkHypotheses(f, S, z, choice);
  const double q = choice.q;
  const bool atInf = choice.form == RepForm::AtInfinity;
  OperatorResolventResult out;
  out.choice = choice;
  const Limits& l = f.limits();
  const LimitValue& lim = atInf ? l.atInfinity : l.atZero;
  out.head = lim.isInfinite() ? Complex(0.0) : 1.0 / (z + lim.value);

  const SchurForm& sf = S.schur;
  const Eigen::Index n = sf.size();
  const Complex ray = std::polar(1.0, kPi / q);
  auto weight = [&](double t) { return representationWeight(f(t * ray), q, z) / t; };
  double lo = kInf, hi = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double r = std::abs(sf.T(i, i));
    if (r > 0) lo = std::min(lo, r), hi = std::max(hi, r);
  }
  const double centre = hi > 0 ? 0.5 * (std::log(lo) + std::log(hi)) : 0.0;
  const HalfLineOrders orders{1.0, 1.0, centre};

  CMatrix inSchur;
  if (sf.diagonal) {
    // per eigenvalue: rho = lambda^q / t^q, K = 1/(1+rho) or rho/(1+rho)
    CVector logLq(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const Complex lam = sf.T(i, i);
      logLq(i) = lam == 0.0 ? Complex(-kInf, 0.0) : q * std::log(lam);
    }
    auto g = [&](double t) -> CVector {
      const double lt = q * std::log(t);
      CVector k(n);
      for (Eigen::Index i = 0; i < n; ++i) {
        if (std::isinf(logLq(i).real())) {
          k(i) = atInf ? 1.0 : 0.0;
          continue;
        }
        const Complex e = logLq(i) - lt;
        if (e.real() <= 0) {
          const Complex rho = std::exp(e);
          k(i) = atInf ? 1.0 / (1.0 + rho) : rho / (1.0 + rho);
        } else {
          const Complex inv = std::exp(-e);
          k(i) = atInf ? inv / (1.0 + inv) : 1.0 / (1.0 + inv);
        }
      }
      const Complex w = weight(t);
      return (atInf ? w : -w) * k;
    };
    auto r = integrateHalfLine(g, orders, quad);
    inSchur = CMatrix(r.value.asDiagonal());
    inSchur.diagonal().array() += out.head;
    out.errEstimate = r.errEstimate;
    out.evaluations = r.evaluations;
    out.converged = r.converged;
  } else {
    // A^q on the triangular factor stays triangular
    const CMatrix Tq = (q == std::round(q) ? fractionalPower(sf.T, q) : CMatrix(sf.T.pow(q)))
                           .triangularView<Eigen::Upper>();
    const CMatrix I = CMatrix::Identity(n, n);
    auto g = [&](double t) -> CMatrix {
      const double p = std::clamp(std::pow(t, q), 1e-300, 1e300);
      CMatrix m = Tq;
      m.diagonal().array() += p;
      const auto tri = m.triangularView<Eigen::Upper>();
      const CMatrix k = atInf ? CMatrix(tri.solve(CMatrix(p * I))) : CMatrix(tri.solve(Tq));
      const Complex w = weight(t);
      return (atInf ? w : -w) * k;
    };
    auto r = integrateHalfLine(g, orders, quad);
    inSchur = r.value;
    inSchur.diagonal().array() += out.head;
    out.errEstimate = r.errEstimate;
    out.evaluations = r.evaluations;
    out.converged = r.converged;
  }
  out.value = sf.toOriginal(inSchur);
  return out;
}

OperatorResolventResult operatorResolvent(const Function& f, const SectorialMatrix& S, Complex z, OpMode mode,
                                          const QuadratureConfig& quad) {
  return operatorResolvent(f, S, z, chooseOperatorRep(f, S, std::arg(z), mode), quad);
}

CMatrix resolventOracle(const Function& f, const CMatrix& A, Complex z) {
  const double domain = f.has(Tag::CBF) ? kPi : kPi / 2;
  return matrixFunction(A, [&](Complex l) { return 1.0 / (z + f(l)); }, MatrixFunctionMethod::EigenOracle, {},
                        domain)
      .value;
}

double sectorialityBoundFormula(double kappa, double mt, double theta, double q) {
  const double c = std::cos(kPi / q), h = std::cos((kPi / q + theta) / 2);
  return 1 / std::sin(kPi / q) + q * mt * kappa / (kPi * c * c * h * h);
}

double cbfSectorialityBoundFormula(double mt, double theta, double q) {
  if (!(q > 2))
    throw HypothesisError("the complete Bernstein bound has cos(pi/q) <= 0 in its denominator for q <= 2");
  const double h = std::cos((kPi / q + theta) / 2);
  return 1 / std::sin(kPi / q) + 2 * q * std::tan(kPi / (2 * q)) * mt / (kPi * std::cos(kPi / q) * h * h);
}

KappaChoice kappaForBound(const Function& f, double q, const QuadratureConfig& quad) {
  KappaChoice k;
  if (f.has(Tag::BF)) {
    k.kappa = std::tan(kPi / q);
    k.source = "tan(pi/q)";
    return k;
  }
  const KappaEstimate e = estimateKappa(f, kPi / q, GridSpec{}, quad);
  k.kappa = e.kappa;
  k.source = "estimated";
  k.reliable = e.stable && e.converged;
  return k;
}

BoundReport sectorialityBound(const Function& f, const SectorialMatrix& S, double theta, double q, double kappa,
                              OpMode mode, int count, const QuadratureConfig& quad) {
  if (!(theta > 0 && theta < kPi - S.omega)) throw InputError("theta outside (0, pi - omega)", "/theta");
  const auto [lo, hi] = admissibleQ(mode, S.omega, theta);
  if (!(q > lo && q < hi))
    throw InputError("q outside (" + std::to_string(lo) + ", " + std::to_string(hi) + ")", "/q");
  const MTilde mt = mTilde(S, q, 0.0);
  BoundReport rep;
  rep.inputs = {{"theta", theta}, {"q", q}, {"omega", S.omega}, {"Mtilde", mt.value}, {"beta", mt.beta}};
  double bound;
  if (mode == OpMode::General) {
    rep.formula = "sectoriality of f(A)";
    rep.inputs["kappa"] = kappa;
    bound = sectorialityBoundFormula(kappa, mt.value, theta, q);
  } else {
    rep.formula = "sectoriality of f(A), complete Bernstein";
    bound = cbfSectorialityBoundFormula(mt.value, theta, q);
  }
  // z moduli follow the spectrum of f(A)
  double fl = kInf, fh = 0.0;
  for (Eigen::Index i = 0; i < S.eigenvalues.size(); ++i) {
    const Complex l = S.eigenvalues(i);
    const double m = std::abs(l) > 0 ? std::abs(f(l)) : 0.0;
    if (m > 0) fl = std::min(fl, m), fh = std::max(fh, m);
  }
  if (fh == 0.0) fl = fh = 1.0;
  const std::vector<Complex> zs = sectorGrid(theta, fl / 1e3, fh * 1e3, count);
  OperatorRepChoice choice;
  choice.q = q;
  choice.form = chooseForm(f);
  choice.mode = mode;
  choice.qStrategy = QStrategy::Explicit;
  std::vector<BoundPoint> pts(zs.size());
  std::vector<char> ok(zs.size(), 1);
  parallelFor(zs.size(), [&](std::size_t i) {
    const auto r = operatorResolvent(f, S, zs[i], choice, quad);
    ok[i] = r.converged;
    pts[i] = BoundPoint{zs[i], std::abs(zs[i]) * spectralNorm(r.value), bound};
  });
  rep.points = std::move(pts);
  const long bad = std::count(ok.begin(), ok.end(), 0);
  if (bad) rep.notes.push_back(std::to_string(bad) + " resolvent quadratures did not converge");
  rep.notes.push_back("Mtilde uses sampled constants times the safety factor");
  rep.finish();
  return rep;
}

ImprovedResolvent improvedResolvent(const Function& f, double alpha, const SectorialMatrix& S, Complex z,
                                    const QuadratureConfig& quad) {
  if (!(alpha > 0.5 && alpha < 1)) throw InputError("alpha must lie in (1/2, 1)", "/alpha");
  if (!(alpha * S.omega < kPi / 2)) throw HypothesisError("alpha omega must stay below pi/2");
  if (!f.has(Tag::E) && !f.has(Tag::BF)) throw HypothesisError("needs a class E function, got " + f.describe());
  if (!S.injective && !f.has(Tag::BF))
    throw HypothesisError("0 is an eigenvalue, so the function must be Bernstein; " + f.describe() + " is not");
  ImprovedResolvent out;
  const auto b = matrixFunction(S.A, [alpha](Complex l) { return l == 0.0 ? Complex(0.0) : std::pow(l, alpha); });
  out.B = certifySectorial(b.value, alpha * S.omega);
  out.resolvent = operatorResolvent(f, out.B, z, OpMode::General, quad);
  out.value = out.resolvent.value;
  return out;
}

CMatrix bernsteinApply(const LevyTriple& triple, const SectorialMatrix& S, const QuadratureConfig& quad) {
  validate(triple, quad);
  const SchurForm& sf = S.schur;
  const Eigen::Index n = sf.size();
  CMatrix inSchur = triple.a * CMatrix::Identity(n, n) + triple.b * sf.T;
  if (!triple.mu.empty()) {
    const KernelOrders orders{1.0, 0.0};
    if (sf.diagonal) {
      const CVector d = sf.T.diagonal();
      auto k = [&](double s) -> CVector {
        CVector v(n);
        for (Eigen::Index i = 0; i < n; ++i) v(i) = oneMinusExpNeg(s * d(i));
        return v;
      };
      auto r = triple.mu.integrate(k, orders, quad);
      inSchur.diagonal() += r.value;
    } else {
      auto k = [&](double s) -> CMatrix { return oneMinusExpNeg(CMatrix(s * sf.T)); };
      auto r = triple.mu.integrate(k, orders, quad);
      inSchur += r.value;
    }
  }
  return sf.toOriginal(inSchur);
}

CMatrix bernsteinApply(const Function& f, const SectorialMatrix& S, const QuadratureConfig& quad) {
  if (auto l = catalogLevyTriple(f)) return bernsteinApply(*l, S, quad);
  if (auto st = catalogStieltjesTriple(f)) return bernsteinApply(levyFromStieltjes(*st), S, quad);
  throw HypothesisError("no Levy triple known for " + f.describe());
}

CMatrix semigroup(const CMatrix& fA, double s) {
  if (!(s >= 0)) throw InputError("s must be nonnegative", "/s");
  if (fA.rows() != fA.cols()) throw InputError("matrix must be square", "/matrix");
  if (s == 0) return CMatrix::Identity(fA.rows(), fA.cols());
  const CMatrix x = -s * fA;
  if (!x.allFinite()) throw DomainError("s fA is not finite");
  CMatrix e = x.exp();
  if (!e.allFinite()) throw DomainError("matrix exponential overflowed");
  return e;
}

CMatrix barycentre(const SectorialMatrix& S, const ProbabilityMeasure& mu, const QuadratureConfig& quad) {
  if (!(S.omega < kPi / 2)) throw HypothesisError("barycentre needs omega < pi/2");
  validate(mu, quad);
  const SchurForm& sf = S.schur;
  const Eigen::Index n = sf.size();
  CMatrix inSchur = mu.massAtZero * CMatrix::Identity(n, n);
  if (!mu.mu.empty()) {
    const KernelOrders orders{0.0, 0.0};
    if (sf.diagonal) {
      const CVector d = sf.T.diagonal();
      auto k = [&](double s) -> CVector { return (-s * d.array()).exp().matrix(); };
      inSchur.diagonal() += mu.mu.integrate(k, orders, quad).value;
    } else {
      auto k = [&](double s) -> CMatrix { return CMatrix(-s * sf.T).exp(); };
      inSchur += mu.mu.integrate(k, orders, quad).value;
    }
  }
  return sf.toOriginal(inSchur);
}

RittReport checkRitt(const CMatrix& T, double angle, const RittGrid& grid) {
  if (T.rows() != T.cols()) throw InputError("matrix must be square", "/matrix");
  if (!(angle >= 0 && angle < kPi / 2)) throw InputError("angle outside [0, pi/2)", "/theta");
  if (!(grid.rhoMin > 0 && grid.rhoMin < grid.rhoMax && grid.rhoMax <= 1))
    throw InputError("need 0 < rhoMin < rhoMax <= 1", "/grid");
  RittReport rep;
  rep.T = T;
  rep.angle = angle;
  rep.thetaPrime = angle + grid.pad * (kPi / 2 - angle);

  Eigen::ComplexEigenSolver<CMatrix> es(T, false);
  rep.spectrumOk = true;
  for (Eigen::Index i = 0; i < T.rows(); ++i) {
    const Complex mu = es.eigenvalues()(i);
    const bool inDisk = std::abs(mu) <= 1 + 1e-12;
    const bool inSector = std::abs(1.0 - mu) <= 1e-12 || std::abs(std::arg(1.0 - mu)) <= angle + 1e-10;
    if (!inDisk || !inSector) {
      rep.spectrumOk = false;
      rep.notes.push_back("eigenvalue " + std::to_string(mu.real()) + "+" + std::to_string(mu.imag()) +
                          "i outside the Ritt region");
    }
  }

  const SchurForm sf(CMatrix(-T));
  const double decades = std::log10(grid.rhoMax / grid.rhoMin);
  const int nr = int(std::round(decades * grid.perDecade)) + 1;
  std::vector<double> perRho;
  std::vector<double> rhos;
  for (int i = 0; i < nr; ++i) {
    const double rho = grid.rhoMax * std::pow(grid.rhoMin / grid.rhoMax, double(i) / (nr - 1));
    double best = 0.0;
    for (int k = 0; k < grid.angles; ++k) {
      const double phi =
          grid.angles == 1 ? 0.0 : -rep.thetaPrime + 2 * rep.thetaPrime * k / double(grid.angles - 1);
      const Complex lambda = 1.0 - std::polar(rho, phi);
      if (std::abs(lambda) > 1 + 1e-15) continue;
      const double norm = resolventNorm(sf, lambda);
      if (!std::isfinite(norm)) throw DomainError("lambda lies in the spectrum of T");
      rep.points.push_back({lambda, rho, norm * rho, 0.0});
      best = std::max(best, norm * rho);
    }
    rhos.push_back(rho);
    perRho.push_back(best);
  }
  for (const RittPoint& p : rep.points) rep.C = std::max(rep.C, p.value);
  for (RittPoint& p : rep.points) p.margin = rep.C / p.rho - p.value / p.rho;

  // fitted C as the grid approaches 1: the running max over rho >= cut
  // must not grow by 5% or more over the last two decades
  const double cut = grid.rhoMin * 100 * (1 - 1e-12);
  double cBefore = 0.0;
  for (std::size_t i = 0; i < rhos.size(); ++i)
    if (rhos[i] >= cut) cBefore = std::max(cBefore, perRho[i]);
  rep.stable = rep.C > 0 && std::isfinite(rep.C) && rep.C - cBefore < 0.05 * rep.C;
  const bool marginsOk = std::all_of(rep.points.begin(), rep.points.end(), [](const RittPoint& p) { return p.margin >= 0; });
  rep.pass = rep.spectrumOk && rep.stable && std::isfinite(rep.C) && marginsOk;
  return rep;
}

}  // namespace sectcalc
