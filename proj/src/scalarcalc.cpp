#include "sectcalc/scalarcalc.hpp"

#include <cmath>
#include <string>

namespace sectcalc {

const char* repFormName(RepForm f) { return f == RepForm::AtInfinity ? "atInfinity" : "atZero"; }

namespace {

const LimitValue& headLimit(const Function& f, RepForm form) {
  return form == RepForm::AtInfinity ? f.limits().atInfinity : f.limits().atZero;
}

Complex headTerm(const LimitValue& lim, Complex z) {
  if (lim.isInfinite()) return 0.0;
  return 1.0 / (z + lim.value);
}

}  // namespace

void RepresentationChoice::validate(const Function& f) const {
  if (cbfMode) {
    if (!(q > 1)) throw InputError("q must exceed 1 for complete Bernstein functions", "/q");
    if (!f.has(Tag::CBF)) throw HypothesisError("cbf mode needs a complete Bernstein function, got " + f.describe());
  } else {
    if (!(q > 2)) throw InputError("q must exceed 2", "/q");
    if (!f.has(Tag::E))
      throw HypothesisError("the representation needs absolute convergence (class E), got " + f.describe());
  }
  if (!headLimit(f, form).isDetermined())
    throw HypothesisError(std::string("limit needed by the ") + repFormName(form) + " form is undetermined for " +
                          f.describe());
}

RepForm chooseForm(const Function& f) {
  const Limits& l = f.limits();
  if (l.atInfinity.isFinite()) return RepForm::AtInfinity;
  if (l.atZero.isFinite()) return RepForm::AtZero;
  if (l.atInfinity.isDetermined()) return RepForm::AtInfinity;
  if (l.atZero.isDetermined()) return RepForm::AtZero;
  throw HypothesisError("neither f(0+) nor f(oo) is determined for " + f.describe());
}

double defaultQ(double zArg) { return std::max(kPi / (kPi - std::abs(zArg)) + 0.1, 2.5); }

Complex representationWeight(Complex fz, double q, Complex z) {
  return (q / kPi) * fz.imag() / ((z + fz) * (z + std::conj(fz)));
}

ScalarResolventResult scalarResolvent(const Function& f, const RepresentationChoice& choice, Complex lambda,
                                      Complex z, const QuadratureConfig& quad) {
  choice.validate(f);
  const double q = choice.q;
  if (!(std::abs(lambda) > 0) || !(std::abs(std::arg(lambda)) < kPi / q))
    throw InputError("lambda outside the sector |arg| < pi/q", "/lambda");
  if (!(std::abs(z) > 0) || !(std::abs(std::arg(z)) < kPi - kPi / q))
    throw InputError("z outside the sector |arg| < pi - pi/q", "/z");

  ScalarResolventResult out;
  out.head = headTerm(headLimit(f, choice.form), z);
  const Complex ray = std::polar(1.0, kPi / q);
  const Complex logLambda = std::log(lambda);
  const bool checkDenominator = kPi / q < kPi / 2;
  const double denomFactor = std::cos(kPi / q) * std::cos((std::abs(std::arg(z)) + kPi / q) / 2);
  const bool atInf = choice.form == RepForm::AtInfinity;

  auto integrand = [&](double t) -> Complex {
    const Complex fz = f(t * ray);
    if (checkDenominator) {
      const double bound = denomFactor * (std::abs(z) + f(t).real());
      ++out.denominatorChecks;
      // conj(fz) is f at the conjugate point
      if (std::min(std::abs(z + fz), std::abs(z + std::conj(fz))) < bound * (1 - 1e-12)) ++out.denominatorViolations;
    }
    const Complex w = representationWeight(fz, q, z);
    // k = lambda^q / (lambda^q + t^q), written without forming t^q
    const Complex e = q * (std::log(t) - logLambda);
    Complex k, oneMinusK;
    if (e.real() > 0) {
      const Complex inv = std::exp(-e);
      oneMinusK = 1.0 / (1.0 + inv);
      k = inv * oneMinusK;
    } else {
      const Complex rho = std::exp(e);
      k = 1.0 / (1.0 + rho);
      oneMinusK = rho * k;
    }
    return atInf ? w * oneMinusK / t : -w * k / t;
  };
  auto r = integrateHalfLine(integrand, HalfLineOrders{1.0, 1.0, std::log(std::abs(lambda))}, quad);
  out.value = out.head + r.value;
  out.errEstimate = r.errEstimate;
  out.panels = r.panels;
  out.evaluations = r.evaluations;
  out.converged = r.converged;
  return out;
}

JIntegralResult jIntegral(const Function& f, double theta, double r, const QuadratureConfig& quad) {
  if (!(theta > 0 && theta < kPi / 2)) throw InputError("theta outside (0, pi/2)", "/theta");
  if (!(r > 0)) throw InputError("r must be positive", "/r");
  // t times the integrand
  auto tg = [&](double t) {
    const double d = r + f(t).real();
    return std::abs(f(std::polar(t, theta)).imag()) / d / d;
  };
  JIntegralResult out;
  static_cast<IntegralResult<double>&>(out) = integrateHalfLineSplit(tg, quad);
  if (!out.converged) {
    QuadratureConfig loose = quad;
    loose.relTol = std::max(quad.relTol, 1e-8);
    auto h = [&](double s) { return tg(std::exp(s)); };
    for (double L : {1.0, 2.0, 5.0, 10.0, 20.0, 50.0, 100.0, 200.0, 500.0, 700.0})
      out.trace.emplace_back(std::exp(L), integrateInterval(h, -L, L, loose).value);
  }
  return out;
}

Log1pForms log1pClosedForm(Complex z, Complex lambda, const QuadratureConfig& quad) {
  if (!(z.real() > 0)) throw InputError("z must lie in the open right half-plane", "/z");
  if (!(lambda.real() > 0)) throw InputError("lambda must lie in the open right half-plane", "/lambda");
  const Complex l2 = lambda * lambda;
  Log1pForms out;

  // t-form, (0, 1] directly and t = e^u beyond, where
  // log sqrt(1 + t^2) = u + log1p(e^{-2u})/2 and atan t = pi/2 - atan(e^{-u}).
  auto near = [&](double t) -> Complex {
    const double a = std::atan(t);
    const Complex d = z + 0.5 * std::log1p(t * t);
    return (2 / kPi) * t * a / ((d * d + a * a) * (l2 + t * t));
  };
  auto far = [&](double u) -> Complex {
    const double e = std::exp(-u);
    const double a = kPi / 2 - std::atan(e);
    const Complex d = z + u + 0.5 * std::log1p(e * e);
    return (2 / kPi) * a / ((d * d + a * a) * (1.0 + l2 * e * e));
  };
  auto lo = integrateFromZero(near, 1.0, 1.0, quad);
  auto hi = integrateHalfLine(far, HalfLineOrders{1.0, 1.0}, quad);
  out.tForm.value = lo.value + hi.value;
  out.tForm.errEstimate = lo.errEstimate + hi.errEstimate;
  out.tForm.panels = lo.panels + hi.panels;
  out.tForm.evaluations = lo.evaluations + hi.evaluations;
  out.tForm.converged = lo.converged && hi.converged;

  // s-form with x = pi/2 - s = (pi/2) e^{-w}; the 1/(x log^2 x) behaviour at
  // s -> pi/2 turns into 1/w^2.
  auto sw = [&](double w) -> Complex {
    const double x = (kPi / 2) * std::exp(-w);
    const double sinc = x < 1e-8 ? 1 - x * x / 6 : std::sin(x) / x;
    const double logSin = std::log(kPi / 2) - w + std::log(sinc);
    const double s = kPi / 2 - x;
    const double sx = x * sinc, cx = std::cos(x);
    const Complex d = z - logSin;
    // substituting t = tan s in the t-form; the 2/pi carries over unchanged
    return (2 / kPi) * s * cx / ((d * d + s * s) * (l2 * sx * sx + cx * cx) * sinc);
  };
  auto sf = integrateHalfLine(sw, HalfLineOrders{1.0, 1.0}, quad);
  out.sForm = sf;
  return out;
}

}  // namespace sectcalc
