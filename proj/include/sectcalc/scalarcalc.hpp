#pragma once

#include <utility>
#include <vector>

#include "sectcalc/functions.hpp"
#include "sectcalc/quad.hpp"

namespace sectcalc {

// Head term 1/(z + f(oo)) with the t^{q-1} kernel, or 1/(z + f(0+)) with the
// lambda^q / t kernel.
enum class RepForm { AtInfinity, AtZero };
const char* repFormName(RepForm f);

struct RepresentationChoice {
  double q = 3.0;
  RepForm form = RepForm::AtZero;
  // Complete Bernstein functions allow q in (1, 2].
  bool cbfMode = false;

  double psi() const { return kPi * (1 - 1 / q); }
  // Throws InputError for q out of range, HypothesisError when f lacks the
  // needed tag or the limit behind the head term is undetermined.
  void validate(const Function& f) const;
};

// f(oo) finite -> AtInfinity; else f(0+) finite -> AtZero; else whichever
// limit is at least determined (infinite), preferring oo. Throws
// HypothesisError when neither limit is determined.
RepForm chooseForm(const Function& f);

// max(pi/(pi - zArg) + 0.1, 2.5): keeps cos(pi/q) and cos((pi/q + zArg)/2) away from 0.
double defaultQ(double zArg);

// q/pi Im f(t e^{i pi/q}) / ((z + f(t e^{i pi/q})) (z + f(t e^{-i pi/q}))), the
// scalar weight of both forms. fz is f(t e^{i pi/q}) when already known.
Complex representationWeight(Complex fz, double q, Complex z);

struct ScalarResolventResult : IntegralResult<Complex> {
  Complex head{};
  // Nodes where |z + f(t e^{+-i pi/q})| >= cos(pi/q) cos((arg z + pi/q)/2) (|z| + f(t))
  // was tested (only for pi/q < pi/2), and how many failed.
  int denominatorChecks = 0;
  int denominatorViolations = 0;
};

// 1/(z + f(lambda)) from the half-line representation.
// lambda in the sector of half-angle pi/q, z in the sector of half-angle pi - pi/q.
ScalarResolventResult scalarResolvent(const Function& f, const RepresentationChoice& choice, Complex lambda,
                                      Complex z, const QuadratureConfig& quad = {});

// J_theta(r; f) = int_0^oo |Im f(t e^{i theta})| / ((r + f(t))^2 t) dt.
// When the quadrature does not converge, trace holds (T, int_{1/T}^{T}) for
// growing T so the user can see whether the partial sums settle.
struct JIntegralResult : IntegralResult<double> {
  std::vector<std::pair<double, double>> trace;
};
JIntegralResult jIntegral(const Function& f, double theta, double r, const QuadratureConfig& quad = {});

// The two closed integral forms of 1/(z + log(1 + lambda)) at q = 2: over
// t in (0, oo) with the arctan kernel, and over s in (0, pi/2).
struct Log1pForms {
  IntegralResult<Complex> tForm;
  IntegralResult<Complex> sForm;
};
Log1pForms log1pClosedForm(Complex z, Complex lambda, const QuadratureConfig& quad = {});

}  // namespace sectcalc
