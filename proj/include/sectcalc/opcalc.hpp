#pragma once

#include <string>
#include <utility>
#include <vector>

#include "sectcalc/functions.hpp"
#include "sectcalc/measure.hpp"
#include "sectcalc/quad.hpp"
#include "sectcalc/scalarcalc.hpp"
#include "sectcalc/sectorial.hpp"

namespace sectcalc {

// General: any class E function, q in (2, pi/omega), omega < pi/2.
// Cbf: complete Bernstein functions, q in (1, pi/omega), any omega < pi.
enum class OpMode { General, Cbf };
enum class QStrategy { IntegerPreferred, Explicit };
const char* opModeName(OpMode m);

struct OperatorRepChoice {
  double q = 3.0;
  RepForm form = RepForm::AtZero;
  OpMode mode = OpMode::General;
  QStrategy qStrategy = QStrategy::IntegerPreferred;
};

// Open interval of admissible q for a sector angle omega and |arg z| (or a
// sector angle theta the whole z-grid lives in).
std::pair<double, double> admissibleQ(OpMode mode, double omega, double zArg);
// Smallest integer in the interval, else its midpoint. Throws HypothesisError
// when the interval is empty.
double pickQ(OpMode mode, double omega, double zArg);
OperatorRepChoice chooseOperatorRep(const Function& f, const SectorialMatrix& S, double zArg,
                                    OpMode mode = OpMode::General);

struct OperatorResolventResult {
  CMatrix value;
  Complex head;
  double errEstimate = 0.0;
  int evaluations = 0;
  bool converged = false;
  OperatorRepChoice choice;
};

// (z + f(A))^{-1} from the integral representation: head (z + f(oo))^{-1} I or
// (z + f(0+))^{-1} I plus one solve against A^q + t^q per node, done on the
// Schur factor of A.
OperatorResolventResult operatorResolvent(const Function& f, const SectorialMatrix& S, Complex z,
                                          const OperatorRepChoice& choice, const QuadratureConfig& quad = {});
OperatorResolventResult operatorResolvent(const Function& f, const SectorialMatrix& S, Complex z,
                                          OpMode mode = OpMode::General, const QuadratureConfig& quad = {});

// Per-eigenvalue reference (z + f(A))^{-1} through the eigen oracle.
CMatrix resolventOracle(const Function& f, const CMatrix& A, Complex z);

// 1/sin(pi/q) + q Mt kappa / (pi cos^2(pi/q) cos^2((pi/q + theta)/2))
double sectorialityBoundFormula(double kappa, double mTildeValue, double theta, double q);
// 1/sin(pi/q) + 2 q tan(pi/(2q)) Mt / (pi cos(pi/q) cos^2((pi/q + theta)/2)); only
// meaningful for q > 2 (HypothesisError otherwise, see the notes).
double cbfSectorialityBoundFormula(double mTildeValue, double theta, double q);

struct KappaChoice {
  double kappa = kInf;
  std::string source;  // "tan(pi/q)" for Bernstein functions, "estimated" otherwise
  bool reliable = true;
};
KappaChoice kappaForBound(const Function& f, double q, const QuadratureConfig& quad = {});

// Bound of |z (z + f(A))^{-1}| on the sector of angle theta against its
// sampled supremum, computed with operatorResolvent on about count points.
BoundReport sectorialityBound(const Function& f, const SectorialMatrix& S, double theta, double q, double kappa,
                              OpMode mode = OpMode::General, int count = 40, const QuadratureConfig& quad = {});

struct ImprovedResolvent {
  CMatrix value;
  SectorialMatrix B;  // A^alpha, certified at alpha omega
  OperatorResolventResult resolvent;
};
// (z + f(A^alpha))^{-1}, alpha in (1/2, 1), alpha omega < pi/2.
ImprovedResolvent improvedResolvent(const Function& f, double alpha, const SectorialMatrix& S, Complex z,
                                    const QuadratureConfig& quad = {});

// a I + b A + int (I - e^{-sA}) mu(ds) from the Levy triple (given or from the catalog).
CMatrix bernsteinApply(const LevyTriple& triple, const SectorialMatrix& S, const QuadratureConfig& quad = {});
CMatrix bernsteinApply(const Function& f, const SectorialMatrix& S, const QuadratureConfig& quad = {});

// e^{-s fA}; DomainError when the result overflows.
CMatrix semigroup(const CMatrix& fA, double s);

// int_0^oo e^{-tA} mu(dt) for a probability measure mu.
CMatrix barycentre(const SectorialMatrix& S, const ProbabilityMeasure& mu, const QuadratureConfig& quad = {});

struct RittGrid {
  double rhoMax = 1e-1, rhoMin = 1e-6;  // |lambda - 1|
  int perDecade = 4;
  int angles = 9;
  // theta' = theta + pad (pi/2 - theta)
  double pad = 0.05;
};

struct RittPoint {
  Complex lambda;
  double rho = 0.0;
  double value = 0.0;  // |(lambda - T)^{-1}| |lambda - 1|
  double margin = 0.0;
};

struct RittReport {
  CMatrix T;
  double angle = 0.0;
  double thetaPrime = 0.0;
  double C = 0.0;
  bool stable = false;       // running max grows < 5% over the last two decades of |lambda - 1|
  bool spectrumOk = false;   // spectrum in the closed unit disk and in 1 - closed sector
  bool pass = false;
  std::vector<RittPoint> points;
  std::vector<std::string> notes;
};
RittReport checkRitt(const CMatrix& T, double angle, const RittGrid& grid = {});

}  // namespace sectcalc
