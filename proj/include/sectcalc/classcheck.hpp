#pragma once

#include <map>
#include <string>
#include <vector>

#include "sectcalc/functions.hpp"
#include "sectcalc/quad.hpp"
#include "sectcalc/scalarcalc.hpp"

namespace sectcalc {

// Sample points for the inequality checks. Angles are strictly inside
// (0, pi/2), or (0, pi) for the complete Bernstein checks.
struct GridSpec {
  double tMin = 1e-4, tMax = 1e4;
  int tCount = 161;
  std::vector<double> thetas{kPi / 6, kPi / 4, kPi / 3};
  double rMin = 1e-3, rMax = 1e3;
  int rCount = 61;

  static GridSpec forCBF();  // thetas extended by pi/2, 2pi/3, 5pi/6
  std::vector<double> tGrid() const;
  std::vector<double> rGrid() const;
  // Throws InputError naming the offending field.
  void validate(double maxAngle = kPi / 2) const;
};

std::vector<double> geometricGrid(double lo, double hi, int n);

struct MarginPoint {
  std::string what;  // which inequality, e.g. "lower", "imag", "order 2"
  double t = 0.0;
  double theta = 0.0;
  double r = 0.0;
  double margin = 0.0;  // bound minus quantity (scaled); negative is a violation
};

// Margins of one check over its grid. pass <=> worst >= -tolerance.
struct ClassReport {
  std::string check;
  std::vector<MarginPoint> margins;
  double tolerance = 1e-8;
  double worst = kInf;
  int worstIndex = -1;
  bool pass = true;
  std::map<std::string, double> constants;
  std::vector<std::string> notes;

  void add(MarginPoint p);
  // Recomputes worst and pass.
  void finish(double tol);
  const MarginPoint* worstPoint() const { return worstIndex < 0 ? nullptr : &margins[worstIndex]; }
};

// Default tolerance for a function: 1e-8 when it evaluates in closed form,
// 1e-6 when any node needs quadrature.
double defaultTolerance(const Function& f);
bool usesQuadrature(const Function& f);

// Re f(z) > 0 and |arg f(z)| <= theta on each ray, f(t) > 0 on (0, oo).
// Margins: Re f / |f|, theta - |arg f|, and sign of f(t).
ClassReport checkNPRange(const Function& f, const GridSpec& grid = {});

// Two-sided bounds on |f(r e^{i theta})| in terms of f(t), choosing the
// branch by cos 2theta against rho^2, rho = min(r/t, t/r). theta = 0 is
// always included. Margins are scaled by f(t).
ClassReport checkBrownBounds(const Function& f, const GridSpec& grid = {});

// (-1)^n g^(n)(t) >= 0 for n = 0..maxOrder. Closed-form derivatives where the
// node has them, otherwise Richardson-refined central differences (order
// capped at 4); points where refinement disagrees by more than 1e-3 are
// flagged and left out of the verdict.
ClassReport checkCompleteMonotone(const Function& g, const std::vector<double>& points, int maxOrder = 6);
// Same test applied to f' (Bernstein: f' completely monotone), n = 1..maxOrder.
ClassReport checkBernsteinDerivatives(const Function& f, const std::vector<double>& points, int maxOrder = 6);

// |Im f(t e^{i theta})| <= |sin theta| t f'(t cos theta)
ClassReport checkBernsteinImag(const Function& f, const GridSpec& grid = {});

// f(t) cos(theta/2) <= |f(t e^{i theta})| <= f(t) / cos(theta/2) and
// |Im f(t e^{i theta})| <= 2 tan(theta/2) t f'(t), theta in (0, pi).
ClassReport checkCBFImag(const Function& f, const GridSpec& grid = GridSpec::forCBF());

// f(t) cos theta <= f(t cos theta) <= |f(t e^{i theta})| <= k f(t) <= k f(t cos theta) / cos theta
// with k = min(2e/(e-1), 1/cos theta).
ClassReport checkBernsteinEnvelope(const Function& f, const GridSpec& grid = {});
double bernsteinEnvelope(double theta);

// |Im F(t e^{i theta})| <= |sin theta| / cos^{2(n-1)} theta * t F'(t cos theta), F = f_1 ... f_n.
ClassReport checkProductBound(const std::vector<Function>& fs, const GridSpec& grid = {});

// The four imaginary-part conditions: f monotone near 0 or oo and
// |Im f(t e^{i theta})| <= c t (+-f'(bt)) on (0, a) or (a, oo).
enum class DCondition { ZeroPlus, ZeroMinus, InfPlus, InfMinus };
const char* dConditionName(DCondition c);

struct DConditionResult {
  DCondition condition;
  double theta = 0.0;
  bool pass = false;
  double a = 0.0;  // inf for the whole half-line
  double b = 0.0;
  double c = kInf;
  std::string note;
};

struct DSearchConfig {
  double bMin = 1e-2, bMax = 1e2;
  int bCount = 21;
  std::vector<double> extraB;  // tried in addition to the geometric b-grid
  double tMin = 1e-4, tMax = 1e4;
  int tCount = 161;
  // sup over the outermost decade more than this times the sup elsewhere
  // counts as an unbounded ratio
  double trendFactor = 2.0;
};

struct DClassReport {
  ClassReport report;  // margins c t (+-f'(bt)) - |Im f| at the chosen constants
  std::vector<DConditionResult> results;
  const DConditionResult* find(DCondition c, double theta) const;
};

DClassReport checkDClass(const Function& f, const std::vector<double>& thetas, const DSearchConfig& cfg = {});
// One condition at given constants over the search grid (a = inf for the
// whole grid, or the largest admissible a when whole-grid fails).
DConditionResult verifyDCondition(const Function& f, double theta, DCondition cond, double b, double c,
                                  const DSearchConfig& cfg = {});
// Upper bound on r J_theta(r; f) implied by a condition holding on the whole
// half-line with constants (b, c).
double kappaFromDCondition(DCondition cond, double b, double c);

struct KappaEstimate {
  double kappa = kInf;  // max over the r-grid of r J_theta(r; f)
  bool stable = false;  // max unchanged (rel 1e-3) when the outer decades are dropped
  bool converged = false;
  std::vector<double> r, rJ;
  ClassReport report;
};
KappaEstimate estimateKappa(const Function& f, double theta, const GridSpec& grid = {},
                            const QuadratureConfig& quad = {});

// Polar integral of the spherical derivative of f/r over the sector,
//   int_{-theta}^{theta} int_0^oo r |f'(t e^{is})| / (r^2 + |f(t e^{is})|^2) dt ds,
// for each r on the grid, and the check J_theta(r; f) <= I(r) / (2 r cos^2 theta).
struct SphericalEstimate {
  double supremum = kInf;
  bool stable = false;
  bool converged = false;
  std::vector<double> r, integral;
  ClassReport report;
};
SphericalEstimate checkSphericalS(const Function& f, double theta, const GridSpec& grid = {},
                                  const QuadratureConfig& quad = {});

}  // namespace sectcalc
