#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <type_traits>
#include <utility>
#include <vector>

#include "sectcalc/types.hpp"

namespace sectcalc {

enum class NestedRule { GaussKronrod15, GaussKronrod21 };

struct QuadratureConfig {
  double relTol = 1e-10;
  double absTol = 1e-14;
  int maxPanels = 2000;
  // Half-width of the starting window in the log variable u = ln t. Tails
  // beyond it are grown chunk by chunk until they stop contributing.
  double initialHalfWidth = 8.0;
  double maxHalfWidth = 200.0;
  NestedRule rule = NestedRule::GaussKronrod15;
};

template <typename V>
struct IntegralResult {
  V value{};
  double errEstimate = 0.0;
  int panels = 0;
  int evaluations = 0;
  bool converged = false;
};

// Behaviour of a half-line integrand g(t): g(t) ~ t^(atZero-1) as t -> 0 and
// g(t) ~ t^(-1-atInfinity) as t -> oo. Both must be positive for the integral
// to exist; they only steer the starting window. logCentre shifts the window
// to where the integrand lives (u = ln t).
struct HalfLineOrders {
  double atZero = 1.0;
  double atInfinity = 1.0;
  double logCentre = 0.0;
};

inline double magnitude(double v) { return std::abs(v); }
template <typename Real>
double magnitude(const std::complex<Real>& v) {
  return std::abs(v);
}
template <typename Derived>
double magnitude(const Eigen::MatrixBase<Derived>& m) {
  return m.size() == 0 ? 0.0 : double(m.cwiseAbs().maxCoeff());
}

inline bool allFinite(double v) { return std::isfinite(v); }
template <typename Real>
bool allFinite(const std::complex<Real>& v) {
  return std::isfinite(v.real()) && std::isfinite(v.imag());
}
template <typename Derived>
bool allFinite(const Eigen::MatrixBase<Derived>& m) {
  return m.allFinite();
}

namespace detail {

struct RuleTable {
  const double* x;       // Kronrod abscissae, descending, last is 0
  const double* wk;      // Kronrod weights
  const double* wg;      // Gauss weights for abscissae x[1], x[3], ...; 0 where absent
  int n;                 // number of abscissae including centre
  double wgCentre;
};

inline const RuleTable& ruleTable(NestedRule rule) {
  static constexpr double x15[8] = {
      0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
      0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
      0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
      0.207784955007898467600689403773245, 0.0};
  static constexpr double wk15[8] = {
      0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
      0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
      0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
      0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
  static constexpr double wg15[4] = {
      0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
      0.381830050505118944950369775488975, 0.417959183673469387755102040816327};
  static constexpr double x21[11] = {
      0.995657163025808080735527280689003, 0.973906528517171720077964012084452,
      0.930157491355708226001207180059508, 0.865063366688984510732096688423493,
      0.780817726586416897063717578345042, 0.679409568299024406234327365114874,
      0.562757134668604683339000099272694, 0.433395394129247190799265943165784,
      0.294392862701460198131126603103866, 0.148874338981631210884826001129720, 0.0};
  static constexpr double wk21[11] = {
      0.011694638867371874278064396062192, 0.032558162307964727478818972459390,
      0.054755896574351996031381300244580, 0.075039674810919952767043140916190,
      0.093125454583697605535065465083366, 0.109387158802297641899210590325805,
      0.123491976262065851077208980221581, 0.134709217311473325928054001771707,
      0.142775938577060080797094273138717, 0.147739104901338491374841515972068,
      0.149445554002916905664936468389821};
  static constexpr double wg21[5] = {
      0.066671344308688137593568809893332, 0.149451349150580593145776339657697,
      0.219086362515982043995534934228163, 0.269266719309996355091226921569469,
      0.295524224714752870173892994651338};
  static const RuleTable t15{x15, wk15, wg15, 8, wg15[3]};
  static const RuleTable t21{x21, wk21, wg21, 11, 0.0};
  return rule == NestedRule::GaussKronrod15 ? t15 : t21;
}

template <typename V>
struct Panel {
  double a, b;
  V value;
  double err;
};

// One nested-rule application on [a, b]. Returns (Kronrod value, |K - G|).
template <typename V, typename H>
std::pair<V, double> applyRule(const H& h, double a, double b, NestedRule rule, int& evals) {
  const RuleTable& r = ruleTable(rule);
  const double c = 0.5 * (a + b), hw = 0.5 * (b - a);
  V fc = h(c);
  if (!allFinite(fc)) throw QuadratureError("non-finite integrand value");
  V k = fc * r.wk[r.n - 1];
  V g = fc * r.wgCentre;
  ++evals;
  for (int j = 0; j < r.n - 1; ++j) {
    const double dx = hw * r.x[j];
    V f1 = h(c - dx);
    V f2 = h(c + dx);
    evals += 2;
    if (!allFinite(f1) || !allFinite(f2)) throw QuadratureError("non-finite integrand value");
    V s = f1 + f2;
    k += s * r.wk[j];
    if (j % 2 == 1) g += s * r.wg[j / 2];
  }
  k *= hw;
  g *= hw;
  const double err = magnitude(V(k - g));
  return {std::move(k), err};
}

// Open end of the integration window. Keeps the last two chunks seen at that
// end so the untouched remainder can be extrapolated.
struct TailState {
  bool open = false;
  double edge = 0.0;
  double limit = 0.0;
  double width = 2.0;
  double prevMag = 0.0, prevWidth = 0.0;
  double lastMag = 0.0, lastWidth = 0.0;
  bool exhausted() const { return open && std::abs(limit - edge) <= 0.0; }

  void record(double mag, double w) {
    prevMag = lastMag;
    prevWidth = lastWidth;
    lastMag = mag;
    lastWidth = w;
  }
  // Decay rate g of a density c e^{-g x} that reproduces the last two chunk
  // integrals; -1 when they do not decay.
  double rate() const {
    if (!(prevMag > 0) || !(lastMag > 0)) return -1.0;
    const double r = lastMag / prevMag;
    if (!(r < lastWidth / prevWidth)) return -1.0;
    // ratio(g) = e^{-g wp} (1 - e^{-g w}) / (1 - e^{-g wp}) falls from w/wp to 0.
    auto ratio = [&](double g) {
      return std::exp(-g * prevWidth) * -std::expm1(-g * lastWidth) / -std::expm1(-g * prevWidth);
    };
    double lo = 1e-12, hi = 1.0;
    while (ratio(hi) > r && hi < 1e6) hi *= 4;
    for (int it = 0; it < 200 && hi - lo > 1e-14 * hi; ++it) {
      const double mid = 0.5 * (lo + hi);
      (ratio(mid) > r ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
  }
  // remainder() as a multiple of the outermost chunk, used to extend its
  // signed value past the edge.
  double extension() const {
    if (!open || !(lastMag > 0)) return 0.0;
    const double g = rate();
    if (g < 0) return kInf;
    return 1.0 / std::expm1(g * lastWidth);
  }
  // Estimated integral of |h| beyond the edge. Infinite when not decaying.
  double remainder() const {
    if (!open || !(lastMag > 0)) return 0.0;
    return lastMag * extension();
  }
};

// Globally adaptive bisection on [a, b] with optional tail growth past either
// end. Each step either bisects the panel with the largest error or extends
// the end with the largest estimated remainder; the choice never looks at the
// tolerance, so a tighter tolerance only runs the same sequence further.
template <typename H>
auto integrateAdaptive(const H& h, double a, double b, int initialPanels, bool openLeft,
                       bool openRight, double limitLeft, double limitRight,
                       const QuadratureConfig& cfg) {
  using V = std::decay_t<decltype(h(0.0))>;
  IntegralResult<V> res;
  std::vector<Panel<V>> heap;
  auto cmp = [](const Panel<V>& x, const Panel<V>& y) { return x.err < y.err; };
  int evals = 0;
  bool haveTotal = false;
  V total{};
  double errTotal = 0.0;
  double absTotal = 0.0;

  auto addPanel = [&](double pa, double pb) {
    auto [val, err] = applyRule<V>(h, pa, pb, cfg.rule, evals);
    if (!haveTotal) {
      total = val;
      haveTotal = true;
    } else {
      total += val;
    }
    errTotal += err;
    absTotal += magnitude(val);
    std::pair<double, V> out{magnitude(val) + err, val};
    heap.push_back(Panel<V>{pa, pb, std::move(val), err});
    std::push_heap(heap.begin(), heap.end(), cmp);
    return out;
  };

  initialPanels = std::max(1, initialPanels);
  std::vector<double> mags(initialPanels);
  std::vector<V> vals;
  const double pw = (b - a) / initialPanels;
  for (int i = 0; i < initialPanels; ++i) {
    const double pa = a + (b - a) * i / initialPanels;
    const double pb = (i + 1 == initialPanels) ? b : a + (b - a) * (i + 1) / initialPanels;
    auto [m, v] = addPanel(pa, pb);
    mags[i] = m;
    vals.push_back(std::move(v));
  }

  TailState left, right;
  left.open = openLeft;
  left.edge = a;
  left.limit = std::min(limitLeft, a);
  right.open = openRight;
  right.edge = b;
  right.limit = std::max(limitRight, b);
  if (initialPanels > 1) {
    left.record(mags[1], pw);
    right.record(mags[initialPanels - 2], pw);
  }
  left.record(mags[0], pw);
  right.record(mags[initialPanels - 1], pw);
  V outerLeft = vals.front(), outerRight = vals.back();

  // Refinement runs through checkpoints, one per decade of relative
  // tolerance down to the requested one (snapped down to a power of ten).
  // Each checkpoint also demands a tenfold drop in the estimate unless that
  // is below rounding. The step choice never looks at the tolerance, so a
  // tighter request replays the same sequence and continues past it.
  const int decades = std::max(1, int(-std::floor(std::log10(cfg.relTol) + 1e-9)));
  const double relTol = std::pow(10.0, -decades);
  const double roundoff = 64 * std::numeric_limits<double>::epsilon();
  bool failed = false;
  double prevEstimate = kInf;
  for (int k = 1; k <= decades && !failed; ++k) {
    while (true) {
      const double remL = left.remainder(), remR = right.remainder();
      const double estimate = errTotal + remL + remR;
      const double floorAbs = roundoff * absTotal;
      const double target =
          std::max(cfg.absTol, std::min(std::pow(10.0, -k) * magnitude(total), std::max(prevEstimate / 10, floorAbs)));
      if (estimate <= target) {
        prevEstimate = estimate;
        break;
      }
      // Nothing left to grow and the remainder alone is already too large.
      const double stuck = (left.exhausted() ? remL : 0.0) + (right.exhausted() ? remR : 0.0);
      if (stuck > target || int(heap.size()) >= cfg.maxPanels) {
        failed = true;
        break;
      }

      TailState* grow = nullptr;
      double best = heap.front().err;
      for (TailState* side : {&left, &right}) {
        const double rem = side == &left ? remL : remR;
        if (side->open && !side->exhausted() && rem > best) {
          best = rem;
          grow = side;
        }
      }
      if (grow) {
        const bool isRight = grow == &right;
        const double from = grow->edge;
        const double to = isRight ? std::min(from + grow->width, grow->limit)
                                  : std::max(from - grow->width, grow->limit);
        auto [mag, val] = isRight ? addPanel(from, to) : addPanel(to, from);
        grow->record(mag, std::abs(to - from));
        (isRight ? outerRight : outerLeft) = std::move(val);
        grow->edge = to;
        grow->width = std::min(grow->width * 1.5, 16.0);
        continue;
      }

      std::pop_heap(heap.begin(), heap.end(), cmp);
      Panel<V> worst = std::move(heap.back());
      heap.pop_back();
      const double mid = 0.5 * (worst.a + worst.b);
      if (!(mid > worst.a && mid < worst.b) ||
          (worst.b - worst.a) < 1e-13 * (1.0 + std::abs(worst.a) + std::abs(worst.b))) {
        heap.push_back(std::move(worst));
        std::push_heap(heap.begin(), heap.end(), cmp);
        failed = true;
        break;
      }
      total -= worst.value;
      errTotal -= worst.err;
      absTotal -= magnitude(worst.value);
      addPanel(worst.a, mid);
      addPanel(mid, worst.b);
      if (errTotal < 0) errTotal = 0;
      if (absTotal < 0) absTotal = 0;
    }
  }

  // Deterministic final sum, ordered by position.
  std::sort(heap.begin(), heap.end(), [](const Panel<V>& x, const Panel<V>& y) { return x.a < y.a; });
  V sum = heap.front().value;
  double err = heap.front().err;
  for (std::size_t i = 1; i < heap.size(); ++i) {
    sum += heap[i].value;
    err += heap[i].err;
  }
  for (auto [side, outer] : {std::pair{&left, &outerLeft}, std::pair{&right, &outerRight}}) {
    const double x = side->extension();
    if (std::isfinite(x) && x > 0) sum += *outer * x;
  }
  const double target = std::max(cfg.absTol, relTol * magnitude(sum));
  res.value = std::move(sum);
  res.errEstimate = err + left.remainder() + right.remainder();
  res.panels = int(heap.size());
  res.evaluations = evals;
  res.converged = !failed && res.errEstimate <= target;
  return res;
}

inline int initialPanelCount(double width) { return std::max(2, int(std::ceil(width / 2.0))); }

// Starting extent in u for an end where the integrand decays like e^{-order |u|}.
// Independent of the tolerance so that refinement sequences are nested.
inline double startWindow(double order, const QuadratureConfig& cfg) {
  return std::clamp(cfg.initialHalfWidth / order, 2.0, std::max(2.0, cfg.initialHalfWidth * 4));
}

}  // namespace detail

// Integral of g over [a, b] (finite).
template <typename G>
auto integrateInterval(const G& g, double a, double b, const QuadratureConfig& cfg = {}) {
  if (!(a < b)) throw InputError("integrateInterval: need a < b");
  return detail::integrateAdaptive(g, a, b, 2, false, false, a, b, cfg);
}

// Integral of g over (0, oo) after t = e^u. The window is grown until the
// outermost chunks contribute below a tenth of the tolerance.
template <typename G>
auto integrateHalfLine(const G& g, HalfLineOrders orders = {}, const QuadratureConfig& cfg = {}) {
  if (!(orders.atZero > 0) || !(orders.atInfinity > 0))
    throw InputError("integrateHalfLine: orders must be positive");
  auto window = [&](double order) { return detail::startWindow(order, cfg); };
  const double uLo = orders.logCentre - std::min(window(orders.atZero), cfg.maxHalfWidth);
  const double uHi = orders.logCentre + std::min(window(orders.atInfinity), cfg.maxHalfWidth);
  auto h = [&g](double u) {
    const double t = std::exp(u);
    auto v = g(t);
    return decltype(v)(v * t);
  };
  return detail::integrateAdaptive(h, uLo, uHi, detail::initialPanelCount(uHi - uLo), true, true,
                                   orders.logCentre - cfg.maxHalfWidth,
                                   orders.logCentre + cfg.maxHalfWidth, cfg);
}

// Integral of g over [lo, oo) with lo > 0, using t = lo * e^u.
template <typename G>
auto integrateToInfinity(const G& g, double lo, double orderAtInfinity = 1.0,
                         const QuadratureConfig& cfg = {}) {
  if (!(lo > 0)) throw InputError("integrateToInfinity: need lo > 0");
  const double uHi = detail::startWindow(orderAtInfinity, cfg);
  auto h = [&g, lo](double u) {
    const double t = lo * std::exp(u);
    auto v = g(t);
    return decltype(v)(v * t);
  };
  return detail::integrateAdaptive(h, 0.0, uHi, detail::initialPanelCount(uHi), false, true, 0.0,
                                   cfg.maxHalfWidth, cfg);
}

// Integral of g over (0, hi] with hi > 0, using t = hi * e^(-u).
template <typename G>
auto integrateFromZero(const G& g, double hi, double orderAtZero = 1.0, const QuadratureConfig& cfg = {}) {
  if (!(hi > 0)) throw InputError("integrateFromZero: need hi > 0");
  const double uHi = detail::startWindow(orderAtZero, cfg);
  auto h = [&g, hi](double u) {
    const double t = hi * std::exp(-u);
    auto v = g(t);
    return decltype(v)(v * t);
  };
  return detail::integrateAdaptive(h, 0.0, uHi, detail::initialPanelCount(uHi), false, true, 0.0,
                                   cfg.maxHalfWidth, cfg);
}

// Integral of g over (0, oo) for integrands that may decay only like
// 1/(t log^2 t). The line is split at t = 1 and each half mapped by
// t = e^{+-s} before the half-line rule, so such decay becomes 1/s^2. Past
// s = 700 the point t leaves double range; that tail is cut, bounded by
// s g(e^s) e^s, and counted in the error estimate.
// The caller passes tg(t) = t g(t): forming g(t) alone at t ~ 1e300 tends to
// underflow and would hide the cut tail.
template <typename G>
IntegralResult<double> integrateHalfLineSplit(const G& tg, const QuadratureConfig& cfg = {}) {
  constexpr double sCap = 700.0;
  auto up = [&](double s) { return s > sCap ? 0.0 : double(tg(std::exp(s))); };
  auto down = [&](double s) { return s > sCap ? 0.0 : double(tg(std::exp(-s))); };
  auto upper = integrateHalfLine(up, HalfLineOrders{1.0, 1.0}, cfg);
  auto lower = integrateHalfLine(down, HalfLineOrders{1.0, 1.0}, cfg);
  const double cutTail = sCap * (std::abs(up(sCap)) + std::abs(down(sCap)));
  IntegralResult<double> out;
  out.value = upper.value + lower.value;
  out.errEstimate = upper.errEstimate + lower.errEstimate + cutTail;
  out.evaluations = upper.evaluations + lower.evaluations;
  out.panels = upper.panels + lower.panels;
  out.converged =
      upper.converged && lower.converged && cutTail <= std::max(cfg.absTol, cfg.relTol * std::abs(out.value));
  return out;
}

// Iterated integral over the sector |arg z| < theta in polar coordinates,
//   int_{-theta}^{theta} int_0^oo F(t, s) dt ds,
// which is the integral of F against dm(z)/|z|. Fixed-order outer rule on
// each half of the angle range, adaptive half-line inner integrals.
template <typename F>
auto integratePolarSector(const F& fn, double theta, HalfLineOrders orders = {},
                          const QuadratureConfig& cfg = {}) {
  using V = std::decay_t<decltype(fn(1.0, 0.0))>;
  if (!(theta > 0 && theta <= kPi)) throw InputError("integratePolarSector: theta must be in (0, pi]");
  IntegralResult<V> out;
  bool first = true;
  bool converged = true;
  double innerErr = 0.0;
  double outerErr = 0.0;
  int evals = 0;
  int panels = 0;
  for (auto [a, b] : {std::pair{-theta, 0.0}, std::pair{0.0, theta}}) {
    auto inner = [&](double s) {
      auto r = integrateHalfLine([&](double t) { return fn(t, s); }, orders, cfg);
      converged = converged && r.converged;
      innerErr = std::max(innerErr, r.errEstimate);
      evals += r.evaluations;
      panels += r.panels;
      return r.value;
    };
    int dummy = 0;
    auto [val, err] = detail::applyRule<V>(inner, a, b, cfg.rule, dummy);
    outerErr += err;
    if (first) {
      out.value = val;
      first = false;
    } else {
      out.value += val;
    }
  }
  out.errEstimate = outerErr + innerErr * 2 * theta;
  out.evaluations = evals;
  out.panels = panels;
  out.converged = converged && out.errEstimate <= std::max(cfg.absTol, 100 * cfg.relTol * magnitude(out.value));
  return out;
}

}  // namespace sectcalc
