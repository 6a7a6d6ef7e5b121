#include "sectcalc/classcheck.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>

#include "sectcalc/parallel.hpp"

namespace sectcalc {

namespace {

// (bound - quantity) / max(|bound|, |quantity|), 0 when both vanish.
double relMargin(double bound, double quantity) {
  const double scale = std::max(std::abs(bound), std::abs(quantity));
  return scale > 0 ? (bound - quantity) / scale : 0.0;
}

double realDerivative(const Function& f, double t) { return f.derivative(t).value.real(); }

}  // namespace

// ---------------------------------------------------------------- grids

GridSpec GridSpec::forCBF() {
  GridSpec g;
  g.thetas = {kPi / 6, kPi / 4, kPi / 3, kPi / 2, 2 * kPi / 3, 5 * kPi / 6};
  return g;
}

std::vector<double> geometricGrid(double lo, double hi, int n) {
  std::vector<double> out(n);
  if (n == 1) {
    out[0] = lo;
    return out;
  }
  const double a = std::log(lo), b = std::log(hi);
  for (int i = 0; i < n; ++i) out[i] = std::exp(a + (b - a) * i / (n - 1));
  out.front() = lo;
  out.back() = hi;
  return out;
}

std::vector<double> GridSpec::tGrid() const { return geometricGrid(tMin, tMax, tCount); }
std::vector<double> GridSpec::rGrid() const { return geometricGrid(rMin, rMax, rCount); }

void GridSpec::validate(double maxAngle) const {
  if (!(tMin > 0)) throw InputError("t-grid needs t_min > 0", "/grid/tMin");
  if (!(tMax > tMin)) throw InputError("t-grid needs t_max > t_min", "/grid/tMax");
  if (tCount < 2) throw InputError("t-grid needs at least 2 points", "/grid/tCount");
  if (!(rMin > 0)) throw InputError("r-grid needs r_min > 0", "/grid/rMin");
  if (!(rMax > rMin)) throw InputError("r-grid needs r_max > r_min", "/grid/rMax");
  if (rCount < 2) throw InputError("r-grid needs at least 2 points", "/grid/rCount");
  for (std::size_t i = 0; i < thetas.size(); ++i) {
    if (!(thetas[i] > 0 && thetas[i] < maxAngle))
      throw InputError("angle outside the admissible open interval", "/grid/thetas/" + std::to_string(i));
    if (i > 0 && !(thetas[i] > thetas[i - 1]))
      throw InputError("angles must be strictly increasing", "/grid/thetas/" + std::to_string(i));
  }
}

// ---------------------------------------------------------------- reports

void ClassReport::add(MarginPoint p) { margins.push_back(std::move(p)); }

void ClassReport::finish(double tol) {
  tolerance = tol;
  worst = kInf;
  worstIndex = -1;
  for (std::size_t i = 0; i < margins.size(); ++i) {
    const double m = margins[i].margin;
    if (std::isnan(m) || m < worst) {
      worst = std::isnan(m) ? -kInf : m;
      worstIndex = int(i);
    }
  }
  pass = worst >= -tol;
}

bool usesQuadrature(const Function& f) {
  switch (f.kind()) {
    case NodeKind::FromLevy:
    case NodeKind::FromStieltjes:
    case NodeKind::FromCauchyMeasure:
      return true;
    default:
      return std::any_of(f.children().begin(), f.children().end(), usesQuadrature);
  }
}

double defaultTolerance(const Function& f) { return usesQuadrature(f) ? 1e-6 : 1e-8; }

// ---------------------------------------------------------------- NP range

ClassReport checkNPRange(const Function& f, const GridSpec& grid) {
  grid.validate();
  ClassReport rep;
  rep.check = "np-range";
  // Evaluation failures are recorded as violations at that point.
  auto safeEval = [&](Complex z, bool& ok) {
    try {
      const Complex w = f(z);
      ok = std::isfinite(w.real()) && std::isfinite(w.imag());
      return w;
    } catch (const Error& e) {
      rep.notes.push_back(std::string("evaluation failed: ") + e.what());
      ok = false;
      return Complex(0);
    }
  };
  for (double t : grid.tGrid()) {
    bool ok = true;
    const Complex v = safeEval(t, ok);
    rep.add({"positive on (0,oo)", t, 0.0, 0.0, ok ? (v.real() > 0 ? 1.0 : (v.real() < 0 ? -1.0 : 0.0)) : -kInf});
    for (double th : grid.thetas) {
      for (double sgn : {1.0, -1.0}) {
        const Complex w = safeEval(std::polar(t, sgn * th), ok);
        if (!ok) {
          rep.add({"evaluation", t, sgn * th, 0.0, -kInf});
          continue;
        }
        const double mod = std::abs(w);
        rep.add({"real part", t, sgn * th, 0.0, mod > 0 ? w.real() / mod : -1.0});
        rep.add({"sector", t, sgn * th, 0.0, th - std::abs(std::arg(w))});
      }
    }
  }
  rep.finish(defaultTolerance(f));
  return rep;
}

// ---------------------------------------------------------------- Brown bounds

ClassReport checkBrownBounds(const Function& f, const GridSpec& grid) {
  grid.validate();
  ClassReport rep;
  rep.check = "brown-bounds";
  const auto ts = grid.tGrid();
  const auto rs = grid.rGrid();
  std::vector<double> thetas{0.0};
  thetas.insert(thetas.end(), grid.thetas.begin(), grid.thetas.end());

  std::vector<double> ft(ts.size());
  for (std::size_t i = 0; i < ts.size(); ++i) ft[i] = f(ts[i]).real();
  // |f(r e^{i theta})|, theta >= 0 suffices by conjugate symmetry
  std::vector<std::vector<double>> fr(rs.size(), std::vector<double>(thetas.size()));
  parallelFor(rs.size(), [&](std::size_t i) {
    for (std::size_t k = 0; k < thetas.size(); ++k) fr[i][k] = std::abs(f(std::polar(rs[i], thetas[k])));
  });

  for (std::size_t k = 0; k < thetas.size(); ++k) {
    const double th = thetas[k];
    const double c2 = std::cos(2 * th);
    for (std::size_t i = 0; i < rs.size(); ++i) {
      const double r = rs[i];
      for (std::size_t j = 0; j < ts.size(); ++j) {
        const double t = ts[j];
        const double rho = std::min(r / t, t / r);
        double lo, hi;
        if (c2 >= rho * rho) {
          lo = rho * ft[j];
          hi = ft[j] / rho;
        } else {
          const double q = std::abs(std::sin(2 * th) / (t * t - r * r * std::exp(Complex(0, 2 * th))));
          lo = ft[j] * r * t * q;
          hi = ft[j] / (r * t * q);
        }
        const double v = fr[i][k];
        const double scale = std::max(ft[j], v);
        rep.add({"lower", t, th, r, (v - lo) / scale});
        rep.add({"upper", t, th, r, (hi - v) / scale});
      }
    }
  }
  // r = t exactly, which the two grids need not share
  for (std::size_t j = 0; j < ts.size(); ++j) {
    for (double th : thetas) {
      const double v = std::abs(f(std::polar(ts[j], th)));
      const double scale = std::max(ft[j], v);
      rep.add({"lower (r=t)", ts[j], th, ts[j], (v - ft[j] * std::cos(th)) / scale});
      rep.add({"upper (r=t)", ts[j], th, ts[j], (ft[j] / std::cos(th) - v) / scale});
    }
  }
  rep.finish(defaultTolerance(f));
  return rep;
}

// ---------------------------------------------------------------- complete monotonicity

namespace {

struct NthDerivative {
  double value = 0.0;
  bool stable = true;
  bool closedForm = false;
};

// n-th derivative of a real function at t > 0 by central differences with one
// Richardson step. Steps h = t/(2n) 2^-k, k = 0..6, keep the stencil inside
// (t/2, 3t/2); the pair of consecutive refinements that agree best wins.
NthDerivative finiteDifference(const std::function<double(double)>& g, double t, int n) {
  auto stencil = [&](double h) {
    double s = 0.0, binom = 1.0;
    for (int k = 0; k <= n; ++k) {
      s += ((k % 2) ? -1.0 : 1.0) * binom * g(t + (0.5 * n - k) * h);
      binom = binom * (n - k) / (k + 1);
    }
    return s / std::pow(h, n);
  };
  constexpr int kSteps = 7;
  double d[kSteps], rich[kSteps - 1];
  double h0 = t / (2.0 * n);
  for (int k = 0; k < kSteps; ++k) d[k] = stencil(h0 * std::ldexp(1.0, -k));
  for (int k = 0; k + 1 < kSteps; ++k) rich[k] = (4 * d[k + 1] - d[k]) / 3;
  int best = 0;
  double bestDiff = kInf;
  for (int k = 0; k + 2 < kSteps; ++k) {
    const double diff = std::abs(rich[k + 1] - rich[k]);
    if (diff < bestDiff) {
      bestDiff = diff;
      best = k + 1;
    }
  }
  NthDerivative out;
  out.value = rich[best];
  const double h = h0 * std::ldexp(1.0, -best - 1);
  // rounding floor of the stencil: ~ 2^n eps |g| / h^n
  const double noise = std::pow(2.0, n) * 2.2e-16 * std::abs(g(t)) / std::pow(h, n);
  if (std::abs(out.value) <= 10 * noise) {
    out.value = 0.0;  // indistinguishable from zero at this resolution
    return out;
  }
  out.stable = bestDiff <= 1e-3 * std::abs(out.value) + noise;
  return out;
}

NthDerivative nthDerivative(const Function& g, double t, int n) {
  if (auto d = g.derivativeN(t, n)) return {*d, true, true};
  return finiteDifference([&g](double x) { return g(x).real(); }, t, n);
}

// (-1)^(n - offset) g^(n)(t) >= 0 for n = offset..maxOrder.
ClassReport signPattern(const Function& g, const std::vector<double>& points, int maxOrder, int offset,
                        const char* name) {
  ClassReport rep;
  rep.check = name;
  if (maxOrder > 6) {
    rep.notes.push_back("order capped at 6");
    maxOrder = 6;
  }
  int unstable = 0;
  int firstOrder = 0;
  double firstT = 0.0;
  bool fdCapped = false;
  for (int n = offset; n <= maxOrder; ++n) {
    for (double t : points) {
      if (!(t > 0)) throw InputError("monotonicity points must be positive", "/points");
      NthDerivative d;
      if (auto c = g.derivativeN(t, n)) {
        d = {*c, true, true};
      } else if (n > 4) {
        fdCapped = true;
        continue;
      } else {
        d = nthDerivative(g, t, n);
      }
      if (!d.stable) {
        ++unstable;
        continue;
      }
      const double signed_ = ((n - offset) % 2 ? -1.0 : 1.0) * d.value;
      // dimensionless: scaled by the Taylor term size n! |g(t)| / t^n
      const double scale = std::abs(d.value) + std::tgamma(n + 1.0) * std::abs(g(t).real()) / std::pow(t, n);
      const double m = scale > 0 ? signed_ / scale : 0.0;
      rep.add({"order " + std::to_string(n), t, 0.0, 0.0, m});
      if (m < 0 && firstOrder == 0) {
        firstOrder = n;
        firstT = t;
      }
    }
  }
  if (fdCapped) rep.notes.push_back("orders above 4 skipped where no closed form exists");
  if (unstable) rep.notes.push_back(std::to_string(unstable) + " points with unstable differences left out");
  rep.constants["unstablePoints"] = unstable;
  rep.finish(defaultTolerance(g));
  if (!rep.pass) {
    // first violation beyond tolerance, scanning by order then point
    for (const auto& p : rep.margins) {
      if (p.margin < -rep.tolerance) {
        firstOrder = std::stoi(p.what.substr(6));
        firstT = p.t;
        break;
      }
    }
    rep.constants["firstViolationOrder"] = firstOrder;
    rep.constants["firstViolationT"] = firstT;
  }
  return rep;
}

}  // namespace

ClassReport checkCompleteMonotone(const Function& g, const std::vector<double>& points, int maxOrder) {
  return signPattern(g, points, maxOrder, 0, "complete-monotone");
}

ClassReport checkBernsteinDerivatives(const Function& f, const std::vector<double>& points, int maxOrder) {
  return signPattern(f, points, maxOrder, 1, "bernstein-derivatives");
}

// ---------------------------------------------------------------- imaginary-part bounds

ClassReport checkBernsteinImag(const Function& f, const GridSpec& grid) {
  grid.validate();
  ClassReport rep;
  rep.check = "bernstein-imag";
  for (double th : grid.thetas) {
    for (double t : grid.tGrid()) {
      const double im = std::abs(f(std::polar(t, th)).imag());
      const double bound = std::sin(th) * t * realDerivative(f, t * std::cos(th));
      rep.add({"imag", t, th, 0.0, relMargin(bound, im)});
    }
  }
  rep.finish(defaultTolerance(f));
  return rep;
}

ClassReport checkCBFImag(const Function& f, const GridSpec& grid) {
  grid.validate(kPi);
  ClassReport rep;
  rep.check = "cbf-imag";
  for (double th : grid.thetas) {
    const double ch = std::cos(th / 2);
    for (double t : grid.tGrid()) {
      const Complex w = f(std::polar(t, th));
      const double ft = f(t).real();
      const double mod = std::abs(w);
      rep.add({"lower", t, th, 0.0, relMargin(mod, ft * ch)});
      rep.add({"upper", t, th, 0.0, relMargin(ft / ch, mod)});
      const double bound = 2 * std::tan(th / 2) * t * realDerivative(f, t);
      rep.add({"imag", t, th, 0.0, relMargin(bound, std::abs(w.imag()))});
    }
  }
  rep.finish(defaultTolerance(f));
  return rep;
}

double bernsteinEnvelope(double theta) {
  const double e = std::exp(1.0);
  return std::min(2 * e / (e - 1), 1 / std::cos(theta));
}

ClassReport checkBernsteinEnvelope(const Function& f, const GridSpec& grid) {
  grid.validate();
  ClassReport rep;
  rep.check = "bernstein-envelope";
  for (double th : grid.thetas) {
    const double c = std::cos(th), k = bernsteinEnvelope(th);
    for (double t : grid.tGrid()) {
      const double ft = f(t).real(), fc = f(t * c).real();
      const double mod = std::abs(f(std::polar(t, th)));
      rep.add({"f(t)cos <= f(t cos)", t, th, 0.0, relMargin(fc, ft * c)});
      rep.add({"f(t cos) <= |f|", t, th, 0.0, relMargin(mod, fc)});
      rep.add({"|f| <= k f(t)", t, th, 0.0, relMargin(k * ft, mod)});
      rep.add({"k f(t) <= k f(t cos)/cos", t, th, 0.0, relMargin(k * fc / c, k * ft)});
    }
  }
  rep.finish(defaultTolerance(f));
  return rep;
}

ClassReport checkProductBound(const std::vector<Function>& fs, const GridSpec& grid) {
  if (fs.empty()) throw InputError("product needs at least one factor", "/functions");
  grid.validate();
  ClassReport rep;
  rep.check = "product-bound";
  const int n = int(fs.size());
  double tol = 1e-8;
  for (const auto& f : fs) tol = std::max(tol, defaultTolerance(f));
  for (double th : grid.thetas) {
    const double c = std::cos(th);
    const double factor = std::sin(th) / std::pow(c, 2 * (n - 1));
    for (double t : grid.tGrid()) {
      Complex F = 1.0;
      for (const auto& f : fs) F *= f(std::polar(t, th));
      // F'(s) = sum_j f_j'(s) prod_{k != j} f_k(s)
      const double s = t * c;
      std::vector<double> v(n), d(n);
      for (int j = 0; j < n; ++j) {
        v[j] = fs[j](s).real();
        d[j] = realDerivative(fs[j], s);
      }
      double Fp = 0.0;
      for (int j = 0; j < n; ++j) {
        double term = d[j];
        for (int k = 0; k < n; ++k)
          if (k != j) term *= v[k];
        Fp += term;
      }
      rep.add({"imag", t, th, 0.0, relMargin(factor * t * Fp, std::abs(F.imag()))});
    }
  }
  rep.constants["n"] = n;
  rep.finish(tol);
  return rep;
}

// ---------------------------------------------------------------- D-class search

const char* dConditionName(DCondition c) {
  switch (c) {
    case DCondition::ZeroPlus:
      return "D0+";
    case DCondition::ZeroMinus:
      return "D0-";
    case DCondition::InfPlus:
      return "Dinf+";
    case DCondition::InfMinus:
      return "Dinf-";
  }
  return "?";
}

const DConditionResult* DClassReport::find(DCondition c, double theta) const {
  for (const auto& r : results)
    if (r.condition == c && std::abs(r.theta - theta) < 1e-12) return &r;
  return nullptr;
}

namespace {

bool isPlus(DCondition c) { return c == DCondition::ZeroPlus || c == DCondition::InfPlus; }
bool atZero(DCondition c) { return c == DCondition::ZeroPlus || c == DCondition::ZeroMinus; }

// Per-(f, theta) samples shared by every b.
struct DSamples {
  std::vector<double> t, im, fp;  // t-grid, |Im f(t e^{i theta})|, f'(t)
};

DSamples sampleD(const Function& f, double theta, const DSearchConfig& cfg) {
  DSamples s;
  s.t = geometricGrid(cfg.tMin, cfg.tMax, cfg.tCount);
  for (double t : s.t) {
    s.im.push_back(std::abs(f(std::polar(t, theta)).imag()));
    s.fp.push_back(realDerivative(f, t));
  }
  return s;
}

// For fixed b: the admissible a (ordered from the widest range) and the c
// needed there; c = inf when no range works.
struct ScanResult {
  bool ok = false;
  double a = 0.0, c = kInf;
  std::string note;
  std::vector<double> ratio;  // |Im| / (t (+-f'(bt))) on the accepted range
  std::size_t from = 0, to = 0;
};

ScanResult scanB(const Function& f, const DSamples& s, DCondition cond, double b, const DSearchConfig& cfg,
                 double tol) {
  const double sgn = isPlus(cond) ? 1.0 : -1.0;
  const bool zero = atZero(cond);
  const std::size_t n = s.t.size();
  std::vector<double> d(n);  // +-f'(b t)
  for (std::size_t i = 0; i < n; ++i) d[i] = sgn * realDerivative(f, b * s.t[i]);
  // Monotonicity of f at s, sampled on the grid itself.
  std::vector<bool> mono(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double floor = 1e-12 * std::abs(f(s.t[i]).real()) / s.t[i];
    mono[i] = sgn * s.fp[i] >= -floor;
  }

  // Candidate ranges [from, to) of t-indices, widest first. Every eighth grid
  // point is a candidate end; a range keeps at least two decades.
  const std::size_t minLen = std::max<std::size_t>(8, n / 4);
  std::vector<std::pair<std::size_t, std::size_t>> ranges;
  if (zero) {
    for (std::size_t to = n; to >= minLen; to = (to > 8 ? to - 8 : 0)) {
      ranges.push_back({0, to});
      if (to < 8) break;
    }
  } else {
    for (std::size_t from = 0; from + minLen <= n; from += 8) ranges.push_back({from, n});
  }

  ScanResult out;
  out.note = "no admissible range";
  for (auto [from, to] : ranges) {
    const bool wholeLine = zero && to == n;
    const double a = zero ? (wholeLine ? kInf : s.t[to - 1]) : s.t[from];
    // f monotone on (0, a/b) or (a/b, oo), as far as the grid reaches
    bool monotone = true;
    for (std::size_t i = 0; i < n && monotone; ++i) {
      const bool inside = zero ? (wholeLine || s.t[i] <= a / b) : s.t[i] >= a / b;
      if (inside && !mono[i]) monotone = false;
    }
    if (!monotone) {
      out.note = "not monotone on the required interval";
      continue;
    }
    std::vector<double> ratio;
    bool vanishing = false;
    for (std::size_t i = from; i < to; ++i) {
      const double denom = s.t[i] * d[i];
      if (!(denom > 0)) {
        if (s.im[i] > tol * std::abs(f(s.t[i]).real())) vanishing = true;
        ratio.push_back(0.0);
        continue;
      }
      ratio.push_back(s.im[i] / denom);
    }
    if (vanishing) {
      out.note = "derivative vanishes on the scan interval";
      continue;
    }
    // An open end whose outermost decade carries a larger sup than the rest
    // is treated as unbounded.
    auto trendAt = [&](bool low) {
      const double edge = low ? s.t[from] : s.t[to - 1];
      double outer = 0.0, rest = 0.0;
      for (std::size_t i = from; i < to; ++i) {
        const bool inOuter = low ? s.t[i] <= 10 * edge : s.t[i] >= edge / 10;
        (inOuter ? outer : rest) = std::max(inOuter ? outer : rest, ratio[i - from]);
      }
      return outer > cfg.trendFactor * rest && outer > 0;
    };
    const bool lowOpen = zero, highOpen = !zero || wholeLine;
    if ((lowOpen && trendAt(true)) || (highOpen && trendAt(false))) {
      out.note = "ratio grows toward an open end";
      continue;
    }
    out.ok = true;
    out.a = a;
    out.c = std::max(*std::max_element(ratio.begin(), ratio.end()), 1e-300);
    out.ratio = std::move(ratio);
    out.from = from;
    out.to = to;
    out.note.clear();
    return out;
  }
  return out;
}

// Ranking of an accepted range: wider is better.
double rangeRank(DCondition cond, double a) { return atZero(cond) ? a : -a; }

}  // namespace

DClassReport checkDClass(const Function& f, const std::vector<double>& thetas, const DSearchConfig& cfg) {
  DClassReport out;
  out.report.check = "d-class";
  const double tol = defaultTolerance(f);
  out.report.notes.push_back("conditions at infinity are scanned on finite ranges [a, t_max] only");
  for (std::size_t k = 0; k < thetas.size(); ++k)
    if (!(thetas[k] > 0 && thetas[k] < kPi / 2))
      throw InputError("angle outside (0, pi/2)", "/thetas/" + std::to_string(k));
  for (double th : thetas) {
    const DSamples s = sampleD(f, th, cfg);
    std::vector<double> bs = geometricGrid(cfg.bMin, cfg.bMax, cfg.bCount);
    bs.insert(bs.end(), cfg.extraB.begin(), cfg.extraB.end());
    bs.push_back(1.0);
    bs.push_back(std::cos(th));
    for (DCondition cond :
         {DCondition::ZeroPlus, DCondition::ZeroMinus, DCondition::InfPlus, DCondition::InfMinus}) {
      DConditionResult best;
      best.condition = cond;
      best.theta = th;
      ScanResult bestScan;
      std::string lastNote = "no admissible b";
      for (double b : bs) {
        ScanResult r = scanB(f, s, cond, b, cfg, tol);
        if (!r.ok) {
          lastNote = r.note;
          continue;
        }
        const bool better =
            !best.pass || rangeRank(cond, r.a) > rangeRank(cond, best.a) ||
            (rangeRank(cond, r.a) == rangeRank(cond, best.a) &&
             (r.c < best.c || (r.c == best.c && std::abs(std::log(b)) < std::abs(std::log(best.b)))));
        if (better) {
          best.pass = true;
          best.a = r.a;
          best.b = b;
          best.c = r.c;
          bestScan = std::move(r);
        }
      }
      if (!best.pass) best.note = lastNote;
      if (best.pass) {
        const double sgn = isPlus(cond) ? 1.0 : -1.0;
        for (std::size_t i = bestScan.from; i < bestScan.to; ++i) {
          const double t = s.t[i];
          const double bound = best.c * t * sgn * realDerivative(f, best.b * t);
          // scaled by |f(t)| too, so points where both sides vanish stay quiet
          const double scale = std::max({std::abs(bound), s.im[i], std::abs(f(t).real())});
          out.report.add({dConditionName(cond), t, th, 0.0, scale > 0 ? (bound - s.im[i]) / scale : 0.0});
        }
      }
      out.results.push_back(best);
    }
  }
  out.report.finish(tol);
  return out;
}

DConditionResult verifyDCondition(const Function& f, double theta, DCondition cond, double b, double c,
                                  const DSearchConfig& cfg) {
  if (!(theta > 0 && theta < kPi / 2)) throw InputError("angle outside (0, pi/2)", "/theta");
  if (!(b > 0)) throw InputError("b must be positive", "/b");
  if (!(c > 0)) throw InputError("c must be positive", "/c");
  const double tol = defaultTolerance(f);
  const DSamples s = sampleD(f, theta, cfg);
  ScanResult r = scanB(f, s, cond, b, cfg, tol);
  DConditionResult out;
  out.condition = cond;
  out.theta = theta;
  out.b = b;
  out.c = c;
  if (!r.ok) {
    out.note = r.note;
    return out;
  }
  out.a = r.a;
  // r.c is the least c on the widest admissible range; accept c within tolerance.
  out.pass = r.c <= c * (1 + tol);
  if (!out.pass) out.note = "needs c = " + std::to_string(r.c);
  return out;
}

double kappaFromDCondition(DCondition cond, double b, double c) {
  // Increasing f: f(bt) <= max(b, 1) f(t). Decreasing f: f(bt) <= max(1, 1/b) f(t).
  if (isPlus(cond)) return c * std::max(b, 1 / b);
  return c * std::max(1.0, 1 / (b * b)) / b;
}

// ---------------------------------------------------------------- kappa and spherical integral

namespace {

// Max over the grid, and whether it has settled: dropping the outermost
// decade at each end changes it by less than rel 1e-3, or by less than half
// of what dropping the next decade changes (increments shrinking toward a
// finite supremum at the end of the grid).
std::pair<double, bool> stableMax(const std::vector<double>& r, const std::vector<double>& v) {
  auto maxWithin = [&](double decades) {
    double m = 0.0;
    const double f = std::pow(10.0, decades);
    for (std::size_t i = 0; i < r.size(); ++i)
      if (r[i] >= r.front() * f * (1 - 1e-12) && r[i] <= r.back() / f * (1 + 1e-12)) m = std::max(m, v[i]);
    return m;
  };
  const double all = maxWithin(0), inner = maxWithin(1), inner2 = maxWithin(2);
  if (!std::isfinite(all)) return {all, false};
  const bool settled = all - inner <= 1e-3 * all || (all - inner <= 0.5 * (inner - inner2) && inner > inner2);
  return {all, settled};
}

}  // namespace

KappaEstimate estimateKappa(const Function& f, double theta, const GridSpec& grid, const QuadratureConfig& quad) {
  if (!(theta > 0 && theta < kPi / 2)) throw InputError("angle outside (0, pi/2)", "/theta");
  grid.validate();
  KappaEstimate out;
  out.r = grid.rGrid();
  out.rJ.assign(out.r.size(), 0.0);
  std::vector<char> conv(out.r.size(), 0);
  parallelFor(out.r.size(), [&](std::size_t i) {
    auto j = jIntegral(f, theta, out.r[i], quad);
    out.rJ[i] = out.r[i] * j.value;
    conv[i] = j.converged;
  });
  out.converged = std::all_of(conv.begin(), conv.end(), [](char c) { return c != 0; });
  auto [mx, stable] = stableMax(out.r, out.rJ);
  out.kappa = mx;
  out.stable = stable;
  out.report.check = "kappa";
  for (std::size_t i = 0; i < out.r.size(); ++i)
    out.report.add({"r J", 0.0, theta, out.r[i], conv[i] ? mx - out.rJ[i] : -kInf});
  out.report.constants["kappa"] = mx;
  if (!out.converged) out.report.notes.push_back("J integral did not converge at some r");
  if (!stable) out.report.notes.push_back("max of r J still moving at the ends of the r-grid");
  out.report.finish(0.0);
  out.report.pass = out.report.pass && stable && out.converged;
  return out;
}

SphericalEstimate checkSphericalS(const Function& f, double theta, const GridSpec& grid,
                                  const QuadratureConfig& quad) {
  if (!(theta > 0 && theta < kPi / 2)) throw InputError("angle outside (0, pi/2)", "/theta");
  grid.validate();
  SphericalEstimate out;
  out.r = grid.rGrid();
  const std::size_t n = out.r.size();
  out.integral.assign(n, 0.0);
  std::vector<double> jv(n);
  std::vector<char> conv(n, 0);
  parallelFor(n, [&](std::size_t i) {
    const double r = out.r[i];
    // fixed outer rule on [-theta, 0] and [0, theta], log-split inner rays
    bool innerOk = true;
    double innerErr = 0.0;
    auto ray = [&](double s) {
      auto res = integrateHalfLineSplit(
          [&](double t) {
            const Complex z = std::polar(t, s);
            const double m = std::abs(f(z));
            return t * r * std::abs(f.derivative(z).value) / (r * r + m * m);
          },
          quad);
      innerOk = innerOk && res.converged;
      innerErr = std::max(innerErr, res.errEstimate);
      return res.value;
    };
    int evals = 0;
    auto [v1, e1] = detail::applyRule<double>(ray, -theta, 0.0, NestedRule::GaussKronrod21, evals);
    auto [v2, e2] = detail::applyRule<double>(ray, 0.0, theta, NestedRule::GaussKronrod21, evals);
    IntegralResult<double> I;
    I.value = v1 + v2;
    I.errEstimate = e1 + e2 + 2 * theta * innerErr;
    I.converged = innerOk && I.errEstimate <= std::max(quad.absTol, 100 * quad.relTol * std::abs(I.value));
    auto J = jIntegral(f, theta, r, quad);
    out.integral[i] = I.value;
    jv[i] = J.value;
    conv[i] = I.converged && J.converged;
  });
  out.converged = std::all_of(conv.begin(), conv.end(), [](char c) { return c != 0; });
  auto [mx, stable] = stableMax(out.r, out.integral);
  out.supremum = mx;
  out.stable = stable;
  out.report.check = "spherical";
  const double c2 = std::cos(theta) * std::cos(theta);
  for (std::size_t i = 0; i < n; ++i) {
    const double bound = out.integral[i] / (2 * out.r[i] * c2);
    out.report.add({"J <= I / (2 r cos^2)", 0.0, theta, out.r[i], relMargin(bound, jv[i])});
  }
  out.report.constants["C"] = mx;
  if (!out.converged) out.report.notes.push_back("a sector or J integral did not converge");
  if (!stable) out.report.notes.push_back("sup over r still moving at the ends of the r-grid");
  out.report.finish(std::max(defaultTolerance(f), quad.relTol * 100));
  out.report.pass = out.report.pass && stable && out.converged;
  return out;
}

}  // namespace sectcalc
