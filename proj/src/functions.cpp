#include "sectcalc/functions.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace sectcalc {

namespace detail {

struct FunctionNode {
  NodeKind kind = NodeKind::Identity;
  std::vector<double> params;
  std::vector<Function> children;
  std::optional<LevyTriple> levy;
  std::optional<StieltjesTriple> stieltjes;
  std::optional<CauchyTriple> cauchy;
  QuadratureConfig quad;
  std::string rawName;
  Function::ScalarMap rawEval;
  Function::ScalarMap rawDeriv;
  TagSet tags;
  Limits limits;
};

}  // namespace detail

using detail::FunctionNode;

namespace {

constexpr const char* kTagNames[kTagCount] = {"NP+", "CM", "BF", "CBF", "D0+", "D0-",
                                              "Dinf+", "Dinf-", "D", "E", "S"};

// e^z - 1 without cancellation near 0.
Complex expm1c(Complex z) {
  const double x = z.real(), y = z.imag();
  const double s = std::sin(0.5 * y);
  return {std::expm1(x) * std::cos(y) - 2.0 * s * s, std::exp(x) * std::sin(y)};
}

// log(1 + z) without cancellation near 0.
Complex log1pc(Complex z) {
  if (std::abs(z) < 1e-3) {
    Complex term = z, sum = 0.0;
    for (int k = 1; k <= 8; ++k) {
      sum += term / double(k);
      term *= -z;
    }
    return sum;
  }
  return std::log(1.0 + z);
}

Complex evalNode(const FunctionNode& n, Complex z);
Derivative derivNode(const FunctionNode& n, Complex z);

Complex evalChild(const Function& f, Complex z) { return evalNode(f.node(), z); }

Complex evalNode(const FunctionNode& n, Complex z) {
  const auto& p = n.params;
  const auto& ch = n.children;
  switch (n.kind) {
    case NodeKind::Identity:
      return z;
    case NodeKind::Constant:
      return p[0];
    case NodeKind::Power:
      return std::pow(z, p[0]);
    case NodeKind::Log1p:
      return log1pc(z);
    case NodeKind::OneMinusExp:
      return -expm1c(-z);
    case NodeKind::CauchyAtom: {
      const double s2 = p[0] * p[0];
      return z * (1.0 + s2) / (s2 + z * z);
    }
    case NodeKind::ExampleG: {
      const Complex w = z + p[0];
      return (z + 2.0 * p[0]) / (w * w);
    }
    case NodeKind::MoebiusSeries: {
      const Complex w = (1.0 - z) / (1.0 + z);
      Complex wn = 1.0, sum = 0.0;
      for (double c : p) {
        sum += c * wn;
        wn *= w;
      }
      return 1.0 - sum;
    }
    case NodeKind::FromLevy: {
      const LevyTriple& t = *n.levy;
      auto r = t.mu.integrate([z](double s) { return Complex(-expm1c(-z * s)); }, {1.0, 0.0}, n.quad);
      return t.a + t.b * z + r.value;
    }
    case NodeKind::FromStieltjes: {
      const StieltjesTriple& t = *n.stieltjes;
      auto r = t.nu.integrate([z](double s) { return Complex(z / (z + s)); }, {0.0, -1.0}, n.quad);
      return t.a + t.b * z + r.value;
    }
    case NodeKind::FromCauchyMeasure: {
      const CauchyTriple& t = *n.cauchy;
      const Complex z2 = z * z;
      auto r = t.mu.integrate([z2](double s) { return Complex((1.0 + s * s) / (s * s + z2)); }, {0.0, 0.0},
                              n.quad);
      return t.a * z + t.b / z + 2.0 * z * r.value;
    }
    case NodeKind::Sum: {
      Complex s = 0.0;
      for (const auto& c : ch) s += evalChild(c, z);
      return s;
    }
    case NodeKind::Scale:
      return p[0] * evalChild(ch[0], z);
    case NodeKind::Product: {
      Complex s = 1.0;
      for (const auto& c : ch) s *= evalChild(c, z);
      return s;
    }
    case NodeKind::Reciprocal:
      return 1.0 / evalChild(ch[0], z);
    case NodeKind::Compose: {
      const Complex inner = evalChild(ch[1], z);
      if (!ch[0].inDomain(inner)) throw DomainError("inner value leaves the domain of the outer function");
      return evalChild(ch[0], inner);
    }
    case NodeKind::PowerOf:
      return std::pow(evalChild(ch[0], z), p[0]);
    case NodeKind::ArgPower:
      return evalChild(ch[0], std::pow(z, p[0]));
    case NodeKind::ArgInversion:
      return evalChild(ch[0], 1.0 / z);
    case NodeKind::Raw:
      return n.rawEval(z);
  }
  throw Error("unknown node kind");
}

Derivative centralDifference(const std::function<Complex(Complex)>& f, Complex z) {
  const double h = 1e-5 * (1.0 + std::abs(z));
  // Fourth-order central stencil along the real direction (holomorphic f).
  const Complex d = (-f(z + 2.0 * h) + 8.0 * f(z + h) - 8.0 * f(z - h) + f(z - 2.0 * h)) / (12.0 * h);
  return {d, true};
}

Derivative derivChild(const Function& f, Complex z) { return derivNode(f.node(), z); }

Derivative derivNode(const FunctionNode& n, Complex z) {
  const auto& p = n.params;
  const auto& ch = n.children;
  switch (n.kind) {
    case NodeKind::Identity:
      return {1.0};
    case NodeKind::Constant:
      return {0.0};
    case NodeKind::Power:
      return {p[0] * std::pow(z, p[0] - 1.0)};
    case NodeKind::Log1p:
      return {1.0 / (1.0 + z)};
    case NodeKind::OneMinusExp:
      return {std::exp(-z)};
    case NodeKind::CauchyAtom: {
      const double s2 = p[0] * p[0];
      const Complex d = s2 + z * z;
      return {(1.0 + s2) * (s2 - z * z) / (d * d)};
    }
    case NodeKind::ExampleG: {
      const Complex w = z + p[0];
      return {-(z + 3.0 * p[0]) / (w * w * w)};
    }
    case NodeKind::MoebiusSeries: {
      const Complex w = (1.0 - z) / (1.0 + z);
      const Complex dw = -2.0 / ((1.0 + z) * (1.0 + z));
      Complex wn1 = 1.0, sum = 0.0;
      for (std::size_t k = 1; k < p.size(); ++k) {
        sum += p[k] * double(k) * wn1;
        wn1 *= w;
      }
      return {-sum * dw};
    }
    case NodeKind::FromLevy: {
      const LevyTriple& t = *n.levy;
      auto r = t.mu.integrate([z](double s) { return Complex(s * std::exp(-z * s)); }, {1.0, -50.0}, n.quad);
      return {t.b + r.value};
    }
    case NodeKind::FromStieltjes: {
      const StieltjesTriple& t = *n.stieltjes;
      auto r = t.nu.integrate(
          [z](double s) {
            const Complex w = z + s;
            return Complex(s / (w * w));
          },
          {1.0, -1.0}, n.quad);
      return {t.b + r.value};
    }
    case NodeKind::FromCauchyMeasure: {
      const CauchyTriple& t = *n.cauchy;
      const Complex z2 = z * z;
      auto r = t.mu.integrate(
          [z2](double s) {
            const Complex d = s * s + z2;
            return Complex((1.0 + s * s) * (s * s - z2) / (d * d));
          },
          {0.0, 0.0}, n.quad);
      return {t.a - t.b / z2 + 2.0 * r.value};
    }
    case NodeKind::Sum: {
      Derivative out{0.0};
      for (const auto& c : ch) {
        auto d = derivChild(c, z);
        out.value += d.value;
        out.finiteDifference |= d.finiteDifference;
      }
      return out;
    }
    case NodeKind::Scale: {
      auto d = derivChild(ch[0], z);
      return {p[0] * d.value, d.finiteDifference};
    }
    case NodeKind::Product: {
      // Product rule over all factors.
      std::vector<Complex> vals;
      for (const auto& c : ch) vals.push_back(evalChild(c, z));
      Derivative out{0.0};
      for (std::size_t j = 0; j < ch.size(); ++j) {
        auto d = derivChild(ch[j], z);
        Complex term = d.value;
        for (std::size_t k = 0; k < ch.size(); ++k)
          if (k != j) term *= vals[k];
        out.value += term;
        out.finiteDifference |= d.finiteDifference;
      }
      return out;
    }
    case NodeKind::Reciprocal: {
      const Complex v = evalChild(ch[0], z);
      auto d = derivChild(ch[0], z);
      return {-d.value / (v * v), d.finiteDifference};
    }
    case NodeKind::Compose: {
      const Complex inner = evalChild(ch[1], z);
      auto di = derivChild(ch[1], z);
      auto dg = derivChild(ch[0], inner);
      return {dg.value * di.value, di.finiteDifference || dg.finiteDifference};
    }
    case NodeKind::PowerOf: {
      const Complex v = evalChild(ch[0], z);
      auto d = derivChild(ch[0], z);
      return {p[0] * std::pow(v, p[0] - 1.0) * d.value, d.finiteDifference};
    }
    case NodeKind::ArgPower: {
      const Complex w = std::pow(z, p[0]);
      auto d = derivChild(ch[0], w);
      return {d.value * p[0] * w / z, d.finiteDifference};
    }
    case NodeKind::ArgInversion: {
      auto d = derivChild(ch[0], 1.0 / z);
      return {-d.value / (z * z), d.finiteDifference};
    }
    case NodeKind::Raw:
      if (n.rawDeriv) return {n.rawDeriv(z)};
      return centralDifference(n.rawEval, z);
  }
  throw Error("unknown node kind");
}

double fallingFactorial(double a, int n) {
  double r = 1.0;
  for (int k = 0; k < n; ++k) r *= (a - k);
  return r;
}

double factorial(int n) { return std::tgamma(n + 1.0); }

std::optional<double> derivNNode(const FunctionNode& n, double t, int k) {
  const auto& p = n.params;
  const double sign = (k % 2 == 0) ? 1.0 : -1.0;  // (-1)^k
  if (k == 0) return evalNode(n, t).real();
  switch (n.kind) {
    case NodeKind::Identity:
      return k == 1 ? 1.0 : 0.0;
    case NodeKind::Constant:
      return 0.0;
    case NodeKind::Power:
      return fallingFactorial(p[0], k) * std::pow(t, p[0] - k);
    case NodeKind::Log1p:
      return -sign * factorial(k - 1) / std::pow(1.0 + t, k);
    case NodeKind::OneMinusExp:
      return -sign * std::exp(-t);
    case NodeKind::CauchyAtom: {
      const double s = p[0];
      return (1.0 + s * s) * sign * factorial(k) * std::pow(Complex(t, s), -(k + 1)).real();
    }
    case NodeKind::ExampleG: {
      const double w = t + p[0];
      return sign * factorial(k) / std::pow(w, k + 1) + p[0] * sign * factorial(k + 1) / std::pow(w, k + 2);
    }
    case NodeKind::FromLevy: {
      const LevyTriple& tr = *n.levy;
      auto r = tr.mu.integrate([t, k](double s) { return std::pow(s, k) * std::exp(-t * s); },
                               {double(k), -50.0}, n.quad);
      return -sign * r.value + (k == 1 ? tr.b : 0.0);
    }
    case NodeKind::FromStieltjes: {
      const StieltjesTriple& tr = *n.stieltjes;
      auto r = tr.nu.integrate([t, k](double s) { return s / std::pow(t + s, k + 1); }, {1.0, -double(k)},
                               n.quad);
      return -sign * factorial(k) * r.value + (k == 1 ? tr.b : 0.0);
    }
    case NodeKind::Sum: {
      double s = 0.0;
      for (const auto& c : n.children) {
        auto d = derivNNode(c.node(), t, k);
        if (!d) return std::nullopt;
        s += *d;
      }
      return s;
    }
    case NodeKind::Scale: {
      auto d = derivNNode(n.children[0].node(), t, k);
      if (!d) return std::nullopt;
      return p[0] * *d;
    }
    default:
      return std::nullopt;
  }
}

// ---------------------------------------------------------------- limits

LimitValue addLimits(LimitValue a, LimitValue b) {
  if (!a.isDetermined() || !b.isDetermined()) return LimitValue::undetermined();
  if (a.isInfinite() || b.isInfinite()) return LimitValue::infinite();
  return LimitValue::finite(a.value + b.value);
}

LimitValue mulLimits(LimitValue a, LimitValue b) {
  if (!a.isDetermined() || !b.isDetermined()) return LimitValue::undetermined();
  const bool zeroA = a.isFinite() && a.value == 0.0, zeroB = b.isFinite() && b.value == 0.0;
  if ((zeroA && b.isInfinite()) || (zeroB && a.isInfinite())) return LimitValue::undetermined();
  if (a.isInfinite() || b.isInfinite()) return LimitValue::infinite();
  return LimitValue::finite(a.value * b.value);
}

LimitValue recipLimit(LimitValue a) {
  if (!a.isDetermined()) return a;
  if (a.isInfinite()) return LimitValue::finite(0.0);
  if (a.value == 0.0) return LimitValue::infinite();
  return LimitValue::finite(1.0 / a.value);
}

LimitValue powLimit(LimitValue a, double beta) {
  if (!a.isFinite()) return a;
  return LimitValue::finite(std::pow(a.value, beta));
}

LimitValue limitOfChildAt(const Function& g, LimitValue inner) {
  if (!inner.isDetermined()) return inner;
  if (inner.isInfinite()) return g.limits().atInfinity;
  if (inner.value == 0.0) return g.limits().atZero;
  return LimitValue::finite(evalNode(g.node(), inner.value).real());
}

Limits closedFormLimits(const FunctionNode& n) {
  const auto& p = n.params;
  const auto& ch = n.children;
  const LimitValue zero = LimitValue::finite(0.0), inf = LimitValue::infinite();
  switch (n.kind) {
    case NodeKind::Identity:
    case NodeKind::Power:
    case NodeKind::Log1p:
      return {zero, inf};
    case NodeKind::Constant:
      return {LimitValue::finite(p[0]), LimitValue::finite(p[0])};
    case NodeKind::OneMinusExp:
      return {zero, LimitValue::finite(1.0)};
    case NodeKind::CauchyAtom:
      return {zero, zero};
    case NodeKind::ExampleG:
      return {p[0] > 0 ? LimitValue::finite(2.0 / p[0]) : inf, zero};
    case NodeKind::MoebiusSeries: {
      double at0 = 1.0, atInf = 1.0;
      for (std::size_t k = 0; k < p.size(); ++k) {
        at0 -= p[k];
        atInf -= (k % 2 == 0 ? 1.0 : -1.0) * p[k];
      }
      return {LimitValue::finite(std::max(at0, 0.0)), LimitValue::finite(std::max(atInf, 0.0))};
    }
    case NodeKind::FromLevy: {
      const LevyTriple& t = *n.levy;
      if (t.b > 0) return {LimitValue::finite(t.a), inf};
      const double mass = t.mu.totalMass(n.quad);
      return {LimitValue::finite(t.a), std::isfinite(mass) ? LimitValue::finite(t.a + mass) : inf};
    }
    case NodeKind::FromStieltjes: {
      const StieltjesTriple& t = *n.stieltjes;
      if (t.b > 0) return {LimitValue::finite(t.a), inf};
      const double mass = t.nu.totalMass(n.quad);
      return {LimitValue::finite(t.a), std::isfinite(mass) ? LimitValue::finite(t.a + mass) : inf};
    }
    case NodeKind::FromCauchyMeasure: {
      const CauchyTriple& t = *n.cauchy;
      return {t.b > 0 ? inf : LimitValue::undetermined(), t.a > 0 ? inf : LimitValue::undetermined()};
    }
    case NodeKind::Sum: {
      Limits l = ch[0].limits();
      for (std::size_t k = 1; k < ch.size(); ++k) {
        l.atZero = addLimits(l.atZero, ch[k].limits().atZero);
        l.atInfinity = addLimits(l.atInfinity, ch[k].limits().atInfinity);
      }
      return l;
    }
    case NodeKind::Scale: {
      const LimitValue c = LimitValue::finite(p[0]);
      return {mulLimits(c, ch[0].limits().atZero), mulLimits(c, ch[0].limits().atInfinity)};
    }
    case NodeKind::Product: {
      Limits l = ch[0].limits();
      for (std::size_t k = 1; k < ch.size(); ++k) {
        l.atZero = mulLimits(l.atZero, ch[k].limits().atZero);
        l.atInfinity = mulLimits(l.atInfinity, ch[k].limits().atInfinity);
      }
      return l;
    }
    case NodeKind::Reciprocal:
      return {recipLimit(ch[0].limits().atZero), recipLimit(ch[0].limits().atInfinity)};
    case NodeKind::Compose:
      return {limitOfChildAt(ch[0], ch[1].limits().atZero), limitOfChildAt(ch[0], ch[1].limits().atInfinity)};
    case NodeKind::PowerOf:
      return {powLimit(ch[0].limits().atZero, p[0]), powLimit(ch[0].limits().atInfinity, p[0])};
    case NodeKind::ArgPower:
      return ch[0].limits();
    case NodeKind::ArgInversion:
      return {ch[0].limits().atInfinity, ch[0].limits().atZero};
    case NodeKind::Raw:
      return {};
  }
  return {};
}

void fillLimits(FunctionNode& n) {
  n.limits = closedFormLimits(n);
  auto sample = [&n](double t) { return evalNode(n, t).real(); };
  if (!n.limits.atZero.isDetermined()) n.limits.atZero = detectLimit(sample, true);
  if (!n.limits.atInfinity.isDetermined()) n.limits.atInfinity = detectLimit(sample, false);
}

// ---------------------------------------------------------------- tags

// Adds everything implied by tags already present.
void closeTags(TagSet& t) {
  for (int pass = 0; pass < 3; ++pass) {
    if (t.has(Tag::CBF)) t.insert(Tag::BF);
    if (t.has(Tag::BF)) {
      // Bernstein functions map the half-plane into itself, satisfy the
      // imaginary-part bound with (b, c) = (cos, sin) on the whole line, and
      // have a bounded spherical integral.
      for (Tag x : {Tag::NP, Tag::D0Plus, Tag::DInfPlus, Tag::S}) t.insert(x);
    }
    if (t.has(Tag::CM) && t.has(Tag::NP)) {
      t.insert(Tag::D0Minus);
      t.insert(Tag::DInfMinus);
    }
    if ((t.has(Tag::D0Plus) || t.has(Tag::D0Minus)) && (t.has(Tag::DInfPlus) || t.has(Tag::DInfMinus)))
      t.insert(Tag::D);
    if (t.has(Tag::D) || t.has(Tag::S)) t.insert(Tag::E);
    if (t.has(Tag::E)) t.insert(Tag::NP);
  }
}

bool allHave(const std::vector<Function>& fs, Tag tag) {
  return std::all_of(fs.begin(), fs.end(), [tag](const Function& f) { return f.has(tag); });
}

// Numerical check that f maps the right half-plane into itself, sampled on
// rays |arg z| < pi/2 and t in [1e-4, 1e4].
bool sampledHalfPlaneRange(const FunctionNode& n) {
  try {
    for (int i = 0; i <= 40; ++i) {
      const double t = std::pow(10.0, -4.0 + 8.0 * i / 40.0);
      const double v = evalNode(n, t).real();
      if (!(v > 0)) return false;
      for (int j = 1; j <= 10; ++j) {
        const double th = (j == 10 ? 0.999 : j / 10.0) * kPi / 2;
        for (double sgn : {-1.0, 1.0}) {
          const Complex w = evalNode(n, std::polar(t, sgn * th));
          if (!(w.real() > -1e-12 * std::abs(w))) return false;
          if (std::abs(std::arg(w)) > th + 1e-9) return false;
        }
      }
    }
  } catch (const Error&) {
    return false;
  }
  return true;
}

// Weight of a factor z^a or f(z^a)^b (f Bernstein) in a product; nullopt when
// the factor has a different shape.
std::optional<double> factorWeight(const Function& f) {
  switch (f.kind()) {
    case NodeKind::Identity:
      return 1.0;
    case NodeKind::Power:
      return f.params()[0];
    case NodeKind::PowerOf:
    case NodeKind::ArgPower: {
      const double e = f.params()[0];
      if (!(e > 0 && e <= 1)) return std::nullopt;
      auto w = factorWeight(f.children()[0]);
      if (!w) return std::nullopt;
      return e * *w;
    }
    default:
      if (f.has(Tag::BF)) return 1.0;
      return std::nullopt;
  }
}

TagSet deriveTags(const FunctionNode& n) {
  const auto& ch = n.children;
  const auto& p = n.params;
  TagSet t;
  switch (n.kind) {
    case NodeKind::Identity:
    case NodeKind::Power:
    case NodeKind::Log1p:
    case NodeKind::FromStieltjes:
      t.insert(Tag::CBF);
      break;
    case NodeKind::Constant:
      t = {Tag::CBF, Tag::CM};
      break;
    case NodeKind::OneMinusExp:
    case NodeKind::FromLevy:
      t.insert(Tag::BF);
      break;
    case NodeKind::CauchyAtom:
      t = {Tag::NP, Tag::D0Plus, Tag::DInfMinus};
      break;
    case NodeKind::ExampleG:
      t = {Tag::NP, Tag::CM};
      break;
    case NodeKind::MoebiusSeries:
      t = {Tag::NP, Tag::D};
      break;
    case NodeKind::FromCauchyMeasure:
      t.insert(Tag::NP);
      break;
    case NodeKind::Sum:
      for (Tag x : {Tag::NP, Tag::E, Tag::D, Tag::BF, Tag::CBF, Tag::CM})
        if (allHave(ch, x)) t.insert(x);
      break;
    case NodeKind::Scale:
      t = ch[0].tags();
      break;
    case NodeKind::Product: {
      double total = 0.0;
      bool shaped = true;
      for (const auto& c : ch) {
        auto w = factorWeight(c);
        if (!w) {
          shaped = false;
          break;
        }
        total += *w;
      }
      if (shaped && total <= 1.0 + 1e-12) {
        t = {Tag::NP, Tag::D};
      } else if (allHave(ch, Tag::BF) && sampledHalfPlaneRange(n)) {
        t = {Tag::NP, Tag::D0Plus, Tag::DInfPlus};
      }
      if (allHave(ch, Tag::CM)) t.insert(Tag::CM);
      break;
    }
    case NodeKind::Reciprocal: {
      const TagSet& c = ch[0].tags();
      for (Tag x : {Tag::NP, Tag::E, Tag::D, Tag::S})
        if (c.has(x)) t.insert(x);
      if (c.has(Tag::D0Plus)) t.insert(Tag::D0Minus);
      if (c.has(Tag::D0Minus)) t.insert(Tag::D0Plus);
      if (c.has(Tag::DInfPlus)) t.insert(Tag::DInfMinus);
      if (c.has(Tag::DInfMinus)) t.insert(Tag::DInfPlus);
      if (c.has(Tag::BF)) {
        t.insert(Tag::CM);
        t.insert(Tag::NP);
      }
      break;
    }
    case NodeKind::Compose: {
      const Function& g = ch[0];
      const Function& f = ch[1];
      if (g.has(Tag::NP) && f.has(Tag::NP)) t.insert(Tag::NP);
      if (g.has(Tag::BF) && f.has(Tag::BF)) t.insert(Tag::BF);
      if (g.has(Tag::CBF) && f.has(Tag::CBF)) t.insert(Tag::CBF);
      if (g.has(Tag::CM) && f.has(Tag::BF)) t.insert(Tag::CM);
      break;
    }
    case NodeKind::PowerOf: {
      const double beta = p[0];
      const Function& f = ch[0];
      bool np = false;
      if (beta <= 1.0) {
        np = f.has(Tag::NP);
        if (f.has(Tag::BF)) t.insert(Tag::BF);
        if (f.has(Tag::CBF)) t.insert(Tag::CBF);
      } else if (f.kind() == NodeKind::ArgPower && std::abs(f.params()[0] * beta - 1.0) < 1e-12) {
        // f(z^a)^{1/a} maps each sector into itself when f does.
        np = f.children()[0].has(Tag::NP);
      } else {
        np = f.has(Tag::NP) && sampledHalfPlaneRange(n);
      }
      if (np) {
        t.insert(Tag::NP);
        for (Tag x : {Tag::D0Plus, Tag::D0Minus, Tag::DInfPlus, Tag::DInfMinus})
          if (f.tags().has(x)) t.insert(x);
      }
      break;
    }
    case NodeKind::ArgPower: {
      const TagSet& c = ch[0].tags();
      for (Tag x : {Tag::NP, Tag::E, Tag::D, Tag::BF, Tag::CBF, Tag::CM, Tag::D0Plus, Tag::D0Minus, Tag::DInfPlus,
                    Tag::DInfMinus})
        if (c.has(x)) t.insert(x);
      break;
    }
    case NodeKind::ArgInversion: {
      const TagSet& c = ch[0].tags();
      for (Tag x : {Tag::NP, Tag::E, Tag::D, Tag::S})
        if (c.has(x)) t.insert(x);
      if (c.has(Tag::D0Plus)) t.insert(Tag::DInfMinus);
      if (c.has(Tag::D0Minus)) t.insert(Tag::DInfPlus);
      if (c.has(Tag::DInfPlus)) t.insert(Tag::D0Minus);
      if (c.has(Tag::DInfMinus)) t.insert(Tag::D0Plus);
      break;
    }
    case NodeKind::Raw:
      break;
  }
  closeTags(t);
  return t;
}

Function finish(FunctionNode n) {
  n.tags = deriveTags(n);
  fillLimits(n);
  return Function(std::make_shared<const FunctionNode>(std::move(n)));
}

FunctionNode leaf(NodeKind kind, std::vector<double> params = {}) {
  FunctionNode n;
  n.kind = kind;
  n.params = std::move(params);
  return n;
}

FunctionNode inner(NodeKind kind, std::vector<Function> children, std::vector<double> params = {}) {
  FunctionNode n;
  n.kind = kind;
  n.children = std::move(children);
  n.params = std::move(params);
  return n;
}

void require(bool ok, const std::string& msg, const std::string& ptr) {
  if (!ok) throw InputError(msg, ptr);
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

}  // namespace

// ---------------------------------------------------------------- tags API

const char* tagName(Tag t) { return kTagNames[int(t)]; }

std::optional<Tag> tagFromName(std::string_view name) {
  for (int i = 0; i < kTagCount; ++i)
    if (name == kTagNames[i]) return Tag(i);
  return std::nullopt;
}

std::vector<Tag> TagSet::list() const {
  std::vector<Tag> out;
  for (int i = 0; i < kTagCount; ++i)
    if (bits_.test(i)) out.push_back(Tag(i));
  return out;
}

namespace {
constexpr const char* kKindNames[] = {"Identity", "Constant", "Power", "Log1p", "OneMinusExp",
                                      "CauchyAtom", "ExampleG", "MoebiusSeries", "FromLevy",
                                      "FromStieltjes", "FromCauchyMeasure", "Sum", "Scale", "Product",
                                      "Reciprocal", "Compose", "PowerOf", "ArgPower", "ArgInversion", "Raw"};
}

const char* kindName(NodeKind k) { return kKindNames[int(k)]; }

std::optional<NodeKind> kindFromName(std::string_view name) {
  for (int i = 0; i <= int(NodeKind::Raw); ++i)
    if (name == kKindNames[i]) return NodeKind(i);
  return std::nullopt;
}

// ---------------------------------------------------------------- factories

Function Function::identity() { return finish(leaf(NodeKind::Identity)); }

Function Function::constant(double c) {
  require(c > 0 && std::isfinite(c), "Constant needs c > 0", "/params/c");
  return finish(leaf(NodeKind::Constant, {c}));
}

Function Function::power(double alpha) {
  require(alpha > 0 && alpha <= 1, "Power needs alpha in (0, 1]", "/params/alpha");
  return finish(leaf(NodeKind::Power, {alpha}));
}

Function Function::log1p() { return finish(leaf(NodeKind::Log1p)); }

Function Function::oneMinusExp() { return finish(leaf(NodeKind::OneMinusExp)); }

Function Function::cauchyAtom(double s) {
  require(s > 0 && std::isfinite(s), "CauchyAtom needs s > 0", "/params/s");
  return finish(leaf(NodeKind::CauchyAtom, {s}));
}

Function Function::exampleG(double t) {
  require(t >= 0 && std::isfinite(t), "ExampleG needs t >= 0", "/params/t");
  return finish(leaf(NodeKind::ExampleG, {t}));
}

Function Function::moebiusSeries(std::vector<double> coeffs) {
  require(!coeffs.empty(), "MoebiusSeries needs coefficients", "/params/c");
  double l1 = 0.0;
  for (double c : coeffs) {
    require(std::isfinite(c), "MoebiusSeries coefficients must be finite", "/params/c");
    l1 += std::abs(c);
  }
  require(l1 <= 1.0 + 1e-12, "MoebiusSeries needs sum |c_n| <= 1", "/params/c");
  const bool onlyConstant =
      std::all_of(coeffs.begin() + 1, coeffs.end(), [](double c) { return c == 0.0; });
  require(!(onlyConstant && coeffs[0] >= 1.0), "MoebiusSeries would be identically zero", "/params/c");
  return finish(leaf(NodeKind::MoebiusSeries, std::move(coeffs)));
}

Function Function::fromLevy(LevyTriple triple, QuadratureConfig quad) {
  validate(triple, quad);
  require(triple.a > 0 || triple.b > 0 || !triple.mu.empty(), "Levy triple is identically zero", "/params");
  FunctionNode n = leaf(NodeKind::FromLevy);
  n.levy = std::move(triple);
  n.quad = quad;
  return finish(std::move(n));
}

Function Function::fromStieltjes(StieltjesTriple triple, QuadratureConfig quad) {
  validate(triple, quad);
  require(triple.a > 0 || triple.b > 0 || !triple.nu.empty(), "Stieltjes triple is identically zero", "/params");
  FunctionNode n = leaf(NodeKind::FromStieltjes);
  n.stieltjes = std::move(triple);
  n.quad = quad;
  return finish(std::move(n));
}

Function Function::fromCauchyMeasure(CauchyTriple triple, QuadratureConfig quad) {
  validate(triple, quad);
  require(triple.a > 0 || triple.b > 0 || !triple.mu.empty(), "Cauchy triple is identically zero", "/params");
  FunctionNode n = leaf(NodeKind::FromCauchyMeasure);
  n.cauchy = std::move(triple);
  n.quad = quad;
  return finish(std::move(n));
}

Function Function::raw(std::string name, ScalarMap eval, ScalarMap derivative) {
  require(bool(eval), "Raw function needs an evaluator", "");
  FunctionNode n = leaf(NodeKind::Raw);
  n.rawName = std::move(name);
  n.rawEval = std::move(eval);
  n.rawDeriv = std::move(derivative);
  return finish(std::move(n));
}

Function Function::sum(std::vector<Function> terms) {
  require(!terms.empty(), "Sum needs at least one term", "/children");
  return finish(inner(NodeKind::Sum, std::move(terms)));
}

Function Function::scale(double c, Function f) {
  require(c > 0 && std::isfinite(c), "Scale needs c > 0", "/params/c");
  return finish(inner(NodeKind::Scale, {std::move(f)}, {c}));
}

Function Function::product(std::vector<Function> factors) {
  require(!factors.empty(), "Product needs at least one factor", "/children");
  return finish(inner(NodeKind::Product, std::move(factors)));
}

Function Function::reciprocal(Function f) { return finish(inner(NodeKind::Reciprocal, {std::move(f)})); }

Function Function::compose(Function g, Function f) {
  return finish(inner(NodeKind::Compose, {std::move(g), std::move(f)}));
}

Function Function::powerOf(double beta, Function f) {
  require(beta > 0 && std::isfinite(beta), "PowerOf needs beta > 0", "/params/beta");
  return finish(inner(NodeKind::PowerOf, {std::move(f)}, {beta}));
}

Function Function::argPower(double alpha, Function f) {
  require(alpha > 0 && alpha <= 1, "ArgPower needs alpha in (0, 1]", "/params/alpha");
  return finish(inner(NodeKind::ArgPower, {std::move(f)}, {alpha}));
}

Function Function::argInversion(Function f) { return finish(inner(NodeKind::ArgInversion, {std::move(f)})); }

// ---------------------------------------------------------------- members

bool Function::inDomain(Complex z) const {
  if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) return false;
  if (has(Tag::CBF)) return !(z.imag() == 0.0 && z.real() <= 0.0);
  return z.real() > 0.0;
}

Complex Function::operator()(Complex z) const {
  if (!inDomain(z)) throw DomainError("evaluation point outside the domain of " + describe());
  return evalNode(*node_, z);
}

Derivative Function::derivative(Complex z) const {
  if (!inDomain(z)) throw DomainError("evaluation point outside the domain of " + describe());
  return derivNode(*node_, z);
}

std::optional<double> Function::derivativeN(double t, int n) const {
  if (!(t > 0) || n < 0) throw DomainError("derivativeN needs t > 0 and n >= 0");
  return derivNNode(*node_, t, n);
}

NodeKind Function::kind() const { return node_->kind; }
const std::vector<double>& Function::params() const { return node_->params; }
const std::vector<Function>& Function::children() const { return node_->children; }
const TagSet& Function::tags() const { return node_->tags; }
const Limits& Function::limits() const { return node_->limits; }
const LevyTriple* Function::levy() const { return node_->levy ? &*node_->levy : nullptr; }
const StieltjesTriple* Function::stieltjes() const { return node_->stieltjes ? &*node_->stieltjes : nullptr; }
const CauchyTriple* Function::cauchy() const { return node_->cauchy ? &*node_->cauchy : nullptr; }
const QuadratureConfig& Function::quadrature() const { return node_->quad; }

std::string Function::describe() const {
  const FunctionNode& n = *node_;
  if (n.kind == NodeKind::Raw) return "Raw(" + n.rawName + ")";
  std::string s = kindName(n.kind);
  if (n.params.empty() && n.children.empty()) return s;
  s += "(";
  bool first = true;
  for (double p : n.params) {
    s += (first ? "" : ", ") + fmt(p);
    first = false;
  }
  for (const auto& c : n.children) {
    s += (first ? "" : ", ") + c.describe();
    first = false;
  }
  return s + ")";
}

Complex eval(const Function& f, Complex z) { return f(z); }
Derivative evalDerivative(const Function& f, Complex z) { return f.derivative(z); }
Limits limitingValues(const Function& f) { return f.limits(); }

Function buildCombinator(NodeKind kind, std::vector<Function> children, std::vector<double> params) {
  auto need = [&](std::size_t nc, std::size_t np) {
    require(children.size() == nc || (nc == 0 && !children.empty()), "wrong number of children", "/children");
    require(params.size() == np, "wrong number of parameters", "/params");
  };
  switch (kind) {
    case NodeKind::Sum:
      need(0, 0);
      return Function::sum(std::move(children));
    case NodeKind::Product:
      need(0, 0);
      return Function::product(std::move(children));
    case NodeKind::Scale:
      need(1, 1);
      return Function::scale(params[0], children[0]);
    case NodeKind::Reciprocal:
      need(1, 0);
      return Function::reciprocal(children[0]);
    case NodeKind::Compose:
      need(2, 0);
      return Function::compose(children[0], children[1]);
    case NodeKind::PowerOf:
      need(1, 1);
      return Function::powerOf(params[0], children[0]);
    case NodeKind::ArgPower:
      need(1, 1);
      return Function::argPower(params[0], children[0]);
    case NodeKind::ArgInversion:
      need(1, 0);
      return Function::argInversion(children[0]);
    default:
      throw InputError(std::string("not a combinator: ") + kindName(kind), "/kind");
  }
}

LimitValue detectLimit(const std::function<double(double)>& f, bool towardZero) {
  // Step 2^{golden ratio}: incommensurate with dyadic structure in the data.
  const double step = std::exp2(1.6180339887498949);
  const int window = 8, maxSamples = 64;
  std::vector<double> v;
  try {
    double t = 1.0;
    for (int k = 0; k < maxSamples; ++k) {
      const double x = f(t);
      if (!std::isfinite(x)) return LimitValue::undetermined();
      v.push_back(x);
      t = towardZero ? t / step : t * step;
      if (int(v.size()) < window) continue;
      auto first = v.end() - window;
      const auto [lo, hi] = std::minmax_element(first, v.end());
      const double scale = std::max(std::abs(*lo), std::abs(*hi));
      if (*hi - *lo <= 1e-6 * scale) return LimitValue::finite(v.back());
      const bool increasing = std::is_sorted(first, v.end(), std::less_equal<double>());
      const bool decreasing = std::is_sorted(first, v.end(), std::greater_equal<double>());
      const double ref = std::abs(v.front()) + 1e-300;
      if (increasing && v.back() > 1e10 * ref) return LimitValue::infinite();
      if (decreasing && v.back() >= 0 && v.back() < 1e-10 * ref) return LimitValue::finite(0.0);
      // Growth at least linear in the sample index (logarithmic in t) cannot
      // level off: increments that are not shrinking after a large rise.
      auto unbounded = [&](auto g) {
        const double d0 = g(*(first + 1)) - g(*first), d1 = g(v.back()) - g(*(v.end() - 2));
        return d0 > 0 && d1 >= 0.9 * d0 && g(v.back()) > 30 * g(v.front());
      };
      if (increasing && v.front() > 0 && unbounded([](double x) { return x; })) return LimitValue::infinite();
      if (decreasing && v.back() > 0 && unbounded([](double x) { return 1 / x; })) return LimitValue::finite(0.0);
    }
  } catch (const Error&) {
    return LimitValue::undetermined();
  }
  return LimitValue::undetermined();
}

// ---------------------------------------------------------------- catalog

Function sqrtTimesSqrtOneMinusExp() {
  return Function::product({Function::power(0.5), Function::powerOf(0.5, Function::oneMinusExp())});
}

std::vector<NamedFunction> acceptanceCatalog() {
  return {
      {"Identity", Function::identity()},
      {"Power(1/2)", Function::power(0.5)},
      {"Power(3/4)", Function::power(0.75)},
      {"OneMinusExp", Function::oneMinusExp()},
      {"Log1p", Function::log1p()},
      {"ExampleG(1)", Function::exampleG(1.0)},
      {"CauchyAtom(1)", Function::cauchyAtom(1.0)},
      {"MoebiusSeries(0,1)", Function::moebiusSeries({0.0, 1.0})},
  };
}

MeasureSpec dyadicCauchyMeasure(int count) {
  std::vector<Atom> atoms;
  for (int n = 0; n < count; ++n) atoms.push_back({std::ldexp(1.0, -n), std::ldexp(1.0, -n)});
  return MeasureSpec(std::move(atoms));
}

std::optional<LevyTriple> catalogLevyTriple(const Function& f) {
  switch (f.kind()) {
    case NodeKind::Identity:
      return LevyTriple{0.0, 1.0, {}};
    case NodeKind::Constant:
      return LevyTriple{f.params()[0], 0.0, {}};
    case NodeKind::Power: {
      const double a = f.params()[0];
      if (a == 1.0) return LevyTriple{0.0, 1.0, {}};
      // z^a = a / Gamma(1-a) int (1 - e^{-zs}) s^{-1-a} ds
      return LevyTriple{0.0, 0.0, MeasureSpec({}, powerDensity(a / std::tgamma(1.0 - a), -1.0 - a))};
    }
    case NodeKind::Log1p:
      return LevyTriple{0.0, 0.0, MeasureSpec({}, powerExpDensity(1.0, -1.0, 1.0))};
    case NodeKind::OneMinusExp:
      return LevyTriple{0.0, 0.0, MeasureSpec({{1.0, 1.0}})};
    case NodeKind::FromLevy:
      return *f.levy();
    case NodeKind::FromStieltjes:
      return levyFromStieltjes(*f.stieltjes());
    default:
      return std::nullopt;
  }
}

std::optional<StieltjesTriple> catalogStieltjesTriple(const Function& f) {
  switch (f.kind()) {
    case NodeKind::Identity:
      return StieltjesTriple{0.0, 1.0, {}};
    case NodeKind::Constant:
      return StieltjesTriple{f.params()[0], 0.0, {}};
    case NodeKind::Power: {
      const double a = f.params()[0];
      if (a == 1.0) return StieltjesTriple{0.0, 1.0, {}};
      return StieltjesTriple{0.0, 0.0, MeasureSpec({}, powerDensity(std::sin(a * kPi) / kPi, a - 1.0))};
    }
    case NodeKind::Log1p:
      return StieltjesTriple{0.0, 0.0, MeasureSpec({}, powerDensity(1.0, -1.0, 1.0))};
    case NodeKind::FromStieltjes:
      return *f.stieltjes();
    default:
      return std::nullopt;
  }
}

}  // namespace sectcalc
