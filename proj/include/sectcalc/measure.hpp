#pragma once

#include <optional>
#include <vector>

#include "sectcalc/quad.hpp"
#include "sectcalc/types.hpp"

namespace sectcalc {

struct Atom {
  double s;  // location, > 0
  double w;  // weight, > 0
};

// Density c * s^p * exp(-rate * s) supported on [lo, hi]. sing0 and singInf are
// the declared exponents of the density at 0 and at oo; they must agree with
// p whenever the support touches that end (singInf is ignored if rate > 0).
struct DensityPiece {
  double c = 1.0;
  double p = 0.0;
  double rate = 0.0;
  double lo = 0.0;
  double hi = kInf;
  double sing0 = 0.0;
  double singInf = 0.0;

  double operator()(double s) const {
    if (s < lo || s > hi) return 0.0;
    return c * std::pow(s, p) * std::exp(-rate * s);
  }
  bool touchesZero() const { return lo == 0.0; }
  bool reachesInfinity() const { return hi == kInf; }
};

// Power-law behaviour of an integration kernel k(s): k ~ s^at0 near 0 and
// k ~ s^atInf near oo. Used with the density exponents to pick the
// substitution and to reject divergent integrals up front.
struct KernelOrders {
  double at0 = 0.0;
  double atInf = 0.0;
};

class MeasureSpec {
 public:
  MeasureSpec() = default;
  MeasureSpec(std::vector<Atom> atoms, std::optional<DensityPiece> density = std::nullopt);

  const std::vector<Atom>& atoms() const { return atoms_; }
  const std::optional<DensityPiece>& density() const { return density_; }
  bool empty() const { return atoms_.empty() && !density_; }

  // True when the density part of int k dmu converges for a kernel with the
  // given orders. Atoms always contribute finitely.
  bool densityIntegrable(KernelOrders k) const;

  // int k(s) mu(ds). Throws QuadratureError if the density part diverges by
  // order or fails to converge.
  template <typename K>
  auto integrate(const K& kernel, KernelOrders orders, const QuadratureConfig& cfg = {}) const;

  // Total mass; +oo when the density is not integrable.
  double totalMass(const QuadratureConfig& cfg = {}) const;

 private:
  std::vector<Atom> atoms_;
  std::optional<DensityPiece> density_;
};

// a + b t + int (1 - e^{-ts}) mu(ds)
struct LevyTriple {
  double a = 0.0;
  double b = 0.0;
  MeasureSpec mu;
};

// a + b t + int t / (t + s) nu(ds)
struct StieltjesTriple {
  double a = 0.0;
  double b = 0.0;
  MeasureSpec nu;
};

// a z + b / z + 2 z int (1 + s^2) / (s^2 + z^2) mu(ds), with mu finite.
struct CauchyTriple {
  double a = 0.0;
  double b = 0.0;
  MeasureSpec mu;
};

// Probability measure on [0, oo): an optional atom at 0 plus mu on (0, oo).
struct ProbabilityMeasure {
  double massAtZero = 0.0;
  MeasureSpec mu;
};

void validate(const LevyTriple& t, const QuadratureConfig& cfg = {});
void validate(const StieltjesTriple& t, const QuadratureConfig& cfg = {});
void validate(const CauchyTriple& t, const QuadratureConfig& cfg = {});
void validate(const ProbabilityMeasure& m, const QuadratureConfig& cfg = {});

// Levy triple of a complete Bernstein function given by its Stieltjes triple.
// The Levy density is int e^{-s r} r nu(dr); supported for atoms and for
// density pieces that are pure powers on (0, oo) or r^{-1} on [lo, oo).
LevyTriple levyFromStieltjes(const StieltjesTriple& t);

// Density builders that fill in the declared exponents.
DensityPiece powerDensity(double c, double p, double lo = 0.0, double hi = kInf);
DensityPiece powerExpDensity(double c, double p, double rate, double lo = 0.0, double hi = kInf);

template <typename K>
auto MeasureSpec::integrate(const K& kernel, KernelOrders orders, const QuadratureConfig& cfg) const {
  using V = std::decay_t<decltype(kernel(1.0))>;
  IntegralResult<V> out;
  out.converged = true;
  std::optional<V> acc;
  auto accumulate = [&acc](V term) {
    if (acc) *acc += term;
    else acc = std::move(term);
  };
  for (const Atom& a : atoms_) accumulate(V(kernel(a.s) * a.w));
  if (density_) {
    if (!densityIntegrable(orders)) throw QuadratureError("measure integral diverges for this kernel");
    const DensityPiece& d = *density_;
    auto g = [&](double s) { return V(kernel(s) * d(s)); };
    const double order0 = d.sing0 + orders.at0 + 1.0;
    const double orderInf = d.rate > 0 ? 4.0 : -(d.singInf + orders.atInf) - 1.0;
    IntegralResult<V> r;
    if (d.touchesZero() && d.reachesInfinity()) {
      r = integrateHalfLine(g, HalfLineOrders{order0, orderInf, 0.0}, cfg);
    } else if (d.reachesInfinity()) {
      r = integrateToInfinity(g, d.lo, orderInf, cfg);
    } else if (d.touchesZero()) {
      r = integrateFromZero(g, d.hi, order0, cfg);
    } else {
      r = integrateInterval(g, d.lo, d.hi, cfg);
    }
    accumulate(std::move(r.value));
    out.errEstimate = r.errEstimate;
    out.panels = r.panels;
    out.evaluations = r.evaluations;
    out.converged = r.converged;
  }
  if (acc) {
    out.value = std::move(*acc);
  } else if constexpr (std::is_arithmetic_v<V> || std::is_same_v<V, Complex>) {
    out.value = V(0.0);
  } else {
    throw InputError("integral against an empty measure has no shape");
  }
  return out;
}

}  // namespace sectcalc
