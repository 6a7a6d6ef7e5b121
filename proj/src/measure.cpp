#include "sectcalc/measure.hpp"

#include <cmath>
#include <string>

namespace sectcalc {

namespace {

void checkDensity(const DensityPiece& d) {
  if (!(d.c > 0) || !std::isfinite(d.c)) throw InputError("density coefficient must be positive", "/density/params/c");
  if (!std::isfinite(d.p)) throw InputError("density exponent must be finite", "/density/params/p");
  if (!(d.rate >= 0) || !std::isfinite(d.rate)) throw InputError("density rate must be >= 0", "/density/params/rate");
  if (!(d.lo >= 0) || !std::isfinite(d.lo)) throw InputError("density support must start at lo >= 0", "/density/params/lo");
  if (!(d.hi > d.lo)) throw InputError("density support needs hi > lo", "/density/params/hi");
  if (d.touchesZero() && d.sing0 != d.p)
    throw InputError("declared sing0 does not match the density exponent at 0", "/density/sing0");
  if (d.reachesInfinity() && d.rate == 0 && d.singInf != d.p)
    throw InputError("declared singInf does not match the density exponent at infinity", "/density/singInf");
}

// Rejects a triple whose measure fails the order test for the given kernel,
// then confirms the moment numerically.
void checkMoment(const MeasureSpec& m, KernelOrders k, const char* what, const QuadratureConfig& cfg) {
  if (!m.densityIntegrable(k)) throw InputError(std::string(what) + ": moment condition fails", "/params/measure/density");
  auto kernel = [k](double s) { return std::pow(s, k.at0) / (1.0 + std::pow(s, k.at0 - k.atInf)); };
  auto r = m.integrate(kernel, k, cfg);
  if (!r.converged || !std::isfinite(r.value))
    throw InputError(std::string(what) + ": moment integral did not converge", "/params/measure/density");
}

}  // namespace

MeasureSpec::MeasureSpec(std::vector<Atom> atoms, std::optional<DensityPiece> density)
    : atoms_(std::move(atoms)), density_(std::move(density)) {
  for (std::size_t i = 0; i < atoms_.size(); ++i) {
    const std::string ptr = "/atoms/" + std::to_string(i);
    if (!(atoms_[i].s > 0) || !std::isfinite(atoms_[i].s)) throw InputError("atom location must be > 0", ptr + "/s");
    if (!(atoms_[i].w > 0) || !std::isfinite(atoms_[i].w)) throw InputError("atom weight must be > 0", ptr + "/w");
  }
  if (density_) checkDensity(*density_);
}

bool MeasureSpec::densityIntegrable(KernelOrders k) const {
  if (!density_) return true;
  const DensityPiece& d = *density_;
  if (d.touchesZero() && !(d.sing0 + k.at0 > -1.0)) return false;
  if (d.reachesInfinity() && d.rate == 0 && !(d.singInf + k.atInf < -1.0)) return false;
  return true;
}

double MeasureSpec::totalMass(const QuadratureConfig& cfg) const {
  if (!densityIntegrable({0.0, 0.0})) return kInf;
  auto r = integrate([](double) { return 1.0; }, {0.0, 0.0}, cfg);
  return r.value;
}

void validate(const LevyTriple& t, const QuadratureConfig& cfg) {
  if (!(t.a >= 0) || !(t.b >= 0)) throw InputError("Levy triple needs a, b >= 0", "/params");
  // int s / (1 + s) mu(ds) < oo
  if (!t.mu.empty()) checkMoment(t.mu, {1.0, 0.0}, "Levy measure", cfg);
}

void validate(const StieltjesTriple& t, const QuadratureConfig& cfg) {
  if (!(t.a >= 0) || !(t.b >= 0)) throw InputError("Stieltjes triple needs a, b >= 0", "/params");
  // int nu(ds) / (1 + s) < oo
  if (!t.nu.empty()) checkMoment(t.nu, {0.0, -1.0}, "Stieltjes measure", cfg);
}

void validate(const CauchyTriple& t, const QuadratureConfig& cfg) {
  if (!(t.a >= 0) || !(t.b >= 0)) throw InputError("Cauchy triple needs a, b >= 0", "/params");
  if (!t.mu.empty()) checkMoment(t.mu, {0.0, 0.0}, "Cauchy measure", cfg);
}

void validate(const ProbabilityMeasure& m, const QuadratureConfig& cfg) {
  if (!(m.massAtZero >= 0)) throw InputError("mass at zero must be >= 0", "/measure/massAtZero");
  const double total = m.massAtZero + m.mu.totalMass(cfg);
  if (!(std::abs(total - 1.0) <= 1e-8)) throw InputError("measure must have total mass 1", "/measure");
}

LevyTriple levyFromStieltjes(const StieltjesTriple& t) {
  LevyTriple out;
  out.a = t.a;
  out.b = t.b;
  // An atom w at r gives the Levy density w r e^{-r s}; only one density piece
  // is representable, so several atoms or an atom plus a density are refused.
  const auto& atoms = t.nu.atoms();
  const auto& dens = t.nu.density();
  if (atoms.size() + (dens ? 1 : 0) > 1)
    throw InputError("Stieltjes to Levy conversion supports a single atom or a single density piece");
  if (atoms.size() == 1) {
    out.mu = MeasureSpec({}, powerExpDensity(atoms[0].w * atoms[0].s, 0.0, atoms[0].s));
    return out;
  }
  if (!dens) return out;
  const DensityPiece& d = *dens;
  if (d.rate != 0 || !d.reachesInfinity())
    throw InputError("Stieltjes to Levy conversion needs a rate-free density reaching infinity");
  if (d.touchesZero()) {
    // int_0^oo e^{-sr} r^{p+1} dr = Gamma(p+2) s^{-p-2}
    if (!(d.p + 2 > 0)) throw InputError("Stieltjes density too singular at 0");
    out.mu = MeasureSpec({}, powerDensity(d.c * std::tgamma(d.p + 2), -d.p - 2));
    return out;
  }
  if (d.p != -1.0) throw InputError("Stieltjes to Levy conversion on [lo, oo) supports only r^-1 densities");
  // int_lo^oo e^{-sr} dr = e^{-lo s} / s
  out.mu = MeasureSpec({}, powerExpDensity(d.c, -1.0, d.lo));
  return out;
}

DensityPiece powerDensity(double c, double p, double lo, double hi) {
  return powerExpDensity(c, p, 0.0, lo, hi);
}

DensityPiece powerExpDensity(double c, double p, double rate, double lo, double hi) {
  DensityPiece d;
  d.c = c;
  d.p = p;
  d.rate = rate;
  d.lo = lo;
  d.hi = hi;
  d.sing0 = p;
  d.singInf = p;
  return d;
}

}  // namespace sectcalc
