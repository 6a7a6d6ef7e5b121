#include <doctest.h>

#include <cmath>
#include <vector>

#include "sectcalc/classcheck.hpp"
#include "sectcalc/functions.hpp"

using namespace sectcalc;

namespace {

const MarginPoint* findPoint(const ClassReport& rep, const std::string& what, double t, double theta, double r = -1) {
  for (const auto& p : rep.margins)
    if (p.what == what && std::abs(p.t - t) < 1e-12 && std::abs(p.theta - theta) < 1e-12 &&
        (r < 0 || std::abs(p.r - r) < 1e-12))
      return &p;
  return nullptr;
}

GridSpec smallGrid() {
  GridSpec g;
  g.tMin = 1e-2;
  g.tMax = 1e2;
  g.tCount = 5;  // includes t = 1
  g.rMin = 1e-2;
  g.rMax = 1e2;
  g.rCount = 5;
  return g;
}

bool isBernstein(const Function& f) { return f.has(Tag::BF); }

}  // namespace

TEST_CASE("grid validation names the field") {
  GridSpec g;
  g.tMin = 0;
  try {
    g.validate();
    FAIL("no throw");
  } catch (const InputError& e) {
    CHECK(e.pointer() == "/grid/tMin");
  }
  g = GridSpec{};
  g.thetas = {kPi / 4, kPi / 6};
  CHECK_THROWS_AS(g.validate(), InputError);
  g.thetas = {kPi / 2};
  CHECK_THROWS_AS(g.validate(), InputError);
  CHECK_NOTHROW(GridSpec::forCBF().validate(kPi));
  const auto t = GridSpec{}.tGrid();
  CHECK(t.size() == 161);
  CHECK(t.front() == 1e-4);
  CHECK(t.back() == 1e4);
  CHECK(t[80] == doctest::Approx(1.0));
}

TEST_CASE("report verdict follows the worst margin") {
  ClassReport r;
  r.add({"a", 1, 0, 0, 0.5});
  r.add({"b", 2, 0, 0, -1e-9});
  r.finish(1e-8);
  CHECK(r.pass);
  CHECK(r.worstPoint()->what == "b");
  r.add({"c", 3, 0, 0, -2e-8});
  r.finish(1e-8);
  CHECK_FALSE(r.pass);
  CHECK(r.worst == -2e-8);
}

TEST_CASE("NP range examples") {
  const Function h = Function::moebiusSeries({0.0, 1.0});
  CHECK(std::abs(h(1.0) - 1.0) < 1e-15);
  CHECK(checkNPRange(h).pass);

  const auto id = checkNPRange(Function::identity());
  CHECK(id.pass);
  for (const auto& p : id.margins)
    if (p.what == "sector") CHECK(std::abs(p.margin) < 1e-15);  // theta - |arg z| on the ray itself

  const Function neg = Function::raw("-z", [](Complex z) { return -z; });
  const auto rep = checkNPRange(neg);
  CHECK_FALSE(rep.pass);
  CHECK(rep.worstPoint()->margin < -0.5);
}

TEST_CASE("NP range holds across the catalog") {
  for (const auto& [name, f] : acceptanceCatalog()) {
    CAPTURE(name);
    CHECK(checkNPRange(f).pass);
  }
}

TEST_CASE("Brown bounds examples") {
  GridSpec g = smallGrid();
  g.thetas = {kPi / 3};
  const auto rep = checkBrownBounds(Function::power(0.5), g);
  CHECK(rep.pass);
  const auto* lo = findPoint(rep, "lower (r=t)", 1.0, kPi / 3);
  const auto* hi = findPoint(rep, "upper (r=t)", 1.0, kPi / 3);
  REQUIRE(lo);
  REQUIRE(hi);
  CHECK(lo->margin == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(hi->margin == doctest::Approx(1.0).epsilon(1e-12));

  const auto id = checkBrownBounds(Function::identity());
  CHECK(id.pass);
  CHECK(std::abs(id.worst) < 1e-12);  // r = t on the real axis

  CHECK(checkBrownBounds(Function::log1p()).pass);
}

TEST_CASE("Brown bounds catch a function outside the class") {
  // z^2 maps the pi/3 ray outside the right half-plane
  const Function sq = Function::raw("z^2", [](Complex z) { return z * z; });
  CHECK_FALSE(checkBrownBounds(sq).pass);
}

TEST_CASE("complete monotonicity examples") {
  const auto pts = geometricGrid(0.05, 20, 25);
  const Function e = Function::raw("exp(-z)", [](Complex z) { return std::exp(-z); });
  const auto re = checkCompleteMonotone(e, pts);
  CHECK(re.pass);
  CHECK(re.constants.at("unstablePoints") == 0);

  CHECK(checkCompleteMonotone(Function::exampleG(0.0), pts).pass);
  CHECK(checkCompleteMonotone(Function::exampleG(1.0), pts).pass);

  // 1/g_1 = z + 1/(z+2) has f'' = 2/(z+2)^3 > 0, so it is not Bernstein
  const Function inv = Function::reciprocal(Function::exampleG(1.0));
  const auto rb = checkBernsteinDerivatives(inv, pts);
  CHECK_FALSE(rb.pass);
  CHECK(rb.constants.at("firstViolationOrder") == 2);

  // positive but oscillating: caught at the first derivative
  const Function osc = Function::raw("2 + cos z", [](Complex z) { return 2.0 + std::cos(z); });
  const auto ro = checkCompleteMonotone(osc, pts);
  CHECK_FALSE(ro.pass);
  CHECK(ro.constants.at("firstViolationOrder") == 1);
}

TEST_CASE("finite-difference derivatives agree with closed forms") {
  const auto pts = geometricGrid(0.1, 10, 9);
  for (double a : {0.25, 0.5, 0.75}) {
    const Function p = Function::power(a);
    const Function pr = Function::raw("z^a", [a](Complex z) { return std::pow(z, a); });
    const auto closed = checkBernsteinDerivatives(p, pts, 4);
    const auto fd = checkBernsteinDerivatives(pr, pts, 4);
    CHECK(closed.pass);
    CHECK(fd.pass);
    REQUIRE(closed.margins.size() >= fd.margins.size());
    for (std::size_t i = 0; i < fd.margins.size(); ++i)
      CHECK(fd.margins[i].margin == doctest::Approx(closed.margins[i].margin).epsilon(1e-4));
  }
}

TEST_CASE("Bernstein imaginary-part bound") {
  const auto id = checkBernsteinImag(Function::identity());
  CHECK(id.pass);
  CHECK(std::abs(id.worst) < 1e-14);
  CHECK(checkBernsteinImag(Function::oneMinusExp()).pass);
  for (const auto& [name, f] : acceptanceCatalog()) {
    if (!isBernstein(f)) continue;
    CAPTURE(name);
    const auto r = checkBernsteinImag(f);
    CHECK(r.tolerance == defaultTolerance(f));
    CHECK(r.pass);
  }
  const Function levy = Function::fromLevy(LevyTriple{0.0, 0.0, MeasureSpec({{1.0, 1.0}})});
  const auto rl = checkBernsteinImag(levy);
  CHECK(rl.tolerance == 1e-6);
  CHECK(rl.pass);
}

TEST_CASE("product of Bernstein functions") {
  const auto one = checkProductBound({Function::identity()});
  CHECK(one.pass);
  CHECK(std::abs(one.worst) < 1e-14);

  const auto halves = checkProductBound({Function::power(0.5), Function::power(0.5)});
  CHECK(halves.pass);
  // bound t sin/cos^2 against t sin: margin 1 - cos^2 = sin^2
  for (const auto& p : halves.margins)
    CHECK(p.margin == doctest::Approx(std::pow(std::sin(p.theta), 2)).epsilon(1e-10));

  CHECK(checkProductBound({Function::identity(), Function::oneMinusExp()}).pass);

  // z^{1/2} (1 - e^{-z})^{1/2}: the n = 2 bound must hold; the single-factor
  // bound is tested for a witness, which may or may not exist on the grid.
  const auto pr = checkProductBound({Function::power(0.5), Function::powerOf(0.5, Function::oneMinusExp())});
  CHECK(pr.pass);
  const auto single = checkBernsteinImag(sqrtTimesSqrtOneMinusExp());
  if (!single.pass) {
    const auto* w = single.worstPoint();
    MESSAGE("single-factor bound violated at t=" << w->t << " theta=" << w->theta << " margin=" << w->margin);
  } else {
    MESSAGE("single-factor bound not falsified on the default grid (inconclusive)");
  }
}

TEST_CASE("complete Bernstein bounds") {
  GridSpec g = smallGrid();
  g.thetas = {kPi / 2};
  const auto rep = checkCBFImag(Function::log1p(), g);
  CHECK(rep.pass);
  const auto* p = findPoint(rep, "imag", 1.0, kPi / 2);
  REQUIRE(p);
  CHECK(p->margin == doctest::Approx(1 - kPi / 4).epsilon(1e-12));
  CHECK(p->margin == doctest::Approx(0.2146).epsilon(1e-4));

  CHECK(checkCBFImag(Function::log1p()).pass);
  CHECK(checkCBFImag(Function::power(0.5)).pass);
  const Function st = Function::fromStieltjes(StieltjesTriple{0.0, 1.0, MeasureSpec()});
  const auto rs = checkCBFImag(st, g);
  CHECK(rs.pass);
  CHECK(findPoint(rs, "imag", 1.0, kPi / 2)->margin == doctest::Approx(0.5).epsilon(1e-9));

  // Power(1/2) near theta = 0: both sides vanish
  GridSpec thin = smallGrid();
  thin.thetas = {1e-6};
  const auto rt = checkCBFImag(Function::power(0.5), thin);
  CHECK(rt.pass);
  CHECK(std::abs(findPoint(rt, "imag", 1.0, 1e-6)->margin) < 1e-6);
}

TEST_CASE("Bernstein envelope") {
  CHECK(bernsteinEnvelope(kPi / 6) == doctest::Approx(1 / std::cos(kPi / 6)));
  CHECK(bernsteinEnvelope(1.5) == doctest::Approx(2 * std::exp(1.0) / (std::exp(1.0) - 1)));
  for (const auto& [name, f] : acceptanceCatalog()) {
    if (!isBernstein(f)) continue;
    CAPTURE(name);
    CHECK(checkBernsteinEnvelope(f).pass);
  }
}

TEST_CASE("D conditions: identity") {
  for (double th : {kPi / 6, kPi / 4, kPi / 3}) {
    const auto d = checkDClass(Function::identity(), {th});
    for (DCondition c : {DCondition::ZeroPlus, DCondition::InfPlus}) {
      const auto* r = d.find(c, th);
      REQUIRE(r);
      CHECK(r->pass);
      CHECK(r->b == 1.0);
      CHECK(r->c == doctest::Approx(std::sin(th)).epsilon(1e-12));
    }
    CHECK_FALSE(d.find(DCondition::ZeroMinus, th)->pass);
    CHECK(d.report.pass);
    CHECK(kappaFromDCondition(DCondition::ZeroPlus, 1.0, std::sin(th)) == doctest::Approx(std::sin(th)));
  }
}

TEST_CASE("D conditions: example g_1 and the Cauchy atom") {
  const double th = kPi / 4;
  const Function g = Function::exampleG(1.0);
  for (DCondition c : {DCondition::ZeroMinus, DCondition::InfMinus}) {
    const auto r = verifyDCondition(g, th, c, std::cos(th), std::sin(th));
    CAPTURE(dConditionName(c));
    CHECK(r.pass);
    if (c == DCondition::ZeroMinus) CHECK(std::isinf(r.a));
  }
  const auto dg = checkDClass(g, {th});
  CHECK(dg.find(DCondition::ZeroMinus, th)->pass);
  CHECK(dg.find(DCondition::InfMinus, th)->pass);
  CHECK(dg.find(DCondition::ZeroMinus, th)->c <= std::sin(th) * (1 + 1e-8));

  const auto dc = checkDClass(Function::cauchyAtom(1.0), {th});
  CHECK(dc.find(DCondition::ZeroPlus, th)->pass);
  CHECK(dc.find(DCondition::InfMinus, th)->pass);
  CHECK(std::isfinite(dc.find(DCondition::ZeroPlus, th)->a));  // increasing only up to s
  CHECK(dc.report.pass);
}

TEST_CASE("completely monotone NP functions satisfy both decreasing conditions at (cos, sin)") {
  const std::vector<Function> cm = {Function::exampleG(1.0), Function::exampleG(0.0), Function::exampleG(3.0),
                                    Function::reciprocal(Function::identity())};
  for (const auto& f : cm) {
    REQUIRE(f.has(Tag::CM));
    for (double th : {kPi / 6, kPi / 4, kPi / 3}) {
      CAPTURE(f.describe());
      CAPTURE(th);
      CHECK(verifyDCondition(f, th, DCondition::ZeroMinus, std::cos(th), std::sin(th)).pass);
      CHECK(verifyDCondition(f, th, DCondition::InfMinus, std::cos(th), std::sin(th)).pass);
    }
  }
}

TEST_CASE("a wrong constant is rejected") {
  const auto r = verifyDCondition(Function::identity(), kPi / 4, DCondition::ZeroPlus, 1.0, 0.5);
  CHECK_FALSE(r.pass);
  CHECK_THROWS_AS(verifyDCondition(Function::identity(), kPi / 2, DCondition::ZeroPlus, 1.0, 1.0), InputError);
}

TEST_CASE("kappa examples") {
  GridSpec g;
  g.rCount = 25;
  const auto id = estimateKappa(Function::identity(), kPi / 4, g);
  CHECK(id.converged);
  CHECK(id.stable);
  CHECK(id.report.pass);
  CHECK(id.kappa == doctest::Approx(std::sin(kPi / 4)).epsilon(1e-8));
  for (double v : id.rJ) CHECK(v == doctest::Approx(std::sin(kPi / 4)).epsilon(1e-8));

  const auto inv = estimateKappa(Function::reciprocal(Function::identity()), kPi / 4, g);
  CHECK(inv.converged);
  CHECK(inv.kappa == doctest::Approx(0.7071).epsilon(1e-4));

  const auto ome = estimateKappa(Function::oneMinusExp(), kPi / 4, g);
  CHECK(ome.converged);
  CHECK(ome.kappa <= 1 + 1e-6);
}

TEST_CASE("kappa of Bernstein functions at pi/q is at most tan(pi/q)") {
  GridSpec g;
  g.rCount = 25;
  for (const auto& [name, f] : acceptanceCatalog()) {
    if (!isBernstein(f)) continue;
    for (int q : {3, 4, 6}) {
      CAPTURE(name);
      CAPTURE(q);
      const auto k = estimateKappa(f, kPi / q, g);
      CHECK(k.kappa <= std::tan(kPi / q) + 1e-6);
      // logarithmic growth leaves a tail past t = e^700 that doubles cannot reach
      if (f.kind() != NodeKind::Log1p) CHECK(k.converged);
    }
  }
}

TEST_CASE("D conditions bound kappa") {
  GridSpec g;
  g.rCount = 25;
  const double th = kPi / 4;
  for (const auto& [name, f] : acceptanceCatalog()) {
    const auto d = checkDClass(f, {th});
    bool zero = false, inf = false;
    double bound = kInf;
    for (const auto& r : d.results) {
      if (!r.pass) continue;
      const bool atZ = r.condition == DCondition::ZeroPlus || r.condition == DCondition::ZeroMinus;
      (atZ ? zero : inf) = true;
      if (atZ && std::isinf(r.a)) bound = std::min(bound, kappaFromDCondition(r.condition, r.b, r.c));
    }
    if (!(zero && inf)) continue;
    CAPTURE(name);
    const auto k = estimateKappa(f, th, g);
    CHECK(std::isfinite(k.kappa));
    if (f.kind() != NodeKind::Log1p) {
      CHECK(k.converged);
      CHECK(k.stable);
    }
    if (std::isfinite(bound)) CHECK(k.kappa <= bound * (1 + 1e-6));
  }
}

TEST_CASE("functions with a stable kappa have determined limits") {
  GridSpec g;
  g.rCount = 25;
  for (const auto& [name, f] : acceptanceCatalog()) {
    const auto k = estimateKappa(f, kPi / 4, g);
    if (!(k.converged && k.stable)) continue;
    CAPTURE(name);
    CHECK(f.limits().atZero.isDetermined());
    CHECK(f.limits().atInfinity.isDetermined());
  }
}

TEST_CASE("spherical integral") {
  GridSpec g;
  g.rCount = 13;
  QuadratureConfig q;
  q.relTol = 1e-8;
  // f = z: the integral is pi theta for every r
  for (double th : {0.05, kPi / 4}) {
    const auto s = checkSphericalS(Function::identity(), th, g, q);
    CHECK(s.converged);
    CHECK(s.report.pass);
    for (double v : s.integral) CHECK(v == doctest::Approx(kPi * th).epsilon(1e-6));
  }
  for (const auto& [name, f] : acceptanceCatalog()) {
    if (!isBernstein(f)) continue;
    CAPTURE(name);
    const auto s = checkSphericalS(f, kPi / 4, g, q);
    if (f.kind() == NodeKind::Log1p) {
      // the cut tail past t = e^700 keeps it from converging; the chain still holds
      CHECK_FALSE(s.converged);
      CHECK(s.report.worst >= -s.report.tolerance);
    } else {
      CHECK(s.report.pass);
    }
    CHECK(s.supremum <= kPi / std::cos(kPi / 4) + 1e-6);
  }
  CHECK(checkSphericalS(Function::power(0.5), kPi / 3, g, q).report.pass);
}
