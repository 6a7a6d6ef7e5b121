#include <doctest.h>

#include <cmath>

#include "generators.hpp"
#include "sectcalc/scalarcalc.hpp"

using namespace sectcalc;

namespace {

Complex oracle(const Function& f, Complex lambda, Complex z) { return 1.0 / (z + f(lambda)); }

RepresentationChoice choiceFor(const Function& f, double q, bool cbf = false) {
  return RepresentationChoice{q, chooseForm(f), cbf};
}

}  // namespace

TEST_CASE("scalar resolvent examples") {
  const Function id = Function::identity();
  auto r = scalarResolvent(id, {3.0, RepForm::AtZero, false}, 1.0, 1.0);
  CHECK(r.converged);
  CHECK(std::abs(r.value - 0.5) < 1e-10);

  auto l = scalarResolvent(Function::log1p(), {2.0, RepForm::AtZero, true}, 1.0, 1.0);
  CHECK(l.converged);
  CHECK(std::abs(l.value - 1 / (1 + std::log(2.0))) < 1e-9);
  CHECK(std::abs(l.value - 0.59061) < 1e-5);

  auto p = scalarResolvent(Function::power(0.5), {3.0, RepForm::AtZero, false}, 4.0, 1.0);
  CHECK(std::abs(p.value - 1.0 / 3) < 1e-10);
}

TEST_CASE("form selection follows the limits") {
  CHECK(chooseForm(Function::identity()) == RepForm::AtZero);
  CHECK(chooseForm(Function::log1p()) == RepForm::AtZero);
  CHECK(chooseForm(Function::oneMinusExp()) == RepForm::AtInfinity);
  CHECK(chooseForm(Function::exampleG(1.0)) == RepForm::AtInfinity);
  // z + 1/z: both limits infinite
  const Function both = Function::sum({Function::identity(), Function::reciprocal(Function::identity())});
  CHECK(chooseForm(both) == RepForm::AtInfinity);
  const Function dyadic = Function::fromCauchyMeasure(CauchyTriple{0.0, 0.0, dyadicCauchyMeasure()});
  CHECK_FALSE(dyadic.limits().atZero.isDetermined());
  CHECK_THROWS_AS((RepresentationChoice{3.0, RepForm::AtZero, false}.validate(dyadic)), HypothesisError);
}

TEST_CASE("parameter checks") {
  const Function f = Function::identity();
  CHECK_THROWS_AS(scalarResolvent(f, {2.0, RepForm::AtZero, false}, 1.0, 1.0), InputError);
  CHECK_THROWS_AS(scalarResolvent(Function::oneMinusExp(), {1.5, RepForm::AtZero, true}, 1.0, 1.0), HypothesisError);
  CHECK_THROWS_AS(scalarResolvent(f, {3.0, RepForm::AtZero, false}, std::polar(1.0, 1.1), 1.0), InputError);
  CHECK_THROWS_AS(scalarResolvent(f, {3.0, RepForm::AtZero, false}, 1.0, std::polar(1.0, 2.2)), InputError);
  try {
    scalarResolvent(f, {3.0, RepForm::AtZero, false}, 1.0, -1.0);
    FAIL("no throw");
  } catch (const InputError& e) {
    CHECK(e.pointer() == "/z");
  }
  const Function raw = Function::raw("z", [](Complex z) { return z; });
  CHECK_THROWS_AS(scalarResolvent(raw, {3.0, RepForm::AtZero, false}, 1.0, 1.0), HypothesisError);
  CHECK(defaultQ(0.0) == 2.5);
  CHECK(defaultQ(2.5) == doctest::Approx(kPi / (kPi - 2.5) + 0.1));
}

TEST_CASE("representation matches the direct resolvent across the catalog") {
  auto g = gen::rng(11);
  const double q = 3.0;
  for (const auto& [name, f] : acceptanceCatalog()) {
    CAPTURE(name);
    const RepresentationChoice c = choiceFor(f, q);
    for (int i = 0; i < 50; ++i) {
      const Complex lambda = gen::inSector(g, kPi / q, 1e-2, 1e2, gen::uniform(g, 0.9, 0.95));
      const Complex z = gen::inSector(g, kPi - kPi / q, 1e-2, 1e2, gen::uniform(g, 0.9, 0.95));
      const auto r = scalarResolvent(f, c, lambda, z);
      const Complex want = oracle(f, lambda, z);
      CAPTURE(lambda);
      CAPTURE(z);
      CHECK(r.converged);
      CHECK(std::abs(r.value - want) <= 1e-7 * (1 + std::abs(want)));
      CHECK(r.denominatorViolations == 0);
      CHECK(r.denominatorChecks > 0);
    }
  }
}

TEST_CASE("complete Bernstein mode reaches q below 2") {
  auto g = gen::rng(5);
  for (double q : {1.25, 1.5, 2.0}) {
    for (int i = 0; i < 10; ++i) {
      const Complex lambda = gen::inSector(g, kPi / q, 1e-2, 1e2, 0.9);
      const Complex z = gen::inSector(g, kPi - kPi / q, 1e-2, 1e2, 0.9);
      for (const Function& f : {Function::log1p(), Function::power(0.5)}) {
        const auto r = scalarResolvent(f, RepresentationChoice{q, RepForm::AtZero, true}, lambda, z);
        CHECK(std::abs(r.value - oracle(f, lambda, z)) <= 1e-7 * (1 + std::abs(oracle(f, lambda, z))));
      }
    }
  }
}

TEST_CASE("result does not depend on q") {
  const Function f = Function::oneMinusExp();
  Complex prev;
  bool first = true;
  for (double q : {2.5, 3.0, 4.0}) {
    const auto r = scalarResolvent(f, choiceFor(f, q), 1.0, 1.0);
    CHECK(r.converged);
    if (!first) CHECK(std::abs(r.value - prev) <= 1e-7);
    prev = r.value;
    first = false;
  }
  CHECK(std::abs(prev - 1 / (2 - std::exp(-1.0))) < 1e-9);
}

TEST_CASE("both forms agree when both limits are finite") {
  auto g = gen::rng(3);
  for (const Function& f : {Function::exampleG(1.0), Function::oneMinusExp(), Function::cauchyAtom(1.0),
                            Function::moebiusSeries({0.0, 1.0})}) {
    for (int i = 0; i < 10; ++i) {
      const Complex lambda = gen::inSector(g, kPi / 3, 1e-2, 1e2, 0.9);
      const Complex z = gen::inSector(g, 2 * kPi / 3, 1e-2, 1e2, 0.9);
      const auto a = scalarResolvent(f, {3.0, RepForm::AtInfinity, false}, lambda, z);
      const auto b = scalarResolvent(f, {3.0, RepForm::AtZero, false}, lambda, z);
      CHECK(std::abs(a.value - b.value) <= 1e-7 * (1 + std::abs(a.value)));
    }
  }
}

TEST_CASE("J integral examples") {
  auto a = jIntegral(Function::identity(), kPi / 6, 1.0);
  CHECK(a.converged);
  CHECK(a.value == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(jIntegral(Function::identity(), kPi / 6, 2.0).value == doctest::Approx(0.25).epsilon(1e-9));
  auto b = jIntegral(Function::oneMinusExp(), kPi / 4, 1.0);
  CHECK(b.converged);
  CHECK(b.value > 0);
  CHECK(b.value <= 1.0);
  CHECK(b.trace.empty());
  // sin(theta) int_0^oo dt/(r+t)^2 for several r
  for (double r : {1e-3, 0.3, 10.0, 1e3})
    CHECK(jIntegral(Function::identity(), kPi / 3, r).value == doctest::Approx(std::sin(kPi / 3) / r).epsilon(1e-8));
}

TEST_CASE("J integral of a logarithmically growing function reports a trace") {
  auto j = jIntegral(Function::log1p(), kPi / 4, 1.0);
  CHECK_FALSE(j.converged);
  REQUIRE(j.trace.size() >= 5);
  for (std::size_t i = 1; i < j.trace.size(); ++i) CHECK(j.trace[i].second >= j.trace[i - 1].second);
  CHECK(j.trace.back().second <= j.value + j.errEstimate);
}

TEST_CASE("closed forms for log(1+z)") {
  const auto one = log1pClosedForm(1.0, 1.0);
  const double want = 1 / (1 + std::log(2.0));
  CHECK(one.tForm.converged);
  CHECK(one.sForm.converged);
  CHECK(std::abs(one.tForm.value - want) < 1e-9);
  CHECK(std::abs(one.sForm.value - want) < 1e-9);
  CHECK(std::abs(one.tForm.value - 0.59061) < 1e-5);

  const auto small = log1pClosedForm(1.0, 1e-9);
  CHECK(std::abs(small.tForm.value - 1.0) < 1e-7);
  CHECK(std::abs(small.sForm.value - 1.0) < 1e-7);

  const Complex z(2, 1), lam(1, 1);
  const auto c = log1pClosedForm(z, lam);
  const Complex w = 1.0 / (z + std::log(1.0 + lam));
  CHECK(std::abs(c.tForm.value - w) < 1e-9);
  CHECK(std::abs(c.sForm.value - w) < 1e-9);

  auto g = gen::rng(8);
  for (int i = 0; i < 20; ++i) {
    const Complex zz = gen::inSector(g, kPi / 2, 1e-2, 1e2, 0.95), ll = gen::inSector(g, kPi / 2, 1e-2, 1e2, 0.95);
    const auto r = log1pClosedForm(zz, ll);
    const Complex want2 = 1.0 / (zz + std::log(1.0 + ll));
    CHECK(std::abs(r.tForm.value - want2) <= 1e-8 * (1 + std::abs(want2)));
    CHECK(std::abs(r.sForm.value - want2) <= 1e-8 * (1 + std::abs(want2)));
  }
}
