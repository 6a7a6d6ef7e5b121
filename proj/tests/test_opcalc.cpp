#include <doctest.h>

#include <cmath>

#include "generators.hpp"
#include "sectcalc/opcalc.hpp"

using namespace sectcalc;

namespace {

CMatrix diag(std::initializer_list<Complex> d) {
  CVector v(d.size());
  int i = 0;
  for (Complex x : d) v(i++) = x;
  return v.asDiagonal();
}

CMatrix mat2(Complex a, Complex b, Complex c, Complex d) {
  CMatrix m(2, 2);
  m << a, b, c, d;
  return m;
}

CMatrix eye(int n) { return CMatrix::Identity(n, n); }

ProbabilityMeasure dirac(double t0) { return ProbabilityMeasure{0.0, MeasureSpec({{t0, 1.0}})}; }
ProbabilityMeasure exponential() { return ProbabilityMeasure{0.0, MeasureSpec({}, powerExpDensity(1.0, 0.0, 1.0))}; }

}  // namespace

TEST_CASE("operator resolvent examples") {
  auto id = certifySectorial(eye(3), 0.0);
  for (const auto& [name, f] : acceptanceCatalog()) {
    CAPTURE(name);
    auto r = operatorResolvent(f, id, 1.0);
    CHECK(r.converged);
    CHECK(gen::relErr(r.value, CMatrix(eye(3) / (1.0 + f(1.0)))) < 1e-9);
  }

  auto s = certifySectorial(diag({1.0, 4.0}), 0.0);
  OperatorRepChoice c;
  c.q = 3;
  c.form = chooseForm(Function::power(0.5));
  auto p = operatorResolvent(Function::power(0.5), s, 1.0, c);
  CHECK(gen::relErr(p.value, diag({0.5, 1.0 / 3})) < 1e-9);

  auto s2 = certifySectorial(diag({1.0, std::exp(1.0) - 1}), 0.0);
  OperatorRepChoice cb;
  cb.q = 2;
  cb.mode = OpMode::Cbf;
  cb.form = chooseForm(Function::log1p());
  auto l = operatorResolvent(Function::log1p(), s2, 1.0, cb);
  CHECK(gen::relErr(l.value, diag({1 / (1 + std::log(2.0)), 0.5})) < 1e-9);
}

TEST_CASE("q choice prefers integers") {
  CHECK(pickQ(OpMode::General, 0.0, 0.0) == 3.0);
  CHECK(pickQ(OpMode::General, kPi / 5, 2 * kPi / 3) == 4.0);
  CHECK(pickQ(OpMode::Cbf, 0.0, 0.0) == 2.0);
  // (2, 2.2): no integer, midpoint
  CHECK(pickQ(OpMode::General, kPi / 2.2, 0.1) == doctest::Approx(2.1));
  CHECK_THROWS_AS(pickQ(OpMode::General, kPi / 2.5, 2.0), HypothesisError);
}

TEST_CASE("operator resolvent matches the eigen oracle on normal matrices") {
  auto g = gen::rng(31);
  const std::vector<NamedFunction> cat = acceptanceCatalog();
  for (int k = 0; k < 4; ++k) {
    const int n = 2 + 5 * k;
    auto s = certifySectorial(gen::normalInSector(g, n, kPi / 5), kPi / 5);
    for (const auto& [name, f] : cat) {
      const Complex z = gen::inSector(g, kPi / 2, 1e-2, 1e2, 0.95);
      CAPTURE(name);
      CAPTURE(n);
      CAPTURE(z);
      auto r = operatorResolvent(f, s, z);
      CHECK(r.converged);
      CHECK(gen::relErr(r.value, resolventOracle(f, s.A, z)) < 1e-6);
    }
  }
}

TEST_CASE("operator resolvent on a non-normal matrix") {
  auto s = certifySectorial(mat2(1, 3, 0, 2), 0.0);
  CHECK_FALSE(s.schur.diagonal);
  for (const Function& f : {Function::power(0.5), Function::log1p(), Function::exampleG(1.0)}) {
    const Complex z(0.7, 0.4);
    auto r = operatorResolvent(f, s, z);
    CHECK(gen::relErr(r.value, resolventOracle(f, s.A, z)) < 1e-8);
    OperatorRepChoice c = r.choice;
    c.q = 2.5;
    c.qStrategy = QStrategy::Explicit;
    CHECK(gen::relErr(operatorResolvent(f, s, z, c).value, r.value) < 1e-8);
  }
}

TEST_CASE("commutation and the resolvent identity in z") {
  auto g = gen::rng(5);
  auto s = certifySectorial(gen::normalInSector(g, 6, kPi / 5), kPi / 5);
  const CMatrix r1 = resolventSolve(s.A, Complex(1.0));
  for (const Function& f : {Function::oneMinusExp(), Function::cauchyAtom(1.0), Function::power(0.75)}) {
    for (int i = 0; i < 3; ++i) {
      const Complex z = gen::inSector(g, kPi / 2, 0.1, 10), w = gen::inSector(g, kPi / 2, 0.1, 10);
      const CMatrix rz = operatorResolvent(f, s, z).value, rw = operatorResolvent(f, s, w).value;
      CHECK((rz * r1 - r1 * rz).norm() <= 1e-9 * rz.norm() * r1.norm());
      CHECK((rz - rw - (w - z) * rz * rw).norm() <= 1e-8 * (1 + rz.norm() * rw.norm()));
    }
  }
}

TEST_CASE("q-independence of the operator resolvent") {
  auto g = gen::rng(6);
  auto s = certifySectorial(gen::normalInSector(g, 5, kPi / 6), kPi / 6);
  const Function f = Function::oneMinusExp();
  OperatorRepChoice c;
  c.form = chooseForm(f);
  c.qStrategy = QStrategy::Explicit;
  CMatrix prev;
  for (double q : {2.5, 3.0, 4.0, 5.5}) {
    c.q = q;
    const CMatrix r = operatorResolvent(f, s, 1.0, c).value;
    if (prev.size()) CHECK(gen::relErr(r, prev) < 1e-8);
    prev = r;
  }
}

TEST_CASE("hypothesis checks follow the injective / Bernstein split") {
  auto s0 = certifySectorial(diag({0.0, 1.0}), 0.0);
  CHECK_THROWS_AS(operatorResolvent(Function::exampleG(1.0), s0, 1.0), HypothesisError);
  // Bernstein function on a non-injective matrix goes straight through
  // all three vanish at 0+
  for (const Function& f : {Function::log1p(), Function::oneMinusExp(), Function::power(0.5)}) {
    auto r = operatorResolvent(f, s0, Complex(1, 0.5));
    CHECK(gen::relErr(r.value, diag({1.0 / Complex(1, 0.5), 1.0 / (Complex(1, 0.5) + f(1.0))})) < 1e-8);
  }
  auto wide = certifySectorial(diag({std::polar(1.0, 0.6 * kPi)}), 0.6 * kPi);
  CHECK_THROWS_AS(operatorResolvent(Function::power(0.5), wide, 1.0), HypothesisError);
  // complete Bernstein functions handle wide sectors
  auto r = operatorResolvent(Function::power(0.5), wide, 1.0, OpMode::Cbf);
  CHECK(std::abs(r.value(0, 0) - 1.0 / (1.0 + std::sqrt(std::polar(1.0, 0.6 * kPi)))) < 1e-9);
  CHECK_THROWS_AS(operatorResolvent(Function::exampleG(1.0), s0, 1.0, OpMode::Cbf), HypothesisError);

  auto s = certifySectorial(diag({1.0, 2.0}), 0.0);
  OperatorRepChoice c;
  c.q = 2;
  CHECK_THROWS_AS(operatorResolvent(Function::log1p(), s, 1.0, c), InputError);
  c.q = 3;
  CHECK_THROWS_AS(operatorResolvent(Function::log1p(), s, std::polar(1.0, 2.2), c), InputError);
}

TEST_CASE("sectoriality bound formulas") {
  const double b = sectorialityBoundFormula(std::tan(kPi / 3), 1.0, kPi / 2, 3.0);
  const double want = 1 / std::sin(kPi / 3) +
                      3 * std::tan(kPi / 3) / (kPi * 0.25 * std::pow(std::cos(5 * kPi / 12), 2));
  CHECK(b == doctest::Approx(want).epsilon(1e-13));
  CHECK(std::abs(b - 99.9) < 0.1);
  CHECK(sectorialityBoundFormula(2.0, 1.0, 1.0, 3.0) > sectorialityBoundFormula(1.0, 1.0, 1.0, 3.0));
  CHECK(sectorialityBoundFormula(1.0, 2.0, 1.0, 3.0) > sectorialityBoundFormula(1.0, 1.0, 1.0, 3.0));
  CHECK(cbfSectorialityBoundFormula(1.0, 1.0, 3.0) > 0);
  CHECK_THROWS_AS(cbfSectorialityBoundFormula(1.0, 1.0, 1.5), HypothesisError);
}

TEST_CASE("measured sectoriality stays below the bound") {
  auto s = certifySectorial(diag({1.0, 4.0}), 0.0);
  const Function f = Function::power(0.5);
  const auto k = kappaForBound(f, 3.0);
  CHECK(k.kappa == doctest::Approx(std::tan(kPi / 3)));
  auto rep = sectorialityBound(f, s, kPi / 2, 3.0, k.kappa);
  CHECK(rep.measured <= 1.0 + 1e-9);
  CHECK(rep.measured >= 0.99);
  CHECK(rep.margin >= 0);

  auto g = gen::rng(8);
  auto s2 = certifySectorial(gen::normalInSector(g, 5, kPi / 5), kPi / 5);
  const Function eg = Function::exampleG(1.0);
  const auto ke = kappaForBound(eg, 3.0);
  CHECK(ke.source == "estimated");
  auto rep2 = sectorialityBound(eg, s2, kPi / 3, 3.0, ke.kappa);
  CHECK(rep2.margin >= 0);
  CHECK_THROWS_AS(sectorialityBound(eg, s2, kPi / 3, 2.0, ke.kappa), InputError);
}

TEST_CASE("improving map examples") {
  auto s = certifySectorial(diag({1.0, 16.0}), 0.0);
  auto r = improvedResolvent(Function::identity(), 0.75, s, 1.0);
  CHECK(gen::relErr(r.value, diag({0.5, 1.0 / 9})) < 1e-8);
  CHECK(r.B.omega == 0.0);

  auto id = certifySectorial(eye(2), 0.0);
  auto o = improvedResolvent(Function::oneMinusExp(), 2.0 / 3, id, 1.0);
  CHECK(gen::relErr(o.value, CMatrix(eye(2) / (2 - std::exp(-1.0)))) < 1e-9);

  // rotated spectrum at pi/3: A^{3/4} certifies at pi/4
  auto g = gen::rng(14);
  CVector d(4);
  d << std::polar(1.0, kPi / 3), std::polar(2.0, -kPi / 3), 3.0, std::polar(0.5, kPi / 6);
  const CMatrix u = gen::randomUnitary(g, 4);
  auto sr = certifySectorial(CMatrix(u * d.asDiagonal() * u.adjoint()), kPi / 3);
  auto ir = improvedResolvent(Function::identity(), 0.75, sr, Complex(1, 1));
  CHECK(ir.B.omega == doctest::Approx(kPi / 4));
  CVector want(4);
  for (int i = 0; i < 4; ++i) want(i) = 1.0 / (Complex(1, 1) + std::pow(d(i), 0.75));
  CHECK(gen::relErr(ir.value, CMatrix(u * want.asDiagonal() * u.adjoint())) < 1e-8);

  // z^{1/2} (1 - e^{-z})^{1/2} is not Bernstein; composed with z^alpha it still runs
  const Function prod = sqrtTimesSqrtOneMinusExp();
  CHECK_FALSE(prod.has(Tag::BF));
  auto pr = improvedResolvent(prod, 0.95, s, 1.0);
  CHECK(gen::relErr(pr.value, diag({1.0 / (1.0 + prod(1.0)), 1.0 / (1.0 + prod(std::pow(16.0, 0.95)))})) < 1e-7);

  CHECK_THROWS_AS(improvedResolvent(Function::identity(), 0.4, s, 1.0), InputError);
}

TEST_CASE("Bernstein functions through their Levy triples") {
  auto s = certifySectorial(diag({1.0, 2.0}), 0.0);
  CHECK(gen::relErr(bernsteinApply(LevyTriple{0, 1, {}}, s), s.A) < 1e-15);
  const CMatrix e = bernsteinApply(LevyTriple{0, 0, MeasureSpec({{1.0, 1.0}})}, s);
  CHECK((e - diag({1 - std::exp(-1.0), 1 - std::exp(-2.0)})).cwiseAbs().maxCoeff() < 1e-10);

  auto s4 = certifySectorial(diag({1.0, 4.0}), 0.0);
  CHECK(gen::relErr(bernsteinApply(Function::power(0.5), s4), diag({1.0, 2.0})) < 1e-6);

  auto g = gen::rng(17);
  for (int k = 0; k < 3; ++k) {
    auto sn = certifySectorial(gen::normalInSector(g, 4 + 3 * k, kPi / 4), kPi / 4);
    for (const Function& f : {Function::oneMinusExp(), Function::power(0.5), Function::log1p()}) {
      CAPTURE(f.describe());
      const CMatrix want = matrixFunction(sn, f).value;
      CHECK(gen::relErr(bernsteinApply(f, sn), want) < 1e-6);
    }
    const CMatrix viaStieltjes = bernsteinApply(levyFromStieltjes(*catalogStieltjesTriple(Function::log1p())), sn);
    CHECK(gen::relErr(viaStieltjes, matrixFunction(sn, Function::log1p()).value) < 1e-6);
  }

  // non-normal input
  auto sj = certifySectorial(mat2(1, 1, 0, 1), 0.1);
  const CMatrix r = bernsteinApply(Function::power(0.5), sj);
  CHECK(gen::relErr(r, mat2(1, 0.5, 0, 1)) < 1e-6);

  CHECK_THROWS_AS(bernsteinApply(Function::exampleG(1.0), s), HypothesisError);
}

TEST_CASE("product form with a square root factor") {
  auto g = gen::rng(19);
  const Function h = Function::oneMinusExp();
  for (int k = 0; k < 3; ++k) {
    auto s = certifySectorial(gen::normalInSector(g, 5, kPi / 4), kPi / 4);
    const CMatrix whole =
        matrixFunction(s.A, [&](Complex z) { return std::sqrt(z) * h(std::sqrt(z)); }).value;
    const CMatrix half = fractionalPower(s.A, 0.5);
    auto sh = certifySectorial(half, kPi / 8);
    const CMatrix factored = half * bernsteinApply(h, sh);
    CHECK(gen::relErr(factored, whole) < 1e-6);
  }
}

TEST_CASE("semigroup examples") {
  CHECK(gen::relErr(semigroup(diag({1.0, 2.0}), 0.0), eye(2)) == 0);
  const std::vector<double> a{0.5, 1.0, 3.0};
  CVector fa(3);
  for (int i = 0; i < 3; ++i) fa(i) = 1 - std::exp(-a[i]);
  for (double s : {0.5, 1.0, 2.0}) {
    const CMatrix e = semigroup(CMatrix(fa.asDiagonal()), s);
    for (int i = 0; i < 3; ++i)
      CHECK(std::abs(e(i, i) - std::exp(-s) * std::exp(s * std::exp(-a[i]))) < 1e-12);
  }
  double prev = 2;
  for (double s : {0.0, 0.1, 1.0, 10.0}) {
    const double nrm = semigroup(diag({0.3, 2.0}), s).norm();
    CHECK(nrm <= prev);
    prev = nrm;
  }
  CHECK_THROWS_AS(semigroup(eye(2), -1), InputError);
  CHECK_THROWS_AS(semigroup(CMatrix(-1e300 * eye(2)), 1e10), DomainError);

  // contour cross-check of the exponential
  auto g = gen::rng(23);
  const CMatrix f = gen::normalInSector(g, 5, kPi / 4);
  auto c = matrixFunction(f, [](Complex z) { return std::exp(-0.7 * z); }, MatrixFunctionMethod::Contour);
  CHECK(gen::relErr(semigroup(f, 0.7), c.value) < 1e-9);
}

TEST_CASE("barycentre examples") {
  auto s = certifySectorial(diag({1.0, 2.0}), 0.0);
  CHECK(gen::relErr(barycentre(s, ProbabilityMeasure{1.0, {}}), eye(2)) < 1e-15);
  CHECK(gen::relErr(barycentre(s, dirac(0.7)), diag({std::exp(-0.7), std::exp(-1.4)})) < 1e-14);
  CHECK(gen::relErr(barycentre(s, exponential()), diag({0.5, 1.0 / 3})) < 1e-8);
  CHECK_THROWS_AS(barycentre(s, ProbabilityMeasure{0.5, {}}), InputError);

  auto g = gen::rng(29);
  for (int k = 0; k < 4; ++k) {
    auto sn = certifySectorial(gen::normalInSector(g, 6, 0.45 * kPi), 0.45 * kPi);
    for (const auto& mu : {dirac(1.3), exponential(), ProbabilityMeasure{0.25, MeasureSpec({{2.0, 0.75}})}}) {
      const CMatrix T = barycentre(sn, mu);
      Eigen::ComplexEigenSolver<CMatrix> es(T, false);
      for (int i = 0; i < 6; ++i) CHECK(std::abs(es.eigenvalues()(i)) <= 1 + 1e-12);
    }
    CHECK(gen::relErr(barycentre(sn, exponential()), resolventSolve(sn.A, Complex(1.0))) < 1e-8);
  }
}

TEST_CASE("Ritt operators from barycentres") {
  auto s = certifySectorial(diag({1.0, 2.0}), 0.0);
  for (const auto& mu : {dirac(1.0), exponential()}) {
    auto rep = checkRitt(barycentre(s, mu), s.omega);
    CHECK(rep.pass);
    CHECK(rep.stable);
    CHECK(rep.spectrumOk);
    CHECK(std::isfinite(rep.C));
  }
  auto one = checkRitt(eye(2), 0.0);
  CHECK(one.C == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(one.pass);

  auto g = gen::rng(41);
  auto sn = certifySectorial(gen::normalInSector(g, 5, kPi / 4), kPi / 4);
  CHECK(checkRitt(barycentre(sn, exponential()), sn.omega).pass);

  // a spectrum point outside the unit disk fails
  CHECK_FALSE(checkRitt(diag({1.5, 0.5}), 0.2).spectrumOk);
}
