#include <doctest.h>

#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "sectcalc/quad.hpp"

using namespace sectcalc;

namespace {

struct Case {
  std::string name;
  std::function<double(double)> g;
  HalfLineOrders orders;
  double exact;
};

// Closed-form integrals over (0, oo).
std::vector<Case> halfLineCases() {
  const double sqrtPi = std::sqrt(kPi);
  return {
      {"exp", [](double t) { return std::exp(-t); }, {1, 4}, 1.0},
      {"t exp", [](double t) { return t * std::exp(-t); }, {2, 4}, 1.0},
      {"t^-1/2 exp", [](double t) { return std::exp(-t) / std::sqrt(t); }, {0.5, 4}, sqrtPi},
      {"1/(1+t^2)", [](double t) { return 1 / (1 + t * t); }, {1, 1}, kPi / 2},
      {"1/(1+t)^2", [](double t) { return 1 / ((1 + t) * (1 + t)); }, {1, 1}, 1.0},
      {"t^-0.7/(1+t)", [](double t) { return std::pow(t, -0.7) / (1 + t); }, {0.3, 0.7}, kPi / std::sin(0.3 * kPi)},
      {"t^-0.3/(1+t)", [](double t) { return std::pow(t, -0.3) / (1 + t); }, {0.7, 0.3}, kPi / std::sin(0.7 * kPi)},
      {"gauss", [](double t) { return std::exp(-t * t); }, {1, 4}, sqrtPi / 2},
      {"log1p t^-3/2", [](double t) { return std::log1p(t) * std::pow(t, -1.5); }, {0.5, 0.5}, 2 * kPi},
      {"bose", [](double t) { return t / std::expm1(t); }, {1, 4}, kPi * kPi / 6},
      {"sin exp", [](double t) { return std::sin(t) * std::exp(-t); }, {2, 4}, 0.5},
      {"cos exp", [](double t) { return std::cos(t) * std::exp(-t); }, {1, 4}, 0.5},
      {"1/(1+t^4)", [](double t) { return 1 / (1 + t * t * t * t); }, {1, 3}, kPi / (2 * std::sqrt(2.0))},
      {"t^-3/2 (1-e^-t)", [](double t) { return -std::expm1(-t) * std::pow(t, -1.5); }, {0.5, 0.5}, 2 * sqrtPi},
      {"t^2 e^-2t", [](double t) { return t * t * std::exp(-2 * t); }, {3, 4}, 0.25},
      {"1/((1+t)(2+t))", [](double t) { return 1 / ((1 + t) * (2 + t)); }, {1, 1}, std::log(2.0)},
      {"gamma(1/4)", [](double t) { return std::pow(t, -0.75) * std::exp(-t); }, {0.25, 4}, std::tgamma(0.25)},
      {"t^-1/2/(1+t)", [](double t) { return 1 / (std::sqrt(t) * (1 + t)); }, {0.5, 0.5}, kPi},
      {"t^3 e^-t", [](double t) { return t * t * t * std::exp(-t); }, {4, 4}, 6.0},
      {"shifted peak", [](double t) { return 1 / (1 + (t - 1e3) * (t - 1e3) / 1e4); }, {1, 1},
       100.0 * (kPi / 2 + std::atan(10.0))},
  };
}

}  // namespace

TEST_CASE("half-line reference integrals") {
  auto r = integrateHalfLine([](double t) { return 1 / ((1 + t) * (1 + t)); });
  CHECK(r.converged);
  CHECK(r.value == doctest::Approx(1.0).epsilon(1e-12));
  auto s = integrateHalfLine([](double t) { return std::exp(-t) / std::sqrt(t); }, {0.5, 4});
  CHECK(s.converged);
  CHECK(s.value == doctest::Approx(std::sqrt(kPi)).epsilon(1e-11));
}

TEST_CASE("polar sector integral of e^-t") {
  auto r = integratePolarSector([](double t, double) { return std::exp(-t); }, kPi / 4);
  CHECK(r.converged);
  CHECK(r.value == doctest::Approx(kPi / 2).epsilon(1e-12));
}

TEST_CASE("polar sector integral of 1/(1+t^2) gives pi theta") {
  const double theta = 0.6;
  auto r = integratePolarSector([](double t, double) { return 1 / (1 + t * t); }, theta);
  CHECK(r.value == doctest::Approx(kPi * theta).epsilon(1e-11));
}

TEST_CASE("finite intervals, including endpoint singularities") {
  CHECK(integrateInterval([](double x) { return std::sqrt(x); }, 0, 1).value == doctest::Approx(2.0 / 3).epsilon(1e-11));
  CHECK(integrateInterval([](double x) { return std::sin(x); }, 0, kPi).value == doctest::Approx(2.0).epsilon(1e-13));
  auto r = integrateInterval([](double x) { return std::log(x); }, 0, 1);
  CHECK(r.converged);
  CHECK(r.value == doctest::Approx(-1.0).epsilon(1e-10));
  CHECK(integrateFromZero([](double x) { return std::log(x); }, 1.0).value == doctest::Approx(-1.0).epsilon(1e-11));
  CHECK(integrateToInfinity([](double x) { return 1 / (x * x); }, 2.0).value == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("complex and matrix valued integrands") {
  const Complex a(1, 1);
  auto r = integrateHalfLine([a](double t) { return std::exp(-a * t); }, {1, 4});
  CHECK(std::abs(r.value - 1.0 / a) < 1e-12);

  // int_0^oo (t + A)^{-2} dt = A^{-1}
  Eigen::Matrix2cd A;
  A << 2, 1, 0, 3;
  auto m = integrateHalfLine(
      [&](double t) {
        Eigen::Matrix2cd r = (A + t * Eigen::Matrix2cd::Identity()).inverse();
        return Eigen::Matrix2cd(r * r);
      },
      {1, 1});
  CHECK((m.value - A.inverse()).norm() < 1e-11);
}

TEST_CASE("error estimate bounds the true error on reference integrals") {
  for (const Case& c : halfLineCases()) {
    for (double tol : {1e-6, 1e-8, 1e-10}) {
      QuadratureConfig cfg;
      cfg.relTol = tol;
      auto r = integrateHalfLine(c.g, c.orders, cfg);
      CAPTURE(c.name);
      CAPTURE(tol);
      CHECK(r.converged);
      const double err = std::abs(r.value - c.exact);
      CHECK(err <= 3 * r.errEstimate);
      CHECK(err <= 10 * tol * std::abs(c.exact));
    }
  }
}

TEST_CASE("halving the tolerance never increases the error") {
  for (const Case& c : halfLineCases()) {
    double prev = kInf;
    for (double tol = 1e-4; tol >= 1e-12; tol /= 2) {
      QuadratureConfig cfg;
      cfg.relTol = tol;
      auto r = integrateHalfLine(c.g, c.orders, cfg);
      const double err = std::abs(r.value - c.exact);
      CAPTURE(c.name);
      CAPTURE(tol);
      // Changes in the last few bits of the result are rounding, not method error.
      CHECK(err <= prev + 4 * std::numeric_limits<double>::epsilon() * std::abs(c.exact));
      prev = err;
    }
  }
}

TEST_CASE("slowly decaying integrand is reported as not converged") {
  // 1 / (t log^2 t) tail decays only like 1 / log T.
  auto r = integrateToInfinity([](double t) { return 1 / (t * std::log(t) * std::log(t)); }, 2.0, 1e-3);
  CHECK_FALSE(r.converged);
}

TEST_CASE("non-finite integrand raises") {
  CHECK_THROWS_AS(integrateInterval([](double x) { return 1.0 / (x - 0.5) / 0.0; }, 0, 1), QuadratureError);
}
