#include <catch2/catch_amalgamated.hpp>
#include <cmath>

#include "cappen/quadrature.hpp"
#include "cappen/spline.hpp"
#include "oracles.hpp"

using namespace cappen;

TEST_CASE("Gauss-Legendre rules integrate polynomials exactly") {
  // degree 2n-1 exactness: x^k on [0,1] has integral 1/(k+1)
  for (int k = 0; k <= 15; ++k) {
    const double got = gauss_legendre<GLRule8>([k](double x) { return std::pow(x, k); }, 0.0, 1.0);
    REQUIRE(got == Catch::Approx(1.0 / (k + 1)).epsilon(1e-14));
  }
  for (int k = 0; k <= 31; ++k) {
    const double got = gauss_legendre<GLRule16>([k](double x) { return std::pow(x, k); }, 0.0, 1.0);
    REQUIRE(got == Catch::Approx(1.0 / (k + 1)).epsilon(1e-13));
  }
}

TEST_CASE("Gauss-Legendre handles reversed and offset intervals") {
  auto f = [](double x) { return std::exp(x); };
  const double exact = std::exp(2.5) - std::exp(-1.0);
  REQUIRE(gauss_legendre<GLRule16>(f, -1.0, 2.5) == Catch::Approx(exact).epsilon(1e-14));
  REQUIRE(gauss_legendre<GLRule16>(f, 2.5, -1.0) == Catch::Approx(-exact).epsilon(1e-14));
  REQUIRE(composite_gauss<GLRule8>(f, -1.0, 2.5, 8) == Catch::Approx(exact).epsilon(1e-14));
}

TEST_CASE("adaptive Simpson reaches the requested tolerance") {
  const double exact = std::exp(3.0) - 1.0;
  const double got = adaptive_simpson([](double x) { return std::exp(x); }, 0.0, 3.0, 1e-12);
  REQUIRE(std::abs(got - exact) < 1e-10);

  // integrable endpoint behavior: sqrt on [0,1]
  const double got2 = adaptive_simpson([](double x) { return std::sqrt(x); }, 0.0, 1.0, 1e-10);
  REQUIRE(std::abs(got2 - 2.0 / 3.0) < 1e-8);

  // matches the plain-Simpson oracle on an oscillatory integrand
  auto osc = [](double x) { return std::sin(7.0 * x) * std::exp(-x); };
  const double ref = oracle::simpson(osc, 0.0, 2.0, 20000);
  REQUIRE(adaptive_simpson(osc, 0.0, 2.0, 1e-12) == Catch::Approx(ref).margin(1e-9));
}

TEST_CASE("periodic trapezoid is spectrally accurate") {
  // closed form: integral over [0, 2pi) of 1/(2 + cos x) = 2 pi / sqrt(3)
  const double exact = 2.0 * PI / std::sqrt(3.0);
  const double got = periodic_trapezoid([](double x) { return 1.0 / (2.0 + std::cos(x)); }, 64);
  REQUIRE(got == Catch::Approx(exact).epsilon(1e-13));
}

TEST_CASE("cubic spline reproduces smooth functions and their derivatives") {
  // natural spline is O(h^4) when f'' vanishes at the ends: sin on [0, pi]
  const int n = 401;
  std::vector<double> y(n);
  for (int i = 0; i < n; ++i) y[i] = std::sin(PI * i / (n - 1));
  CubicSpline s(0.0, PI, y);
  for (double x : {0.1, 0.7, 1.3, 2.2, 3.0}) {
    REQUIRE(s.value(x) == Catch::Approx(std::sin(x)).margin(5e-9));
    REQUIRE(s.deriv(x) == Catch::Approx(std::cos(x)).margin(5e-6));
  }
  // derivative comes from the same polynomial as the value
  const double h = 1e-6;
  for (double x : {0.5, 1.9}) {
    const double fd = (s.value(x + h) - s.value(x - h)) / (2.0 * h);
    REQUIRE(fd == Catch::Approx(s.deriv(x)).margin(1e-7));
  }
}

TEST_CASE("cubic spline rejects queries outside its domain") {
  std::vector<double> y = {0.0, 1.0, 0.0, -1.0, 0.0};
  CubicSpline s(0.0, 1.0, y);
  REQUIRE_THROWS_AS(s.value(-0.1), DomainError);
  REQUIRE_THROWS_AS(s.value(1.1), DomainError);
  REQUIRE_NOTHROW(s.value(1.0));
  REQUIRE_NOTHROW(s.value(0.0));
}
