#pragma once

#include <array>
#include <cmath>
#include <functional>

#include "cappen/common.hpp"

namespace cappen {

// ----- Gauss-Legendre rules on [-1, 1] -----

struct GLRule8 {
  static constexpr int n = 8;
  static constexpr std::array<double, 8> x = {
      -0.9602898564975363, -0.7966664774136267, -0.5255324099163290,
      -0.1834346424956498, 0.1834346424956498,  0.5255324099163290,
      0.7966664774136267,  0.9602898564975363};
  static constexpr std::array<double, 8> w = {
      0.1012285362903763, 0.2223810344533745, 0.3137066458778873,
      0.3626837833783620, 0.3626837833783620, 0.3137066458778873,
      0.2223810344533745, 0.1012285362903763};
};

struct GLRule16 {
  static constexpr int n = 16;
  static constexpr std::array<double, 16> x = {
      -0.9894009349916499, -0.9445750230732326, -0.8656312023878318,
      -0.7554044083550030, -0.6178762444026438, -0.4580167776572274,
      -0.2816035507792589, -0.0950125098376374, 0.0950125098376374,
      0.2816035507792589,  0.4580167776572274,  0.6178762444026438,
      0.7554044083550030,  0.8656312023878318,  0.9445750230732326,
      0.9894009349916499};
  static constexpr std::array<double, 16> w = {
      0.0271524594117541, 0.0622535239386479, 0.0951585116824928,
      0.1246289712555339, 0.1495959888165767, 0.1691565193950025,
      0.1826034150449236, 0.1894506104550685, 0.1894506104550685,
      0.1826034150449236, 0.1691565193950025, 0.1495959888165767,
      0.1246289712555339, 0.0951585116824928, 0.0622535239386479,
      0.0271524594117541};
};

template <class Rule, class F>
double gauss_legendre(F&& f, double a, double b) {
  const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
  double s = 0.0;
  for (int i = 0; i < Rule::n; ++i) s += Rule::w[i] * f(mid + half * Rule::x[i]);
  return s * half;
}

template <class Rule, class F>
double composite_gauss(F&& f, double a, double b, int panels) {
  double s = 0.0;
  for (int k = 0; k < panels; ++k) {
    const double x0 = a + (b - a) * k / panels;
    const double x1 = a + (b - a) * (k + 1) / panels;
    s += gauss_legendre<Rule>(f, x0, x1);
  }
  return s;
}

// ----- adaptive Simpson -----
// Classic bisecting Simpson with the 1/15 error estimate. `tol` is absolute.

namespace detail {
template <class F>
double simpson_rec(F& f, double a, double b, double fa, double fm, double fb,
                   double whole, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * tol)
    return left + right + delta / 15.0;
  return simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}
}  // namespace detail

template <class F>
double adaptive_simpson(F&& f, double a, double b, double tol = 1e-10,
                        int max_depth = 48) {
  if (a == b) return 0.0;
  const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return detail::simpson_rec(f, a, b, fa, fm, fb, whole, tol, max_depth);
}

// ----- periodic trapezoid -----
// Equal-weight rule on [0, 2pi); spectrally accurate for smooth periodic
// integrands, which is what every circle quadrature here is.

template <class F>
double periodic_trapezoid(F&& f, int n = 512) {
  double s = 0.0;
  for (int k = 0; k < n; ++k) s += f(2.0 * PI * k / n);
  return s * (2.0 * PI / n);
}

}  // namespace cappen
