#pragma once

#include <cmath>
#include <vector>

#include "cappen/common.hpp"

namespace cappen {

// Natural cubic spline on a uniform grid. Built once, evaluated many times;
// value and derivative come from the same polynomial so any functional built
// on it is exactly differentiable.
class CubicSpline {
 public:
  CubicSpline() = default;

  CubicSpline(double x0, double x1, std::vector<double> y)
      : x0_(x0), x1_(x1), y_(std::move(y)) {
    const int n = static_cast<int>(y_.size());
    if (n < 3 || !(x1_ > x0_)) throw DomainError("CubicSpline: need >= 3 knots on a positive interval");
    h_ = (x1_ - x0_) / (n - 1);
    // Second derivatives from the natural-spline tridiagonal system
    // (Thomas algorithm; uniform spacing).
    m_.assign(n, 0.0);
    std::vector<double> c(n, 0.0), d(n, 0.0);
    // rows i = 1..n-2:  (1/6) m[i-1] + (2/3) m[i] + (1/6) m[i+1] = (y[i-1]-2y[i]+y[i+1])/h^2
    double beta = 2.0 / 3.0;
    c[1] = (1.0 / 6.0) / beta;
    d[1] = ((y_[0] - 2.0 * y_[1] + y_[2]) / (h_ * h_)) / beta;
    for (int i = 2; i + 1 < n; ++i) {
      beta = 2.0 / 3.0 - (1.0 / 6.0) * c[i - 1];
      c[i] = (1.0 / 6.0) / beta;
      d[i] = ((y_[i - 1] - 2.0 * y_[i] + y_[i + 1]) / (h_ * h_) - (1.0 / 6.0) * d[i - 1]) / beta;
    }
    for (int i = n - 2; i >= 1; --i) m_[i] = d[i] - c[i] * m_[i + 1];
  }

  double xmin() const { return x0_; }
  double xmax() const { return x1_; }

  double value(double x) const {
    int i;
    double u;
    locate(x, i, u);
    const double a = 1.0 - u, b = u;
    return a * y_[i] + b * y_[i + 1] +
           ((a * a * a - a) * m_[i] + (b * b * b - b) * m_[i + 1]) * h_ * h_ / 6.0;
  }

  double deriv(double x) const {
    int i;
    double u;
    locate(x, i, u);
    const double a = 1.0 - u, b = u;
    return (y_[i + 1] - y_[i]) / h_ +
           (-(3.0 * a * a - 1.0) * m_[i] + (3.0 * b * b - 1.0) * m_[i + 1]) * h_ / 6.0;
  }

 private:
  void locate(double x, int& i, double& u) const {
    if (x < x0_ - 1e-9 * (x1_ - x0_) || x > x1_ + 1e-9 * (x1_ - x0_))
      throw DomainError(strf("CubicSpline: x=%.17g outside [%.17g, %.17g]", x, x0_, x1_));
    const int n = static_cast<int>(y_.size());
    double s = (x - x0_) / h_;
    i = static_cast<int>(std::floor(s));
    if (i < 0) i = 0;
    if (i > n - 2) i = n - 2;
    u = s - i;
  }

  double x0_ = 0.0, x1_ = 1.0, h_ = 1.0;
  std::vector<double> y_;
  std::vector<double> m_;  // knot second derivatives
};

}  // namespace cappen
