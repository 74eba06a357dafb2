#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include "cappen/common.hpp"
#include "cappen/quadrature.hpp"
#include "cappen/spline.hpp"

namespace cappen {

// Compactly supported C^2 radial bump: amplitude * (1 - u^2)^3 on |u| < 1,
// u = (x - center) / width. Value and first two derivatives vanish at the
// support edge, so pasting it onto a profile keeps the profile C^2.
struct Bump {
  double center = 0.0;
  double width = 1.0;
  double amplitude = 0.0;

  double value(double x) const {
    const double u = (x - center) / width;
    if (std::abs(u) >= 1.0) return 0.0;
    const double s = 1.0 - u * u;
    return amplitude * s * s * s;
  }
  double d1(double x) const {
    const double u = (x - center) / width;
    if (std::abs(u) >= 1.0) return 0.0;
    const double s = 1.0 - u * u;
    return -6.0 * amplitude * u * s * s / width;
  }
  double d2(double x) const {
    const double u = (x - center) / width;
    if (std::abs(u) >= 1.0) return 0.0;
    const double s = 1.0 - u * u;
    return -6.0 * amplitude * s * (1.0 - 5.0 * u * u) / (width * width);
  }
};

struct MassFit {
  double mass = 0.0;
  double coeff = 0.0;     // amplitude of the fitted decay term
  double power = 0.0;     // exponent in [0.5, 2]; 0 when the fit degenerates
  double residual = 0.0;  // RMS of the fit
  bool degenerate = false;
  std::vector<double> radii;
  std::vector<double> samples;
};

struct HSignReport {
  double min_H = 0.0;
  double argmin = 0.0;  // profile coordinate where the minimum was found
  int samples = 0;
};

// Rotationally symmetric support surface. Two kinds:
//  - Funnel: rho = R(z) with R(z)^2 = m^2 cosh(z/m)^2 + p2 for z >= 0
//    (p2 < 0 pinches the neck, p2 > 0 bulges it), plus optional radial bumps
//    added to R, closed below z = 0 by a C^2 cubic-in-q cap that ends in a
//    smooth pole at z = -cap_depth. Normal points out of the funnel interior
//    (asymptotically -e3 far up the wall).
//  - Graph: z = psi(rho), radial, with base plane (0), a*log(rho), or the
//    upper catenoid end m*arccosh(rho/m), plus bumps added to psi. Normal is
//    (psi' e_r - e3)/sqrt(1+psi'^2), matching the funnel convention.
//
// The "band coordinate" q is z for funnels and rho for graphs; the wetted
// lateral area between circles of constant q is 2*pi*(P(q1) - P(q0)) for the
// potential P built here, and for arbitrary loops it is the line integral
// of P dphi (Green's theorem in (q, phi) coordinates). P is cached as a
// cubic spline and value/derivative always come from the same polynomial, so
// functionals built on it differentiate exactly.
class SupportSurface {
 public:
  enum class Kind { Graph, Funnel };
  enum class GraphBase { Plane, Log, CatenoidEnd };

  static SupportSurface plane(std::vector<Bump> bumps = {}) {
    SupportSurface s;
    s.kind_ = Kind::Graph;
    s.base_ = GraphBase::Plane;
    s.bumps_ = std::move(bumps);
    s.init();
    return s;
  }

  static SupportSurface graph_log(double a) {
    if (!(a > 0.0)) throw DomainError("graph_log: need a > 0");
    SupportSurface s;
    s.kind_ = Kind::Graph;
    s.base_ = GraphBase::Log;
    s.a_ = a;
    s.init();
    return s;
  }

  static SupportSurface graph_catenoid_end(double m) {
    if (!(m > 0.0)) throw DomainError("graph_catenoid_end: need m > 0");
    SupportSurface s;
    s.kind_ = Kind::Graph;
    s.base_ = GraphBase::CatenoidEnd;
    s.m_ = m;
    s.init();
    return s;
  }

  // p2 is the signed neck perturbation: R^2 = m^2 cosh^2(z/m) + p2.
  static SupportSurface funnel(double m, double p2 = 0.0, std::vector<Bump> bumps = {},
                               double cap_depth_factor = 1.2) {
    if (!(m > 0.0)) throw DomainError("funnel: need m > 0");
    if (!(p2 > -m * m)) throw DomainError("funnel: pinch must satisfy p2 > -m^2");
    if (!(cap_depth_factor >= 0.5 && cap_depth_factor <= 3.0))
      throw DomainError("funnel: cap_depth_factor outside [0.5, 3]");
    SupportSurface s;
    s.kind_ = Kind::Funnel;
    s.m_ = m;
    s.p2_ = p2;
    s.bumps_ = std::move(bumps);
    s.cap_factor_ = cap_depth_factor;
    s.init();
    return s;
  }

  Kind kind() const { return kind_; }
  GraphBase graph_base() const { return base_; }
  double scale() const { return m_; }
  double pinch() const { return p2_; }
  const Vec3& center() const { return center_; }
  double cap_depth() const { return cap_depth_; }
  double usable_lo() const { return usable_lo_; }
  double band_ref() const { return ref_q_; }

  SupportSurface translated(const Vec3& d) const {
    SupportSurface s = *this;
    s.center_ += d;
    return s;
  }

  SupportSurface scaled(double lam) const {
    if (!(lam > 0.0)) throw DomainError("SupportSurface::scaled: need lam > 0");
    SupportSurface s;
    s.kind_ = kind_;
    s.base_ = base_;
    s.m_ = m_ * lam;
    s.p2_ = p2_ * lam * lam;
    s.a_ = a_ * lam;
    s.cap_factor_ = cap_factor_;
    s.bumps_ = bumps_;
    for (auto& b : s.bumps_) {
      b.center *= lam;
      b.width *= lam;
      b.amplitude *= lam;
    }
    s.center_ = center_ * lam;
    // a*log(rho) rescales into a'*log(rho) plus a constant height shift.
    if (kind_ == Kind::Graph && base_ == GraphBase::Log)
      s.center_.z() += -lam * a_ * std::log(lam);
    s.init();
    s.prepare_band(q_hi_ * lam);
    return s;
  }

  // ----- profile evaluation (local coordinates) -----

  struct Deriv2 {
    double v, d1, d2;
  };

  // Funnel radius R(z) with derivatives; z in [-cap_depth, inf).
  Deriv2 radius(double z) const {
    require(kind_ == Kind::Funnel, "radius: funnel kinds only");
    Deriv2 r;
    if (z >= 0.0) {
      const double q = m_ * m_ * std::pow(std::cosh(z / m_), 2) + p2_;
      const double dq = m_ * std::sinh(2.0 * z / m_);
      const double ddq = 2.0 * std::cosh(2.0 * z / m_);
      fill_from_q(q, dq, ddq, r);
    } else {
      if (z < -cap_depth_ - 1e-12 * m_)
        throw DomainError(strf("radius: z=%.17g below the cap pole", z));
      const double zc = std::max(z, -cap_depth_);
      const double q = R0_ * R0_ + zc * zc + a_cap_ * zc * zc * zc;
      const double dq = 2.0 * zc + 3.0 * a_cap_ * zc * zc;
      const double ddq = 2.0 + 6.0 * a_cap_ * zc;
      fill_from_q(std::max(q, 0.0), dq, ddq, r);
    }
    for (const auto& b : bumps_) {
      r.v += b.value(z);
      r.d1 += b.d1(z);
      r.d2 += b.d2(z);
    }
    return r;
  }

  // Profile radius value alone; unlike radius(), finite at the cap pole
  // (where the derivative blows up and radius() refuses).
  double radius_value(double z) const {
    require(kind_ == Kind::Funnel, "radius_value: funnel kinds only");
    if (z > 0.0) return radius(z).v;
    if (z < -cap_depth_ - 1e-12 * m_)
      throw DomainError(strf("radius_value: z=%.17g below the cap pole", z));
    const double zc = std::max(z, -cap_depth_);
    const double q = R0_ * R0_ + zc * zc + a_cap_ * zc * zc * zc;
    double v = std::sqrt(std::max(q, 0.0));
    for (const auto& b : bumps_) v += b.value(z);
    return v;
  }

  // Graph height psi(rho) with derivatives; rho > 0 (and rho > m for the
  // catenoid end).
  Deriv2 height(double rho) const {
    require(kind_ == Kind::Graph, "height: graph kinds only");
    Deriv2 g{0.0, 0.0, 0.0};
    switch (base_) {
      case GraphBase::Plane:
        break;
      case GraphBase::Log:
        if (!(rho > 0.0)) throw DomainError("height: log graph needs rho > 0");
        g = {a_ * std::log(rho), a_ / rho, -a_ / (rho * rho)};
        break;
      case GraphBase::CatenoidEnd: {
        if (!(rho > m_)) throw DomainError("height: catenoid end needs rho > m");
        const double w = std::sqrt(rho * rho - m_ * m_);
        g = {m_ * std::acosh(rho / m_), m_ / w, -m_ * rho / (w * w * w)};
        break;
      }
    }
    for (const auto& b : bumps_) {
      g.v += b.value(rho);
      g.d1 += b.d1(rho);
      g.d2 += b.d2(rho);
    }
    return g;
  }

  // ----- world-space geometry -----

  double band_coord(const Vec3& x) const {
    const Vec3 p = x - center_;
    return kind_ == Kind::Funnel ? p.z() : std::hypot(p.x(), p.y());
  }

  Vec3 band_coord_gradient(const Vec3& x) const {
    if (kind_ == Kind::Funnel) return Vec3(0, 0, 1);
    const Vec3 p = x - center_;
    const double rho = std::hypot(p.x(), p.y());
    if (rho < 1e-12) throw DomainError("band_coord_gradient: on the axis");
    return Vec3(p.x() / rho, p.y() / rho, 0.0);
  }

  // Band coordinate of the nearest point of S, linearized in the offset from
  // S (exact on S; the error is quadratic in the distance). Boundary chords
  // of a discrete surface cut inside S between contact vertices; measuring
  // the wetted band through their foot points keeps the wetting deficit at
  // the same inscribed-polygon level as the surface-area deficit, which
  // removes an O(h^2 cosh^2 t) bias in the equilibrium contact height.
  double band_coord_foot(const Vec3& x) const {
    const Vec3 p = x - center_;
    const double rho = std::hypot(p.x(), p.y());
    if (kind_ == Kind::Funnel) {
      const Deriv2 r = radius(p.z());
      return p.z() - (r.v - rho) * r.d1 / (1.0 + r.d1 * r.d1);
    }
    if (base_ == GraphBase::CatenoidEnd && rho <= m_ * (1.0 + 1e-12))
      throw DomainError("band_coord_foot: point at or inside the catenoid-end neck");
    const Deriv2 g = height(rho);
    return rho + (p.z() - g.v) * g.d1 / (1.0 + g.d1 * g.d1);
  }

  Vec3 band_coord_foot_gradient(const Vec3& x) const {
    const Vec3 p = x - center_;
    const double rho = std::hypot(p.x(), p.y());
    if (rho < 1e-12) throw DomainError("band_coord_foot_gradient: on the axis");
    const Vec3 er(p.x() / rho, p.y() / rho, 0.0);
    if (kind_ == Kind::Funnel) {
      const Deriv2 r = radius(p.z());
      const double den = 1.0 + r.d1 * r.d1;
      const double w = r.d1 / den;
      const double dw = r.d2 * (1.0 - r.d1 * r.d1) / (den * den);
      return w * er + (1.0 - r.d1 * w - (r.v - rho) * dw) * Vec3(0, 0, 1);
    }
    if (base_ == GraphBase::CatenoidEnd && rho <= m_ * (1.0 + 1e-12))
      throw DomainError("band_coord_foot_gradient: point at or inside the catenoid-end neck");
    const Deriv2 g = height(rho);
    const double den = 1.0 + g.d1 * g.d1;
    const double u = g.d1 / den;
    const double du = g.d2 * (1.0 - g.d1 * g.d1) / (den * den);
    return (1.0 - g.d1 * u + (p.z() - g.v) * du) * er + u * Vec3(0, 0, 1);
  }

  // Outward normal at a point of S (parametrized by the point's profile
  // coordinate; the point is assumed to lie on S).
  Vec3 normal_at(const Vec3& x) const {
    const Vec3 p = x - center_;
    const double rho = std::hypot(p.x(), p.y());
    const Vec3 er = rho > 1e-12 ? Vec3(p.x() / rho, p.y() / rho, 0.0) : Vec3(1, 0, 0);
    if (kind_ == Kind::Funnel) {
      if (rho <= 1e-12) return Vec3(0, 0, -1);  // cap pole
      const Deriv2 r = radius(p.z());
      return (er - r.d1 * Vec3(0, 0, 1)) / std::sqrt(1.0 + r.d1 * r.d1);
    }
    const Deriv2 g = height(rho);
    return (g.d1 * er - Vec3(0, 0, 1)) / std::sqrt(1.0 + g.d1 * g.d1);
  }

  // Mean curvature of S w.r.t. the outward normal above.
  double mean_curvature_at(const Vec3& x) const {
    const Vec3 p = x - center_;
    if (kind_ == Kind::Funnel) return funnel_H(p.z());
    return graph_H(std::hypot(p.x(), p.y()));
  }

  // Closest point on S (world coordinates).
  Vec3 project(const Vec3& x) const {
    const Vec3 p = x - center_;
    const double rho = std::hypot(p.x(), p.y());
    const double phi = rho > 1e-14 ? std::atan2(p.y(), p.x()) : 0.0;
    double s;  // profile parameter of the foot point
    if (kind_ == Kind::Funnel) {
      s = project_profile(-cap_depth_, funnel_domain_hi(p, rho), Vec2(rho, p.z()),
                          [&](double z) { return Vec2(radius_value(z), z); });
    } else {
      s = project_profile(graph_lo_, graph_domain_hi(p, rho), Vec2(rho, p.z()),
                          [&](double u) { return Vec2(u, height(u).v); });
    }
    Vec2 foot2;
    if (kind_ == Kind::Funnel)
      foot2 = Vec2(radius_value(s), s);
    else
      foot2 = Vec2(s, height(s).v);
    return center_ + Vec3(foot2.x() * std::cos(phi), foot2.x() * std::sin(phi), foot2.y());
  }

  // ----- band potential and lateral areas -----

  // Extend the potential's domain to cover band coordinates up to q_hi.
  void prepare_band(double q_hi) {
    if (q_hi <= q_hi_) return;
    q_hi_ = q_hi;
    build_potential();
  }

  double band_domain_lo() const { return q_lo_; }
  double band_domain_hi() const { return q_hi_; }

  double band_potential(double q) const {
    if (kind_ == Kind::Graph && base_ == GraphBase::CatenoidEnd) {
      if (!(q >= m_)) throw DomainError("band_potential: below the catenoid-end neck");
      const double w = std::sqrt(q * q - m_ * m_);
      return 0.5 * (q * w + m_ * m_ * std::log(q + w)) - cat_end_shift_;
    }
    if (q < q_lo_ - 1e-9 * span() || q > q_hi_ + 1e-9 * span())
      throw DomainError(strf("band_potential: q=%.17g outside [%.17g, %.17g]", q, q_lo_, q_hi_));
    return P_.value(std::clamp(q, q_lo_, q_hi_)) - P_shift_;
  }

  double band_potential_deriv(double q) const {
    if (kind_ == Kind::Graph && base_ == GraphBase::CatenoidEnd) {
      if (!(q >= m_)) throw DomainError("band_potential_deriv: below the catenoid-end neck");
      return q * q / std::sqrt(q * q - m_ * m_);
    }
    if (q < q_lo_ - 1e-9 * span() || q > q_hi_ + 1e-9 * span())
      throw DomainError(strf("band_potential_deriv: q=%.17g outside [%.17g, %.17g]", q, q_lo_, q_hi_));
    return P_.deriv(std::clamp(q, q_lo_, q_hi_));
  }

  // Area density along the profile: d(area)/dq / (2 pi). Public because the
  // independent quadrature oracle in the tests integrates it directly.
  double band_integrand(double q) const {
    if (kind_ == Kind::Funnel) {
      if (q <= 0.0 && bumps_cleared_cap_) {
        // q + q'^2/4 form stays smooth through the cap pole
        const double zc = std::max(q, -cap_depth_);
        const double qq = R0_ * R0_ + zc * zc + a_cap_ * zc * zc * zc;
        const double dq = 2.0 * zc + 3.0 * a_cap_ * zc * zc;
        return std::sqrt(std::max(qq, 0.0) + 0.25 * dq * dq);
      }
      const Deriv2 r = radius(q);
      return r.v * std::sqrt(1.0 + r.d1 * r.d1);
    }
    if (q <= 0.0) return 0.0;
    const Deriv2 g = height(q);
    return q * std::sqrt(1.0 + g.d1 * g.d1);
  }

  // Band between two coordinate circles, by adaptive Simpson (reference
  // path, independent of the spline cache).
  double lateral_area_circles(double q0, double q1, double tol = 1e-10) const {
    if (q1 < q0) throw RegionError("lateral_area_circles: current circle below reference");
    check_band_domain(q0);
    check_band_domain(q1);
    return 2.0 * PI * adaptive_simpson([&](double q) { return band_integrand(q); }, q0, q1, tol);
  }

  // Band between the reference circle q_ref and a set of loops (world-space
  // points on S). Each loop must wind once around the axis and stay at or
  // above the reference circle.
  double lateral_area(double q_ref, const std::vector<std::vector<Vec3>>& loops) const {
    check_band_domain(q_ref);
    double total = 0.0;
    double net_winding = 0.0;  // signed: an annulus' inner loop contributes -1
    for (const auto& loop : loops) {
      if (loop.size() < 3) throw RegionError("lateral_area: loop with fewer than 3 points");
      double sum = 0.0, wind = 0.0;
      const int n = static_cast<int>(loop.size());
      for (int i = 0; i < n; ++i) {
        const Vec3& A = loop[i];
        const Vec3& B = loop[(i + 1) % n];
        const double qa = band_coord(A), qb = band_coord(B);
        if (std::min(qa, qb) < q_ref - 1e-7 * (1.0 + std::abs(q_ref)))
          throw RegionError("lateral_area: loop dips below the reference circle");
        const double dphi = wrapped_dphi(A, B);
        wind += dphi;
        double acc = 0.0;
        for (int k = 0; k < GLRule8::n; ++k) {
          const double xi = 0.5 * (1.0 + GLRule8::x[k]);
          acc += 0.5 * GLRule8::w[k] * band_potential(qa + xi * (qb - qa));
        }
        sum += dphi * acc;
      }
      const double w = wind / (2.0 * PI);
      if (std::abs(w - std::round(w)) > 1e-6 || std::abs(std::round(w)) != 1.0)
        throw RegionError(strf("lateral_area: loop winding %.6f, expected +-1", w));
      total += sum;
      net_winding += std::round(w);
    }
    return total - net_winding * 2.0 * PI * band_potential(q_ref);
  }

  // Wetted area measured from the bottom of the surface (funnel cap pole) to
  // the reference circle; add it to a band to get absolute wetted area.
  double area_below_reference() const {
    if (kind_ == Kind::Funnel) {
      if (!bumps_cleared_cap_)
        throw DomainError("area_below_reference: bumps reach into the cap region");
      return 2.0 * PI *
             adaptive_simpson([&](double z) { return band_integrand(z); }, -cap_depth_, ref_q_,
                              1e-10);
    }
    return 0.0;  // graphs are referenced at the axis / neck already
  }

  // ----- exterior mass -----

  // Smallest radius from which the upper end is a clean radial graph.
  double graph_region_min_radius() const {
    if (kind_ == Kind::Funnel) return radius(end_mono_z_).v * (1.0 + 1e-9);
    double lo = base_ == GraphBase::CatenoidEnd ? m_ * 1.0000001 : base_ == GraphBase::Log ? log_rho_min_ : 0.0;
    for (const auto& b : bumps_) lo = std::max(lo, b.center + b.width);
    return lo;
  }

  // Height of the end graph over radius rho (world z), and its slope.
  double end_height(double rho) const {
    if (kind_ == Kind::Graph) return height(rho).v + center_.z();
    return end_z_of_radius(rho) + center_.z();
  }
  double end_slope(double rho) const {
    if (kind_ == Kind::Graph) return height(rho).d1;
    const double z = end_z_of_radius(rho);
    const double dR = radius(z).d1;
    if (std::abs(dR) < 1e-300) throw DomainError("end_slope: vertical wall");
    return 1.0 / dR;
  }

  // Flux-integral mass samples I(r) = (2 pi r)^-1 * contour integral of
  // y . grad(psi), 512-node periodic trapezoid.
  double mass_sample(double r, int nodes = 512) const {
    if (!(r > graph_region_min_radius()))
      throw DomainError(strf("mass_sample: r=%.6g below the graph region (min %.6g)", r,
                             graph_region_min_radius()));
    const double slope = end_slope(r);
    const double integral =
        periodic_trapezoid([&](double) { return r * slope * r; }, nodes);
    return integral / (2.0 * PI * r);
  }

  MassFit exterior_mass(const std::vector<double>& radii) const {
    if (radii.size() < 3) throw DomainError("exterior_mass: need at least 3 radii");
    MassFit fit;
    fit.radii = radii;
    for (double r : radii) fit.samples.push_back(mass_sample(r));
    const auto [mn, mx] = std::minmax_element(fit.samples.begin(), fit.samples.end());
    double mean = 0.0;
    for (double s : fit.samples) mean += s;
    mean /= fit.samples.size();
    if (*mx - *mn < 1e-12 * std::max(1.0, std::abs(mean))) {
      fit.mass = mean;
      fit.degenerate = true;
      return fit;
    }
    // I(r) = m + c r^-p: linear in (m, c) for fixed p; scan p then refine.
    auto solve_mc = [&](double p, double& m, double& c) {
      double s1 = 0, sx = 0, sxx = 0, sy = 0, sxy = 0;
      for (size_t k = 0; k < radii.size(); ++k) {
        const double x = std::pow(radii[k], -p), y = fit.samples[k];
        s1 += 1;
        sx += x;
        sxx += x * x;
        sy += y;
        sxy += x * y;
      }
      const double det = s1 * sxx - sx * sx;
      m = (sxx * sy - sx * sxy) / det;
      c = (s1 * sxy - sx * sy) / det;
    };
    auto rss = [&](double p) {
      double m, c;
      solve_mc(p, m, c);
      double r2 = 0;
      for (size_t k = 0; k < radii.size(); ++k) {
        const double e = fit.samples[k] - m - c * std::pow(radii[k], -p);
        r2 += e * e;
      }
      return r2;
    };
    double best_p = 0.5, best = rss(0.5);
    for (int i = 1; i <= 150; ++i) {
      const double p = 0.5 + 1.5 * i / 150.0;
      const double v = rss(p);
      if (v < best) {
        best = v;
        best_p = p;
      }
    }
    double lo = std::max(0.5, best_p - 0.02), hi = std::min(2.0, best_p + 0.02);
    for (int it = 0; it < 60; ++it) {  // golden-section refinement
      const double g = 0.5 * (3.0 - std::sqrt(5.0));
      const double x1 = lo + g * (hi - lo), x2 = hi - g * (hi - lo);
      if (rss(x1) < rss(x2))
        hi = x2;
      else
        lo = x1;
    }
    fit.power = 0.5 * (lo + hi);
    solve_mc(fit.power, fit.mass, fit.coeff);
    fit.residual = std::sqrt(rss(fit.power) / radii.size());
    return fit;
  }

  // Decay exponent of |psi'| over the sample radii; admissible ends decay
  // strictly faster than r^-1/2.
  double end_decay_exponent(const std::vector<double>& radii) const {
    if (radii.size() < 2) throw DomainError("end_decay_exponent: need >= 2 radii");
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (double r : radii) {
      const double x = std::log(r), y = std::log(std::max(std::abs(end_slope(r)), 1e-300));
      sx += x;
      sy += y;
      sxx += x * x;
      sxy += x * y;
    }
    const double n = static_cast<double>(radii.size());
    return -(n * sxy - sx * sy) / (n * sxx - sx * sx);
  }

  // ----- hypothesis checks -----

  HSignReport mean_curvature_sign_report(double q_lo, double q_hi, int n = 4000) const {
    if (!(q_hi > q_lo) || n < 2) throw DomainError("mean_curvature_sign_report: bad range");
    HSignReport rep;
    rep.samples = n;
    rep.min_H = std::numeric_limits<double>::infinity();
    for (int i = 0; i <= n; ++i) {
      const double q = q_lo + (q_hi - q_lo) * i / n;
      const double H = kind_ == Kind::Funnel ? funnel_H(q) : graph_H(std::max(q, 1e-9));
      if (H < rep.min_H) {
        rep.min_H = H;
        rep.argmin = q;
      }
    }
    return rep;
  }

  HSignReport mean_curvature_sign_report() const {
    if (kind_ == Kind::Funnel) return mean_curvature_sign_report(usable_lo_, q_hi_);
    const double lo = base_ == GraphBase::Log ? log_rho_min_
                      : base_ == GraphBase::CatenoidEnd ? m_ * 1.001
                                                        : 1e-6;
    return mean_curvature_sign_report(lo, q_hi_);
  }

 private:
  static void require(bool ok, const char* what) {
    if (!ok) throw DomainError(what);
  }
  double span() const { return std::max(q_hi_ - q_lo_, 1e-30); }

  static void fill_from_q(double q, double dq, double ddq, Deriv2& r) {
    if (!(q > 0.0)) throw DomainError("profile: squared radius not positive");
    const double R = std::sqrt(q);
    r.v = R;
    r.d1 = dq / (2.0 * R);
    r.d2 = ddq / (2.0 * R) - dq * dq / (4.0 * q * R);
  }

  double funnel_H(double z) const {
    const Deriv2 r = radius(z);
    if (!(r.v > 1e-12)) throw DomainError("mean curvature: at or past the pole");
    const double s2 = 1.0 + r.d1 * r.d1;
    return (s2 - r.v * r.d2) / (r.v * std::pow(s2, 1.5));
  }

  double graph_H(double rho) const {
    const Deriv2 g = height(rho);
    const double s2 = 1.0 + g.d1 * g.d1;
    // upward-graph mean curvature, negated for the downward normal
    return -(g.d2 / std::pow(s2, 1.5) + g.d1 / (rho * std::sqrt(s2)));
  }

  double funnel_domain_hi(const Vec3& p, double rho) const {
    const double probe = std::clamp(p.z(), -cap_depth_, q_hi_);
    const double d0 = (Vec2(radius_value(probe), probe) - Vec2(rho, p.z())).norm();
    return std::min(std::max(probe + d0 + 1e-9, usable_lo_ + 0.1), q_hi_);
  }

  double graph_domain_hi(const Vec3& p, double rho) const {
    const double probe = std::clamp(rho, graph_lo_ + 1e-9, q_hi_);
    const double d0 = (Vec2(probe, height(probe).v) - Vec2(rho, p.z())).norm();
    return std::min(probe + d0 + 1e-9, q_hi_);
  }

  // 1D closest-point search on the profile curve s -> curve(s) against the
  // query point, both in the (radius, height) half-plane.
  template <class CurveFn>
  double project_profile(double lo, double hi, const Vec2& qpt, CurveFn&& curve) const {
    if (!(hi > lo)) hi = lo + 1e-6;
    auto dist2 = [&](double s) { return (curve(s) - qpt).squaredNorm(); };
    const int N = 200;
    int best_i = 0;
    double best = std::numeric_limits<double>::infinity();
    for (int i = 0; i <= N; ++i) {
      const double s = lo + (hi - lo) * i / N;
      const double v = dist2(s);
      if (v < best) {
        best = v;
        best_i = i;
      }
    }
    double a = lo + (hi - lo) * std::max(best_i - 1, 0) / N;
    double b = lo + (hi - lo) * std::min(best_i + 1, N) / N;
    // golden-section: robust near profile kinks and the pole
    const double g = 0.5 * (3.0 - std::sqrt(5.0));
    for (int it = 0; it < 120; ++it) {
      const double x1 = a + g * (b - a), x2 = b - g * (b - a);
      if (dist2(x1) < dist2(x2))
        b = x2;
      else
        a = x1;
      if (b - a < 1e-15 * (1.0 + std::abs(a))) break;
    }
    return 0.5 * (a + b);
  }

  double end_z_of_radius(double rho) const {
    // Newton on R(z) = rho in the monotone region above bumps.
    if (!(rho > radius(end_mono_z_).v))
      throw DomainError("end_z_of_radius: radius below the graph region");
    double z = m_ * std::acosh(std::max(rho / m_, 1.0 + 1e-12));
    z = std::max(z, end_mono_z_ + 1e-9);
    for (int it = 0; it < 80; ++it) {
      const Deriv2 r = radius(z);
      const double step = (r.v - rho) / r.d1;
      z -= step;
      if (z < end_mono_z_) z = end_mono_z_ + 1e-12;
      if (std::abs(step) < 1e-14 * (1.0 + std::abs(z))) return z;
    }
    throw ProjectionError("end_z_of_radius: Newton did not converge");
  }

  double wrapped_dphi(const Vec3& A, const Vec3& B) const {
    const Vec3 a = A - center_, b = B - center_;
    const double pa = std::atan2(a.y(), a.x()), pb = std::atan2(b.y(), b.x());
    double d = pb - pa;
    while (d > PI) d -= 2.0 * PI;
    while (d <= -PI) d += 2.0 * PI;
    return d;
  }

  void check_band_domain(double q) const {
    if (kind_ == Kind::Graph && base_ == GraphBase::CatenoidEnd) {
      if (!(q >= m_)) throw DomainError("band: below the catenoid-end neck");
      return;
    }
    if (q < q_lo_ - 1e-9 * span() || q > q_hi_ + 1e-9 * span())
      throw DomainError(strf("band: q=%.17g outside [%.17g, %.17g]", q, q_lo_, q_hi_));
  }

  void init() {
    if (kind_ == Kind::Funnel) {
      R0_ = std::sqrt(m_ * m_ + p2_);
      cap_depth_ = cap_factor_ * m_;
      a_cap_ = (R0_ * R0_ + cap_depth_ * cap_depth_) / (cap_depth_ * cap_depth_ * cap_depth_);
      usable_lo_ = -0.8 * cap_depth_;
      ref_q_ = 0.0;  // neck circle
      bumps_cleared_cap_ = true;
      double bump_top = 0.0;
      for (const auto& b : bumps_) {
        if (!(b.width > 0.0)) throw DomainError("funnel: bump width must be positive");
        if (b.center - b.width < usable_lo_ + 0.05 * cap_depth_)
          throw DomainError("funnel: bump support reaches the cap region");
        if (b.center - b.width < 0.0) bumps_cleared_cap_ = false;
        bump_top = std::max(bump_top, b.center + b.width);
      }
      end_mono_z_ = std::max(1e-6 * m_, bump_top * (1.0 + 1e-9));
      q_lo_ = usable_lo_;
      q_hi_ = std::max(4.0 * std::max(m_, 1.0), bump_top + m_);
      // wall must stay clear of the axis
      for (int i = 0; i <= 4000; ++i) {
        const double z = q_lo_ + (q_hi_ - q_lo_) * i / 4000.0;
        if (!(radius(z).v > 1e-9 * m_))
          throw DomainError("funnel: profile radius vanishes inside the usable region");
      }
    } else {
      double bump_top = 0.0;
      for (const auto& b : bumps_) {
        if (!(b.width > 0.0)) throw DomainError("graph: bump width must be positive");
        if (b.center - b.width < 0.0)
          throw DomainError("graph: bump support must stay off the axis");
        bump_top = std::max(bump_top, b.center + b.width);
      }
      if (base_ == GraphBase::CatenoidEnd && !bumps_.empty())
        throw DomainError("graph: catenoid end takes no bumps");
      log_rho_min_ = 0.05 * std::max(1.0, a_);
      graph_lo_ = base_ == GraphBase::Log ? log_rho_min_
                  : base_ == GraphBase::CatenoidEnd ? m_ * (1.0 + 1e-10)
                                                    : 0.0;
      end_mono_z_ = bump_top;
      q_lo_ = graph_lo_;
      ref_q_ = base_ == GraphBase::CatenoidEnd ? m_ : q_lo_;
      q_hi_ = std::max(4.0 * std::max(1.0, m_), bump_top * 1.5 + 1.0);
    }
    build_potential();
  }

  void build_potential() {
    if (kind_ == Kind::Graph && base_ == GraphBase::CatenoidEnd) {
      const double w0 = 0.0;  // P(m) = 0: w = sqrt(m^2 - m^2)
      cat_end_shift_ = 0.5 * (m_ * w0 + m_ * m_ * std::log(m_ + w0));
      return;
    }
    const double spacing = 0.0025 * std::max(1.0, m_);
    int n = static_cast<int>(std::ceil((q_hi_ - q_lo_) / spacing)) + 1;
    n = std::clamp(n, 801, 24001);
    std::vector<double> y(n, 0.0);
    double acc = 0.0;
    for (int i = 1; i < n; ++i) {
      const double a = q_lo_ + (q_hi_ - q_lo_) * (i - 1) / (n - 1);
      const double b = q_lo_ + (q_hi_ - q_lo_) * i / (n - 1);
      acc += adaptive_simpson([&](double q) { return band_integrand(q); }, a, b, 1e-13, 30);
      y[i] = acc;
    }
    P_ = CubicSpline(q_lo_, q_hi_, std::move(y));
    P_shift_ = P_.value(std::clamp(ref_q_, q_lo_, q_hi_));
  }

  Kind kind_ = Kind::Funnel;
  GraphBase base_ = GraphBase::Plane;
  double m_ = 1.0;
  double p2_ = 0.0;
  double a_ = 1.0;
  std::vector<Bump> bumps_;
  double cap_factor_ = 1.2;
  double cap_depth_ = 1.2;
  double a_cap_ = 0.0;
  double R0_ = 1.0;
  double usable_lo_ = 0.0;
  double ref_q_ = 0.0;
  double q_lo_ = 0.0, q_hi_ = 0.0;
  double graph_lo_ = 0.0;
  double log_rho_min_ = 0.05;
  double end_mono_z_ = 0.0;
  bool bumps_cleared_cap_ = true;
  CubicSpline P_;
  double P_shift_ = 0.0;
  double cat_end_shift_ = 0.0;
  Vec3 center_ = Vec3::Zero();
};

}  // namespace cappen
