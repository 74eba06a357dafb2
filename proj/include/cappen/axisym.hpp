#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include "cappen/common.hpp"
#include "cappen/quadrature.hpp"
#include "cappen/support.hpp"

namespace cappen {

// Closed forms for the catenoid funnel rho = m cosh(z/m) foliated by flat
// horizontal disks. `h` is the contact height; the capillary parameter of
// the leaf through height h is t = h/m (wall slope sinh(h/m) = sinh t).
struct CatenoidQuantities {
  double m = 1.0;
  double h = 0.0;            // contact height
  double t = 0.0;            // capillary parameter h/m
  double disk_radius = 0.0;  // m cosh(h/m)
  double disk_area = 0.0;    // pi m^2 cosh^2(h/m)
  double band_area = 0.0;    // pi m h + pi m^2 sinh(h/m) cosh(h/m), from the neck
  double boundary_len = 0.0; // 2 pi m cosh(h/m)
  double contact_cos = 0.0;  // -tanh(h/m)
  double mf = 0.0;           // sin(theta) sqrt(area/pi) = m identically
  double denergy_dh = 0.0;   // d/dh [ disk_area - tanh(t) band_area ] at fixed t
};

inline CatenoidQuantities catenoid_exact(double m, double h) {
  if (!(m > 0.0)) throw DomainError("catenoid_exact: need m > 0");
  CatenoidQuantities q;
  q.m = m;
  q.h = h;
  q.t = h / m;
  const double ch = std::cosh(q.t), sh = std::sinh(q.t);
  q.disk_radius = m * ch;
  q.disk_area = PI * m * m * ch * ch;
  q.band_area = PI * m * h + PI * m * m * sh * ch;
  q.boundary_len = 2.0 * PI * m * ch;
  q.contact_cos = -std::tanh(q.t);
  q.mf = std::sqrt(q.disk_area / PI) / ch;
  // d(disk area)/dh = 2 pi m cosh sinh; d(band)/dh = 2 pi m cosh^2;
  // at the matching t the combination vanishes (the leaf is critical).
  q.denergy_dh = 2.0 * PI * m * ch * sh - std::tanh(q.t) * 2.0 * PI * m * ch * ch;
  return q;
}

// ----- reduced axisymmetric solver -----
// Candidate stationary configurations of J_t among (a) horizontal disks
// spanning the funnel and (b) catenoid pieces bridging two wall circles.

struct AxisymCandidate {
  enum class Type { Disk, CatenoidPiece };
  Type type = Type::Disk;
  double c1 = 0.0, c2 = 0.0;  // contact heights (disk uses c1)
  double a = 0.0, b = 0.0;    // piece: rho = a cosh((z-b)/a)
  double area = 0.0;
  double lateral = 0.0;       // wetted support area (disks: from the cap pole)
  double energy = 0.0;        // area - tanh(t) * lateral
  double contact_resid = 0.0;
  bool degenerate = false;    // piece coincides with the wall
};

struct AxisymResult {
  double t = 0.0;
  std::vector<AxisymCandidate> candidates;  // sorted by energy
  const AxisymCandidate* best_disk() const {
    for (const auto& c : candidates)
      if (c.type == AxisymCandidate::Type::Disk) return &c;
    return nullptr;
  }
};

namespace detail {

// All roots of R'(z) = sinh(t) on [0, z_hi] by scan + bisection.
inline std::vector<double> slope_match_heights(const SupportSurface& S, double t, double z_hi) {
  const double target = std::sinh(t);
  auto F = [&](double z) { return S.radius(z).d1 - target; };
  std::vector<double> roots;
  const int N = 8000;
  double prev = F(0.0);
  if (std::abs(prev) < 1e-14) roots.push_back(0.0);
  for (int i = 1; i <= N; ++i) {
    const double z = z_hi * i / N;
    const double cur = F(z);
    if (prev * cur < 0.0) {
      double lo = z_hi * (i - 1) / N, hi = z;
      for (int it = 0; it < 100; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (F(lo) * F(mid) <= 0.0)
          hi = mid;
        else
          lo = mid;
      }
      roots.push_back(0.5 * (lo + hi));
    } else if (cur == 0.0) {
      roots.push_back(z);
    }
    prev = cur;
  }
  return roots;
}

inline double piece_area(double a, double b, double c1, double c2) {
  auto anti = [&](double z) {
    return 2.0 * PI * a * (0.5 * z + 0.25 * a * std::sinh(2.0 * (z - b) / a));
  };
  return anti(c2) - anti(c1);
}

}  // namespace detail

inline AxisymResult axisym_solve(const SupportSurface& S, double t, double z_hi_hint = 0.0) {
  if (S.kind() != SupportSurface::Kind::Funnel)
    throw DomainError("axisym_solve: funnel kinds only");
  if (!(t >= 0.0)) throw DomainError("axisym_solve: need t >= 0");
  AxisymResult res;
  res.t = t;
  const double m = S.scale();
  double z_hi = z_hi_hint > 0.0 ? z_hi_hint : m * (t + 1.5);
  z_hi = std::min(z_hi, S.band_domain_hi() - 1e-9);
  const double tht = std::tanh(t);
  const double offset0 = S.area_below_reference();

  for (double c : detail::slope_match_heights(S, t, z_hi)) {
    AxisymCandidate cand;
    cand.type = AxisymCandidate::Type::Disk;
    cand.c1 = cand.c2 = c;
    const double R = S.radius(c).v;
    cand.area = PI * R * R;
    cand.lateral = offset0 + 2.0 * PI * S.band_potential(c);
    cand.energy = cand.area - tht * cand.lateral;
    const double dR = S.radius(c).d1;
    cand.contact_resid = std::abs(-dR / std::sqrt(1.0 + dR * dR) + tht);
    res.candidates.push_back(cand);
  }

  // Catenoid pieces: Newton on the two contact-cosine residuals in (a, b).
  if (t > 1e-9) {
    auto contacts = [&](double a, double b, double& c1, double& c2) -> bool {
      auto h = [&](double z) { return a * std::cosh((z - b) / a) - S.radius(z).v; };
      const int N = 2000;
      const double lo = std::max(S.usable_lo() * 0.5, b - 3.0 * m), hi = std::min(z_hi, b + 3.0 * m);
      if (!(hi > lo)) return false;
      double zprev = lo, hprev = h(lo);
      std::vector<double> xs;
      for (int i = 1; i <= N && xs.size() < 2; ++i) {
        const double z = lo + (hi - lo) * i / N;
        const double hv = h(z);
        if (hprev * hv < 0.0) {
          double za = zprev, zb = z;
          for (int it = 0; it < 80; ++it) {
            const double mid = 0.5 * (za + zb);
            if (h(za) * h(mid) <= 0.0)
              zb = mid;
            else
              za = mid;
          }
          xs.push_back(0.5 * (za + zb));
        }
        zprev = z;
        hprev = hv;
      }
      if (xs.size() != 2) return false;
      c1 = xs[0];
      c2 = xs[1];
      // the piece must dip inside the wall between the contacts
      return h(0.5 * (c1 + c2)) < 0.0;
    };
    auto residuals = [&](double a, double b, Vec2& r, double& c1, double& c2) -> bool {
      if (!(a > 1e-3 * m)) return false;
      if (!contacts(a, b, c1, c2)) return false;
      for (int side = 0; side < 2; ++side) {
        const double z = side == 0 ? c1 : c2;
        const double rp = std::sinh((z - b) / a);
        const double Rp = S.radius(z).d1;
        const double cosv =
            -(1.0 + rp * Rp) / (std::sqrt(1.0 + rp * rp) * std::sqrt(1.0 + Rp * Rp));
        r[side] = cosv + tht;
      }
      return true;
    };
    const double R0 = S.radius(0.0).v;
    for (double fa : {0.35, 0.6, 0.85}) {
      double a = fa * R0, b = 0.5 * m * t;
      Vec2 r;
      double c1, c2;
      if (!residuals(a, b, r, c1, c2)) continue;
      bool ok = false;
      for (int it = 0; it < 60; ++it) {
        if (r.norm() < 1e-11) {
          ok = true;
          break;
        }
        const double d = 1e-7 * m;
        Vec2 ra, rb;
        double d1, d2;
        if (!residuals(a + d, b, ra, d1, d2) || !residuals(a, b + d, rb, d1, d2)) break;
        Mat2 Jm;
        Jm.col(0) = (ra - r) / d;
        Jm.col(1) = (rb - r) / d;
        if (std::abs(Jm.determinant()) < 1e-14) break;
        const Vec2 step = Jm.partialPivLu().solve(r);
        double lam = 1.0;
        bool moved = false;
        for (int ls = 0; ls < 12; ++ls) {
          Vec2 rn;
          double n1, n2;
          if (residuals(a - lam * step[0], b - lam * step[1], rn, n1, n2) &&
              rn.norm() < r.norm()) {
            a -= lam * step[0];
            b -= lam * step[1];
            r = rn;
            c1 = n1;
            c2 = n2;
            moved = true;
            break;
          }
          lam *= 0.5;
        }
        if (!moved) break;
      }
      if (!ok) continue;
      AxisymCandidate cand;
      cand.type = AxisymCandidate::Type::CatenoidPiece;
      cand.a = a;
      cand.b = b;
      cand.c1 = c1;
      cand.c2 = c2;
      cand.area = detail::piece_area(a, b, c1, c2);
      cand.lateral = 2.0 * PI * (S.band_potential(c2) - S.band_potential(c1));
      cand.energy = cand.area - tht * cand.lateral;
      cand.contact_resid = r.norm();
      double gap = 0.0;
      for (int i = 0; i <= 50; ++i) {
        const double z = c1 + (c2 - c1) * i / 50.0;
        gap = std::max(gap, std::abs(a * std::cosh((z - b) / a) - S.radius(z).v));
      }
      cand.degenerate = gap < 1e-7 * m;
      // dedupe against already-found pieces
      bool dup = false;
      for (const auto& c : res.candidates)
        if (c.type == AxisymCandidate::Type::CatenoidPiece &&
            std::abs(c.a - cand.a) < 1e-6 * m && std::abs(c.b - cand.b) < 1e-6 * m)
          dup = true;
      if (!dup) res.candidates.push_back(cand);
    }
  }

  std::sort(res.candidates.begin(), res.candidates.end(),
            [](const AxisymCandidate& x, const AxisymCandidate& y) { return x.energy < y.energy; });
  return res;
}

// ----- profile table differences -----
// Second derivative of area as a function of wetted area along a sweep,
// by 3-point differences on the nonuniform (lateral, area) table.

struct ProfilePoint {
  double lateral = 0.0;  // abscissa
  double area = 0.0;     // ordinate
  double d1 = 0.0;
  double d2 = 0.0;
  bool valid = false;  // interior points only
};

inline std::vector<ProfilePoint> profile_table_derivatives(const std::vector<double>& lateral,
                                                           const std::vector<double>& area) {
  const int n = static_cast<int>(lateral.size());
  if (n != static_cast<int>(area.size()) || n < 3)
    throw DomainError("profile_table_derivatives: need >= 3 matched samples");
  std::vector<ProfilePoint> out(n);
  for (int i = 0; i < n; ++i) {
    out[i].lateral = lateral[i];
    out[i].area = area[i];
  }
  for (int i = 1; i + 1 < n; ++i) {
    const double hm = lateral[i] - lateral[i - 1];
    const double hp = lateral[i + 1] - lateral[i];
    if (!(hm > 0.0) || !(hp > 0.0))
      throw DomainError("profile_table_derivatives: abscissa must increase strictly");
    out[i].d1 = (hp / (hm + hp)) * (area[i] - area[i - 1]) / hm +
                (hm / (hm + hp)) * (area[i + 1] - area[i]) / hp;
    out[i].d2 = 2.0 * (area[i - 1] / (hm * (hm + hp)) - area[i] / (hm * hp) +
                       area[i + 1] / (hp * (hm + hp)));
    out[i].valid = true;
  }
  return out;
}

}  // namespace cappen
