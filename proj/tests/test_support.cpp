#include <catch2/catch_amalgamated.hpp>
#include <cmath>

#include "cappen/support.hpp"
#include "oracles.hpp"

using namespace cappen;

namespace {
// Independent profile for the unperturbed funnel of mass m: sqrt(m^2 cosh^2(z/m) + p2).
double funnel_radius(double m, double p2, double z) {
  const double c = m * std::cosh(z / m);
  return std::sqrt(c * c + p2);
}
}  // namespace

TEST_CASE("funnel radius matches the closed form with consistent derivatives") {
  SupportSurface S = SupportSurface::funnel(1.0, 0.0);
  for (double z : {0.0, 0.3, 1.0, 2.4}) {
    const auto r = S.radius(z);
    CHECK(r.v == Catch::Approx(std::cosh(z)).epsilon(1e-14));
    CHECK(r.d1 == Catch::Approx(std::sinh(z)).epsilon(1e-12));
    CHECK(r.d2 == Catch::Approx(std::cosh(z)).epsilon(1e-12));
  }
  SupportSurface P = SupportSurface::funnel(1.5, -0.4);
  for (double z : {0.1, 0.9, 2.0}) {
    const auto r = P.radius(z);
    CHECK(r.v == Catch::Approx(funnel_radius(1.5, -0.4, z)).epsilon(1e-13));
    const double fd = oracle::deriv_c4([&](double x) { return P.radius(x).v; }, z, 1e-4);
    CHECK(r.d1 == Catch::Approx(fd).margin(1e-10));
    const double fd2 = oracle::deriv_c4([&](double x) { return P.radius(x).d1; }, z, 1e-4);
    CHECK(r.d2 == Catch::Approx(fd2).margin(1e-9));
  }
}

TEST_CASE("cap joins the wall twice continuously differentiably and closes at a simple pole") {
  for (double p2 : {0.0, -0.3, 0.4}) {
    SupportSurface S = SupportSurface::funnel(1.0, p2);
    // below z=0 the profile continues into the cap; match value/d1/d2 at 0
    const auto above = S.radius(1e-12);
    const auto below = S.radius(-1e-12);
    CHECK(below.v == Catch::Approx(above.v).epsilon(1e-9));
    CHECK(below.d1 == Catch::Approx(above.d1).margin(1e-9));
    CHECK(below.d2 == Catch::Approx(above.d2).margin(1e-6));
    // pole: the squared radius has a simple root, so the profile closes like
    // sqrt(z - zpole) and the domain ends there
    const double zpole = -S.cap_depth();
    CHECK_THROWS_AS(S.radius(zpole - 1e-6), DomainError);
    const double r6 = S.radius(zpole + 1e-6).v;
    const double r8 = S.radius(zpole + 1e-8).v;
    CHECK(r6 > 1e-7);
    CHECK(r6 / r8 == Catch::Approx(10.0).epsilon(1e-2));
  }
}

TEST_CASE("projection returns the closest wall point") {
  SupportSurface S = SupportSurface::funnel(1.0, 0.0);
  // points near the wall project onto their profile foot
  for (double z : {0.2, 1.0, 2.1}) {
    const double R = S.radius(z).v;
    const Vec3 x(R * 1.05, 0.0, z);
    const Vec3 p = S.project(x);
    const double d0 = (x - p).norm();
    // no nearby wall point does better
    for (double dz : {-0.05, -0.01, 0.01, 0.05}) {
      const double Rq = S.radius(z + dz).v;
      const Vec3 q(Rq, 0.0, z + dz);
      CHECK((x - q).norm() >= d0 - 1e-12);
    }
    // projected point lies on the wall
    CHECK(std::hypot(p.x(), p.y()) == Catch::Approx(S.radius(p.z()).v).margin(1e-10));
  }
  // a point on the axis above the neck projects onto the neck circle
  const Vec3 p = S.project(Vec3(0.0, 0.0, 0.0));
  CHECK(std::hypot(p.x(), p.y()) == Catch::Approx(1.0).margin(1e-6));
}

TEST_CASE("normals are unit, outward, and orthogonal to the wall tangent") {
  SupportSurface S = SupportSurface::funnel(1.0, -0.2);
  for (double z : {-0.8, 0.0, 0.7, 1.9}) {
    const double R = S.radius(z).v;
    if (R < 1e-6) continue;
    const Vec3 x(R, 0.0, z);
    const Vec3 n = S.normal_at(x);
    CHECK(n.norm() == Catch::Approx(1.0).epsilon(1e-12));
    const Vec3 tangent(S.radius(z).d1, 0.0, 1.0);  // meridian direction
    CHECK(std::abs(n.dot(tangent)) < 1e-10);
    CHECK(n.x() > 0.0);  // radially outward component
  }
}

TEST_CASE("funnel mean curvature: zero on the catenoid, signed by the pinch") {
  SupportSurface cat = SupportSurface::funnel(1.0, 0.0);
  for (double z : {0.1, 0.8, 1.7}) {
    const Vec3 x(cat.radius(z).v, 0.0, z);
    CHECK(std::abs(cat.mean_curvature_at(x)) < 1e-10);
  }
  // pinched: H >= 0 everywhere on the wall (checked on the wall grid)
  const HSignReport pos = SupportSurface::funnel(1.0, -0.35).mean_curvature_sign_report();
  CHECK(pos.min_H >= -1e-12);
  // bulged: H < 0 somewhere
  const HSignReport neg = SupportSurface::funnel(1.0, 0.35).mean_curvature_sign_report();
  CHECK(neg.min_H < -1e-4);
}

TEST_CASE("band potential matches the catenoid closed form and its own derivative") {
  SupportSurface S = SupportSurface::funnel(1.0, 0.0);
  S.prepare_band(3.0);
  // P(c) - P(0) = integral of cosh^2 from 0 to c = c/2 + sinh(2c)/4
  auto closed = [](double c) { return 0.5 * c + 0.25 * std::sinh(2.0 * c); };
  for (double c : {0.25, 1.0, 2.5}) {
    CHECK(S.band_potential(c) - S.band_potential(0.0) ==
          Catch::Approx(closed(c)).epsilon(1e-9));
    const double fd = oracle::deriv_c4([&](double q) { return S.band_potential(q); }, c, 1e-4);
    CHECK(S.band_potential_deriv(c) == Catch::Approx(fd).margin(1e-8));
    CHECK(S.band_potential_deriv(c) ==
          Catch::Approx(std::cosh(c) * std::cosh(c)).epsilon(1e-9));
  }
}

TEST_CASE("lateral band areas agree with an independent Simpson quadrature") {
  SupportSurface S = SupportSurface::funnel(1.0, -0.3, {Bump{1.2, 0.4, 0.15}});
  S.prepare_band(3.0);
  auto integrand = [&](double z) {
    const auto r = S.radius(z);
    return 2.0 * oracle::kPi * r.v * std::sqrt(1.0 + r.d1 * r.d1);
  };
  const double ref = oracle::simpson(integrand, 0.2, 2.2, 4000);
  CHECK(S.lateral_area_circles(0.2, 2.2) == Catch::Approx(ref).epsilon(1e-9));
  CHECK(2.0 * oracle::kPi * (S.band_potential(2.2) - S.band_potential(0.2)) ==
        Catch::Approx(ref).epsilon(1e-8));
}

TEST_CASE("polygon-loop lateral area: exact rings, converging tilted loops") {
  SupportSurface S = SupportSurface::funnel(1.0, 0.0);
  S.prepare_band(2.0);
  const double c = 1.0;
  const double R = S.radius(c).v;
  auto loop_at = [&](int n, auto&& height) {
    std::vector<Vec3> loop;
    for (int i = 0; i < n; ++i) {
      const double phi = 2.0 * oracle::kPi * i / n;
      loop.push_back(Vec3(R * std::cos(phi), R * std::sin(phi), height(phi)));
    }
    return loop;
  };
  // a horizontal polygon ring has constant band coordinate along every chord,
  // so the chord quadrature reproduces the circle band exactly
  const double exact = S.lateral_area_circles(0.0, c);
  const double ring64 = S.lateral_area(0.0, {loop_at(64, [&](double) { return c; })});
  CHECK(ring64 == Catch::Approx(exact).epsilon(1e-12));
  // height-modulated loop vs an independent trapezoid oracle on the closed
  // form P(z) = z/2 + sinh(2z)/4 of the unpinched profile potential
  auto wavy = [&](double phi) { return c + 0.2 * std::sin(phi); };
  auto P = [](double z) { return 0.5 * z + 0.25 * std::sinh(2.0 * z); };
  double ref = 0.0;
  const int N = 1 << 14;
  for (int i = 0; i < N; ++i) ref += P(wavy(2.0 * oracle::kPi * i / N)) * (2.0 * oracle::kPi / N);
  const double coarse = S.lateral_area(0.0, {loop_at(64, wavy)});
  const double fine = S.lateral_area(0.0, {loop_at(256, wavy)});
  CHECK(std::abs(fine - ref) < 1e-3);
  CHECK(std::abs(fine - ref) < 0.25 * std::abs(coarse - ref));
  // clockwise winding flips the sign
  auto rev = loop_at(64, wavy);
  std::reverse(rev.begin(), rev.end());
  CHECK(S.lateral_area(0.0, {rev}) == Catch::Approx(-coarse).epsilon(1e-12));
  // a loop dipping below the reference band is rejected
  auto low = loop_at(64, [](double) { return -0.5; });
  CHECK_THROWS_AS(S.lateral_area(0.0, {low}), RegionError);
}

TEST_CASE("cap area below the reference circle matches quadrature") {
  SupportSurface S = SupportSurface::funnel(1.0, 0.0);
  S.prepare_band(1.0);
  // wall area from the cap pole up to z=0, via the z-parametrized integrand
  auto integrand = [&](double z) {
    const auto r = S.radius(z);
    return 2.0 * oracle::kPi * r.v * std::sqrt(1.0 + r.d1 * r.d1);
  };
  const double ref = oracle::simpson(integrand, -S.cap_depth() + 1e-10, 0.0, 8000);
  CHECK(S.area_below_reference() == Catch::Approx(ref).epsilon(1e-6));
}

TEST_CASE("exterior mass: catenoid, log graph, and plane") {
  SupportSurface cat = SupportSurface::funnel(1.0, 0.0);
  CHECK(cat.mass_sample(25.0) == Catch::Approx(oracle::kMassSampleR25).epsilon(1e-12));
  CHECK(cat.mass_sample(90.0) == Catch::Approx(oracle::kMassSampleR90).epsilon(1e-12));
  const MassFit fit = cat.exterior_mass({25.0, 40.0, 60.0, 90.0});
  CHECK(std::abs(fit.mass - 1.0) < 1e-4);
  CHECK(fit.power > 1.5);  // catenoid decay is r^-2

  const MassFit lg = SupportSurface::graph_log(2.0).exterior_mass({25.0, 40.0, 60.0, 90.0});
  CHECK(lg.mass == Catch::Approx(2.0).margin(1e-9));
  CHECK(lg.degenerate);  // I(r) is exactly constant

  const MassFit pl = SupportSurface::plane().exterior_mass({25.0, 40.0, 60.0, 90.0});
  CHECK(std::abs(pl.mass) < 1e-12);

  // pinched funnel keeps the same mass: the pinch decays at the end
  const MassFit pf =
      SupportSurface::funnel(1.0, -0.3).exterior_mass({25.0, 40.0, 60.0, 90.0});
  CHECK(std::abs(pf.mass - 1.0) < 1e-4);
}

TEST_CASE("construction rejects invalid inputs") {
  CHECK_THROWS_AS(SupportSurface::funnel(-1.0, 0.0), DomainError);
  CHECK_THROWS_AS(SupportSurface::funnel(1.0, -1.0), DomainError);  // p2 <= -m^2
  CHECK_THROWS_AS(SupportSurface::funnel(1.0, 0.0, {Bump{-0.6, 0.35, 0.2}}), DomainError);
  CHECK_THROWS_AS(SupportSurface::funnel(1.0, 0.0, {Bump{1.0, -0.1, 0.2}}), DomainError);
  CHECK_THROWS_AS(SupportSurface::funnel(1.0, 0.0, {}, 10.0), DomainError);
  // bump so deep the wall would cross the axis
  CHECK_THROWS_AS(SupportSurface::funnel(1.0, 0.0, {Bump{1.5, 0.4, -2.5}}), DomainError);
  // a bump straddling the neck constructs, but the wetted cap area is undefined
  SupportSurface straddle = SupportSurface::funnel(1.0, 0.0, {Bump{0.1, 0.5, 0.2}});
  CHECK_THROWS_AS(straddle.area_below_reference(), DomainError);
  CHECK_THROWS_AS(SupportSurface::graph_log(0.0), DomainError);
}

TEST_CASE("translation and scaling transform geometry consistently") {
  SupportSurface S = SupportSurface::funnel(1.0, -0.2);
  SupportSurface T = S.translated(Vec3(0.5, -0.25, 1.0));
  const Vec3 x(1.4, 0.2, 0.9);
  CHECK((T.project(x + Vec3(0.5, -0.25, 1.0)) - (S.project(x) + Vec3(0.5, -0.25, 1.0))).norm() <
        1e-9);

  SupportSurface U = S.scaled(2.0);
  CHECK(U.radius(1.6).v == Catch::Approx(2.0 * S.radius(0.8).v).epsilon(1e-12));
  U.prepare_band(3.0);
  SupportSurface S2 = S;
  S2.prepare_band(1.5);
  CHECK(U.lateral_area_circles(0.0, 3.0) ==
        Catch::Approx(4.0 * S2.lateral_area_circles(0.0, 1.5)).epsilon(1e-8));
}

TEST_CASE("catenoid-end graph exposes the exact band closed form") {
  SupportSurface E = SupportSurface::graph_catenoid_end(1.0);
  E.prepare_band(5.0);
  // band between circles rho=1 (the neck) and rho=4 of the catenoid end:
  // 2 pi int_1^4 rho sqrt(1+psi'^2) drho with psi' = 1/sqrt(rho^2-1). The
  // integrand blows up like an inverse square root at the neck, so integrate
  // in rho = cosh(u), where it turns into the smooth 2 pi cosh^2(u).
  auto integrand = [](double u) {
    const double c = std::cosh(u);
    return 2.0 * oracle::kPi * c * c;
  };
  const double ref = oracle::simpson(integrand, 0.0, std::acosh(4.0), 2000);
  CHECK(2.0 * oracle::kPi * (E.band_potential(4.0) - E.band_potential(1.0)) ==
        Catch::Approx(ref).epsilon(1e-6));
  CHECK(E.end_slope(10.0) == Catch::Approx(1.0 / std::sqrt(99.0)).epsilon(1e-12));
}

TEST_CASE("decay exponent estimates distinguish the model ends") {
  SupportSurface cat = SupportSurface::funnel(1.0, 0.0);
  CHECK(cat.end_decay_exponent({20.0, 30.0, 45.0, 70.0}) == Catch::Approx(1.0).epsilon(5e-2));
  SupportSurface lg = SupportSurface::graph_log(1.0);
  CHECK(lg.end_decay_exponent({20.0, 30.0, 45.0, 70.0}) == Catch::Approx(1.0).epsilon(5e-2));
}
