#include <catch2/catch_amalgamated.hpp>
#include <cmath>
#include <vector>

#include "cappen/energy.hpp"
#include "cappen/mesh.hpp"
#include "cappen/support.hpp"
#include "oracles.hpp"

using namespace cappen;

namespace {

CapillaryState leaf_state(double t, int K) {
  CapillaryState st;
  st.t = t;
  static SupportSurface S = [] {
    SupportSurface s = SupportSurface::funnel(1.0, 0.0);
    s.prepare_band(3.5);
    return s;
  }();
  st.S = &S;
  st.mesh = make_disk(std::cosh(t), K, t);
  st.offset = S.area_below_reference();
  refresh_state(st);
  return st;
}

double dot_field(const std::vector<Vec3>& g, const std::vector<Vec3>& w) {
  double s = 0.0;
  for (size_t i = 0; i < g.size(); ++i) s += g[i].dot(w[i]);
  return s;
}

// Leading-order wetting deficit of an n-chord ring at height q on the unit
// catenoid wall: the band is measured through the chords' foot points, which
// dip below the ring by the sagitta times the wall slope factor.
double ring_deficit(double q, int n) {
  return std::sinh(q) * std::cosh(q) * std::pow(2.0 * oracle::kPi, 3) / (12.0 * n * n);
}

}  // namespace

TEST_CASE("flat leaf state reproduces the closed forms") {
  const double t = 1.0;
  const int K = 40;
  CapillaryState st = leaf_state(t, K);
  // planar triangulation covers the inscribed polygon exactly
  const int n = 6 * K;
  const double R = std::cosh(t);
  const double poly = 0.5 * n * R * R * std::sin(2.0 * oracle::kPi / n);
  CHECK(st.area == Catch::Approx(poly).epsilon(1e-12));
  // the band dips below the smooth ring value by the chord foot-point
  // deficit, mirroring the inscribed-polygon deficit of the area above
  const double smooth = oracle::kPi * t + oracle::kPi * std::sinh(t) * std::cosh(t);
  CHECK(st.band == Catch::Approx(smooth - ring_deficit(t, n)).margin(1e-5));
  CHECK(st.band < smooth);
  CHECK(st.lateral == Catch::Approx(st.offset + st.band).epsilon(1e-14));
  CHECK(st.energy == Catch::Approx(st.area - std::tanh(t) * st.lateral).epsilon(1e-14));
  CHECK(free_energy(st) == Catch::Approx(st.energy).epsilon(1e-14));
  // the contact angle of the leaf is exact: vertex normals are e3, the wall
  // normal meets it at cosine -tanh t
  CHECK(st.residual < 1e-12);
  CHECK(free_energy_mass(t, oracle::kPi * R * R) == Catch::Approx(1.0).epsilon(1e-14));
  CHECK(st.cos_theta() == Catch::Approx(-std::tanh(t)).margin(1e-15));
  CHECK(st.sin_theta() * st.sin_theta() + st.cos_theta() * st.cos_theta() ==
        Catch::Approx(1.0).margin(1e-15));
}

TEST_CASE("interior area gradient of a planar triangulation vanishes exactly") {
  CapillaryState st = leaf_state(0.8, 24);
  const auto g = area_gradient(st.mesh);
  for (int v = 0; v < st.mesh.nv(); ++v)
    if (!st.mesh.is_boundary_vertex(v)) CHECK(g[v].norm() < 1e-13);
  // the full energy gradient is small (the leaf is a discrete near-optimum)
  CHECK(st.grad_max < 2e-2);
}

TEST_CASE("area and band gradients match directional finite differences") {
  CapillaryState st = leaf_state(0.9, 12);
  const auto raw = oracle::gaussian_field(3 * st.mesh.nv(), 77);
  std::vector<Vec3> W(st.mesh.nv());
  for (int v = 0; v < st.mesh.nv(); ++v) W[v] = Vec3(raw[3 * v], raw[3 * v + 1], raw[3 * v + 2]);
  auto along = [&](double s, auto&& functional) {
    TriSurface m = st.mesh;
    for (int v = 0; v < m.nv(); ++v) m.V[v] += s * W[v];
    return functional(m);
  };
  const double h = 1e-5;

  const double da_fd = oracle::deriv_c4([&](double s) {
    return along(s, [](const TriSurface& m) { return area_value(m); });
  }, 0.0, h);
  CHECK(dot_field(area_gradient(st.mesh), W) == Catch::Approx(da_fd).margin(1e-8));

  const double db_fd = oracle::deriv_c4([&](double s) {
    return along(s, [&](const TriSurface& m) { return band_area(m, *st.S); });
  }, 0.0, h);
  CHECK(dot_field(band_gradient(st.mesh, *st.S), W) == Catch::Approx(db_fd).margin(1e-8));
}

TEST_CASE("boundary rows of the energy gradient are tangent to the support") {
  CapillaryState st = leaf_state(1.2, 16);
  const auto g = energy_gradient(st);
  for (const auto& loop : st.mesh.loops) {
    const int n = static_cast<int>(loop.size());
    for (int i = 0; i < n; ++i) {
      const int v = loop[i];
      const Vec3 nS = st.S->normal_at(st.mesh.V[v]);
      CHECK(std::abs(g[v].dot(nS)) < 1e-13);
      // no along-line component either: that direction only reparametrizes
      // the contact polygon
      Vec3 tau = st.mesh.V[loop[(i + 1) % n]] - st.mesh.V[loop[(i + n - 1) % n]];
      tau -= tau.dot(nS) * nS;
      CHECK(std::abs(g[v].dot(tau.normalized())) < 1e-13);
    }
  }
}

TEST_CASE("band area follows the surface orientation") {
  SupportSurface S = SupportSurface::funnel(1.0, 0.0);
  S.prepare_band(2.0);
  // two-loop band with outward normals: the top loop winds against phi, so
  // the signed band is minus the circle-to-circle wetted area (up to the two
  // rings' foot-point deficits, which enter with opposite signs)
  TriSurface band =
      make_revolution_band([](double z) { return std::cosh(z); }, 0.3, 1.2, 12, 48);
  REQUIRE(band.loops.size() == 2);
  const double expect =
      -(S.lateral_area_circles(0.3, 1.2) - ring_deficit(1.2, 48) + ring_deficit(0.3, 48));
  CHECK(band_area(band, S) == Catch::Approx(expect).margin(2e-4));
  // a ccw disk ring reproduces +2 pi P minus its own deficit
  TriSurface disk = make_disk(std::cosh(1.0), 20, 1.0);
  const double smooth = 2.0 * PI * S.band_potential(1.0);
  CHECK(band_area(disk, S) == Catch::Approx(smooth - ring_deficit(1.0, 120)).margin(1e-5));
}

TEST_CASE("neck leaf at t = 0 is orthogonal and critical") {
  SupportSurface S = SupportSurface::funnel(1.0, 0.0);
  S.prepare_band(1.0);
  CapillaryState st;
  st.t = 0.0;
  st.S = &S;
  st.mesh = make_disk(1.0, 20, 0.0);
  st.offset = S.area_below_reference();
  refresh_state(st);
  CHECK(st.residual < 1e-12);     // contact cosine 0 against the vertical wall
  CHECK(st.grad_max < 1e-2);      // free boundary problem at t=0 is pure area
  CHECK(st.energy == Catch::Approx(st.area).epsilon(1e-14));
}

TEST_CASE("tangential contact is refused rather than mishandled") {
  SupportSurface S = SupportSurface::plane();
  S.prepare_band(3.0);
  CapillaryState st;
  st.t = 0.5;
  st.S = &S;
  st.mesh = make_disk(1.0, 8, 0.0);  // lies inside the supporting plane
  st.offset = 0.0;
  CHECK_THROWS_AS(energy_gradient(st), TangencyError);
}

TEST_CASE("degenerate triangles stop the area gradient") {
  TriSurface m;
  m.V = {Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(2, 0, 0), Vec3(0.5, 1, 0)};
  m.F = {{{0, 1, 2}}, {{0, 3, 1}}};
  // collinear first triangle: zero area
  CHECK_THROWS_AS(area_gradient(m), DegeneracyError);
}
