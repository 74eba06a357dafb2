#include <catch2/catch_amalgamated.hpp>
#include <cmath>
#include <random>

#include "cappen/mesh.hpp"
#include "cappen/stability.hpp"
#include "cappen/support.hpp"
#include "oracles.hpp"

using namespace cappen;

namespace {

SupportSurface& catenoid_wall() {
  static SupportSurface S = [] {
    SupportSurface s = SupportSurface::funnel(1.0, 0.0);
    s.prepare_band(3.5);
    return s;
  }();
  return S;
}

CapillaryState leaf_state(double t, int K) {
  CapillaryState st;
  st.t = t;
  st.S = &catenoid_wall();
  st.mesh = make_disk(std::cosh(t), K, t);
  st.offset = st.S->area_below_reference();
  refresh_state(st);
  return st;
}

Eigen::VectorXd seeded_field(int n, uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  Eigen::VectorXd f(n);
  for (int i = 0; i < n; ++i) f[i] = g(rng);
  return f;
}

}  // namespace

TEST_CASE("frozen Robin constants are self-consistent and reproducible") {
  CHECK(oracle::robin_root_recomputed() ==
        Catch::Approx(oracle::kRobinBesselRoot).margin(1e-12));
  const double c2 = std::cosh(1.0) * std::cosh(1.0);
  CHECK(oracle::kRobinBesselRoot * oracle::kRobinBesselRoot / c2 ==
        Catch::Approx(oracle::kKappa1FlatLeafT1).margin(1e-15));
  CHECK(2.0 / c2 == Catch::Approx(oracle::kRayleighT1).margin(1e-15));
  CHECK(std::pow(1.0 / std::cosh(1.0), 4) / (2.0 * oracle::kPi) ==
        Catch::Approx(oracle::kProfileSecondDerivT1).margin(1e-15));
}

TEST_CASE("smallest Jacobi eigenvalue of the flat leaf matches the Robin mode") {
  CapillaryState st = leaf_state(1.0, 40);
  const CurvatureField cf = compute_curvatures(st.mesh);
  const JacobiForm form = assemble_jacobi(st, cf);
  const EigenPairs ep = min_eigenpairs(form, 12345, 1);
  CHECK(ep.kappa1 == Catch::Approx(oracle::kKappa1FlatLeafT1).margin(1e-3));
  // strictly positive ground mode, strictly below the f = 1 Rayleigh bound
  CHECK(ep.f1.minCoeff() > 0.0);
  CHECK(ep.kappa1 < oracle::kRayleighT1);
  CHECK(ep.kappa2 > ep.kappa1 + 1.0);
  // Rayleigh quotient of the computed mode reproduces the eigenvalue
  CHECK(form.value(ep.f1) / ep.f1.dot(form.M.cwiseProduct(ep.f1)) ==
        Catch::Approx(ep.kappa1).epsilon(1e-7));
}

TEST_CASE("eigenvalue scales with the leaf and solver is deterministic") {
  CapillaryState st = leaf_state(0.3, 56);
  const CurvatureField cf = compute_curvatures(st.mesh);
  const JacobiForm form = assemble_jacobi(st, cf);
  const EigenPairs ep = min_eigenpairs(form, 12345, 1);
  const double target = oracle::kRobinBesselRoot * oracle::kRobinBesselRoot /
                        (std::cosh(0.3) * std::cosh(0.3));
  CHECK(ep.kappa1 == Catch::Approx(target).epsilon(2e-3));
  const EigenPairs again = min_eigenpairs(form, 12345, 1);
  CHECK(again.kappa1 == ep.kappa1);
  CHECK(again.kappa2 == ep.kappa2);
  // the two assembly paths of the form agree on the eigenmode
  VariationReport r1 = fd_variation_check(st, ep.f1);
  VariationReport r2 = fd_variation_check(st, ep.f2);
  CHECK(r1.r4 < 1e-12);
  // second-difference of the energy along the mode reproduces the form value
  CHECK(r1.r3 < 1e-4);
  CHECK(r2.r3 < 1e-4);
}

TEST_CASE("variation residuals on seeded random directions stay in tolerance") {
  for (double t : {0.3, 0.5}) {
    CapillaryState st = leaf_state(t, 40);
    for (uint64_t seed = 1; seed <= 5; ++seed) {
      const VariationReport r = fd_variation_check(st, seeded_field(st.mesh.nv(), seed));
      CHECK(r.r1 < 1e-6);
      CHECK(r.r2 < 1e-8);
      CHECK(r.r3 < 1e-4);
      CHECK(r.r4 < 1e-12);
    }
  }
}

TEST_CASE("constant direction reproduces the closed-form first variation") {
  CapillaryState st = leaf_state(0.5, 40);
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(st.mesh.nv());
  const VariationReport r = fd_variation_check(st, ones);
  // moving the contact circle at unit normal speed wets 2 pi cosh^2 t per
  // unit, less the derivative of the 240-chord foot-point deficit
  const double smooth = 2.0 * oracle::kPi * std::cosh(0.5) * std::cosh(0.5);
  const double deficit_rate =
      std::cosh(1.0) * std::pow(2.0 * oracle::kPi, 3) / (12.0 * 240.0 * 240.0);
  CHECK(r.band_exact == Catch::Approx(smooth - deficit_rate).margin(1e-6));
  CHECK(r.band_fd == Catch::Approx(r.band_exact).epsilon(1e-8));
  // flat disk: only the geodesic-curvature boundary term survives, total 2 pi
  CHECK(r.form_value == Catch::Approx(2.0 * oracle::kPi).margin(1e-9));
  CHECK(r.second_fd == Catch::Approx(2.0 * oracle::kPi).epsilon(2e-3));
}

TEST_CASE("second differences converge at second order on smooth directions") {
  CapillaryState st = leaf_state(0.5, 12);
  Eigen::VectorXd f(st.mesh.nv());
  for (int v = 0; v < st.mesh.nv(); ++v) {
    const Vec3& p = st.mesh.V[v];
    f[v] = 1.0 + 0.4 * std::sin(1.3 * p.x()) * std::cos(0.7 * p.y());
  }
  const VariationReport r = fd_variation_check(st, f, 1e-5, 1e-3);
  CHECK(r.second_order > 1.5);
  CHECK(r.second_order < 3.5);
  // coarse-step residuals must not beat the fine-step ones systematically
  CHECK(r.r1 <= r.r1_coarse);
  CHECK(r.r2 <= r.r2_coarse);
}

TEST_CASE("comparison second derivative matches the catenoid profile") {
  CapillaryState st = leaf_state(1.0, 40);
  const CurvatureField cf = compute_curvatures(st.mesh);
  CHECK(comparison_second_derivative(st, cf) ==
        Catch::Approx(oracle::kProfileSecondDerivT1).epsilon(2e-2));
}

TEST_CASE("variation check rejects mismatched field sizes") {
  CapillaryState st = leaf_state(0.5, 6);
  CHECK_THROWS_AS(fd_variation_check(st, Eigen::VectorXd::Ones(3)), DomainError);
}
