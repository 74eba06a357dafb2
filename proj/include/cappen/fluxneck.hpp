#pragma once

#include <cmath>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "cappen/common.hpp"
#include "cappen/quadrature.hpp"
#include "cappen/solver.hpp"
#include "cappen/support.hpp"

namespace cappen {

// A logarithmic end z ~ sign * (a log rho + b), described by the support it
// lives on plus a representative analytic loop radius. Bottom ends are the
// reflection z -> -z of the support's end graph.
struct EndDescriptor {
  int k = 0;
  double a = 0.0;
  double b = 0.0;
  double loop_radius = 0.0;
  enum class Side { Top, Bottom } side = Side::Top;
  const SupportSurface* S = nullptr;

  bool mirrored() const { return side == Side::Bottom; }
};

// Least-squares fit of the end graph against log(rho) over three (or more)
// radii; b is the mean residual. The fit must tighten with radius, otherwise
// the surface is not asymptotically flat in this sense.
inline EndDescriptor fit_end(const SupportSurface& S, const std::vector<double>& radii,
                             EndDescriptor::Side side = EndDescriptor::Side::Top, int k = 0) {
  if (radii.size() < 3) throw DomainError("fit_end: need at least 3 radii");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(radii.size());
  for (double r : radii) {
    if (!(r > 0.0)) throw DomainError("fit_end: radii must be positive");
    const double x = std::log(r), y = S.end_height(r);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double var = sxx - sx * sx / n;
  if (!(var > 1e-12)) throw DomainError("fit_end: radii too close together");
  EndDescriptor e;
  e.k = k;
  e.side = side;
  e.S = &S;
  e.a = (sxy - sx * sy / n) / var;
  e.b = (sy - e.a * sx) / n;
  e.loop_radius = radii.back();
  // decay check: the residual at the outermost radius may not exceed the one
  // at the innermost (O(1/|y|) decay of psi - a log - b)
  const double r0 = radii.front(), r1 = radii.back();
  const double res0 = std::abs(S.end_height(r0) - e.a * std::log(r0) - e.b);
  const double res1 = std::abs(S.end_height(r1) - e.a * std::log(r1) - e.b);
  if (res1 > res0 + 1e-9 && res1 > 1e-6 * std::max(1.0, std::abs(e.b)))
    throw DomainError(strf("fit_end: residual grows with radius (%.3g -> %.3g)", res0, res1));
  return e;
}

namespace flux_detail {

// Lift a planar point into the end graph (reflected for bottom ends).
inline Vec3 lift(const EndDescriptor& e, const Vec2& y) {
  const double rho = y.norm();
  const double z = e.S->end_height(rho);
  return {y.x(), y.y(), e.mirrored() ? -z : z};
}

// Upward unit normal of the (possibly reflected) end graph at planar point y.
inline Vec3 end_normal(const EndDescriptor& e, const Vec2& y) {
  const double rho = y.norm();
  if (!(rho > 0.0)) throw DomainError("flux: loop passes through the axis");
  double s = e.S->end_slope(rho);
  if (e.mirrored()) s = -s;
  const Vec3 n(-s * y.x() / rho, -s * y.y() / rho, 1.0);
  return n.normalized();
}

inline double loop_winding_sign(const std::function<Vec2(double)>& loop, int n) {
  double area2 = 0.0;
  Vec2 prev = loop(0.0);
  for (int i = 1; i <= n; ++i) {
    const Vec2 cur = loop(2.0 * PI * i / n);
    area2 += prev.x() * cur.y() - prev.y() * cur.x();
    prev = cur;
  }
  return area2 >= 0.0 ? 1.0 : -1.0;
}

}  // namespace flux_detail

// Flux vector of an end along a smooth closed loop given in the plane,
// integral of the outward unit co-normal against arc length. The loop is
// sampled at n parameters; speeds come from 5-point centered differences, so
// the quadrature error is O(n^-4) on smooth loops.
inline Vec3 flux_loop(const EndDescriptor& e, const std::function<Vec2(double)>& loop,
                      int n = 512) {
  if (!e.S) throw DomainError("flux_loop: end has no support surface");
  if (n < 16) throw DomainError("flux_loop: need at least 16 samples");
  const double orient = flux_detail::loop_winding_sign(loop, n);
  std::vector<Vec3> p(n);
  for (int i = 0; i < n; ++i) p[i] = flux_detail::lift(e, loop(2.0 * PI * i / n));
  const double dt = 2.0 * PI / n;
  Vec3 flux = Vec3::Zero();
  for (int i = 0; i < n; ++i) {
    const Vec3& pm2 = p[(i - 2 + n) % n];
    const Vec3& pm1 = p[(i - 1 + n) % n];
    const Vec3& pp1 = p[(i + 1) % n];
    const Vec3& pp2 = p[(i + 2) % n];
    const Vec3 vel = (pm2 - 8.0 * pm1 + 8.0 * pp1 - pp2) / (12.0 * dt);
    const Vec2 y(p[i].x(), p[i].y());
    const Vec3 nrm = flux_detail::end_normal(e, y);
    Vec3 mu = vel.cross(nrm);  // |mu| = |vel| since nrm is unit and normal to vel
    flux += orient * mu * dt;
  }
  return flux;
}

// Flux along the analytic circle rho = r.
inline Vec3 flux_circle(const EndDescriptor& e, double r, int n = 512) {
  return flux_loop(e, [r](double t) { return Vec2(r * std::cos(t), r * std::sin(t)); }, n);
}

inline Vec3 flux_circle(const EndDescriptor& e) { return flux_circle(e, e.loop_radius); }

// Norm of the flux difference of two homologous loops in the same end.
inline double flux_homotopy_deviation(const EndDescriptor& e,
                                      const std::function<Vec2(double)>& loop1,
                                      const std::function<Vec2(double)>& loop2, int n = 512) {
  return (flux_loop(e, loop1, n) - flux_loop(e, loop2, n)).norm();
}

// Flux of a mesh boundary loop: sum over the loop's directed boundary edges of
// (b - a) x n_T, where n_T is the adjacent triangle's normal. Equals the
// integral of the outward co-normal against edge length.
inline Vec3 flux_mesh_loop(const TriSurface& m, int loop_idx) {
  if (loop_idx < 0 || loop_idx >= static_cast<int>(m.loops.size()))
    throw DomainError("flux_mesh_loop: loop index out of range");
  std::map<std::pair<int, int>, Vec3> edge_normal;  // directed edge -> adjacent tri normal
  for (int t = 0; t < m.nt(); ++t) {
    const Vec3 n = m.tri_normal_area(t).normalized();
    for (int k = 0; k < 3; ++k) edge_normal[{m.F[t][k], m.F[t][(k + 1) % 3]}] = n;
  }
  const auto& loop = m.loops[loop_idx];
  Vec3 flux = Vec3::Zero();
  const int L = static_cast<int>(loop.size());
  for (int i = 0; i < L; ++i) {
    const int a = loop[i], b = loop[(i + 1) % L];
    auto it = edge_normal.find({a, b});
    if (it == edge_normal.end()) it = edge_normal.find({b, a});
    if (it == edge_normal.end()) throw TopologyError("flux_mesh_loop: loop edge not in mesh");
    flux += (m.V[b] - m.V[a]).cross(it->second);
  }
  return flux;
}

// ----- neck size -----

struct NeckResult {
  double neck = 0.0;  // max over sides of sqrt(4 pi |D_side|)
  bool plane = false; // both sides collapsed: plane convention, neck 0
  double area_top = 0.0;
  double area_bottom = 0.0;
  bool collapsed_top = false;
  bool collapsed_bottom = false;
  int iters_top = 0;
  int iters_bottom = 0;
};

namespace flux_detail {

inline OutermostResult side_solve(SupportSurface& S, const SolverOptions& opts) {
  if (S.kind() == SupportSurface::Kind::Funnel) return solve_outermost_disk(S, opts);
  // graph side: dome seed whose rim starts on the support; area flow either
  // finds a separating minimal surface or shrinks it away (collapse)
  const double R = std::max(1.0, S.scale());
  TriSurface seed = make_spherical_cap(R, 1.0, 10);
  const double zshift = -R * std::cos(1.0);
  for (auto& p : seed.V) p.z() += zshift;
  seed.finalize();
  return solve_outermost_disk(S, std::move(seed), opts);
}

}  // namespace flux_detail

// Two-sided neck size, one t=0 outermost solve per side.
inline NeckResult neck_size(SupportSurface& top, SupportSurface& bottom,
                            const SolverOptions& opts) {
  NeckResult nr;
  OutermostResult rt = flux_detail::side_solve(top, opts);
  nr.collapsed_top = rt.collapsed;
  nr.iters_top = rt.iters;
  if (!rt.collapsed) nr.area_top = rt.state.area;
  OutermostResult rb = flux_detail::side_solve(bottom, opts);
  nr.collapsed_bottom = rb.collapsed;
  nr.iters_bottom = rb.iters;
  if (!rb.collapsed) nr.area_bottom = rb.state.area;
  if (nr.collapsed_top && nr.collapsed_bottom) {
    nr.plane = true;
    nr.neck = 0.0;
    return nr;
  }
  nr.neck = std::sqrt(4.0 * PI * std::max(nr.area_top, nr.area_bottom));
  return nr;
}

// ----- characterization report -----

struct CharacterizationReport {
  std::vector<EndDescriptor> ends;
  std::vector<Vec3> fluxes;      // one per end, loop = the end's analytic circle
  double largest_flux = 0.0;     // max |flux| over ends
  double neck = 0.0;
  bool plane = false;
  double exterior_mass = 0.0;    // top-side mass fit
  double top_disk_area = 0.0;    // |D| of the top t=0 solve
  double margin = 0.0;           // exterior_mass - sqrt(|D|/pi)
  double flux_mass_gap = 0.0;    // | |flux_top|/(2 pi) - exterior_mass |
  double tolerance = 0.1;
  bool candidate = false;        // largest_flux <= neck + tolerance
  std::string verdict;
};

inline CharacterizationReport characterization_report(const std::vector<EndDescriptor>& ends,
                                                      const NeckResult& nr, double exterior_mass,
                                                      double tol = 0.1) {
  if (ends.empty()) throw DomainError("characterization_report: need at least one end");
  CharacterizationReport rep;
  rep.ends = ends;
  rep.neck = nr.neck;
  rep.plane = nr.plane;
  rep.exterior_mass = exterior_mass;
  rep.top_disk_area = nr.area_top;
  rep.tolerance = tol;
  for (const auto& e : ends) {
    rep.fluxes.push_back(flux_circle(e));
    rep.largest_flux = std::max(rep.largest_flux, rep.fluxes.back().norm());
  }
  rep.margin = exterior_mass - std::sqrt(std::max(nr.area_top, 0.0) / PI);
  rep.flux_mass_gap = std::abs(rep.fluxes.front().norm() / (2.0 * PI) - exterior_mass);
  rep.candidate = rep.largest_flux <= rep.neck + tol;
  rep.verdict = rep.candidate ? "catenoid-or-plane candidate" : "flux exceeds neck size";
  return rep;
}

// Full catenoid of mass m, both sides and both ends.
inline CharacterizationReport catenoid_two_sided(double m, const SolverOptions& opts,
                                                 double tol = 0.1) {
  SupportSurface top = SupportSurface::funnel(m, 0.0);
  SupportSurface bottom = SupportSurface::funnel(m, 0.0);
  const double rbase = 12.0 * std::max(1.0, m);
  const std::vector<double> radii = {rbase, 2.0 * rbase, 4.0 * rbase};
  EndDescriptor etop = fit_end(top, radii, EndDescriptor::Side::Top, 0);
  EndDescriptor ebot = fit_end(bottom, radii, EndDescriptor::Side::Bottom, 1);
  const NeckResult nr = neck_size(top, bottom, opts);
  const double mass = top.exterior_mass({rbase, 1.6 * rbase, 2.5 * rbase, 4.0 * rbase}).mass;
  return characterization_report({etop, ebot}, nr, mass, tol);
}

// Flat plane: zero ends' slope, both sides collapse, neck 0.
inline CharacterizationReport plane_two_sided(const SolverOptions& opts, double tol = 0.1) {
  SupportSurface top = SupportSurface::plane();
  SupportSurface bottom = SupportSurface::plane();
  const std::vector<double> radii = {12.0, 24.0, 48.0};
  EndDescriptor etop = fit_end(top, radii, EndDescriptor::Side::Top, 0);
  const NeckResult nr = neck_size(top, bottom, opts);
  const double mass = top.exterior_mass({12.0, 20.0, 32.0, 48.0}).mass;
  return characterization_report({etop}, nr, mass, tol);
}

}  // namespace cappen
