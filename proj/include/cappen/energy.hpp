#pragma once

#include <cmath>
#include <vector>

#include "cappen/common.hpp"
#include "cappen/mesh.hpp"
#include "cappen/support.hpp"

namespace cappen {

// Triangulated capillary configuration: a surface with boundary resting on a
// support S, at capillary parameter t (contact angle theta = arccos(-tanh t)).
// Free energy J_t = |Sigma| - tanh(t) * |S(Sigma)|, with |S(Sigma)| measured
// as `offset` plus the band between the support's reference circle and the
// boundary loops.
struct CapillaryState {
  double t = 0.0;
  const SupportSurface* S = nullptr;
  TriSurface mesh;
  double offset = 0.0;

  // caches, filled by refresh_state()
  double area = 0.0;
  double band = 0.0;
  double lateral = 0.0;
  double energy = 0.0;
  double residual = 0.0;
  double grad_max = 0.0;

  double cos_theta() const { return -std::tanh(t); }
  double sin_theta() const { return 1.0 / std::cosh(t); }
  double theta() const { return std::acos(cos_theta()); }
};

// ----- area functional -----

inline double area_value(const TriSurface& m, double floor = 1e-3) { return m.area(floor); }

// Exact gradient of total triangle area w.r.t. every vertex.
inline std::vector<Vec3> area_gradient(const TriSurface& m) {
  std::vector<Vec3> g(m.nv(), Vec3::Zero());
  for (int t = 0; t < m.nt(); ++t) {
    const auto& f = m.F[t];
    const Vec3 an = m.tri_normal_area(t);
    const double len = an.norm();
    if (len < 1e-300) throw DegeneracyError(strf("area_gradient: triangle %d degenerate", t));
    const Vec3 nh = an / len;
    for (int k = 0; k < 3; ++k)
      g[f[k]] += 0.5 * nh.cross(m.V[f[(k + 2) % 3]] - m.V[f[(k + 1) % 3]]);
  }
  return g;
}

// ----- lateral band functional -----
// Line integral of P dphi along each boundary chord, where P is the
// support's band potential evaluated at the chord point's foot coordinate;
// by Green's theorem this is the wetted band between the support's reference
// circle and the foot-point image of the boundary polygon. Using the chords
// themselves (not an on-surface interpolant between contact vertices) keeps
// the wetting term at the same inscribed-polygon level as the surface area,
// so their chord deficits balance in the energy. The gradient below is the
// exact derivative of this discrete expression.

inline double band_area(const TriSurface& m, const SupportSurface& S) {
  double total = 0.0;
  for (const auto& loop : m.loops) {
    const int n = static_cast<int>(loop.size());
    for (int i = 0; i < n; ++i) {
      const Vec3 la = m.V[loop[i]] - S.center();
      const Vec3 e = m.V[loop[(i + 1) % n]] - m.V[loop[i]];
      double acc = 0.0;
      for (int k = 0; k < GLRule8::n; ++k) {
        const double xi = 0.5 * (1.0 + GLRule8::x[k]);
        const Vec3 x = la + xi * e;
        const double r2 = x.x() * x.x() + x.y() * x.y();
        if (r2 < 1e-24) throw DomainError("band_area: boundary chord touches the axis");
        const double dphi = (x.x() * e.y() - x.y() * e.x()) / r2;
        acc += 0.5 * GLRule8::w[k] * S.band_potential(S.band_coord_foot(x + S.center())) * dphi;
      }
      total += acc;
    }
  }
  return total;
}

inline std::vector<Vec3> band_gradient(const TriSurface& m, const SupportSurface& S) {
  std::vector<Vec3> g(m.nv(), Vec3::Zero());
  for (const auto& loop : m.loops) {
    const int n = static_cast<int>(loop.size());
    for (int i = 0; i < n; ++i) {
      const int vi = loop[i], vj = loop[(i + 1) % n];
      const Vec3 la = m.V[vi] - S.center();
      const Vec3 e = m.V[vj] - m.V[vi];
      for (int k = 0; k < GLRule8::n; ++k) {
        const double xi = 0.5 * (1.0 + GLRule8::x[k]);
        const Vec3 x = la + xi * e;
        const double r2 = x.x() * x.x() + x.y() * x.y();
        if (r2 < 1e-24) throw DomainError("band_gradient: boundary chord touches the axis");
        const double N = x.x() * e.y() - x.y() * e.x();
        const double dphi = N / r2;
        const Vec3 xw = x + S.center();
        const double q = S.band_coord_foot(xw);
        const double P = S.band_potential(q);
        const double dP = S.band_potential_deriv(q);
        const Vec3 Gq = S.band_coord_foot_gradient(xw);
        const double w = 0.5 * GLRule8::w[k];
        // d(dphi)/dA,B: N and r2 both depend on the endpoint through the
        // node position ((1-xi) resp. xi) and on e (-1 resp. +1)
        const Vec3 dN_dA((1.0 - xi) * e.y() + x.y(), -x.x() - (1.0 - xi) * e.x(), 0.0);
        const Vec3 dN_dB(xi * e.y() - x.y(), x.x() - xi * e.x(), 0.0);
        const Vec3 dr2_dA = 2.0 * (1.0 - xi) * Vec3(x.x(), x.y(), 0.0);
        const Vec3 dr2_dB = 2.0 * xi * Vec3(x.x(), x.y(), 0.0);
        g[vi] += w * (dP * (1.0 - xi) * dphi * Gq + P * (dN_dA - dphi * dr2_dA) / r2);
        g[vj] += w * (dP * xi * dphi * Gq + P * (dN_dB - dphi * dr2_dB) / r2);
      }
    }
  }
  return g;
}

// ----- combined free energy -----

inline double free_energy(const CapillaryState& st, double floor = 1e-3) {
  return area_value(st.mesh, floor) - std::tanh(st.t) * (st.offset + band_area(st.mesh, *st.S));
}

// Largest deviation of the measured contact cosine from -tanh t over the
// boundary (mesh vertex normal against the support normal).
inline double contact_residual(const CapillaryState& st) {
  const auto normals = st.mesh.vertex_normals();
  const double target = st.cos_theta();
  double worst = 0.0;
  for (const auto& loop : st.mesh.loops)
    for (int v : loop)
      worst = std::max(worst, std::abs(normals[v].dot(st.S->normal_at(st.mesh.V[v])) - target));
  return worst;
}

// Restricts boundary rows of a vector field to the admissible contact-vertex
// motion: sliding across the contact line within the support's tangent plane.
// The along-line component is excluded deliberately: it only reparametrizes
// the boundary polygon, and because the wetted band is measured with the
// smooth angular element while the surface area is chordal, that spurious
// degree of freedom makes nonuniform respacing of the contact vertices look
// like an energy descent (strongest at large radii, where it can destabilize
// otherwise converged states).
inline void project_contact_rows(const TriSurface& m, const SupportSurface& S,
                                 std::vector<Vec3>& d) {
  for (const auto& loop : m.loops) {
    const int n = static_cast<int>(loop.size());
    for (int i = 0; i < n; ++i) {
      const int v = loop[i];
      const Vec3 nS = S.normal_at(m.V[v]);
      const Vec3 w = d[v] - d[v].dot(nS) * nS;
      Vec3 tau = m.V[loop[(i + 1) % n]] - m.V[loop[(i + n - 1) % n]];
      tau -= tau.dot(nS) * nS;
      const double tn = tau.norm();
      // collinear neighbours leave the across-line direction ill-defined;
      // keep the full tangent-plane component rather than guessing
      d[v] = tn < 1e-12 ? w : Vec3(w - (w.dot(tau) / (tn * tn)) * tau);
    }
  }
}

// Energy gradient: plain area gradient inside; on the boundary the combined
// area + wetting gradient restricted to the admissible contact motion.
// Throws TangencyError where Sigma meets S tangentially, since the
// constrained direction is undefined there.
inline std::vector<Vec3> energy_gradient(const CapillaryState& st) {
  std::vector<Vec3> g = area_gradient(st.mesh);
  const std::vector<Vec3> gb = band_gradient(st.mesh, *st.S);
  const auto normals = st.mesh.vertex_normals();
  const double tht = std::tanh(st.t);
  for (const auto& loop : st.mesh.loops)
    for (int v : loop) {
      const Vec3 nS = st.S->normal_at(st.mesh.V[v]);
      const double c = normals[v].dot(nS);
      if (1.0 - c * c < 1e-12)
        throw TangencyError(strf("energy_gradient: tangential contact at vertex %d (cos=%.17g)", v, c));
      g[v] -= tht * gb[v];
    }
  project_contact_rows(st.mesh, *st.S, g);
  return g;
}

inline double grad_max_norm(const std::vector<Vec3>& g) {
  double m = 0.0;
  for (const auto& v : g) m = std::max(m, v.norm());
  return m;
}

// Free-energy mass of the configuration: sin(theta) * sqrt(|Sigma| / pi).
inline double free_energy_mass(double t, double area) {
  return std::sqrt(area / PI) / std::cosh(t);
}

inline void refresh_state(CapillaryState& st, double floor = 1e-3) {
  st.area = area_value(st.mesh, floor);
  st.band = band_area(st.mesh, *st.S);
  st.lateral = st.offset + st.band;
  st.energy = st.area - std::tanh(st.t) * st.lateral;
  st.residual = contact_residual(st);
  st.grad_max = grad_max_norm(energy_gradient(st));
}

}  // namespace cappen
