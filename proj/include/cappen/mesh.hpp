#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <functional>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "cappen/common.hpp"

namespace cappen {

// Oriented triangle mesh with boundary. Connectivity caches are rebuilt by
// finalize(), which also enforces the structural invariants: consistent
// orientation, manifoldness, every component has boundary (chi = V - E + F
// is computed from counts, so it is exact).
struct TriSurface {
  std::vector<Vec3> V;
  std::vector<std::array<int, 3>> F;

  // Derived by finalize():
  std::vector<std::vector<int>> loops;  // boundary cycles, surface on the left
  std::vector<int> loop_of;             // vertex -> loop index, or -1
  std::vector<int> comp_of;             // vertex -> component id
  std::vector<int> comp_chi;            // Euler characteristic per component
  int n_edges = 0;
  int n_boundary_edges = 0;
  int n_components = 0;
  int chi = 0;

  int nv() const { return static_cast<int>(V.size()); }
  int nt() const { return static_cast<int>(F.size()); }

  Vec3 tri_normal_area(int t) const {  // area-weighted normal (length = 2*area)
    const auto& f = F[t];
    return (V[f[1]] - V[f[0]]).cross(V[f[2]] - V[f[0]]);
  }
  double tri_area(int t) const { return 0.5 * tri_normal_area(t).norm(); }

  // inradius / longest edge; ~0.289 for equilateral
  double tri_quality(int t) const {
    const auto& f = F[t];
    const double a = (V[f[1]] - V[f[0]]).norm();
    const double b = (V[f[2]] - V[f[1]]).norm();
    const double c = (V[f[0]] - V[f[2]]).norm();
    const double s = 0.5 * (a + b + c);
    const double L = std::max({a, b, c});
    if (s <= 0.0 || L <= 0.0) return 0.0;
    return tri_area(t) / (s * L);
  }

  bool is_boundary_vertex(int v) const { return loop_of[v] >= 0; }

  void finalize() {
    const int nverts = nv();
    if (nverts < 3 || nt() < 1) throw TopologyError("mesh: too few vertices or triangles");
    for (const auto& f : F) {
      for (int k = 0; k < 3; ++k)
        if (f[k] < 0 || f[k] >= nverts) throw TopologyError("mesh: triangle index out of range");
      if (f[0] == f[1] || f[1] == f[2] || f[2] == f[0])
        throw TopologyError("mesh: repeated vertex in triangle");
    }

    // Undirected edge table, sorted for determinism.
    struct ERec {
      int a, b;    // a < b
      int dir;     // +1 if seen as a->b, -1 if b->a
    };
    std::vector<ERec> recs;
    recs.reserve(3 * F.size());
    for (const auto& f : F)
      for (int k = 0; k < 3; ++k) {
        int u = f[k], v = f[(k + 1) % 3];
        recs.push_back(u < v ? ERec{u, v, +1} : ERec{v, u, -1});
      }
    std::sort(recs.begin(), recs.end(), [](const ERec& p, const ERec& q) {
      return std::tie(p.a, p.b, p.dir) < std::tie(q.a, q.b, q.dir);
    });

    std::vector<int> bnext(nverts, -1);
    std::vector<int> vert_edge_deg(nverts, 0), vert_tri_deg(nverts, 0);
    for (const auto& f : F)
      for (int k = 0; k < 3; ++k) ++vert_tri_deg[f[k]];

    n_edges = 0;
    n_boundary_edges = 0;
    std::vector<int> parent(nverts);
    std::iota(parent.begin(), parent.end(), 0);
    std::function<int(int)> find = [&](int x) {
      while (parent[x] != x) x = parent[x] = parent[parent[x]];
      return x;
    };

    for (size_t i = 0; i < recs.size();) {
      size_t j = i;
      while (j < recs.size() && recs[j].a == recs[i].a && recs[j].b == recs[i].b) ++j;
      const size_t mult = j - i;
      if (mult > 2)
        throw TopologyError(strf("mesh: edge (%d,%d) shared by %zu triangles", recs[i].a, recs[i].b, mult));
      if (mult == 2 && recs[i].dir == recs[i + 1].dir)
        throw TopologyError(strf("mesh: inconsistent orientation across edge (%d,%d)", recs[i].a, recs[i].b));
      ++n_edges;
      ++vert_edge_deg[recs[i].a];
      ++vert_edge_deg[recs[i].b];
      parent[find(recs[i].a)] = find(recs[i].b);
      if (mult == 1) {
        ++n_boundary_edges;
        const int from = recs[i].dir > 0 ? recs[i].a : recs[i].b;
        const int to = recs[i].dir > 0 ? recs[i].b : recs[i].a;
        if (bnext[from] != -1)
          throw TopologyError(strf("mesh: non-manifold boundary at vertex %d", from));
        bnext[from] = to;
      }
      i = j;
    }

    // Fan check: interior vertex has E = T, boundary vertex E = T + 1.
    for (int v = 0; v < nverts; ++v) {
      if (vert_tri_deg[v] == 0) throw TopologyError(strf("mesh: isolated vertex %d", v));
      const bool on_bd = bnext[v] != -1;
      const int expect = vert_tri_deg[v] + (on_bd ? 1 : 0);
      if (vert_edge_deg[v] != expect)
        throw TopologyError(strf("mesh: pinched vertex %d (edges %d, triangles %d)", v,
                                 vert_edge_deg[v], vert_tri_deg[v]));
    }

    // Trace boundary loops from the smallest unvisited start vertex.
    loops.clear();
    loop_of.assign(nverts, -1);
    for (int v0 = 0; v0 < nverts; ++v0) {
      if (bnext[v0] == -1 || loop_of[v0] != -1) continue;
      std::vector<int> loop;
      int v = v0;
      do {
        loop_of[v] = static_cast<int>(loops.size());
        loop.push_back(v);
        v = bnext[v];
        if (v == -1 || static_cast<int>(loop.size()) > n_boundary_edges)
          throw TopologyError("mesh: boundary walk failed to close");
      } while (v != v0);
      loops.push_back(std::move(loop));
    }

    // Components and Euler characteristics.
    comp_of.assign(nverts, -1);
    std::vector<int> roots;
    for (int v = 0; v < nverts; ++v) {
      const int r = find(v);
      auto it = std::find(roots.begin(), roots.end(), r);
      if (it == roots.end()) {
        comp_of[v] = static_cast<int>(roots.size());
        roots.push_back(r);
      } else {
        comp_of[v] = static_cast<int>(it - roots.begin());
      }
    }
    n_components = static_cast<int>(roots.size());
    std::vector<int> cv(n_components, 0), ce(n_components, 0), cf(n_components, 0), cb(n_components, 0);
    for (int v = 0; v < nverts; ++v) {
      ++cv[comp_of[v]];
      if (bnext[v] != -1) ++cb[comp_of[v]];
    }
    for (size_t i = 0; i < recs.size();) {
      size_t j = i;
      while (j < recs.size() && recs[j].a == recs[i].a && recs[j].b == recs[i].b) ++j;
      ++ce[comp_of[recs[i].a]];
      i = j;
    }
    for (const auto& f : F) ++cf[comp_of[f[0]]];
    comp_chi.assign(n_components, 0);
    chi = 0;
    for (int c = 0; c < n_components; ++c) {
      comp_chi[c] = cv[c] - ce[c] + cf[c];
      chi += comp_chi[c];
      if (cb[c] == 0)
        throw TopologyError(strf("mesh: component %d is closed (every component must have boundary)", c));
    }
  }

  // Total area; throws if any triangle's quality drops below `floor`.
  double area(double floor = 1e-3) const {
    double s = 0.0;
    for (int t = 0; t < nt(); ++t) {
      const double q = tri_quality(t);
      if (q < floor)
        throw DegeneracyError(strf("mesh: triangle %d quality %.3g below floor %.3g", t, q, floor));
      s += tri_area(t);
    }
    return s;
  }

  double boundary_length() const {
    double s = 0.0;
    for (const auto& loop : loops) {
      const int n = static_cast<int>(loop.size());
      for (int i = 0; i < n; ++i) s += (V[loop[(i + 1) % n]] - V[loop[i]]).norm();
    }
    return s;
  }

  // One-third of incident triangle area per vertex.
  std::vector<double> vertex_areas() const {
    std::vector<double> a(nv(), 0.0);
    for (int t = 0; t < nt(); ++t) {
      const double third = tri_area(t) / 3.0;
      for (int k = 0; k < 3; ++k) a[F[t][k]] += third;
    }
    return a;
  }

  // Area-weighted vertex normals (unit length).
  std::vector<Vec3> vertex_normals() const {
    std::vector<Vec3> n(nv(), Vec3::Zero());
    for (int t = 0; t < nt(); ++t) {
      const Vec3 an = tri_normal_area(t);
      for (int k = 0; k < 3; ++k) n[F[t][k]] += an;
    }
    for (auto& v : n) {
      const double len = v.norm();
      if (len < 1e-300) throw DegeneracyError("mesh: zero vertex normal");
      v /= len;
    }
    return n;
  }

  TriSurface scaled(double lam) const {
    TriSurface m = *this;
    for (auto& p : m.V) p *= lam;
    m.finalize();
    return m;
  }

  TriSurface translated(const Vec3& d) const {
    TriSurface m = *this;
    for (auto& p : m.V) p += d;
    m.finalize();
    return m;
  }

  // Split into per-component meshes (vertex order preserved within each).
  std::vector<TriSurface> split_components() const {
    std::vector<TriSurface> out(n_components);
    std::vector<int> remap(nv(), -1);
    for (int v = 0; v < nv(); ++v) {
      const int c = comp_of[v];
      remap[v] = out[c].nv();
      out[c].V.push_back(V[v]);
    }
    for (const auto& f : F)
      out[comp_of[f[0]]].F.push_back({remap[f[0]], remap[f[1]], remap[f[2]]});
    for (auto& m : out) m.finalize();
    return out;
  }
};

// ----- builders -----

// Disk-topology patch from concentric rings: ring k has n_k vertices at
// planar radius r_k, height z_k, angles 2*pi*j/n_k. Ring 0 may be a single
// pole vertex. Triangles CCW seen from +z (normals point up).
inline TriSurface make_polar_patch(const std::vector<double>& r,
                                   const std::vector<double>& z,
                                   const std::vector<int>& n) {
  const int K = static_cast<int>(r.size()) - 1;
  if (K < 1 || z.size() != r.size() || n.size() != r.size())
    throw DomainError("make_polar_patch: ring arrays mismatch");
  TriSurface m;
  std::vector<int> start(K + 1);
  for (int k = 0; k <= K; ++k) {
    start[k] = m.nv();
    if (n[k] < 1) throw DomainError("make_polar_patch: empty ring");
    if (k == 0 && n[0] != 1 && n[0] < 3) throw DomainError("make_polar_patch: bad pole ring");
    for (int j = 0; j < n[k]; ++j) {
      const double phi = 2.0 * PI * j / n[k];
      m.V.push_back(Vec3(r[k] * std::cos(phi), r[k] * std::sin(phi), z[k]));
    }
  }
  for (int k = 1; k <= K; ++k) {
    const int n_in = n[k - 1], n_out = n[k];
    const int s_in = start[k - 1], s_out = start[k];
    if (n_in == 1) {
      for (int i = 0; i < n_out; ++i)
        m.F.push_back({s_out + i, s_out + (i + 1) % n_out, s_in});
      continue;
    }
    // Merge the two rings by angle; emits exactly n_in + n_out triangles.
    int i = 0, j = 0;
    for (int step = 0; step < n_in + n_out; ++step) {
      const double next_out = 2.0 * PI * (i + 1) / n_out;
      const double next_in = 2.0 * PI * (j + 1) / n_in;
      const bool advance_out = (i < n_out) && (j >= n_in || next_out <= next_in);
      if (advance_out) {
        m.F.push_back({s_out + i % n_out, s_out + (i + 1) % n_out, s_in + j % n_in});
        ++i;
      } else {
        m.F.push_back({s_out + i % n_out, s_in + (j + 1) % n_in, s_in + j % n_in});
        ++j;
      }
    }
  }
  m.finalize();
  return m;
}

// Flat polar disk of radius R at height z; K rings, ring k holds 6k vertices,
// so boundary spacing ~ radial spacing.
inline TriSurface make_disk(double R, int K, double z = 0.0) {
  if (R <= 0.0 || K < 1) throw DomainError("make_disk: need R > 0, K >= 1");
  std::vector<double> r(K + 1), zz(K + 1, z);
  std::vector<int> n(K + 1);
  for (int k = 0; k <= K; ++k) {
    r[k] = R * k / K;
    n[k] = k == 0 ? 1 : 6 * k;
  }
  return make_polar_patch(r, zz, n);
}

// Open spherical cap around the north pole (radius R, polar angle alpha_max).
inline TriSurface make_spherical_cap(double R, double alpha_max, int K) {
  if (R <= 0.0 || alpha_max <= 0.0 || alpha_max >= PI || K < 1)
    throw DomainError("make_spherical_cap: bad parameters");
  std::vector<double> r(K + 1), z(K + 1);
  std::vector<int> n(K + 1);
  for (int k = 0; k <= K; ++k) {
    const double a = alpha_max * k / K;
    r[k] = R * std::sin(a);
    z[k] = R * std::cos(a);
    n[k] = k == 0 ? 1 : 6 * k;
  }
  return make_polar_patch(r, z, n);
}

// Surface of revolution rho = radius(z), z in [z0, z1], annulus topology.
// Normals point away from the axis.
inline TriSurface make_revolution_band(const std::function<double(double)>& radius,
                                       double z0, double z1, int nz, int nphi) {
  if (!(z1 > z0) || nz < 1 || nphi < 3) throw DomainError("make_revolution_band: bad parameters");
  TriSurface m;
  for (int i = 0; i <= nz; ++i) {
    const double z = z0 + (z1 - z0) * i / nz;
    const double r = radius(z);
    if (r <= 0.0) throw DomainError("make_revolution_band: radius must stay positive");
    for (int j = 0; j < nphi; ++j) {
      const double phi = 2.0 * PI * j / nphi;
      m.V.push_back(Vec3(r * std::cos(phi), r * std::sin(phi), z));
    }
  }
  auto vid = [nphi](int i, int j) { return i * nphi + (j % nphi); };
  for (int i = 0; i < nz; ++i)
    for (int j = 0; j < nphi; ++j) {
      m.F.push_back({vid(i, j), vid(i, j + 1), vid(i + 1, j + 1)});
      m.F.push_back({vid(i, j), vid(i + 1, j + 1), vid(i + 1, j)});
    }
  m.finalize();
  return m;
}

// ----- capmesh v1 file format -----
// Line 1: "capmesh v1"; line 2: vertex count; line 3: triangle count;
// then one "x y z" line per vertex and one "i j k" line per triangle
// (0-based). Boundary loops are recomputed on load, never stored.

inline void save_capmesh(const TriSurface& m, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DomainError("save_capmesh: cannot open " + path);
  out << "capmesh v1\n" << m.nv() << "\n" << m.nt() << "\n";
  for (const auto& p : m.V)
    out << fmt_g(p.x()) << " " << fmt_g(p.y()) << " " << fmt_g(p.z()) << "\n";
  for (const auto& f : m.F) out << f[0] << " " << f[1] << " " << f[2] << "\n";
  if (!out) throw DomainError("save_capmesh: write failed for " + path);
}

inline TriSurface load_capmesh(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DomainError("load_capmesh: cannot open " + path);
  std::string header;
  std::getline(in, header);
  if (!header.empty() && header.back() == '\r') header.pop_back();
  if (header != "capmesh v1") throw DomainError("load_capmesh: bad header in " + path);
  int nv = 0, nt = 0;
  in >> nv >> nt;
  if (!in || nv < 3 || nt < 1) throw DomainError("load_capmesh: bad counts in " + path);
  TriSurface m;
  m.V.resize(nv);
  m.F.resize(nt);
  for (auto& p : m.V) in >> p.x() >> p.y() >> p.z();
  for (auto& f : m.F) in >> f[0] >> f[1] >> f[2];
  if (!in) throw DomainError("load_capmesh: truncated file " + path);
  m.finalize();
  return m;
}

}  // namespace cappen
