#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <vector>

#include "cappen/common.hpp"
#include "cappen/mesh.hpp"
#include "cappen/support.hpp"

namespace cappen {

// Isotropic remeshing toward a target edge length: long-edge splits,
// short-edge collapses, Delaunay-style flips, then light tangential
// smoothing. Boundary vertices stay on the support surface. All passes walk
// edges in a deterministic sorted order.
namespace remesh_detail {

struct Edge {
  int a, b;  // a < b
  bool operator<(const Edge& o) const { return std::tie(a, b) < std::tie(o.a, o.b); }
};

inline std::map<Edge, std::vector<int>> edge_tris(const TriSurface& m) {
  std::map<Edge, std::vector<int>> et;
  for (int t = 0; t < m.nt(); ++t)
    for (int k = 0; k < 3; ++k) {
      int u = m.F[t][k], v = m.F[t][(k + 1) % 3];
      et[{std::min(u, v), std::max(u, v)}].push_back(t);
    }
  return et;
}

// One pass of long-edge splits (a matching: at most one split per triangle).
inline bool split_pass(TriSurface& m, const SupportSurface& S, double h_max) {
  auto et = edge_tris(m);
  std::vector<std::pair<double, Edge>> longs;
  for (const auto& [e, tris] : et) {
    const double len = (m.V[e.a] - m.V[e.b]).norm();
    if (len > h_max) longs.push_back({len, e});
  }
  if (longs.empty()) return false;
  std::sort(longs.begin(), longs.end(), [](const auto& x, const auto& y) {
    if (x.first != y.first) return x.first > y.first;
    return x.second < y.second;
  });
  std::vector<char> tri_used(m.nt(), 0);
  std::map<Edge, int> midpoint;
  for (const auto& [len, e] : longs) {
    bool free = true;
    for (int t : et[e]) free = free && !tri_used[t];
    if (!free) continue;
    for (int t : et[e]) tri_used[t] = 1;
    const bool bd = et[e].size() == 1;
    Vec3 mid = 0.5 * (m.V[e.a] + m.V[e.b]);
    if (bd) mid = S.project(mid);
    midpoint[e] = m.nv();
    m.V.push_back(mid);
  }
  if (midpoint.empty()) return false;
  std::vector<std::array<int, 3>> newF;
  newF.reserve(m.F.size() + 2 * midpoint.size());
  for (int t = 0; t < m.nt(); ++t) {
    const auto& f = m.F[t];
    int split_k = -1, mid = -1;
    for (int k = 0; k < 3; ++k) {
      Edge e{std::min(f[k], f[(k + 1) % 3]), std::max(f[k], f[(k + 1) % 3])};
      auto it = midpoint.find(e);
      if (it != midpoint.end()) {
        split_k = k;
        mid = it->second;
        break;  // matching guarantees at most one split edge per triangle
      }
    }
    if (split_k < 0) {
      newF.push_back(f);
    } else {
      const int a = f[split_k], b = f[(split_k + 1) % 3], c = f[(split_k + 2) % 3];
      newF.push_back({a, mid, c});
      newF.push_back({mid, b, c});
    }
  }
  m.F = std::move(newF);
  m.finalize();
  return true;
}

inline bool collapse_pass(TriSurface& m, const SupportSurface& S, double h_min, double quality_floor) {
  auto et = edge_tris(m);
  std::vector<std::set<int>> vnbr(m.nv());
  for (const auto& [e, tris] : et) {
    vnbr[e.a].insert(e.b);
    vnbr[e.b].insert(e.a);
  }
  std::vector<std::pair<double, Edge>> shorts;
  for (const auto& [e, tris] : et) {
    const double len = (m.V[e.a] - m.V[e.b]).norm();
    if (len < h_min) shorts.push_back({len, e});
  }
  if (shorts.empty()) return false;
  std::sort(shorts.begin(), shorts.end(), [](const auto& x, const auto& y) {
    if (x.first != y.first) return x.first < y.first;
    return x.second < y.second;
  });
  std::vector<char> locked(m.nv(), 0);
  std::vector<int> remap(m.nv());
  for (int v = 0; v < m.nv(); ++v) remap[v] = v;
  std::vector<Vec3> newpos = m.V;
  bool any = false;
  for (const auto& [len, e] : shorts) {
    if (locked[e.a] || locked[e.b]) continue;
    const bool bd_a = m.is_boundary_vertex(e.a), bd_b = m.is_boundary_vertex(e.b);
    const bool bd_edge = et[{e.a, e.b}].size() == 1;
    if (bd_a && bd_b && !bd_edge) continue;  // would pinch the boundary
    // link condition: shared neighbors must be exactly the opposite vertices
    std::vector<int> shared;
    std::set_intersection(vnbr[e.a].begin(), vnbr[e.a].end(), vnbr[e.b].begin(), vnbr[e.b].end(),
                          std::back_inserter(shared));
    if (static_cast<int>(shared.size()) != static_cast<int>(et[{e.a, e.b}].size())) continue;
    int keep, drop;
    Vec3 pos;
    if (bd_a && !bd_b) {
      keep = e.a;
      drop = e.b;
      pos = m.V[e.a];
    } else if (bd_b && !bd_a) {
      keep = e.b;
      drop = e.a;
      pos = m.V[e.b];
    } else {
      keep = std::min(e.a, e.b);
      drop = std::max(e.a, e.b);
      pos = 0.5 * (m.V[e.a] + m.V[e.b]);
      if (bd_a && bd_b) pos = S.project(pos);
    }
    // validate the triangles that survive the collapse: quality above the
    // floor and no fold-over against their pre-collapse normal
    bool ok = true;
    std::vector<std::array<int, 3>> affected;
    for (const auto& [ee, tris] : et) {
      if (ee.a != e.a && ee.a != e.b && ee.b != e.a && ee.b != e.b) continue;
      for (int t : tris) affected.push_back(m.F[t]);
    }
    std::sort(affected.begin(), affected.end());
    affected.erase(std::unique(affected.begin(), affected.end()), affected.end());
    for (const auto& forig : affected) {
      std::array<int, 3> f = forig;
      for (int k = 0; k < 3; ++k)
        if (f[k] == drop) f[k] = keep;
      if (f[0] == f[1] || f[1] == f[2] || f[2] == f[0]) continue;  // removed triangle
      Vec3 p[3], pold[3];
      for (int k = 0; k < 3; ++k) {
        p[k] = f[k] == keep ? pos : newpos[f[k]];
        pold[k] = newpos[forig[k]];
      }
      const Vec3 n = (p[1] - p[0]).cross(p[2] - p[0]);
      const double area = 0.5 * n.norm();
      const double la = (p[1] - p[0]).norm(), lb = (p[2] - p[1]).norm(), lc = (p[0] - p[2]).norm();
      const double q = area / (0.5 * (la + lb + lc) * std::max({la, lb, lc}));
      if (!(q > quality_floor)) {
        ok = false;
        break;
      }
      const Vec3 nold = (pold[1] - pold[0]).cross(pold[2] - pold[0]);
      if (nold.norm() > 1e-300 && n.norm() > 1e-300 &&
          n.normalized().dot(nold.normalized()) < 0.2) {
        ok = false;
        break;
      }
    }
    if (!ok) continue;
    remap[drop] = keep;
    newpos[keep] = pos;
    locked[e.a] = locked[e.b] = 1;
    for (int u : vnbr[e.a]) locked[u] = 1;
    for (int u : vnbr[e.b]) locked[u] = 1;
    any = true;
  }
  if (!any) return false;
  // apply remap, drop dead triangles, compact vertices
  std::vector<std::array<int, 3>> newF;
  for (const auto& f : m.F) {
    std::array<int, 3> g{remap[f[0]], remap[f[1]], remap[f[2]]};
    if (g[0] == g[1] || g[1] == g[2] || g[2] == g[0]) continue;
    newF.push_back(g);
  }
  std::vector<int> used(m.nv(), -1);
  TriSurface out;
  for (auto& f : newF)
    for (int& v : f) {
      if (used[v] == -1) {
        used[v] = out.nv();
        out.V.push_back(newpos[v]);
      }
      v = used[v];
    }
  out.F = std::move(newF);
  out.finalize();
  m = std::move(out);
  return true;
}

inline bool flip_pass(TriSurface& m) {
  auto et = edge_tris(m);
  std::set<Edge> existing;
  for (const auto& [e, tris] : et) existing.insert(e);
  std::vector<char> tri_used(m.nt(), 0);
  std::vector<std::array<int, 3>> F = m.F;
  bool any = false;
  for (const auto& [e, tris] : et) {
    if (tris.size() != 2 || tri_used[tris[0]] || tri_used[tris[1]]) continue;
    const auto &f0 = m.F[tris[0]], &f1 = m.F[tris[1]];
    auto opposite = [&](const std::array<int, 3>& f) {
      for (int k = 0; k < 3; ++k)
        if (f[k] != e.a && f[k] != e.b) return f[k];
      return -1;
    };
    const int c = opposite(f0), d = opposite(f1);
    if (c < 0 || d < 0 || c == d) continue;
    if (existing.count({std::min(c, d), std::max(c, d)})) continue;
    auto angle_at = [&](int at, int p, int q) {
      const Vec3 u = m.V[p] - m.V[at], v = m.V[q] - m.V[at];
      return std::atan2(u.cross(v).norm(), u.dot(v));
    };
    if (angle_at(c, e.a, e.b) + angle_at(d, e.a, e.b) <= PI + 1e-3) continue;
    // orientation: f0 contains edge in some direction (x -> y); new tris share c-d
    int x = -1, y = -1;
    for (int k = 0; k < 3; ++k) {
      const int u = f0[k], v = f0[(k + 1) % 3];
      if ((u == e.a && v == e.b) || (u == e.b && v == e.a)) {
        x = u;
        y = v;
      }
    }
    std::array<int, 3> g0{x, d, c}, g1{y, c, d};
    auto quality = [&](const std::array<int, 3>& f) {
      const Vec3 n = (m.V[f[1]] - m.V[f[0]]).cross(m.V[f[2]] - m.V[f[0]]);
      const double area = 0.5 * n.norm();
      const double la = (m.V[f[1]] - m.V[f[0]]).norm(), lb = (m.V[f[2]] - m.V[f[1]]).norm(),
                   lc = (m.V[f[0]] - m.V[f[2]]).norm();
      return area / (0.5 * (la + lb + lc) * std::max({la, lb, lc}));
    };
    auto nrm = [&](const std::array<int, 3>& f) {
      return ((m.V[f[1]] - m.V[f[0]]).cross(m.V[f[2]] - m.V[f[0]])).normalized();
    };
    const double q_old = std::min(quality(f0), quality(f1));
    const double q_new = std::min(quality(g0), quality(g1));
    if (!(q_new > q_old + 1e-12)) continue;
    const Vec3 n_ref = (nrm(f0) + nrm(f1)).normalized();
    if (nrm(g0).dot(n_ref) < 0.2 || nrm(g1).dot(n_ref) < 0.2) continue;
    F[tris[0]] = g0;
    F[tris[1]] = g1;
    tri_used[tris[0]] = tri_used[tris[1]] = 1;
    existing.insert({std::min(c, d), std::max(c, d)});
    any = true;
  }
  if (!any) return false;
  m.F = std::move(F);
  m.finalize();
  return true;
}

inline void smooth_pass(TriSurface& m, const SupportSurface& S) {
  const auto normals = m.vertex_normals();
  std::vector<Vec3> centroid(m.nv(), Vec3::Zero());
  std::vector<double> wsum(m.nv(), 0.0);
  auto et = edge_tris(m);
  for (const auto& [e, tris] : et) {
    centroid[e.a] += m.V[e.b];
    centroid[e.b] += m.V[e.a];
    wsum[e.a] += 1.0;
    wsum[e.b] += 1.0;
  }
  std::vector<Vec3> newV = m.V;
  for (int v = 0; v < m.nv(); ++v) {
    if (wsum[v] <= 0.0) continue;
    const Vec3 c = centroid[v] / wsum[v];
    if (m.is_boundary_vertex(v)) continue;
    Vec3 d = c - m.V[v];
    d -= normals[v] * normals[v].dot(d);  // tangential only
    newV[v] = m.V[v] + 0.5 * d;
  }
  // light boundary equalization along the loop, staying on S
  for (const auto& loop : m.loops) {
    const int n = static_cast<int>(loop.size());
    for (int i = 0; i < n; ++i) {
      const Vec3 mid = 0.5 * (m.V[loop[(i + n - 1) % n]] + m.V[loop[(i + 1) % n]]);
      newV[loop[i]] = S.project(0.7 * m.V[loop[i]] + 0.3 * mid);
    }
  }
  m.V = std::move(newV);
  m.finalize();
}

}  // namespace remesh_detail

// Remesh toward target edge length h. Splits above 1.5h, collapses below
// 0.5h, flips toward Delaunay, smooths. Returns true if anything changed.
inline bool remesh(TriSurface& m, const SupportSurface& S, double h,
                   double quality_floor = 5e-3, int rounds = 3) {
  bool changed = false;
  for (int r = 0; r < rounds; ++r) {
    bool pass = false;
    for (int i = 0; i < 6; ++i)
      if (remesh_detail::split_pass(m, S, 1.5 * h))
        pass = true;
      else
        break;
    for (int i = 0; i < 6; ++i)
      if (remesh_detail::collapse_pass(m, S, 0.5 * h, quality_floor))
        pass = true;
      else
        break;
    for (int i = 0; i < 6; ++i)
      if (remesh_detail::flip_pass(m))
        pass = true;
      else
        break;
    // smooth only after actual topology changes: callers rely on a false
    // return meaning the mesh is bit-identical (cached energies stay valid)
    if (!pass) break;
    remesh_detail::smooth_pass(m, S);
    changed = true;
  }
  return changed;
}

}  // namespace cappen
