#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "cappen/common.hpp"
#include "cappen/mesh.hpp"

namespace cappen {

// Per-vertex discrete curvature data.
//  - Hvec: gradient of total area w.r.t. the vertex, divided by the one-third
//    incident area. For smooth limits this is the mean curvature vector
//    (H = k1 + k2) times the unit normal.
//  - angle defects and boundary turning angles are raw angle sums, so the
//    Gauss-Bonnet total is combinatorially exact.
//  - shape: second fundamental form in an orthonormal tangent frame, from a
//    local quadric fit; h_norm2 is its squared Frobenius norm.
struct CurvatureField {
  std::vector<double> vertex_area;
  std::vector<Vec3> normal;
  std::vector<Vec3> Hvec;
  std::vector<double> H;             // signed, <Hvec, normal>
  std::vector<double> angle_defect;  // interior vertices; 0 on boundary
  std::vector<double> turning;       // boundary vertices; 0 in interior
  std::vector<double> bd_dual_len;   // half-sum of adjacent boundary edges
  std::vector<double> kgeo;          // turning / bd_dual_len on boundary
  std::vector<double> K;             // Gaussian: defect/area inside, fit det on boundary
  std::vector<Mat2> shape;
  std::vector<double> h_norm2;
};

namespace detail {
inline double corner_angle(const Vec3& at, const Vec3& p, const Vec3& q) {
  const Vec3 u = p - at, v = q - at;
  const double c = u.dot(v), s = u.cross(v).norm();
  return std::atan2(s, c);
}
}  // namespace detail

inline CurvatureField compute_curvatures(const TriSurface& m) {
  const int n = m.nv();
  CurvatureField cf;
  cf.vertex_area = m.vertex_areas();
  cf.normal = m.vertex_normals();
  cf.Hvec.assign(n, Vec3::Zero());
  cf.H.assign(n, 0.0);
  cf.angle_defect.assign(n, 0.0);
  cf.turning.assign(n, 0.0);
  cf.bd_dual_len.assign(n, 0.0);
  cf.kgeo.assign(n, 0.0);
  cf.K.assign(n, 0.0);
  cf.shape.assign(n, Mat2::Zero());
  cf.h_norm2.assign(n, 0.0);

  // Area gradient accumulation: grad_a area(a,b,c) = 0.5 * nhat x (c - b).
  std::vector<double> angle_sum(n, 0.0);
  for (int t = 0; t < m.nt(); ++t) {
    const auto& f = m.F[t];
    const Vec3 an = m.tri_normal_area(t);
    const double len = an.norm();
    if (len < 1e-300) throw DegeneracyError(strf("curvature: triangle %d has zero area", t));
    const Vec3 nh = an / len;
    for (int k = 0; k < 3; ++k) {
      const int a = f[k], b = f[(k + 1) % 3], c = f[(k + 2) % 3];
      cf.Hvec[a] += 0.5 * nh.cross(m.V[c] - m.V[b]);
      angle_sum[a] += detail::corner_angle(m.V[a], m.V[b], m.V[c]);
    }
  }
  for (int v = 0; v < n; ++v) {
    cf.Hvec[v] /= cf.vertex_area[v];
    cf.H[v] = cf.Hvec[v].dot(cf.normal[v]);
    if (m.is_boundary_vertex(v))
      cf.turning[v] = PI - angle_sum[v];
    else {
      cf.angle_defect[v] = 2.0 * PI - angle_sum[v];
      cf.K[v] = cf.angle_defect[v] / cf.vertex_area[v];
    }
  }
  for (const auto& loop : m.loops) {
    const int L = static_cast<int>(loop.size());
    for (int i = 0; i < L; ++i) {
      const double e = (m.V[loop[(i + 1) % L]] - m.V[loop[i]]).norm();
      cf.bd_dual_len[loop[i]] += 0.5 * e;
      cf.bd_dual_len[loop[(i + 1) % L]] += 0.5 * e;
    }
  }
  for (int v = 0; v < n; ++v)
    if (m.is_boundary_vertex(v)) cf.kgeo[v] = cf.turning[v] / cf.bd_dual_len[v];

  // Quadric fit per vertex: w = 0.5(a u^2 + 2b uv + c v^2) + d u + e v over
  // the 1-ring (2-ring if the stencil is thin), in scaled tangent coords.
  std::vector<std::vector<int>> adj(n);
  for (int t = 0; t < m.nt(); ++t)
    for (int k = 0; k < 3; ++k) {
      adj[m.F[t][k]].push_back(m.F[t][(k + 1) % 3]);
      adj[m.F[t][k]].push_back(m.F[t][(k + 2) % 3]);
    }
  for (auto& a : adj) {
    std::sort(a.begin(), a.end());
    a.erase(std::unique(a.begin(), a.end()), a.end());
  }
  for (int v = 0; v < n; ++v) {
    std::vector<int> nbrs = adj[v];
    if (nbrs.size() < 5) {
      std::vector<int> wide = nbrs;
      for (int u : nbrs)
        for (int w : adj[u])
          if (w != v) wide.push_back(w);
      std::sort(wide.begin(), wide.end());
      wide.erase(std::unique(wide.begin(), wide.end()), wide.end());
      nbrs = std::move(wide);
    }
    const Vec3& nh = cf.normal[v];
    Vec3 e1 = std::abs(nh.x()) < 0.9 ? Vec3(1, 0, 0) : Vec3(0, 1, 0);
    e1 = (e1 - nh * nh.dot(e1)).normalized();
    const Vec3 e2 = nh.cross(e1);
    double scale = 0.0;
    for (int u : nbrs) scale += (m.V[u] - m.V[v]).norm();
    scale /= std::max<size_t>(1, nbrs.size());
    if (scale < 1e-300) throw DegeneracyError("curvature: collapsed stencil");
    Eigen::Matrix<double, 5, 5> A = Eigen::Matrix<double, 5, 5>::Zero();
    Eigen::Matrix<double, 5, 1> rhs = Eigen::Matrix<double, 5, 1>::Zero();
    for (int u : nbrs) {
      const Vec3 d = (m.V[u] - m.V[v]) / scale;
      const double x = d.dot(e1), y = d.dot(e2), w = d.dot(nh);
      Eigen::Matrix<double, 5, 1> row;
      row << 0.5 * x * x, x * y, 0.5 * y * y, x, y;
      A += row * row.transpose();
      rhs += row * w;
    }
    const Eigen::Matrix<double, 5, 1> sol = A.ldlt().solve(rhs);
    Mat2 II;
    II << sol[0], sol[1], sol[1], sol[2];
    II /= scale;  // undo coordinate scaling
    cf.shape[v] = II;
    cf.h_norm2[v] = II.squaredNorm();
    if (m.is_boundary_vertex(v)) cf.K[v] = II.determinant();
  }
  return cf;
}

// Interior angle defects plus boundary turning angles; equals 2*pi*chi up to
// floating-point roundoff of the angle sums (no area weights involved).
struct GaussBonnetReport {
  double total;
  double expected;
  double residual;
};

inline GaussBonnetReport gauss_bonnet_check(const TriSurface& m, const CurvatureField& cf) {
  double s = 0.0;
  for (int v = 0; v < m.nv(); ++v)
    s += m.is_boundary_vertex(v) ? cf.turning[v] : cf.angle_defect[v];
  const double expected = 2.0 * PI * m.chi;
  return {s, expected, std::abs(s - expected)};
}

// |boundary|^2 / (4 pi area) for a single-component surface; >= 1 for flat
// disks, used as a shape diagnostic along the continuation sweep.
inline double isoperimetric_ratio(const TriSurface& m) {
  if (m.n_components != 1) throw DomainError("isoperimetric_ratio: expects a single component");
  const double L = m.boundary_length();
  return L * L / (4.0 * PI * m.area());
}

}  // namespace cappen
