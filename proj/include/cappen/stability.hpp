#pragma once

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include <cmath>
#include <random>
#include <vector>

#include "cappen/common.hpp"
#include "cappen/curvature.hpp"
#include "cappen/energy.hpp"

namespace cappen {

// Quadratic form of the second variation at a capillary configuration:
//   Q(f) = int |grad f|^2 - int |h|^2 f^2 - cosh(t) int_bd H_S f^2 + int_bd k f^2
// assembled as K (cotan stiffness), P (interior potential, lumped), B
// (boundary weights: turning angle - cosh(t) H_S * dual length), M (lumped
// vertex-area mass).
struct JacobiForm {
  Eigen::SparseMatrix<double> K;
  Eigen::VectorXd P;
  Eigen::VectorXd B;
  Eigen::VectorXd M;

  Eigen::SparseMatrix<double> Q() const {
    Eigen::SparseMatrix<double> q = K;
    Eigen::VectorXd d = B - P;
    for (int i = 0; i < d.size(); ++i) q.coeffRef(i, i) += d[i];
    q.makeCompressed();
    return q;
  }
  double value(const Eigen::VectorXd& f) const {
    return f.dot(K * f) - f.dot(P.cwiseProduct(f)) + f.dot(B.cwiseProduct(f));
  }
};

// Cotangent stiffness of the triangulation (PSD up to rounding; kernel =
// constants per component).
inline Eigen::SparseMatrix<double> cotan_stiffness(const TriSurface& m) {
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(12 * m.nt());
  for (int t = 0; t < m.nt(); ++t) {
    const auto& f = m.F[t];
    for (int k = 0; k < 3; ++k) {
      const int a = f[k], b = f[(k + 1) % 3], c = f[(k + 2) % 3];
      const Vec3 u = m.V[a] - m.V[c], v = m.V[b] - m.V[c];
      const double cross = u.cross(v).norm();
      if (cross < 1e-300) throw DegeneracyError("cotan_stiffness: degenerate triangle");
      const double w = 0.5 * u.dot(v) / cross;  // cot(angle at c) / 2
      trips.emplace_back(a, a, w);
      trips.emplace_back(b, b, w);
      trips.emplace_back(a, b, -w);
      trips.emplace_back(b, a, -w);
    }
  }
  Eigen::SparseMatrix<double> K(m.nv(), m.nv());
  K.setFromTriplets(trips.begin(), trips.end());
  K.makeCompressed();
  return K;
}

inline JacobiForm assemble_jacobi(const CapillaryState& st, const CurvatureField& cf) {
  const TriSurface& m = st.mesh;
  const int n = m.nv();
  JacobiForm J;
  J.K = cotan_stiffness(m);
  J.P = Eigen::VectorXd::Zero(n);
  J.B = Eigen::VectorXd::Zero(n);
  J.M = Eigen::VectorXd::Zero(n);
  const double cht = std::cosh(st.t);
  for (int v = 0; v < n; ++v) {
    J.M[v] = cf.vertex_area[v];
    if (m.is_boundary_vertex(v)) {
      const double HS = st.S->mean_curvature_at(m.V[v]);
      J.B[v] = cf.turning[v] - cht * HS * cf.bd_dual_len[v];
    } else {
      J.P[v] = cf.h_norm2[v] * cf.vertex_area[v];
    }
  }
  return J;
}

// Matrix-free evaluation of the same form by per-element quadrature;
// independent summation path used as a cross-check on the assembly.
inline double jacobi_value_quadrature(const CapillaryState& st, const CurvatureField& cf,
                                      const Eigen::VectorXd& f) {
  const TriSurface& m = st.mesh;
  double dirichlet = 0.0;
  for (int t = 0; t < m.nt(); ++t) {
    const auto& tri = m.F[t];
    const Vec3 an = m.tri_normal_area(t);
    const double area2 = an.norm();
    const Vec3 nh = an / area2;
    Vec3 grad = Vec3::Zero();
    for (int k = 0; k < 3; ++k) {
      const int a = tri[k], b = tri[(k + 1) % 3], c = tri[(k + 2) % 3];
      grad += f[a] * nh.cross(m.V[c] - m.V[b]) / area2;
    }
    dirichlet += 0.5 * area2 * grad.squaredNorm();
  }
  double potential = 0.0, boundary = 0.0;
  const double cht = std::cosh(st.t);
  for (int v = 0; v < m.nv(); ++v) {
    if (m.is_boundary_vertex(v)) {
      const double HS = st.S->mean_curvature_at(m.V[v]);
      boundary += (cf.turning[v] - cht * HS * cf.bd_dual_len[v]) * f[v] * f[v];
    } else {
      potential += cf.h_norm2[v] * cf.vertex_area[v] * f[v] * f[v];
    }
  }
  return dirichlet - potential + boundary;
}

// ----- smallest Jacobi eigenpairs -----

struct EigenPairs {
  double kappa1 = 0.0, kappa2 = 0.0;
  Eigen::VectorXd f1, f2;
  int iterations = 0;
};

inline EigenPairs min_eigenpairs(const JacobiForm& form, uint64_t seed = 12345,
                                 int want_second = 1, double tol = 1e-8) {
  const int n = static_cast<int>(form.M.size());
  const Eigen::SparseMatrix<double> Q = form.Q();
  // certified lower bound: the stiffness part is PSD, so kappa1 >= min (B-P)/M
  double lo = std::numeric_limits<double>::infinity();
  for (int i = 0; i < n; ++i) lo = std::min(lo, (form.B[i] - form.P[i]) / form.M[i]);
  double sigma = lo - 0.01 * std::abs(lo) - 0.1;

  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt;
  auto try_shift = [&](double s) {
    Eigen::SparseMatrix<double> A = Q;
    for (int i = 0; i < n; ++i) A.coeffRef(i, i) -= s * form.M[i];
    ldlt.compute(A);
    return ldlt.info() == Eigen::Success && (ldlt.vectorD().array() > 0.0).all();
  };
  for (int attempt = 0; !try_shift(sigma); ++attempt) {
    if (attempt >= 8) throw EigenSolveError("min_eigenpairs: no positive-definite shift found");
    sigma -= std::max(1.0, std::abs(sigma));
  }
  const double sigma_safe = sigma;

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  auto run_mode = [&](const Eigen::VectorXd* deflate, double& kappa, Eigen::VectorXd& vec,
                      int& iters) {
    if (sigma != sigma_safe && !try_shift(sigma)) {
      sigma = sigma_safe;
      try_shift(sigma);
    }
    Eigen::VectorXd v(n);
    for (int i = 0; i < n; ++i) v[i] = 1.0 + 0.01 * uni(rng);
    auto project_out = [&](Eigen::VectorXd& w) {
      if (!deflate) return;
      const double c = deflate->dot(form.M.cwiseProduct(w)) /
                       deflate->dot(form.M.cwiseProduct(*deflate));
      w -= c * (*deflate);
    };
    project_out(v);
    v /= std::sqrt(v.dot(form.M.cwiseProduct(v)));
    double rho_prev = std::numeric_limits<double>::infinity();
    int since_refactor = 0;
    for (int it = 1; it <= 3000; ++it) {
      Eigen::VectorXd w = ldlt.solve(form.M.cwiseProduct(v));
      project_out(w);
      const double nrm = std::sqrt(w.dot(form.M.cwiseProduct(w)));
      if (!(nrm > 0.0)) throw EigenSolveError("min_eigenpairs: iteration vanished");
      v = w / nrm;
      const double rho = v.dot(Q * v);
      if (std::abs(rho - rho_prev) < tol * std::max(1.0, std::abs(rho))) {
        kappa = rho;
        vec = v;
        iters = it;
        return;
      }
      // the Rayleigh quotient bounds the target from above: move the shift
      // towards it for a better contraction rate, keeping positive definiteness
      if (++since_refactor >= 25) {
        since_refactor = 0;
        double cand = rho - 0.05 * std::max(1.0, rho - sigma);
        for (int a = 0; a < 3 && cand > sigma; ++a, cand = 0.5 * (cand + sigma))
          if (try_shift(cand)) {
            sigma = cand;
            break;
          }
        if (sigma != cand && !try_shift(sigma))
          throw EigenSolveError("min_eigenpairs: shift refactorization failed");
      }
      rho_prev = rho;
    }
    throw EigenSolveError("min_eigenpairs: inverse iteration did not settle");
  };

  EigenPairs out;
  int it1 = 0, it2 = 0;
  run_mode(nullptr, out.kappa1, out.f1, it1);
  if (out.f1.sum() < 0.0) out.f1 = -out.f1;
  if (want_second) {
    run_mode(&out.f1, out.kappa2, out.f2, it2);
    if (out.kappa2 < out.kappa1) std::swap(out.kappa1, out.kappa2), std::swap(out.f1, out.f2);
  }
  out.iterations = it1 + it2;
  return out;
}

// Convenience: smallest Jacobi eigenvalue of a converged state.
inline double jacobi_kappa1(const CapillaryState& st, uint64_t seed = 12345) {
  const CurvatureField cf = compute_curvatures(st.mesh);
  const JacobiForm form = assemble_jacobi(st, cf);
  return min_eigenpairs(form, seed, 0).kappa1;
}

// ----- finite-difference verification of the variation formulas -----

struct VariationReport {
  double area_fd = 0.0, area_exact = 0.0, r1 = 0.0;
  double band_fd = 0.0, band_exact = 0.0, r2 = 0.0;
  double second_fd = 0.0, form_value = 0.0, r3 = 0.0;
  double quad_value = 0.0, matrix_value = 0.0, r4 = 0.0;
  // first-derivative residuals at the coarse step (10x delta1) and the
  // observed order of the second-difference combination under step doubling;
  // order is 0 when the differences are below measurement noise
  double r1_coarse = 0.0, r2_coarse = 0.0;
  double second_order = 0.0;
};

namespace detail {
// Variation field with normal speed f: f*nu inside; on the boundary the
// tangential-to-S combination f*(nu + sinh(t) mu), mu the outward conormal.
inline std::vector<Vec3> variation_field(const CapillaryState& st, const Eigen::VectorXd& f) {
  const TriSurface& m = st.mesh;
  const auto normals = m.vertex_normals();
  std::vector<Vec3> X(m.nv());
  for (int v = 0; v < m.nv(); ++v) X[v] = f[v] * normals[v];
  const double sht = std::sinh(st.t);
  for (const auto& loop : m.loops) {
    const int n = static_cast<int>(loop.size());
    for (int i = 0; i < n; ++i) {
      const int v = loop[i];
      const Vec3 e = (m.V[loop[(i + 1) % n]] - m.V[loop[(i + n - 1) % n]]).normalized();
      Vec3 mu = e.cross(normals[v]);
      mu -= normals[v] * normals[v].dot(mu);
      mu.normalize();
      X[v] = f[v] * (normals[v] + sht * mu);
    }
  }
  return X;
}
}  // namespace detail

// Compares: (r1) FD of area along the straight path x + s X against the
// assembled gradient; (r2) same for the wetted band; (r3) FD second
// difference of |Sigma| + cos(theta)|S(Sigma)| along the projected path
// (boundary snapped back to S) against the Jacobi form; (r4) quadrature vs
// matrix evaluation of the form itself.
inline VariationReport fd_variation_check(const CapillaryState& st, const Eigen::VectorXd& f,
                                          double delta1 = 1e-5, double delta2 = 1e-4) {
  const TriSurface& m = st.mesh;
  if (f.size() != m.nv()) throw DomainError("fd_variation_check: field size mismatch");
  const std::vector<Vec3> X = detail::variation_field(st, f);

  auto displaced = [&](double s, bool project) {
    TriSurface d = m;
    for (int v = 0; v < m.nv(); ++v) d.V[v] += s * X[v];
    if (project)
      for (const auto& loop : m.loops)
        for (int v : loop) d.V[v] = st.S->project(d.V[v]);
    return d;
  };

  VariationReport rep;
  auto first_fd = [&](double s, double& da, double& db) {
    const TriSurface p = displaced(s, false), q = displaced(-s, false);
    da = (p.area(1e-9) - q.area(1e-9)) / (2.0 * s);
    db = (band_area(p, *st.S) - band_area(q, *st.S)) / (2.0 * s);
  };
  first_fd(delta1, rep.area_fd, rep.band_fd);
  const auto gA = area_gradient(m);
  const auto gB = band_gradient(m, *st.S);
  for (int v = 0; v < m.nv(); ++v) {
    rep.area_exact += gA[v].dot(X[v]);
    rep.band_exact += gB[v].dot(X[v]);
  }
  rep.r1 = std::abs(rep.area_fd - rep.area_exact) / std::max(1.0, std::abs(rep.area_exact));
  rep.r2 = std::abs(rep.band_fd - rep.band_exact) / std::max(1.0, std::abs(rep.band_exact));
  {
    double dac, dbc;
    first_fd(10.0 * delta1, dac, dbc);
    rep.r1_coarse = std::abs(dac - rep.area_exact) / std::max(1.0, std::abs(rep.area_exact));
    rep.r2_coarse = std::abs(dbc - rep.band_exact) / std::max(1.0, std::abs(rep.band_exact));
  }

  const double ct = st.cos_theta();
  auto combo = [&](double s) {
    const TriSurface d = displaced(s, true);
    return d.area(1e-9) + ct * band_area(d, *st.S);
  };
  const double g0 = combo(0.0);
  auto second_fd_at = [&](double s) { return (combo(s) - 2.0 * g0 + combo(-s)) / (s * s); };
  const double s1 = second_fd_at(delta2), s2 = second_fd_at(2.0 * delta2),
               s4 = second_fd_at(4.0 * delta2);
  rep.second_fd = s1;
  const double noise = 1e-10 * std::max(1.0, std::abs(s1));
  if (std::abs(s2 - s1) > noise && std::abs(s4 - s2) > noise && (s4 - s2) * (s2 - s1) > 0.0)
    rep.second_order = std::log2(std::abs(s4 - s2) / std::abs(s2 - s1));

  const CurvatureField cf = compute_curvatures(m);
  const JacobiForm form = assemble_jacobi(st, cf);
  rep.form_value = form.value(f);
  rep.r3 = std::abs(rep.second_fd - rep.form_value) / std::max(1.0, std::abs(rep.form_value));
  rep.quad_value = jacobi_value_quadrature(st, cf, f);
  rep.matrix_value = rep.form_value;
  rep.r4 = std::abs(rep.quad_value - rep.matrix_value) / std::max(1.0, std::abs(rep.matrix_value));
  return rep;
}

// Second derivative of area w.r.t. wetted area predicted by the comparison
// argument at a stationary leaf:
//   (1 - tanh^2 t) / gamma^2 * sum_i gamma_i^2 (2 pi chi_i
//        - 1/2 int_{Sigma_i} |h|^2 - cosh t int_{bd Sigma_i} H_S)
// with gamma_i = |bd Sigma_i| / sum_j |bd Sigma_j|^2 and
// gamma = sum_i gamma_i |bd Sigma_i|.
inline double comparison_second_derivative(const CapillaryState& st, const CurvatureField& cf) {
  const TriSurface& m = st.mesh;
  std::vector<double> bd_len(m.n_components, 0.0), pot(m.n_components, 0.0),
      wall(m.n_components, 0.0);
  for (const auto& loop : m.loops) {
    const int n = static_cast<int>(loop.size());
    for (int i = 0; i < n; ++i) {
      const int v = loop[i];
      bd_len[m.comp_of[v]] += (m.V[loop[(i + 1) % n]] - m.V[v]).norm();
      wall[m.comp_of[v]] += st.S->mean_curvature_at(m.V[v]) * cf.bd_dual_len[v];
    }
  }
  for (int v = 0; v < m.nv(); ++v)
    if (!m.is_boundary_vertex(v)) pot[m.comp_of[v]] += cf.h_norm2[v] * cf.vertex_area[v];
  double len2 = 0.0;
  for (double L : bd_len) len2 += L * L;
  if (!(len2 > 0.0)) throw DomainError("comparison_second_derivative: no boundary");
  const double th = std::tanh(st.t), cht = std::cosh(st.t);
  double gamma = 0.0, sum = 0.0;
  for (int c = 0; c < m.n_components; ++c) {
    const double gi = bd_len[c] / len2;
    gamma += gi * bd_len[c];
    sum += gi * gi * (2.0 * PI * m.comp_chi[c] - 0.5 * pot[c] - cht * wall[c]);
  }
  return (1.0 - th * th) / (gamma * gamma) * sum;
}

}  // namespace cappen
