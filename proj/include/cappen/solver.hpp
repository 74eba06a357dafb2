#pragma once

#include <cmath>
#include <vector>

#include "cappen/axisym.hpp"
#include "cappen/common.hpp"
#include "cappen/energy.hpp"
#include "cappen/mesh.hpp"
#include "cappen/remesh.hpp"
#include "cappen/stability.hpp"
#include "cappen/support.hpp"

namespace cappen {

struct SolverOptions {
  double tol_grad = 1e-6;
  double tol_angle = 1e-3;
  int max_iters = 20000;
  double shrink = 0.5;
  double armijo_c = 1e-4;
  bool remesh = true;
  double target_edge = 0.05;
  double degeneracy_floor = 1e-3;
  uint64_t seed = 12345;
  double collapse_fraction = 1e-3;  // of initial area; 0 disables detection
  double grace = 1e-2;              // sweep: allowed min-radius backslide
  double mf_slack = 1e-3;           // sweep: catenoid-constant / monotone slack

  void validate() const {
    if (!(tol_grad > 0.0) || !(tol_angle > 0.0)) throw DomainError("solver: tolerances must be positive");
    if (!(shrink > 0.0 && shrink < 1.0)) throw DomainError("solver: shrink must lie in (0,1)");
    if (max_iters < 1) throw DomainError("solver: max_iters must be >= 1");
    if (!(target_edge > 0.0)) throw DomainError("solver: target_edge must be positive");
    if (!(degeneracy_floor > 0.0 && degeneracy_floor < 0.25))
      throw DomainError("solver: degeneracy floor outside (0, 0.25)");
  }
};

struct NonConvergenceError : Error {
  NonConvergenceError(std::string msg, CapillaryState last_state)
      : Error(std::move(msg)), last(std::move(last_state)) {}
  CapillaryState last;
};

struct MinimizeOutcome {
  CapillaryState state;
  bool collapsed = false;
  int iters = 0;
};

namespace solver_detail {

inline void project_boundary(TriSurface& m, const SupportSurface& S) {
  for (const auto& loop : m.loops)
    for (int v : loop) m.V[v] = S.project(m.V[v]);
}

inline double mean_boundary_extent(const TriSurface& m) {
  double s = 0.0;
  int n = 0;
  for (const auto& loop : m.loops)
    for (int v : loop) {
      s += std::hypot(m.V[v].x(), m.V[v].y());
      ++n;
    }
  return n ? s / n : 0.0;
}

inline double max_band_coord(const TriSurface& m, const SupportSurface& S) {
  double q = -std::numeric_limits<double>::infinity();
  for (const auto& loop : m.loops)
    for (int v : loop) q = std::max(q, S.band_coord(m.V[v]));
  return q;
}

// H1 (stiffness + mass) preconditioned direction: solve (K + eps M) u = g
// per coordinate and descend along -u. Scale-free: accepted steps stay O(1)
// under mesh refinement, where the raw gradient's ceiling shrinks with the
// finest triangle. eps = 1/total area keeps the rigid translation modes
// (stiffness kernel) available at the scale of the whole surface. Empty
// return = factorization failure; caller falls back.
inline std::vector<Vec3> h1_direction(const TriSurface& m, const std::vector<Vec3>& g) {
  const int n = m.nv();
  Eigen::SparseMatrix<double> K = cotan_stiffness(m);
  const std::vector<double> A = m.vertex_areas();
  double total = 0.0;
  for (double a : A) total += a;
  const double eps = 1.0 / std::max(total, 1e-12);
  for (int v = 0; v < n; ++v) K.coeffRef(v, v) += eps * std::max(A[v], 1e-300);
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(K);
  if (ldlt.info() != Eigen::Success) return {};
  Eigen::MatrixXd rhs(n, 3);
  for (int v = 0; v < n; ++v) rhs.row(v) = Eigen::RowVector3d(g[v].x(), g[v].y(), g[v].z());
  const Eigen::MatrixXd u = ldlt.solve(rhs);
  if (!u.allFinite()) return {};
  std::vector<Vec3> d(n);
  for (int v = 0; v < n; ++v) d[v] = -Vec3(u(v, 0), u(v, 1), u(v, 2));
  return d;
}

}  // namespace solver_detail

// Projected gradient descent on J_t with H1 (stiffness + mass) precondition-
// ing and backtracking Armijo line search. Boundary vertices are re-projected
// onto S at every trial, so the iterate always satisfies the constraint
// exactly.
inline MinimizeOutcome minimize(double t, TriSurface seed, SupportSurface& S,
                                const SolverOptions& opts) {
  opts.validate();
  if (!(t >= 0.0)) throw DomainError("minimize: need t >= 0");
  CapillaryState st;
  st.t = t;
  st.S = &S;
  st.mesh = std::move(seed);
  S.prepare_band(std::max(solver_detail::max_band_coord(st.mesh, S) + 2.0 * std::max(1.0, S.scale()),
                          S.band_domain_hi()));
  solver_detail::project_boundary(st.mesh, S);

  const double trial_floor = 0.2 * opts.degeneracy_floor;
  const double ref_extent = std::max(solver_detail::mean_boundary_extent(st.mesh), 1e-6);
  double J = free_energy(st, trial_floor);
  const double initial_area = st.mesh.area(trial_floor);
  // rim trigger alongside the area floor: a shrinking-away disk folds onto
  // the support and keeps spurious doubled-over area long after the contact
  // line has pinched, so the boundary extent is the reliable signal
  const double extent_floor = std::sqrt(opts.collapse_fraction) * ref_extent;
  double eta = 1.0;  // H1 directions make the natural step O(1)
  int stagnations = 0;
  MinimizeOutcome out;

  // Remesh a copy and commit only if the result supports an energy
  // evaluation; pathological (folded) geometry can otherwise come out of the
  // remesh below the degeneracy floor and poison the iteration.
  auto try_remesh = [&]() {
    // edge length scales with the absolute boundary extent (in units of the
    // support scale), keeping the triangle count roughly constant as the
    // surface grows up the funnel; mirrors the seeding resolution policy
    const double h =
        opts.target_edge *
        std::max(1.0, solver_detail::mean_boundary_extent(st.mesh) / std::max(S.scale(), 1e-12));
    TriSurface cand = st.mesh;
    if (!remesh(cand, S, h, std::max(5.0 * opts.degeneracy_floor, 0.02))) return false;
    CapillaryState probe = st;
    probe.mesh = std::move(cand);
    try {
      solver_detail::project_boundary(probe.mesh, S);
      S.prepare_band(solver_detail::max_band_coord(probe.mesh, S) + std::max(1.0, S.scale()));
      const double Jn = free_energy(probe, trial_floor);
      st.mesh = std::move(probe.mesh);
      J = Jn;
      log_debug(strf("minimize: remeshed to %d vertices at h=%.4g", st.mesh.nv(), h));
      return true;
    } catch (const DegeneracyError&) {
      return false;  // keep the current mesh; a later pass may succeed
    }
  };

  // Converge on fixed combinatorics, then adapt the mesh and re-converge;
  // finish when a converged mesh needs no further adaptation. Interleaving
  // adaptation with the descent instead would re-excite the gradient on
  // every remesh and can limit-cycle above the tolerance indefinitely.
  for (int round = 0;; ++round) {
    bool settled = false;
    while (out.iters < opts.max_iters) {
      ++out.iters;
      const std::vector<Vec3> g = energy_gradient(st);  // TangencyError propagates
      const double gmax = grad_max_norm(g);
      const double resid = contact_residual(st);
      if (gmax < opts.tol_grad && resid < opts.tol_angle) {
        settled = true;
        break;
      }
      if (out.iters % 250 == 0 && log_level() >= LogLevel::Debug) {
        int worst = 0;
        for (int v = 0; v < st.mesh.nv(); ++v)
          if (g[v].norm() > g[worst].norm()) worst = v;
        const std::vector<Vec3> nrm = st.mesh.vertex_normals();
        const double gn = std::abs(g[worst].dot(nrm[worst]));
        double rim_z = 0.0, rim_r = 0.0;
        int nb = 0;
        for (const auto& loop : st.mesh.loops)
          for (int v : loop) {
            rim_z += st.mesh.V[v].z();
            rim_r += std::hypot(st.mesh.V[v].x(), st.mesh.V[v].y());
            ++nb;
          }
        log_debug(strf("minimize: iter %d J=%.12g area=%.9g grad=%.3g resid=%.3g eta=%.3g nt=%d "
                       "rim[z=%.4f r=%.4f] worst[v=%d bdry=%d z=%.3f normal_frac=%.2f]",
                       out.iters, J, st.mesh.area(trial_floor), gmax, resid, eta, st.mesh.nt(),
                       rim_z / std::max(nb, 1), rim_r / std::max(nb, 1), worst,
                       int(st.mesh.is_boundary_vertex(worst)), st.mesh.V[worst].z(),
                       gn / std::max(g[worst].norm(), 1e-300)));
      }

      if (opts.collapse_fraction > 0.0) {
        const double a = st.mesh.area(trial_floor);
        if (a < opts.collapse_fraction * initial_area ||
            solver_detail::mean_boundary_extent(st.mesh) < extent_floor) {
          refresh_state(st, trial_floor);
          out.state = std::move(st);
          out.collapsed = true;
          return out;
        }
      }

      std::vector<Vec3> d = solver_detail::h1_direction(st.mesh, g);
      if (d.empty()) {
        // fallback: vertex-area scaled gradient (always a descent direction)
        const std::vector<double> A = st.mesh.vertex_areas();
        d.resize(st.mesh.nv());
        for (int v = 0; v < st.mesh.nv(); ++v) d[v] = -g[v] / std::max(A[v], 1e-12);
      }
      // the preconditioner couples rows, so re-restrict the step to the
      // admissible contact motion; descent is preserved (g lies in that
      // subspace, so g.d = -(Pg)' (K+eM)^-1 (Pg) <= 0)
      project_contact_rows(st.mesh, S, d);
      double gd = 0.0;
      for (int v = 0; v < st.mesh.nv(); ++v) gd += g[v].dot(d[v]);

      bool moved = false;
      double step = std::min(1.0, eta);
      for (int ls = 0; ls < 70; ++ls) {
        CapillaryState trial = st;
        for (int v = 0; v < trial.mesh.nv(); ++v) trial.mesh.V[v] += step * d[v];
        double Jt;
        try {
          solver_detail::project_boundary(trial.mesh, S);
          Jt = free_energy(trial, trial_floor);
        } catch (const DegeneracyError&) {
          step *= opts.shrink;
          continue;
        } catch (const DomainError&) {
          step *= opts.shrink;
          continue;
        }
        if (Jt <= J + opts.armijo_c * step * gd + 1e-13 * (1.0 + std::abs(J))) {
          if (Jt > J + 1e-9 * (1.0 + std::abs(J)))
            throw Error("minimize: accepted step increased the energy");  // invariant
          st.mesh = std::move(trial.mesh);
          J = Jt;
          eta = step * 1.3;
          moved = true;
          stagnations = 0;
          break;
        }
        step *= opts.shrink;
      }
      if (!moved) {
        // a fresh mesh often unblocks a search pinned by one sliver
        if (opts.remesh && ++stagnations <= 3 && try_remesh()) continue;
        refresh_state(st, trial_floor);
        if (opts.collapse_fraction > 0.0 &&
            solver_detail::mean_boundary_extent(st.mesh) < 2.0 * extent_floor) {
          out.state = std::move(st);
          out.collapsed = true;
          return out;
        }
        throw NonConvergenceError(
            strf("minimize: line search stagnated at iter %d (grad %.3g, residual %.3g)",
                 out.iters, gmax, resid),
            st);
      }
    }
    if (!settled) {
      refresh_state(st, trial_floor);
      throw NonConvergenceError(strf("minimize: max_iters=%d exceeded (grad %.3g, residual %.3g)",
                                     opts.max_iters, st.grad_max, st.residual),
                                st);
    }
    if (!opts.remesh || round >= 24 || !try_remesh()) break;
  }

  refresh_state(st, opts.degeneracy_floor);
  for (int c = 0; c < st.mesh.n_components; ++c)
    if (st.mesh.comp_chi[c] != 1)
      throw TopologyError(
          strf("minimize: converged component %d has chi=%d", c, st.mesh.comp_chi[c]));
  out.state = std::move(st);
  return out;
}

// Deterministic polar-disk seed for funnel supports: flat disk at the best
// reduced-model contact height, boundary exactly on the wall.
inline TriSurface seed_disk(SupportSurface& S, double t, const SolverOptions& opts) {
  if (S.kind() != SupportSurface::Kind::Funnel)
    throw DomainError("seed_disk: funnel kinds only (pass an explicit seed otherwise)");
  S.prepare_band(std::max(S.band_domain_hi(), S.scale() * (t + 2.0)));
  const AxisymResult ax = axisym_solve(S, t);
  const AxisymCandidate* disk = ax.best_disk();
  if (!disk) throw DomainError("seed_disk: no flat-disk candidate at this t");
  const double c = disk->c1;
  const double R = S.radius(c).v;
  const double h = opts.target_edge * std::max(1.0, R / S.radius(0.0).v);
  const int K = std::clamp(static_cast<int>(std::lround(R / h)), 6, 80);
  TriSurface m = make_disk(R, K, c);
  for (auto& p : m.V) p += S.center();
  m.finalize();
  return m;
}

struct OutermostResult {
  bool collapsed = false;
  CapillaryState state;
  int iters = 0;
};

// t = 0 solve: free-boundary minimal surface meeting S orthogonally. On
// supports with no such surface the flow shrinks the seed away; that is
// reported as collapse ("no outermost disk"), not as an error.
inline OutermostResult solve_outermost_disk(SupportSurface& S, TriSurface seed,
                                            const SolverOptions& opts) {
  MinimizeOutcome mo = minimize(0.0, std::move(seed), S, opts);
  return {mo.collapsed, std::move(mo.state), mo.iters};
}

inline OutermostResult solve_outermost_disk(SupportSurface& S, const SolverOptions& opts) {
  return solve_outermost_disk(S, seed_disk(S, 0.0, opts), opts);
}

// ----- continuation sweep -----

struct SweepRecord {
  double t = 0.0;
  double area = 0.0;
  double lateral = 0.0;  // s parameter
  double mf = 0.0;
  double residual = 0.0;
  double grad_norm = 0.0;
  double kappa = 0.0;
  int components = 1;
  double min_radius = 0.0;  // min |x| over the surface
  int iters = 0;
  // validation flags (not serialized to CSV)
  double energy = 0.0;
  bool s_increased = true;
  bool disks_ok = true;
  bool min_radius_ok = true;
  bool suspected_branch_jump = false;
};

struct SweepResult {
  std::vector<SweepRecord> records;
  std::vector<CapillaryState> states;
  bool complete = true;     // false: some t failed; records hold the prefix
  double failed_t = 0.0;
  std::string failure;
};

namespace solver_detail {
inline double min_vertex_norm(const TriSurface& m) {
  double r = std::numeric_limits<double>::infinity();
  for (const auto& p : m.V) r = std::min(r, p.norm());
  return r;
}
}  // namespace solver_detail

inline SweepResult continuation_sweep(SupportSurface& S, const std::vector<double>& t_grid,
                                      const SolverOptions& opts) {
  if (S.kind() != SupportSurface::Kind::Funnel)
    throw DomainError("continuation_sweep: funnel kinds only");
  if (t_grid.empty() || t_grid.front() != 0.0)
    throw DomainError("continuation_sweep: t_grid must start at 0");
  for (size_t i = 1; i < t_grid.size(); ++i)
    if (!(t_grid[i] > t_grid[i - 1]))
      throw DomainError("continuation_sweep: t_grid must increase strictly");
  S.prepare_band(S.scale() * (t_grid.back() + 2.0) + 1.0);
  const double offset0 = S.area_below_reference();

  SweepResult out;
  TriSurface warm;
  std::vector<double> qbar;  // mean boundary band coordinate per record
  for (size_t k = 0; k < t_grid.size(); ++k) {
    const double t = t_grid[k];
    TriSurface seedmesh;
    if (k == 0) {
      seedmesh = seed_disk(S, 0.0, opts);
    } else {
      // advect the previous state up the wall by the predicted contact shift
      double dq;
      if (k == 1 || qbar.size() < 2)
        dq = S.scale() * (t - t_grid[k - 1]);
      else
        dq = (qbar[k - 1] - qbar[k - 2]) * (t - t_grid[k - 1]) / (t_grid[k - 1] - t_grid[k - 2]);
      seedmesh = warm;
      for (auto& p : seedmesh.V) p.z() += dq;
      // radial rescale onto the wall: a pure height shift leaves the rim at
      // the previous leaf's radius, and the projected fold then costs the
      // descent thousands of iterations to iron out
      double rbar = 0.0, zbar = 0.0;
      int nb = 0;
      for (const auto& loop : seedmesh.loops)
        for (int v : loop) {
          rbar += std::hypot(seedmesh.V[v].x(), seedmesh.V[v].y());
          zbar += seedmesh.V[v].z();
          ++nb;
        }
      rbar /= nb;
      zbar /= nb;
      const double sc = S.radius_value(zbar) / std::max(rbar, 1e-12);
      for (auto& p : seedmesh.V) {
        p.x() *= sc;
        p.y() *= sc;
      }
      seedmesh.finalize();
    }
    MinimizeOutcome mo;
    try {
      mo = minimize(t, std::move(seedmesh), S, opts);
      if (mo.collapsed)
        throw NonConvergenceError("continuation_sweep: no outermost disk (collapse)", mo.state);
    } catch (const NonConvergenceError& e) {
      out.complete = false;
      out.failed_t = t;
      out.failure = e.what();
      log_warn(strf("sweep stopped at t=%.3f: %s", t, e.what()));
      return out;
    }
    CapillaryState st = std::move(mo.state);

    SweepRecord rec;
    rec.t = t;
    rec.area = st.area;
    rec.lateral = st.lateral;
    rec.mf = free_energy_mass(t, st.area);
    rec.residual = st.residual;
    rec.grad_norm = st.grad_max;
    rec.components = st.mesh.n_components;
    rec.min_radius = solver_detail::min_vertex_norm(st.mesh);
    rec.iters = mo.iters;
    rec.energy = st.energy;
    rec.kappa = jacobi_kappa1(st, opts.seed);
    rec.disks_ok = true;
    for (int c = 0; c < st.mesh.n_components; ++c) rec.disks_ok = rec.disks_ok && st.mesh.comp_chi[c] == 1;
    if (!out.records.empty()) {
      const SweepRecord& prev = out.records.back();
      rec.s_increased = rec.lateral > prev.lateral;
      rec.min_radius_ok = rec.min_radius >= prev.min_radius - opts.grace * std::max(1.0, prev.min_radius);
    }
    // branch probe: the reduced axisymmetric solve gives the best leafwise
    // competitor; flag the record if the mesh branch sits above it by more
    // than the expected discretization gap
    {
      const AxisymResult ax = axisym_solve(S, t);
      if (!ax.candidates.empty()) {
        double bestJ = std::numeric_limits<double>::infinity();
        for (const auto& cand : ax.candidates)
          if (!cand.degenerate)
            bestJ = std::min(bestJ, cand.energy + std::tanh(t) * offset0 *
                                                      (cand.type == AxisymCandidate::Type::Disk ? 1.0 : 0.0));
        double nbd = 0.0;
        for (const auto& loop : st.mesh.loops) nbd += static_cast<double>(loop.size());
        const double gap_est =
            (nbd > 0 ? std::pow(2.0 * PI / nbd, 2) / 6.0 : 0.0) * (st.area + st.lateral);
        rec.suspected_branch_jump = st.energy > bestJ + 3.0 * gap_est + 1e-6;
      }
    }
    warm = st.mesh;
    qbar.push_back(solver_detail::max_band_coord(st.mesh, S));
    out.records.push_back(rec);
    out.states.push_back(std::move(st));
    log_info(strf("sweep t=%.3f: area=%.6f s=%.6f mf=%.6f kappa=%.5f iters=%d", t, rec.area,
                  rec.lateral, rec.mf, rec.kappa, rec.iters));
  }
  return out;
}

}  // namespace cappen
