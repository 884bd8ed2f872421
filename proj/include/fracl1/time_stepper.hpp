#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "fracl1/caputo_l1.hpp"
#include "fracl1/fd_space.hpp"
#include "fracl1/fem_space.hpp"
#include "fracl1/krylov.hpp"
#include "fracl1/temporal_mesh.hpp"

namespace fracl1 {

using SpaceTimeFn = std::function<double(const Point&, double)>;
using SpaceFn = std::function<double(const Point&)>;

/// Initial-boundary value problem data for
///   dfrac(u) + L u = f in Omega x (0,T],  u = g on the boundary,
///   u(., 0) = u0;  g may be empty for homogeneous Dirichlet data.
struct EvolutionProblem {
  double alpha = 0.5;
  TemporalMesh mesh = graded_mesh(1.0, 1, 1.0);
  SpaceTimeFn f;
  SpaceTimeFn g;      // boundary data; empty means 0
  SpaceFn u0;
  SpaceTimeFn exact;  // optional; enables error tracking
};

struct EvolveOptions {
  double tol = 1e-10;              // per-level linear solve, relative residual
  std::size_t max_iterations = 0;  // 0: solver default
  int threads = 1;
  std::size_t thin = 1;            // store every thin-th level in the trace
  bool kahan = false;              // compensated history accumulation
};

struct SolutionTrace {
  std::vector<double> times;                  // t_0..t_M
  std::vector<std::size_t> stored_levels;     // level index of each stored vector
  std::vector<std::vector<double>> levels;    // interior solution vectors
  std::vector<Point> points;                  // interior node coordinates
  std::vector<double> l2_weights;             // h^d (FD) or lumped mass (FEM)
  std::vector<double> err_max_per_level;      // filled when exact is given
  std::vector<double> err_l2_per_level;
  double err_max = std::numeric_limits<double>::quiet_NaN();  // max over m >= 1
  double err_l2 = std::numeric_limits<double>::quiet_NaN();
  bool thinned = false;
};

namespace detail {

struct SpatialSystem {
  const CsrMatrix* A;
  std::span<const double> mass;  // empty: identity
  std::span<const BoundaryCoupling> coupling;
  std::span<const Point> points;
  std::vector<double> l2_weights;
  bool spd;
};

inline SolutionTrace evolve_core(const SpatialSystem& sp, const EvolutionProblem& prob,
                                 const EvolveOptions& opt) {
  const std::size_t n = sp.points.size();
  const std::size_t M = prob.mesh.levels();
  if (!prob.f || !prob.u0) throw std::invalid_argument("evolve: f and u0 are required");
  L1Operator op(prob.alpha, prob.mesh, L1Options{opt.kahan});

  SolutionTrace trace;
  trace.times.assign(prob.mesh.nodes().begin(), prob.mesh.nodes().end());
  trace.points.assign(sp.points.begin(), sp.points.end());
  trace.l2_weights = sp.l2_weights;
  trace.thinned = opt.thin > 1;

  std::vector<std::vector<double>> history;
  history.reserve(M + 1);
  history.emplace_back(n);
  for (std::size_t i = 0; i < n; ++i) history[0][i] = prob.u0(sp.points[i]);

  const bool track_errors = static_cast<bool>(prob.exact);
  if (track_errors) {
    trace.err_max_per_level.assign(M + 1, 0.0);
    trace.err_l2_per_level.assign(M + 1, 0.0);
  }

  std::vector<double> rhs(n), hist(n), scratch;
  SolveOptions solver_opt;
  solver_opt.tol = opt.tol;
  solver_opt.max_iterations = opt.max_iterations;
  solver_opt.threads = opt.threads;

  // Shifted matrix with structural diagonal; only the diagonal values
  // change from level to level.
  CsrMatrix A_step = sp.A->shifted(0.0, sp.mass);
  const std::vector<std::size_t> diag_pos = A_step.diagonal_positions();
  const std::vector<double> base_diag = [&] {
    std::vector<double> d(n);
    const auto v = A_step.values();
    for (std::size_t i = 0; i < n; ++i) d[i] = v[diag_pos[i]];
    return d;
  }();

  auto record_errors = [&](std::size_t m, const std::vector<double>& U) {
    if (!track_errors) return;
    const double t = trace.times[m];
    double emax = 0.0, el2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double e = std::fabs(U[i] - prob.exact(sp.points[i], t));
      emax = std::max(emax, e);
      el2 += sp.l2_weights[i] * e * e;
    }
    trace.err_max_per_level[m] = emax;
    trace.err_l2_per_level[m] = std::sqrt(el2);
  };
  record_errors(0, history[0]);

  for (std::size_t m = 1; m <= M; ++m) {
    const double wd = op.diag_weight(m);
    const double t = trace.times[m];
    {
      auto vals = A_step.values_mut();
      for (std::size_t i = 0; i < n; ++i)
        vals[diag_pos[i]] = base_diag[i] + wd * (sp.mass.empty() ? 1.0 : sp.mass[i]);
    }
    op.history_rhs(history, m, hist, scratch, opt.threads);
    for (std::size_t i = 0; i < n; ++i) {
      const double d = sp.mass.empty() ? 1.0 : sp.mass[i];
      rhs[i] = d * (prob.f(sp.points[i], t) + hist[i]);
    }
    if (prob.g) {
      for (const auto& bc : sp.coupling) rhs[bc.row] -= bc.coef * prob.g(bc.point, t);
    }
    history.emplace_back(history[m - 1]);  // previous level as initial guess
    std::vector<double>& U = history[m];
    const SolveStats stats = sp.spd ? solve_spd(A_step, rhs, U, solver_opt)
                                    : solve_general(A_step, rhs, U, solver_opt);
    if (!stats.converged)
      throw std::runtime_error("evolve: linear solver failed at level " + std::to_string(m) +
                               " (residual " + std::to_string(stats.residual) + ")");
    record_errors(m, U);
  }

  if (track_errors) {
    trace.err_max = 0.0;
    trace.err_l2 = 0.0;
    for (std::size_t m = 1; m <= M; ++m) {
      trace.err_max = std::max(trace.err_max, trace.err_max_per_level[m]);
      trace.err_l2 = std::max(trace.err_l2, trace.err_l2_per_level[m]);
    }
  }

  const std::size_t thin = std::max<std::size_t>(1, opt.thin);
  for (std::size_t m = 0; m <= M; ++m) {
    if (thin == 1 || m % thin == 0 || m == M) {
      trace.stored_levels.push_back(m);
      trace.levels.push_back(std::move(history[m]));
    }
  }
  return trace;
}

}  // namespace detail

/// Advances the finite difference discretization: at each level m solve
/// (w(m,m) I + L_h) U^m = f(., t_m) + history_rhs(m) - boundary terms.
inline SolutionTrace evolve(const FdSystem& sys, const EvolutionProblem& prob,
                            const EvolveOptions& opt = {}) {
  detail::SpatialSystem sp;
  sp.A = &sys.op;
  sp.mass = {};
  sp.coupling = sys.coupling;
  sp.points = sys.interior_points;
  const double hd = std::pow(sys.grid.spacing(), sys.grid.dim());
  sp.l2_weights.assign(sys.interior_points.size(), hd);
  sp.spd = !sys.has_convection;
  return detail::evolve_core(sp, prob, opt);
}

/// Advances the lumped-mass P1 discretization: at each level m solve
/// (w(m,m) diag(m_z) + A) U^m = m_z f(z, t_m) + m_z history_rhs(m) - boundary terms.
inline SolutionTrace evolve(const FemSystem& sys, const EvolutionProblem& prob,
                            const EvolveOptions& opt = {}) {
  detail::SpatialSystem sp;
  sp.A = &sys.stiffness;
  sp.mass = sys.lumped_mass;
  sp.coupling = sys.coupling;
  sp.points = sys.interior_points;
  sp.l2_weights = sys.lumped_mass;
  sp.spd = true;
  return detail::evolve_core(sp, prob, opt);
}

struct NodalErrorReport {
  double err_max = 0.0;  // max over levels m >= 1 and interior nodes
  double err_l2 = 0.0;   // max over levels of the weighted l2 error
  std::vector<double> per_level_max;
  std::vector<double> per_level_l2;
};

/// Errors of an unthinned trace against an exact solution.
inline NodalErrorReport nodal_errors(const SolutionTrace& trace, const SpaceTimeFn& exact) {
  if (trace.thinned)
    throw std::invalid_argument("nodal_errors: requires an unthinned trace");
  if (!exact) throw std::invalid_argument("nodal_errors: exact solution required");
  NodalErrorReport rep;
  const std::size_t M = trace.times.size() - 1;
  rep.per_level_max.assign(M + 1, 0.0);
  rep.per_level_l2.assign(M + 1, 0.0);
  for (std::size_t m = 0; m <= M; ++m) {
    const auto& U = trace.levels[m];
    double emax = 0.0, el2 = 0.0;
    for (std::size_t i = 0; i < U.size(); ++i) {
      const double e = std::fabs(U[i] - exact(trace.points[i], trace.times[m]));
      emax = std::max(emax, e);
      el2 += trace.l2_weights[i] * e * e;
    }
    rep.per_level_max[m] = emax;
    rep.per_level_l2[m] = std::sqrt(el2);
    if (m >= 1) {
      rep.err_max = std::max(rep.err_max, emax);
      rep.err_l2 = std::max(rep.err_l2, rep.per_level_l2[m]);
    }
  }
  return rep;
}

}  // namespace fracl1
