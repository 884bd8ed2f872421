#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

#include "fracl1/caputo_l1.hpp"
#include "fracl1/special_functions.hpp"
#include "fracl1/temporal_mesh.hpp"

namespace fracl1 {

// ---------------------------------------------------------------------
// Stability with the explicit constant Gamma(1-alpha): for the solution
// of dfrac(V, j) = F_j with given V^0,
//   max_m |V^m - V^0| <= Gamma(1-alpha) max_j t_j^alpha |F_j|.
// ---------------------------------------------------------------------

struct StabilityReport {
  double lhs = 0.0;  // max_m |V^m - V^0|
  double rhs = 0.0;  // Gamma(1-alpha) max_j t_j^alpha |F_j|
  bool pass = false;
};

inline StabilityReport check_lemma_stability(double alpha, const TemporalMesh& mesh,
                                             std::span<const double> F, double v0 = 0.0) {
  L1Operator op(alpha, mesh);
  const std::vector<double> V = solve_forward(op, F, v0);
  StabilityReport rep;
  for (std::size_t m = 1; m <= mesh.levels(); ++m) {
    rep.lhs = std::max(rep.lhs, std::fabs(V[m] - v0));
    rep.rhs = std::max(rep.rhs, std::pow(mesh.node(m), alpha) * std::fabs(F[m - 1]));
  }
  rep.rhs *= fracl1::gamma(1.0 - alpha);
  rep.pass = rep.lhs <= rep.rhs * (1.0 + 1e-12) + 1e-300;
  return rep;
}

// ---------------------------------------------------------------------
// Barrier certificate on a uniform mesh. With beta = 1 - alpha and an
// anchor index p, the barrier B(s) = min{ (s/t_p) t_p^{-beta}, s^{-beta} }
// satisfies B_j <= t_j^{alpha-1} and, for p large enough,
// dfrac(B, j) >= const * tau^alpha t_j^{-alpha-1} with a positive
// constant independent of M.
// ---------------------------------------------------------------------

struct BarrierSpec {
  double alpha;
  std::size_t p;
  TemporalMesh mesh;
  double beta;  // 1 - alpha
};

inline BarrierSpec make_barrier_spec(double alpha, std::size_t p, TemporalMesh mesh) {
  if (!(alpha > 0.0 && alpha < 1.0))
    throw std::invalid_argument("make_barrier_spec: alpha must lie in (0,1)");
  const std::size_t M = mesh.levels();
  if (p < 2 || p > M / 2)
    throw std::invalid_argument("make_barrier_spec: need 2 <= p <= M/2");
  const double tau0 = mesh.width(1);
  for (std::size_t j = 2; j <= M; ++j)
    if (std::fabs(mesh.width(j) - tau0) > 1e-12 * tau0)
      throw std::invalid_argument("make_barrier_spec: mesh must be uniform");
  return BarrierSpec{alpha, p, std::move(mesh), 1.0 - alpha};
}

struct BarrierReport {
  double min_ratio = 0.0;           // min_j dfrac(B, j) t_j^{alpha+1} / tau^alpha
  double max_scaled_barrier = 0.0;  // max_j B_j t_j^{1-alpha}  (<= 1 by construction)
  bool positive = false;
};

inline BarrierReport check_barrier(const BarrierSpec& spec) {
  const TemporalMesh& mesh = spec.mesh;
  const std::size_t M = mesh.levels();
  const double tp = mesh.node(spec.p);
  const double tau = mesh.width(1);
  std::vector<double> B(M + 1, 0.0);
  for (std::size_t j = 1; j <= M; ++j) {
    const double t = mesh.node(j);
    B[j] = std::min(t / tp * std::pow(tp, -spec.beta), std::pow(t, -spec.beta));
  }
  L1Operator op(spec.alpha, mesh);
  BarrierReport rep;
  rep.min_ratio = 1e300;
  const double tau_a = std::pow(tau, spec.alpha);
  for (std::size_t j = 1; j <= M; ++j) {
    const double d = op.apply(B, j);
    const double t = mesh.node(j);
    rep.min_ratio = std::min(rep.min_ratio, d * std::pow(t, spec.alpha + 1.0) / tau_a);
    rep.max_scaled_barrier =
        std::max(rep.max_scaled_barrier, B[j] * std::pow(t, 1.0 - spec.alpha));
  }
  rep.positive = rep.min_ratio > 0.0;
  return rep;
}

/// Scans anchor candidates and returns the smallest p whose minimum
/// ratio is strictly positive for every M and varies by at most a factor
/// of 2 across the M sweep. Returns 0 when none passes.
inline std::size_t smallest_passing_barrier_p(double alpha, std::span<const std::size_t> Ms,
                                              std::span<const std::size_t> candidates,
                                              double T = 1.0) {
  for (std::size_t p : candidates) {
    double lo = 1e300, hi = 0.0;
    bool ok = true;
    for (std::size_t M : Ms) {
      if (p > M / 2) {
        ok = false;
        break;
      }
      const BarrierReport rep = check_barrier(make_barrier_spec(alpha, p, graded_mesh(T, M, 1.0)));
      if (!rep.positive) {
        ok = false;
        break;
      }
      lo = std::min(lo, rep.min_ratio);
      hi = std::max(hi, rep.min_ratio);
    }
    if (ok && hi <= 2.0 * lo) return p;
  }
  return 0;
}

// ---------------------------------------------------------------------
// Comparison with the Riemann-Liouville integral:
//   dfrac(V, j) <= J^{1-alpha} lambda_bar(t_j) for all j
//     =>  V^m - V^0 <= sum_{j<=m} tau_j lambda_j.
// ---------------------------------------------------------------------

enum class ComparisonStatus { Pass, Fail, HypothesisFailed };

struct ComparisonReport {
  ComparisonStatus status = ComparisonStatus::Fail;
  double max_violation = 0.0;   // max_m [V^m - V^0 - sum tau_j lambda_j]
  double hypothesis_slack = 0.0;  // max_j [dfrac(V,j) - J^{1-alpha}(t_j)]
};

inline ComparisonReport check_comparison(double alpha, const TemporalMesh& mesh,
                                         std::span<const double> lambda,
                                         std::span<const double> V) {
  const std::size_t M = mesh.levels();
  if (lambda.size() < M || V.size() < M + 1)
    throw std::invalid_argument("check_comparison: lambda or V too short");
  L1Operator op(alpha, mesh);
  ComparisonReport rep;
  double scale = 1.0;
  for (std::size_t j = 1; j <= M; ++j) {
    const double d = op.apply(V, j);
    const double rl = rl_integral_at(alpha, mesh, lambda, j);
    scale = std::max({scale, std::fabs(d), std::fabs(rl)});
    rep.hypothesis_slack = std::max(rep.hypothesis_slack, d - rl);
  }
  if (rep.hypothesis_slack > 1e-9 * scale) {
    rep.status = ComparisonStatus::HypothesisFailed;
    return rep;
  }
  double bound = 0.0;
  for (std::size_t m = 1; m <= M; ++m) {
    bound += mesh.width(m) * lambda[m - 1];
    rep.max_violation = std::max(rep.max_violation, (V[m] - V[0]) - bound);
  }
  rep.status = rep.max_violation <= 1e-10 ? ComparisonStatus::Pass : ComparisonStatus::Fail;
  return rep;
}

// ---------------------------------------------------------------------
// Uniform-mesh decay: with V^0 = 0 and dfrac(V, j) = tau^g t_j^{-g-1}
// for g in (0, alpha], the scaled solution V^j t_j^{1-alpha} stays
// bounded uniformly in M.
// ---------------------------------------------------------------------

struct DecayReport {
  double max_scaled = 0.0;  // max_j V^j t_j^{1-alpha}
};

inline DecayReport check_uniform_decay(double alpha, double gamma_exp, std::size_t M,
                                       double T) {
  if (!(gamma_exp > 0.0 && gamma_exp <= alpha))
    throw std::invalid_argument("check_uniform_decay: gamma must lie in (0, alpha]");
  const TemporalMesh mesh = graded_mesh(T, M, 1.0);
  const double tau = mesh.width(1);
  std::vector<double> F(M);
  for (std::size_t j = 1; j <= M; ++j)
    F[j - 1] = std::pow(tau, gamma_exp) * std::pow(mesh.node(j), -gamma_exp - 1.0);
  L1Operator op(alpha, mesh);
  const std::vector<double> V = solve_forward(op, F, 0.0);
  DecayReport rep;
  for (std::size_t j = 1; j <= M; ++j)
    rep.max_scaled = std::max(rep.max_scaled, V[j] * std::pow(mesh.node(j), 1.0 - alpha));
  return rep;
}

}  // namespace fracl1
