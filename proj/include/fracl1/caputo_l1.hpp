#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

#include "fracl1/detail/parallel.hpp"
#include "fracl1/special_functions.hpp"
#include "fracl1/temporal_mesh.hpp"

namespace fracl1 {

struct L1Options {
  bool compensated_sum = false;  // Kahan accumulation in history sums
};

/// The L1 discretization of the Caputo derivative of order alpha on a
/// temporal mesh:
///
///   dfrac(V, m) = w(m,m) V^m - sum_{j=1..m} [w(m,j) - w(m,j-1)] V^{j-1},
///
/// where w(m,j) is the average of (t_m - s)^{-alpha} / Gamma(1-alpha)
/// over (t_{j-1}, t_j), w(m,0) = 0. Weights are evaluated on demand from
/// the closed form with pow_diff_gap, O(1) each, so a full sweep over all
/// levels costs O(M^2) with O(M) memory.
class L1Operator {
 public:
  L1Operator(double alpha, TemporalMesh mesh, L1Options options = {})
      : alpha_(alpha),
        s_(1.0 - alpha),
        inv_gamma2ma_(1.0 / fracl1::gamma(2.0 - alpha)),
        mesh_(std::move(mesh)),
        options_(options) {
    if (!(alpha > 0.0 && alpha < 1.0))
      throw std::invalid_argument("L1Operator: alpha must lie in (0,1)");
  }

  double alpha() const { return alpha_; }
  const TemporalMesh& mesh() const { return mesh_; }
  const L1Options& options() const { return options_; }

  /// Weight w(m,j) for 1 <= m <= M, 0 <= j <= m; w(m,0) = 0 and
  /// w(m,m) = tau_m^{-alpha} / Gamma(2-alpha).
  double weight(std::size_t m, std::size_t j) const {
    check_level(m);
    if (j > m) throw std::out_of_range("L1Operator::weight: j > m");
    if (j == 0) return 0.0;
    const double tau = mesh_.width(j);
    const double a = (j == m) ? tau : mesh_.node(m) - mesh_.node(j - 1);
    return pow_diff_gap(a, tau, s_) * inv_gamma2ma_ / tau;
  }

  double diag_weight(std::size_t m) const {
    check_level(m);
    return std::pow(mesh_.width(m), -alpha_) * inv_gamma2ma_;
  }

  /// Discrete fractional derivative of a scalar history V^0..V^m at level m.
  double apply(std::span<const double> history, std::size_t m) const {
    if (history.size() < m + 1)
      throw std::invalid_argument("L1Operator::apply: history too short");
    return diag_weight(m) * history[m] - history_rhs(history, m);
  }

  /// sum_{j=1..m} [w(m,j) - w(m,j-1)] V^{j-1}; needs levels 0..m-1 only.
  double history_rhs(std::span<const double> history, std::size_t m) const {
    check_level(m);
    if (history.size() < m)
      throw std::invalid_argument("L1Operator::history_rhs: history too short");
    double acc = 0.0, comp = 0.0, prev = 0.0;
    for (std::size_t j = 1; j <= m; ++j) {
      const double w = weight(m, j);
      const double term = (w - prev) * history[j - 1];
      if (options_.compensated_sum) {
        const double y = term - comp;
        const double t = acc + y;
        comp = (t - acc) - y;
        acc = t;
      } else {
        acc += term;
      }
      prev = w;
    }
    return acc;
  }

  /// Vector-valued history sum. Accumulation runs j = 1..m in order for
  /// every component; parallelism splits the component range only. The
  /// scratch buffer holds the weight-increment row and can be reused
  /// across levels; concurrent calls must pass distinct buffers.
  void history_rhs(std::span<const std::vector<double>> levels, std::size_t m,
                   std::span<double> out, std::vector<double>& scratch,
                   int threads = 1) const {
    check_level(m);
    if (levels.size() < m)
      throw std::invalid_argument("L1Operator::history_rhs: history too short");
    const std::size_t n = out.size();
    weight_increments(m, scratch);
    const std::vector<double>& dw = scratch;
    std::vector<double> comp;
    if (options_.compensated_sum) comp.assign(n, 0.0);
    detail::parallel_for(n, threads, [&](std::size_t lo, std::size_t hi) {
      for (std::size_t i = lo; i < hi; ++i) out[i] = 0.0;
      for (std::size_t j = 1; j <= m; ++j) {
        const double c = dw[j - 1];
        const std::vector<double>& level = levels[j - 1];
        if (options_.compensated_sum) {
          for (std::size_t i = lo; i < hi; ++i) {
            const double y = c * level[i] - comp[i];
            const double t = out[i] + y;
            comp[i] = (t - out[i]) - y;
            out[i] = t;
          }
        } else {
          for (std::size_t i = lo; i < hi; ++i) out[i] += c * level[i];
        }
      }
    });
  }

  void history_rhs(std::span<const std::vector<double>> levels, std::size_t m,
                   std::span<double> out, int threads = 1) const {
    std::vector<double> scratch;
    history_rhs(levels, m, out, scratch, threads);
  }

  void apply(std::span<const std::vector<double>> levels, std::size_t m,
             std::span<double> out, int threads = 1) const {
    if (levels.size() < m + 1)
      throw std::invalid_argument("L1Operator::apply: history too short");
    history_rhs(levels, m, out, threads);
    const double wd = diag_weight(m);
    const std::vector<double>& top = levels[m];
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = wd * top[i] - out[i];
  }

  /// Increments w(m,j) - w(m,j-1), j = 1..m, written into dw[0..m-1].
  void weight_increments(std::size_t m, std::vector<double>& dw) const {
    check_level(m);
    dw.resize(m);
    double prev = 0.0;
    for (std::size_t j = 1; j <= m; ++j) {
      const double w = weight(m, j);
      dw[j - 1] = w - prev;
      prev = w;
    }
  }

 private:
  void check_level(std::size_t m) const {
    if (m < 1 || m > mesh_.levels())
      throw std::out_of_range("L1Operator: level index out of range");
  }

  double alpha_;
  double s_;
  double inv_gamma2ma_;
  TemporalMesh mesh_;
  L1Options options_;
};

/// Solves dfrac(V, j) = rhs_j for j = 1..M given V^0, by the per-level
/// rearrangement V^m = [rhs_m + history_rhs(m)] / w(m,m).
inline std::vector<double> solve_forward(const L1Operator& op,
                                         std::span<const double> rhs,
                                         double v0) {
  const std::size_t M = op.mesh().levels();
  if (rhs.size() < M)
    throw std::invalid_argument("solve_forward: need one rhs value per level");
  std::vector<double> v(M + 1);
  v[0] = v0;
  for (std::size_t m = 1; m <= M; ++m) {
    const double hist = op.history_rhs(std::span<const double>(v).first(m), m);
    v[m] = (rhs[m - 1] + hist) / op.diag_weight(m);
  }
  return v;
}

/// Caputo derivative of t^beta (power rule), beta >= alpha:
/// Gamma(beta+1) / Gamma(beta+1-alpha) * t^{beta-alpha}.
inline double caputo_power_rule(double alpha, double beta, double t) {
  if (!(alpha > 0.0 && alpha < 1.0))
    throw std::domain_error("caputo_power_rule: alpha must lie in (0,1)");
  if (beta < alpha)
    throw std::domain_error("caputo_power_rule: beta must be >= alpha");
  if (!(t > 0.0)) throw std::domain_error("caputo_power_rule: t must be positive");
  return fracl1::gamma(beta + 1.0) / fracl1::gamma(beta + 1.0 - alpha) *
         std::pow(t, beta - alpha);
}

/// Riemann-Liouville integral J^{1-alpha} of the piecewise-constant
/// left-continuous function lambda (lambda_j on (t_{j-1}, t_j]) at the
/// mesh node t_m, via the interval-by-interval closed form.
inline double rl_integral_at(double alpha, const TemporalMesh& mesh,
                             std::span<const double> lambda, std::size_t m) {
  if (m < 1 || m > mesh.levels())
    throw std::out_of_range("rl_integral_at: level index out of range");
  if (lambda.size() < m)
    throw std::invalid_argument("rl_integral_at: lambda must cover intervals 1..m");
  const double s = 1.0 - alpha;
  const double inv_g = 1.0 / fracl1::gamma(2.0 - alpha);
  double acc = 0.0;
  for (std::size_t j = 1; j <= m; ++j) {
    const double tau = mesh.width(j);
    const double a = (j == m) ? tau : mesh.node(m) - mesh.node(j - 1);
    acc += lambda[j - 1] * pow_diff_gap(a, tau, s) * inv_g;
  }
  return acc;
}

/// Same, with the evaluation time given as a value that must coincide
/// with a mesh node.
inline double rl_integral(double alpha, const TemporalMesh& mesh,
                          std::span<const double> lambda, double t) {
  const double tol = 1e-12 * mesh.final_time();
  for (std::size_t m = 1; m <= mesh.levels(); ++m) {
    if (std::fabs(mesh.node(m) - t) <= tol)
      return rl_integral_at(alpha, mesh, lambda, m);
  }
  throw std::invalid_argument("rl_integral: t is not a mesh node");
}

}  // namespace fracl1
