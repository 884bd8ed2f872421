#pragma once

#include <cmath>
#include <functional>
#include <optional>
#include <stdexcept>
#include <vector>

#include "fracl1/caputo_l1.hpp"
#include "fracl1/temporal_mesh.hpp"

namespace fracl1 {

using TimeFn = std::function<double(double)>;

struct ScalarExact {
  TimeFn u;
  TimeFn du;   // d/dt u
  TimeFn d2u;  // d^2/dt^2 u
};

/// Paradigm problem without spatial derivatives:
/// dfrac(u, t) = f(t) on (0,T], u(0) = u0.
struct ScalarProblem {
  double alpha = 0.5;
  double u0 = 0.0;
  TimeFn f;
  std::optional<ScalarExact> exact;
};

/// L1 solve: U^0 = u0, U^m = [f(t_m) + history_rhs(m)] / w(m,m). O(M^2).
inline std::vector<double> solve(const ScalarProblem& problem, const TemporalMesh& mesh,
                                 L1Options options = {}) {
  L1Operator op(problem.alpha, mesh, options);
  const std::size_t M = mesh.levels();
  std::vector<double> rhs(M);
  for (std::size_t m = 1; m <= M; ++m) rhs[m - 1] = problem.f(mesh.node(m));
  return solve_forward(op, rhs, problem.u0);
}

struct PsiIndicators {
  std::vector<double> psi;  // psi[0] unused; psi[1..M]

  double max() const {
    double v = 0.0;
    for (std::size_t j = 1; j < psi.size(); ++j) v = std::max(v, psi[j]);
    return v;
  }
};

/// Truncation indicators:
///   psi_1 = tau_1^alpha sup_{s in (0,t_1)} s^{1-alpha} |du(t_1)/dt_avg - u'(s)|
///   psi_j = tau_j^{2-alpha} t_j^alpha sup_{(t_{j-1},t_j)} |u''|,  j >= 2,
/// with the suprema sampled at Chebyshev-clustered interior points plus
/// near-endpoint samples offset by 1e-3 tau (the integrands may be
/// singular at interval ends).
inline PsiIndicators psi_indicators(const ScalarProblem& problem, const TemporalMesh& mesh,
                                    int samples_per_interval = 16) {
  if (!problem.exact || !problem.exact->u || !problem.exact->du || !problem.exact->d2u)
    throw std::invalid_argument("psi_indicators: exact u, du, d2u callbacks required");
  if (samples_per_interval < 2)
    throw std::invalid_argument("psi_indicators: samples_per_interval must be >= 2");
  const auto& ex = *problem.exact;
  const double alpha = problem.alpha;
  const std::size_t M = mesh.levels();
  PsiIndicators out;
  out.psi.assign(M + 1, 0.0);

  const int n = samples_per_interval;
  auto chebyshev = [n](double a, double b, int k) {
    return a + (b - a) * 0.5 * (1.0 - std::cos(M_PI * (k + 0.5) / n));
  };

  {  // psi_1
    const double t1 = mesh.node(1);
    const double tau1 = mesh.width(1);
    const double slope = (ex.u(t1) - ex.u(0.0)) / tau1;
    const double off = 1e-3 * tau1;
    double sup = 0.0;
    auto probe = [&](double s) {
      sup = std::max(sup, std::pow(s, 1.0 - alpha) * std::fabs(slope - ex.du(s)));
    };
    for (int k = 0; k < n; ++k) {
      double s = chebyshev(0.0, t1, k);
      probe(std::min(std::max(s, off), t1 - off));
    }
    probe(off);
    probe(t1 - off);
    out.psi[1] = std::pow(tau1, alpha) * sup;
  }

  for (std::size_t j = 2; j <= M; ++j) {
    const double a = mesh.node(j - 1);
    const double b = mesh.node(j);
    const double tau = mesh.width(j);
    const double off = 1e-3 * tau;
    double sup = 0.0;
    auto probe = [&](double s) { sup = std::max(sup, std::fabs(ex.d2u(s))); };
    for (int k = 0; k < n; ++k) probe(std::min(std::max(chebyshev(a, b, k), a + off), b - off));
    probe(a + off);
    probe(b - off);
    out.psi[j] = std::pow(tau, 2.0 - alpha) * std::pow(b, alpha) * sup;
  }
  return out;
}

/// Max nodal error over m >= 1 against an exact-solution callback.
inline double max_nodal_error(std::span<const double> U, const TemporalMesh& mesh,
                              const TimeFn& exact) {
  double e = 0.0;
  for (std::size_t m = 1; m <= mesh.levels(); ++m)
    e = std::max(e, std::fabs(U[m] - exact(mesh.node(m))));
  return e;
}

}  // namespace fracl1
