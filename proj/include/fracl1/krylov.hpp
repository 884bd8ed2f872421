#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

#include "fracl1/csr.hpp"

namespace fracl1 {

struct SolveStats {
  std::size_t iterations = 0;
  double residual = 0.0;  // recomputed ||b - Ax|| / ||b|| on exit
  bool converged = false;
};

struct SolveOptions {
  double tol = 1e-10;            // relative residual target
  std::size_t max_iterations = 0;  // 0: max(200, 10 n)
  int threads = 1;
};

namespace detail {

inline double dot(std::span<const double> a, std::span<const double> b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

inline double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

inline std::vector<double> inverse_diagonal(const CsrMatrix& A) {
  std::vector<double> d = A.diagonal();
  for (std::size_t i = 0; i < d.size(); ++i) {
    if (d[i] == 0.0) throw std::invalid_argument("solver: zero diagonal entry");
    d[i] = 1.0 / d[i];
  }
  return d;
}

inline void check_structure(const CsrMatrix& A, std::span<const double> rhs) {
  if (A.rows() != A.cols()) throw std::invalid_argument("solver: matrix must be square");
  if (rhs.size() != A.rows()) throw std::invalid_argument("solver: rhs size mismatch");
  auto off = A.row_offsets();
  for (std::size_t i = 0; i < A.rows(); ++i)
    if (off[i] == off[i + 1]) throw std::invalid_argument("solver: structurally singular (zero row)");
}

inline double final_residual(const CsrMatrix& A, std::span<const double> rhs,
                             std::span<const double> x, double bnorm, int threads) {
  std::vector<double> r(rhs.size());
  A.multiply(x, r, threads);
  for (std::size_t i = 0; i < r.size(); ++i) r[i] = rhs[i] - r[i];
  return norm2(r) / bnorm;
}

/// Direct tridiagonal solve (Thomas algorithm).
inline void solve_tridiagonal(const CsrMatrix& A, std::span<const double> rhs,
                              std::span<double> x) {
  const std::size_t n = A.rows();
  std::vector<double> a(n, 0.0), b(n, 0.0), c(n, 0.0), d(rhs.begin(), rhs.end());
  for (std::size_t i = 0; i < n; ++i) {
    if (i > 0) a[i] = A.value_at(i, i - 1);
    b[i] = A.value_at(i, i);
    if (i + 1 < n) c[i] = A.value_at(i, i + 1);
  }
  for (std::size_t i = 1; i < n; ++i) {
    if (b[i - 1] == 0.0) throw std::invalid_argument("solve_tridiagonal: zero pivot");
    const double w = a[i] / b[i - 1];
    b[i] -= w * c[i - 1];
    d[i] -= w * d[i - 1];
  }
  if (b[n - 1] == 0.0) throw std::invalid_argument("solve_tridiagonal: zero pivot");
  x[n - 1] = d[n - 1] / b[n - 1];
  for (std::size_t i = n - 1; i-- > 0;) x[i] = (d[i] - c[i] * x[i + 1]) / b[i];
}

}  // namespace detail

/// Jacobi-preconditioned conjugate gradients for SPD systems. x carries
/// the initial guess on entry.
inline SolveStats solve_spd(const CsrMatrix& A, std::span<const double> rhs,
                            std::span<double> x, const SolveOptions& opt = {}) {
  detail::check_structure(A, rhs);
  const std::size_t n = A.rows();
  const double bnorm = detail::norm2(rhs);
  SolveStats stats;
  if (bnorm == 0.0) {
    std::fill(x.begin(), x.end(), 0.0);
    stats.converged = true;
    return stats;
  }
  const std::size_t maxit =
      opt.max_iterations ? opt.max_iterations : std::max<std::size_t>(200, 10 * n);
  const std::vector<double> dinv = detail::inverse_diagonal(A);
  std::vector<double> r(n), z(n), p(n), Ap(n);
  // The inner loop tracks the recurrence residual, which can drift from
  // the true one near convergence; each restart recomputes r = b - A x.
  for (int restart = 0; restart < 3; ++restart) {
    A.multiply(x, r, opt.threads);
    for (std::size_t i = 0; i < n; ++i) r[i] = rhs[i] - r[i];
    for (std::size_t i = 0; i < n; ++i) z[i] = dinv[i] * r[i];
    p = z;
    double rz = detail::dot(r, z);
    double rnorm = detail::norm2(r);
    const double target = 0.3 * opt.tol * bnorm;
    while (stats.iterations < maxit && rnorm > target) {
      A.multiply(p, Ap, opt.threads);
      const double pAp = detail::dot(p, Ap);
      if (pAp == 0.0) break;
      const double a = rz / pAp;
      for (std::size_t i = 0; i < n; ++i) x[i] += a * p[i];
      for (std::size_t i = 0; i < n; ++i) r[i] -= a * Ap[i];
      for (std::size_t i = 0; i < n; ++i) z[i] = dinv[i] * r[i];
      const double rz_next = detail::dot(r, z);
      const double beta = rz_next / rz;
      rz = rz_next;
      for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
      rnorm = detail::norm2(r);
      ++stats.iterations;
    }
    stats.residual = detail::final_residual(A, rhs, x, bnorm, opt.threads);
    stats.converged = stats.residual <= opt.tol * (1.0 + 1e-12);
    if (stats.converged || stats.iterations >= maxit) break;
  }
  return stats;
}

/// Jacobi-preconditioned BiCGStab for general nonsingular systems, with a
/// direct banded fallback when the matrix is tridiagonal and the Krylov
/// iteration stalls or breaks down.
inline SolveStats solve_general(const CsrMatrix& A, std::span<const double> rhs,
                                std::span<double> x, const SolveOptions& opt = {}) {
  detail::check_structure(A, rhs);
  const std::size_t n = A.rows();
  const double bnorm = detail::norm2(rhs);
  SolveStats stats;
  if (bnorm == 0.0) {
    std::fill(x.begin(), x.end(), 0.0);
    stats.converged = true;
    return stats;
  }
  const std::size_t maxit =
      opt.max_iterations ? opt.max_iterations : std::max<std::size_t>(200, 10 * n);
  const std::vector<double> dinv = detail::inverse_diagonal(A);
  std::vector<double> r(n), r0(n), p(n, 0.0), v(n, 0.0), s(n), t(n), ph(n), sh(n);
  A.multiply(x, r, opt.threads);
  for (std::size_t i = 0; i < n; ++i) r[i] = rhs[i] - r[i];
  r0 = r;
  double rho = 1.0, a = 1.0, w = 1.0;
  bool breakdown = false;
  double rnorm = detail::norm2(r);
  while (stats.iterations < maxit && rnorm > opt.tol * bnorm) {
    const double rho_next = detail::dot(r0, r);
    if (rho_next == 0.0 || w == 0.0) {
      breakdown = true;
      break;
    }
    const double beta = (rho_next / rho) * (a / w);
    rho = rho_next;
    for (std::size_t i = 0; i < n; ++i) p[i] = r[i] + beta * (p[i] - w * v[i]);
    for (std::size_t i = 0; i < n; ++i) ph[i] = dinv[i] * p[i];
    A.multiply(ph, v, opt.threads);
    const double r0v = detail::dot(r0, v);
    if (r0v == 0.0) {
      breakdown = true;
      break;
    }
    a = rho / r0v;
    for (std::size_t i = 0; i < n; ++i) s[i] = r[i] - a * v[i];
    if (detail::norm2(s) <= opt.tol * bnorm) {
      for (std::size_t i = 0; i < n; ++i) x[i] += a * ph[i];
      ++stats.iterations;
      rnorm = 0.0;
      break;
    }
    for (std::size_t i = 0; i < n; ++i) sh[i] = dinv[i] * s[i];
    A.multiply(sh, t, opt.threads);
    const double tt = detail::dot(t, t);
    if (tt == 0.0) {
      breakdown = true;
      break;
    }
    w = detail::dot(t, s) / tt;
    for (std::size_t i = 0; i < n; ++i) x[i] += a * ph[i] + w * sh[i];
    for (std::size_t i = 0; i < n; ++i) r[i] = s[i] - w * t[i];
    rnorm = detail::norm2(r);
    ++stats.iterations;
  }
  stats.residual = detail::final_residual(A, rhs, x, bnorm, opt.threads);
  stats.converged = stats.residual <= opt.tol * (1.0 + 1e-12);
  if (!stats.converged && (breakdown || stats.iterations >= maxit) && A.is_tridiagonal()) {
    detail::solve_tridiagonal(A, rhs, x);
    stats.residual = detail::final_residual(A, rhs, x, bnorm, opt.threads);
    stats.converged = stats.residual <= opt.tol * (1.0 + 1e-12);
  }
  return stats;
}

}  // namespace fracl1
