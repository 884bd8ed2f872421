#pragma once

#include <cmath>
#include <stdexcept>

namespace fracl1 {

namespace detail {

// Lanczos approximation, g = 7, 9 coefficients.
inline constexpr double kLanczosG = 7.0;
inline constexpr double kLanczos[9] = {
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
};

inline double lanczos_gamma(double x) {
  // valid for x >= 0.5
  const double z = x - 1.0;
  double acc = kLanczos[0];
  for (int i = 1; i < 9; ++i) acc += kLanczos[i] / (z + i);
  const double t = z + kLanczosG + 0.5;
  return std::sqrt(2.0 * M_PI) * std::pow(t, z + 0.5) * std::exp(-t) * acc;
}

}  // namespace detail

/// Gamma function for positive arguments.
inline double gamma(double x) {
  if (!(x > 0.0)) throw std::domain_error("gamma: argument must be positive");
  if (x < 0.5) {
    // reflection keeps the Lanczos evaluation on [0.5, 1)
    return M_PI / (std::sin(M_PI * x) * detail::lanczos_gamma(1.0 - x));
  }
  return detail::lanczos_gamma(x);
}

/// a^s - (a-gap)^s for 0 <= gap <= a and s in (0,1), with the gap given
/// exactly by the caller. When gap << a the direct difference loses all
/// significant digits, so the factored form a^s * (1 - (1 - gap/a)^s) is
/// used instead; gap/a is well-conditioned regardless of magnitude.
inline double pow_diff_gap(double a, double gap, double s) {
  if (gap < 0.0 || a < 0.0 || gap > a)
    throw std::domain_error("pow_diff_gap: need 0 <= gap <= a");
  if (gap == 0.0) return 0.0;
  if (gap == a) return std::pow(a, s);
  if (gap < 1e-3 * a) {
    return -std::pow(a, s) * std::expm1(s * std::log1p(-gap / a));
  }
  return std::pow(a, s) - std::pow(a - gap, s);
}

/// a^s - b^s for a >= b >= 0, s in (0,1), stable when a-b is small
/// relative to a. Unlike pow_diff_gap, b is used directly, so nothing is
/// lost when b is many orders of magnitude below a.
inline double pow_diff(double a, double b, double s) {
  if (b < 0.0 || a < b) throw std::domain_error("pow_diff: need a >= b >= 0");
  if (a == b) return 0.0;
  if (b == 0.0) return std::pow(a, s);
  if (a - b < 1e-3 * a) {
    // b >= a/2 here, so b - a is exact and (b-a)/a carries full precision
    return -std::pow(a, s) * std::expm1(s * std::log1p((b - a) / a));
  }
  return std::pow(a, s) - std::pow(b, s);
}

}  // namespace fracl1
