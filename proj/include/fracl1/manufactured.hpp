#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "fracl1/fd_space.hpp"
#include "fracl1/scalar_solver.hpp"
#include "fracl1/time_stepper.hpp"

namespace fracl1::manufactured {

inline std::vector<std::string> scalar_names() {
  return {"t_alpha", "t_alpha_plus_t", "t_2alpha"};
}

inline std::vector<std::string> field_names() {
  return {"t_alpha_sinsin", "t_alpha_cosxy"};
}

/// Scalar problems dfrac(u) = f with exact solution and derivative
/// callbacks; f comes from the Caputo power rule.
inline ScalarProblem scalar(const std::string& name, double alpha) {
  ScalarProblem p;
  p.alpha = alpha;
  p.u0 = 0.0;
  const double ga1 = fracl1::gamma(1.0 + alpha);
  if (name == "t_alpha") {
    p.f = [ga1](double) { return ga1; };
    p.exact = ScalarExact{
        [alpha](double t) { return std::pow(t, alpha); },
        [alpha](double t) { return alpha * std::pow(t, alpha - 1.0); },
        [alpha](double t) { return alpha * (alpha - 1.0) * std::pow(t, alpha - 2.0); }};
  } else if (name == "t_alpha_plus_t") {
    const double g2 = fracl1::gamma(2.0 - alpha);
    p.f = [ga1, g2, alpha](double t) { return ga1 + std::pow(t, 1.0 - alpha) / g2; };
    p.exact = ScalarExact{
        [alpha](double t) { return std::pow(t, alpha) + t; },
        [alpha](double t) { return alpha * std::pow(t, alpha - 1.0) + 1.0; },
        [alpha](double t) { return alpha * (alpha - 1.0) * std::pow(t, alpha - 2.0); }};
  } else if (name == "t_2alpha") {
    const double c = fracl1::gamma(2.0 * alpha + 1.0) / fracl1::gamma(alpha + 1.0);
    p.f = [c, alpha](double t) { return c * std::pow(t, alpha); };
    p.exact = ScalarExact{
        [alpha](double t) { return std::pow(t, 2.0 * alpha); },
        [alpha](double t) { return 2.0 * alpha * std::pow(t, 2.0 * alpha - 1.0); },
        [alpha](double t) {
          return 2.0 * alpha * (2.0 * alpha - 1.0) * std::pow(t, 2.0 * alpha - 2.0);
        }};
  } else {
    throw std::invalid_argument("manufactured::scalar: unknown solution '" + name + "'");
  }
  return p;
}

struct FieldSolution {
  std::string name;
  bool homogeneous_bc = false;
  SpaceTimeFn u;
  SpaceTimeFn dt_u;
  SpaceTimeFn d2t_u;
  SpaceTimeFn f;  // dfrac(u) + (-Laplace u) + c u
};

/// 2D solutions u = t^alpha * w(x,y) for L = -Laplace + c; the source is
/// synthesized from the Caputo power rule plus the closed-form -Laplace w
/// and the supplied reaction coefficient.
inline FieldSolution field(const std::string& name, double alpha, const ScalarField& c) {
  FieldSolution s;
  s.name = name;
  const double ga1 = fracl1::gamma(1.0 + alpha);
  ScalarField w, minus_lap_w;
  if (name == "t_alpha_sinsin") {
    s.homogeneous_bc = true;
    w = [](const Point& p) { return std::sin(M_PI * p[0]) * std::sin(M_PI * p[1]); };
    minus_lap_w = [](const Point& p) {
      return 2.0 * M_PI * M_PI * std::sin(M_PI * p[0]) * std::sin(M_PI * p[1]);
    };
  } else if (name == "t_alpha_cosxy") {
    s.homogeneous_bc = false;
    w = [](const Point& p) { return std::cos(p[0] * p[1]); };
    minus_lap_w = [](const Point& p) {
      return (p[0] * p[0] + p[1] * p[1]) * std::cos(p[0] * p[1]);
    };
  } else {
    throw std::invalid_argument("manufactured::field: unknown solution '" + name + "'");
  }
  ScalarField react = c ? c : constant_field(0.0);
  s.u = [w, alpha](const Point& p, double t) { return std::pow(t, alpha) * w(p); };
  s.dt_u = [w, alpha](const Point& p, double t) {
    return alpha * std::pow(t, alpha - 1.0) * w(p);
  };
  s.d2t_u = [w, alpha](const Point& p, double t) {
    return alpha * (alpha - 1.0) * std::pow(t, alpha - 2.0) * w(p);
  };
  s.f = [w, minus_lap_w, react, ga1, alpha](const Point& p, double t) {
    return ga1 * w(p) + std::pow(t, alpha) * (minus_lap_w(p) + react(p) * w(p));
  };
  return s;
}

}  // namespace fracl1::manufactured
