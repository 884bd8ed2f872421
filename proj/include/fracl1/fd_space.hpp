#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <functional>
#include <span>
#include <stdexcept>
#include <vector>

#include "fracl1/csr.hpp"

namespace fracl1 {

using Point = std::array<double, 3>;
using ScalarField = std::function<double(const Point&)>;

inline ScalarField constant_field(double v) {
  return [v](const Point&) { return v; };
}

/// Tensor-product grid on the unit cube (0,1)^d with N uniform intervals
/// per axis; interior nodes are indexed lexicographically.
class TensorGrid {
 public:
  TensorGrid(int dim, std::size_t N) : dim_(dim), N_(N), h_(1.0 / static_cast<double>(N)) {
    if (dim < 1 || dim > 3) throw std::invalid_argument("TensorGrid: dim must be 1, 2 or 3");
    if (N < 2) throw std::invalid_argument("TensorGrid: N must be >= 2");
  }

  int dim() const { return dim_; }
  std::size_t intervals() const { return N_; }
  double spacing() const { return h_; }

  std::size_t interior_count() const {
    std::size_t n = 1;
    for (int k = 0; k < dim_; ++k) n *= N_ - 1;
    return n;
  }

  /// Multi-index (components in 1..N-1) of the interior node with the
  /// given lexicographic index.
  std::array<std::size_t, 3> interior_multi(std::size_t flat) const {
    std::array<std::size_t, 3> idx{0, 0, 0};
    const std::size_t side = N_ - 1;
    for (int k = 0; k < dim_; ++k) {
      idx[k] = flat % side + 1;
      flat /= side;
    }
    return idx;
  }

  std::size_t interior_flat(const std::array<std::size_t, 3>& multi) const {
    const std::size_t side = N_ - 1;
    std::size_t flat = 0;
    for (int k = dim_; k-- > 0;) flat = flat * side + (multi[k] - 1);
    return flat;
  }

  bool is_interior(const std::array<std::size_t, 3>& multi) const {
    for (int k = 0; k < dim_; ++k)
      if (multi[k] < 1 || multi[k] > N_ - 1) return false;
    return true;
  }

  Point point(const std::array<std::size_t, 3>& multi) const {
    Point p{0.0, 0.0, 0.0};
    for (int k = 0; k < dim_; ++k) p[k] = h_ * static_cast<double>(multi[k]);
    return p;
  }

  std::vector<Point> interior_points() const {
    std::vector<Point> pts(interior_count());
    for (std::size_t i = 0; i < pts.size(); ++i) pts[i] = point(interior_multi(i));
    return pts;
  }

 private:
  int dim_;
  std::size_t N_;
  double h_;
};

/// Coefficient fields of the elliptic operator
///   L u = sum_k { -d/dx_k (a_k du/dx_k) + b_k du/dx_k } + c u.
/// a_k is sampled at half-integer points, b_k and c at nodes.
struct FdCoefficients {
  std::array<ScalarField, 3> a{constant_field(1.0), constant_field(1.0), constant_field(1.0)};
  std::array<ScalarField, 3> b{constant_field(0.0), constant_field(0.0), constant_field(0.0)};
  ScalarField c = constant_field(0.0);
};

enum class AdmissibilityPolicy { HardFail, WarnProceed };

struct BoundaryCoupling {
  std::size_t row;   // interior row whose stencil leg exits the domain
  double coef;       // matrix coefficient of the boundary node
  Point point;       // boundary node location
};

struct FdSystem {
  TensorGrid grid{1, 2};
  CsrMatrix op;                            // interior part of L_h
  std::vector<BoundaryCoupling> coupling;  // stencil legs hitting the boundary
  std::vector<Point> interior_points;
  bool has_convection = false;
  bool admissible = false;
  double admissibility_margin = 0.0;  // h^{-1} - max_k (1/2)||b_k|| ||1/a_k||
};

/// Assembles the (2d+1)-point finite difference operator
///   (L_h U)(z) = sum_k h^{-2} { a_k(z + h/2 e_k)[U(z) - U(z + h e_k)]
///                             + a_k(z - h/2 e_k)[U(z) - U(z - h e_k)] }
///              + sum_k (2h)^{-1} b_k(z) [U(z + h e_k) - U(z - h e_k)]
///              + c(z) U(z)
/// over interior nodes; legs reaching the boundary go to the coupling map.
/// The mesh condition h^{-1} >= max_k (1/2)||b_k|| ||1/a_k|| (sup norms
/// sampled over grid points) is evaluated at assembly.
inline FdSystem assemble_fd(const TensorGrid& grid, const FdCoefficients& coeffs,
                            AdmissibilityPolicy policy = AdmissibilityPolicy::HardFail) {
  const int d = grid.dim();
  const double h = grid.spacing();
  const std::size_t n = grid.interior_count();

  // sampled sup norms for the admissibility condition
  double bound = 0.0;
  bool convection = false;
  {
    const std::size_t N = grid.intervals();
    for (int k = 0; k < d; ++k) {
      double bmax = 0.0, ainv_max = 0.0;
      std::array<std::size_t, 3> idx{0, 0, 0};
      const std::size_t n1 = N + 1, n2 = (d > 1) ? N + 1 : 1, n3 = (d > 2) ? N + 1 : 1;
      for (std::size_t i3 = 0; i3 < n3; ++i3)
        for (std::size_t i2 = 0; i2 < n2; ++i2)
          for (std::size_t i1 = 0; i1 < n1; ++i1) {
            idx = {i1, i2, i3};
            Point p = grid.point(idx);
            bmax = std::max(bmax, std::fabs(coeffs.b[k](p)));
            for (double sign : {-0.5, 0.5}) {
              Point ph = p;
              ph[k] += sign * h;
              if (ph[k] < -0.25 * h || ph[k] > 1.0 + 0.25 * h) continue;
              const double av = coeffs.a[k](ph);
              if (!(av > 0.0)) throw std::domain_error("assemble_fd: a_k must be positive");
              ainv_max = std::max(ainv_max, 1.0 / av);
            }
          }
      bound = std::max(bound, 0.5 * bmax * ainv_max);
      if (bmax > 0.0) convection = true;
    }
  }
  const double margin = 1.0 / h - bound;
  if (margin < 0.0) {
    if (policy == AdmissibilityPolicy::HardFail)
      throw std::invalid_argument(
          "assemble_fd: mesh condition h^{-1} >= max_k (1/2)||b_k|| ||1/a_k|| violated");
    std::fprintf(stderr,
                 "assemble_fd: warning: mesh condition violated (margin %.3e), "
                 "sign structure not guaranteed\n",
                 margin);
  }

  FdSystem sys;
  sys.grid = grid;
  sys.has_convection = convection;
  sys.admissible = margin >= 0.0;
  sys.admissibility_margin = margin;
  sys.interior_points = grid.interior_points();

  std::vector<Triplet> triplets;
  triplets.reserve(n * (2 * d + 1));
  const double inv_h2 = 1.0 / (h * h);
  const double inv_2h = 0.5 / h;
  for (std::size_t i = 0; i < n; ++i) {
    const auto multi = grid.interior_multi(i);
    const Point z = grid.point(multi);
    double diag = coeffs.c(z);
    for (int k = 0; k < d; ++k) {
      Point zp = z, zm = z;
      zp[k] += 0.5 * h;
      zm[k] -= 0.5 * h;
      const double ap = coeffs.a[k](zp);
      const double am = coeffs.a[k](zm);
      if (!(ap > 0.0) || !(am > 0.0))
        throw std::domain_error("assemble_fd: a_k must be positive");
      const double bk = coeffs.b[k](z);
      diag += inv_h2 * (ap + am);
      const double coef_plus = -inv_h2 * ap + inv_2h * bk;
      const double coef_minus = -inv_h2 * am - inv_2h * bk;
      auto nb = multi;
      nb[k] = multi[k] + 1;
      if (grid.is_interior(nb))
        triplets.push_back({i, grid.interior_flat(nb), coef_plus});
      else
        sys.coupling.push_back({i, coef_plus, grid.point(nb)});
      nb[k] = multi[k] - 1;
      if (grid.is_interior(nb))
        triplets.push_back({i, grid.interior_flat(nb), coef_minus});
      else
        sys.coupling.push_back({i, coef_minus, grid.point(nb)});
    }
    triplets.push_back({i, i, diag});
  }
  sys.op = CsrMatrix::from_triplets(n, n, triplets);
  return sys;
}

/// True iff op + shift I has positive diagonal, non-positive
/// off-diagonal entries and non-negative row sums.
inline bool check_m_matrix(const CsrMatrix& op, double shift) {
  const auto offsets = op.row_offsets();
  const auto cols = op.col_indices();
  const auto vals = op.values();
  for (std::size_t i = 0; i < op.rows(); ++i) {
    double diag = shift;
    double row_sum = shift;
    for (std::size_t k = offsets[i]; k < offsets[i + 1]; ++k) {
      const double v = vals[k];
      row_sum += v;
      if (cols[k] == i) {
        diag += v;
      } else if (v > 0.0) {
        return false;
      }
    }
    if (!(diag > 0.0) || row_sum < -1e-12 * std::fabs(diag)) return false;
  }
  return true;
}

/// Max over interior nodes of |(L_h - L) v| for a smooth test function v
/// with caller-supplied analytic L v.
inline double truncation_probe(const TensorGrid& grid, const FdCoefficients& coeffs,
                               const ScalarField& v, const ScalarField& Lv) {
  const int d = grid.dim();
  const double h = grid.spacing();
  const double inv_h2 = 1.0 / (h * h);
  const double inv_2h = 0.5 / h;
  double worst = 0.0;
  const std::size_t n = grid.interior_count();
  for (std::size_t i = 0; i < n; ++i) {
    const auto multi = grid.interior_multi(i);
    const Point z = grid.point(multi);
    const double vz = v(z);
    double lh = coeffs.c(z) * vz;
    for (int k = 0; k < d; ++k) {
      Point zp = z, zm = z, zhp = z, zhm = z;
      zp[k] += h;
      zm[k] -= h;
      zhp[k] += 0.5 * h;
      zhm[k] -= 0.5 * h;
      const double vp = v(zp), vm = v(zm);
      lh += inv_h2 * (coeffs.a[k](zhp) * (vz - vp) + coeffs.a[k](zhm) * (vz - vm));
      lh += inv_2h * coeffs.b[k](z) * (vp - vm);
    }
    worst = std::max(worst, std::fabs(lh - Lv(z)));
  }
  return worst;
}

}  // namespace fracl1
