#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace fracl1 {

/// Temporal mesh 0 = t_0 < t_1 < ... < t_M = T. Immutable after
/// construction; node(j) and width(j) use the 1-based level index j
/// of the time-stepping loops (width(j) = t_j - t_{j-1}).
class TemporalMesh {
 public:
  TemporalMesh(double T, std::vector<double> nodes, double r, bool graded)
      : final_time_(T), r_(r), graded_(graded), nodes_(std::move(nodes)) {
    const std::size_t M = nodes_.size() - 1;
    widths_.resize(M);
    for (std::size_t j = 1; j <= M; ++j) {
      widths_[j - 1] = nodes_[j] - nodes_[j - 1];
      if (!(widths_[j - 1] > 0.0))
        throw std::invalid_argument("TemporalMesh: nodes must be strictly increasing");
    }
  }

  double final_time() const { return final_time_; }
  std::size_t levels() const { return nodes_.size() - 1; }  // M
  double grading() const { return r_; }
  bool is_graded() const { return graded_; }

  double node(std::size_t j) const { return nodes_.at(j); }
  double width(std::size_t j) const { return widths_.at(j - 1); }

  std::span<const double> nodes() const { return nodes_; }
  std::span<const double> widths() const { return widths_; }

 private:
  double final_time_;
  double r_;
  bool graded_;
  std::vector<double> nodes_;
  std::vector<double> widths_;
};

/// Graded mesh t_j = T (j/M)^r. Nodes are evaluated as T exp(r log(j/M))
/// with the last node pinned to T.
inline TemporalMesh graded_mesh(double T, std::size_t M, double r) {
  if (!(T > 0.0)) throw std::invalid_argument("graded_mesh: T must be positive");
  if (M < 1) throw std::invalid_argument("graded_mesh: M must be >= 1");
  if (!(r >= 1.0)) throw std::invalid_argument("graded_mesh: r must be >= 1");
  std::vector<double> nodes(M + 1);
  nodes[0] = 0.0;
  for (std::size_t j = 1; j < M; ++j)
    nodes[j] = T * std::exp(r * std::log(static_cast<double>(j) / static_cast<double>(M)));
  nodes[M] = T;
  return TemporalMesh(T, std::move(nodes), r, true);
}

/// Quasi-graded mesh t_j = T xi_j^r for a strictly increasing abscissa
/// vector xi with xi_0 = 0 and xi_last = 1.
inline TemporalMesh quasi_graded_mesh(double T, std::span<const double> xi, double r) {
  if (!(T > 0.0)) throw std::invalid_argument("quasi_graded_mesh: T must be positive");
  if (!(r >= 1.0)) throw std::invalid_argument("quasi_graded_mesh: r must be >= 1");
  if (xi.size() < 2) throw std::invalid_argument("quasi_graded_mesh: need at least two abscissae");
  if (xi.front() != 0.0 || xi.back() != 1.0)
    throw std::invalid_argument("quasi_graded_mesh: xi must start at 0 and end at 1");
  for (std::size_t j = 1; j < xi.size(); ++j)
    if (!(xi[j] > xi[j - 1]))
      throw std::invalid_argument("quasi_graded_mesh: xi must be strictly increasing");
  std::vector<double> nodes(xi.size());
  nodes[0] = 0.0;
  for (std::size_t j = 1; j + 1 < xi.size(); ++j)
    nodes[j] = T * std::exp(r * std::log(xi[j]));
  nodes[xi.size() - 1] = T;
  return TemporalMesh(T, std::move(nodes), r, false);
}

struct WidthBoundReport {
  double min_ratio;  // min_j tau_j M t_j^{1/r - 1} / T^{1/r}
  double max_ratio;
};

/// Evaluates the mesh-width equivalence ratio tau_j ~ M^{-1} t_j^{1-1/r}
/// on a graded mesh. Both extremes stay bounded away from 0 and infinity
/// uniformly in M.
inline WidthBoundReport width_bound_check(const TemporalMesh& mesh) {
  if (!mesh.is_graded())
    throw std::invalid_argument("width_bound_check: requires a graded mesh");
  const double r = mesh.grading();
  const double T = mesh.final_time();
  const double M = static_cast<double>(mesh.levels());
  WidthBoundReport rep{1e300, 0.0};
  for (std::size_t j = 1; j <= mesh.levels(); ++j) {
    const double tj = mesh.node(j);
    const double ratio =
        mesh.width(j) * M * std::pow(tj, 1.0 / r - 1.0) / std::pow(T, 1.0 / r);
    rep.min_ratio = std::min(rep.min_ratio, ratio);
    rep.max_ratio = std::max(rep.max_ratio, ratio);
  }
  return rep;
}

}  // namespace fracl1
