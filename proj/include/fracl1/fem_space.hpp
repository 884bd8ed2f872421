#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <istream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "fracl1/csr.hpp"
#include "fracl1/fd_space.hpp"  // Point, ScalarField, BoundaryCoupling

namespace fracl1 {

struct MeshParseError : std::runtime_error {
  MeshParseError(int line, const std::string& what)
      : std::runtime_error("mesh parse error at line " + std::to_string(line) + ": " + what),
        line_number(line) {}
  int line_number;
};

struct MeshTopologyError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// 2D conforming triangulation with consistently oriented (positive
/// signed area) triangles and per-vertex boundary markers.
struct Triangulation {
  std::vector<std::array<double, 2>> vertices;
  std::vector<std::array<std::size_t, 3>> triangles;
  std::vector<bool> boundary;

  std::size_t vertex_count() const { return vertices.size(); }
  std::size_t triangle_count() const { return triangles.size(); }

  double signed_area(std::size_t t) const {
    const auto& tri = triangles[t];
    const auto& p0 = vertices[tri[0]];
    const auto& p1 = vertices[tri[1]];
    const auto& p2 = vertices[tri[2]];
    return 0.5 * ((p1[0] - p0[0]) * (p2[1] - p0[1]) - (p2[0] - p0[0]) * (p1[1] - p0[1]));
  }
};

namespace detail {

// undirected edge -> incident triangle count
inline std::map<std::pair<std::size_t, std::size_t>, int> edge_counts(const Triangulation& tri) {
  std::map<std::pair<std::size_t, std::size_t>, int> edges;
  for (const auto& t : tri.triangles) {
    for (int e = 0; e < 3; ++e) {
      std::size_t u = t[e], v = t[(e + 1) % 3];
      if (u > v) std::swap(u, v);
      ++edges[{u, v}];
    }
  }
  return edges;
}

inline void validate_topology(Triangulation& tri) {
  const std::size_t nv = tri.vertex_count();
  std::vector<bool> referenced(nv, false);
  for (std::size_t t = 0; t < tri.triangle_count(); ++t) {
    for (std::size_t v : tri.triangles[t]) referenced[v] = true;
    const double area = tri.signed_area(t);
    if (area == 0.0)
      throw MeshTopologyError("degenerate (zero-area) triangle " + std::to_string(t));
    if (area < 0.0) std::swap(tri.triangles[t][1], tri.triangles[t][2]);
  }
  for (std::size_t v = 0; v < nv; ++v)
    if (!referenced[v])
      throw MeshTopologyError("dangling vertex " + std::to_string(v));
  const auto edges = edge_counts(tri);
  std::vector<bool> on_boundary_edge(nv, false);
  for (const auto& [e, cnt] : edges) {
    if (cnt > 2)
      throw MeshTopologyError("edge shared by more than two triangles");
    if (cnt == 1) {
      on_boundary_edge[e.first] = true;
      on_boundary_edge[e.second] = true;
    }
  }
  for (std::size_t v = 0; v < nv; ++v) {
    if (on_boundary_edge[v] != tri.boundary[v])
      throw MeshTopologyError("boundary marker of vertex " + std::to_string(v) +
                              " inconsistent with edge incidence");
  }
}

}  // namespace detail

/// Unit square split into 2 N^2 right triangles; every cell is cut by the
/// diagonal running lower-left to upper-right, so all angles are 45 or 90
/// degrees and the mesh is non-obtuse by construction.
inline Triangulation structured_mesh(std::size_t N) {
  if (N < 2) throw std::invalid_argument("structured_mesh: N must be >= 2");
  Triangulation tri;
  const double h = 1.0 / static_cast<double>(N);
  tri.vertices.reserve((N + 1) * (N + 1));
  tri.boundary.reserve((N + 1) * (N + 1));
  for (std::size_t j = 0; j <= N; ++j)
    for (std::size_t i = 0; i <= N; ++i) {
      tri.vertices.push_back({h * static_cast<double>(i), h * static_cast<double>(j)});
      tri.boundary.push_back(i == 0 || i == N || j == 0 || j == N);
    }
  auto id = [N](std::size_t i, std::size_t j) { return j * (N + 1) + i; };
  for (std::size_t j = 0; j < N; ++j)
    for (std::size_t i = 0; i < N; ++i) {
      tri.triangles.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1)});
      tri.triangles.push_back({id(i, j), id(i + 1, j + 1), id(i, j + 1)});
    }
  detail::validate_topology(tri);
  return tri;
}

/// Text format: first data line "V F"; then V lines "x y b" (b is the
/// 0/1 boundary flag) and F lines "i j k" (0-based vertex indices).
/// Whitespace-separated; '#' starts a comment. Clockwise triangles are
/// reoriented; topology is validated.
inline Triangulation import_mesh(std::istream& in) {
  Triangulation tri;
  int line_no = 0;
  std::size_t nv = 0, nt = 0;
  enum { Header, Vertices, Triangles, Done } state = Header;
  std::size_t seen_v = 0, seen_t = 0;
  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    if (state == Header) {
      if (!(ls >> nv >> nt)) {
        std::string tok;
        std::istringstream probe(line);
        if (probe >> tok) throw MeshParseError(line_no, "expected header 'V F'");
        continue;  // blank/comment line
      }
      if (nv < 3 || nt < 1) throw MeshParseError(line_no, "need at least 3 vertices and 1 triangle");
      tri.vertices.reserve(nv);
      tri.boundary.reserve(nv);
      tri.triangles.reserve(nt);
      state = Vertices;
      continue;
    }
    std::string probe_tok;
    {
      std::istringstream probe(line);
      if (!(probe >> probe_tok)) continue;  // blank/comment line
    }
    if (state == Vertices) {
      double x = 0.0, y = 0.0;
      int b = 0;
      if (!(ls >> x >> y >> b) || (b != 0 && b != 1))
        throw MeshParseError(line_no, "expected vertex line 'x y b'");
      tri.vertices.push_back({x, y});
      tri.boundary.push_back(b == 1);
      if (++seen_v == nv) state = Triangles;
      continue;
    }
    if (state == Triangles) {
      long long i = 0, j = 0, k = 0;
      if (!(ls >> i >> j >> k)) throw MeshParseError(line_no, "expected triangle line 'i j k'");
      for (long long v : {i, j, k})
        if (v < 0 || static_cast<std::size_t>(v) >= nv)
          throw MeshParseError(line_no, "vertex index out of range");
      if (i == j || j == k || i == k) throw MeshParseError(line_no, "repeated vertex in triangle");
      tri.triangles.push_back({static_cast<std::size_t>(i), static_cast<std::size_t>(j),
                               static_cast<std::size_t>(k)});
      if (++seen_t == nt) state = Done;
      continue;
    }
    throw MeshParseError(line_no, "unexpected trailing content");
  }
  if (state != Done)
    throw MeshParseError(line_no, "unexpected end of file");
  detail::validate_topology(tri);
  return tri;
}

struct EdgeWeight {
  std::size_t v0;  // global vertex ids, v0 < v1
  std::size_t v1;
  double weight;   // assembled off-diagonal stiffness entry (gradient part)
};

/// Lumped-mass P1 system for L = -Laplace + c: cotangent-weight stiffness
/// plus c(z) m_z on the diagonal, diagonal mass m_z = (1/3) sum of
/// incident triangle areas. Rows cover interior vertices; entries hitting
/// boundary vertices go to the coupling map. The off-diagonal gradient
/// weights of every vertex pair (interior or not) are kept for the sign
/// checks.
struct FemSystem {
  Triangulation mesh;
  CsrMatrix stiffness;                     // interior x interior
  std::vector<BoundaryCoupling> coupling;  // interior row -> boundary vertex
  std::vector<double> lumped_mass;         // interior vertices
  std::vector<double> lumped_mass_all;     // every vertex; sums to area(domain)
  std::vector<std::size_t> interior_ids;   // interior row -> global vertex id
  std::vector<Point> interior_points;
  std::vector<EdgeWeight> offdiag_edges;   // all assembled vertex pairs
};

inline FemSystem assemble_fem(const Triangulation& mesh, const ScalarField& c) {
  const std::size_t nv = mesh.vertex_count();
  FemSystem sys;
  sys.mesh = mesh;
  sys.lumped_mass_all.assign(nv, 0.0);

  std::map<std::pair<std::size_t, std::size_t>, double> offdiag;
  std::vector<double> grad_diag(nv, 0.0);

  for (std::size_t t = 0; t < mesh.triangle_count(); ++t) {
    const auto& tri = mesh.triangles[t];
    const double area = mesh.signed_area(t);
    if (area <= 0.0)
      throw MeshTopologyError("degenerate triangle " + std::to_string(t));
    // gradients of the barycentric basis: grad phi_i = (b_i, c_i) / (2 area)
    double bx[3], by[3];
    for (int i = 0; i < 3; ++i) {
      const auto& pj = mesh.vertices[tri[(i + 1) % 3]];
      const auto& pk = mesh.vertices[tri[(i + 2) % 3]];
      bx[i] = pj[1] - pk[1];
      by[i] = pk[0] - pj[0];
    }
    for (int i = 0; i < 3; ++i) {
      sys.lumped_mass_all[tri[i]] += area / 3.0;
      grad_diag[tri[i]] += (bx[i] * bx[i] + by[i] * by[i]) / (4.0 * area);
      for (int j = i + 1; j < 3; ++j) {
        const double w = (bx[i] * bx[j] + by[i] * by[j]) / (4.0 * area);
        std::size_t u = tri[i], v = tri[j];
        if (u > v) std::swap(u, v);
        offdiag[{u, v}] += w;
      }
    }
  }

  sys.offdiag_edges.reserve(offdiag.size());
  for (const auto& [e, w] : offdiag) sys.offdiag_edges.push_back({e.first, e.second, w});

  std::vector<std::size_t> global_to_interior(nv, static_cast<std::size_t>(-1));
  for (std::size_t v = 0; v < nv; ++v) {
    if (!mesh.boundary[v]) {
      global_to_interior[v] = sys.interior_ids.size();
      sys.interior_ids.push_back(v);
    }
  }
  const std::size_t ni = sys.interior_ids.size();
  sys.lumped_mass.resize(ni);
  sys.interior_points.resize(ni);
  std::vector<Triplet> triplets;
  for (std::size_t row = 0; row < ni; ++row) {
    const std::size_t v = sys.interior_ids[row];
    sys.lumped_mass[row] = sys.lumped_mass_all[v];
    const Point p{mesh.vertices[v][0], mesh.vertices[v][1], 0.0};
    sys.interior_points[row] = p;
    const double cv = c(p);
    if (cv < 0.0) throw std::domain_error("assemble_fem: c must be non-negative");
    triplets.push_back({row, row, grad_diag[v] + cv * sys.lumped_mass[row]});
  }
  for (const auto& [e, w] : offdiag) {
    const std::size_t ri = global_to_interior[e.first];
    const std::size_t rj = global_to_interior[e.second];
    const bool i_int = ri != static_cast<std::size_t>(-1);
    const bool j_int = rj != static_cast<std::size_t>(-1);
    if (i_int && j_int) {
      triplets.push_back({ri, rj, w});
      triplets.push_back({rj, ri, w});
    } else if (i_int) {
      sys.coupling.push_back(
          {ri, w, Point{mesh.vertices[e.second][0], mesh.vertices[e.second][1], 0.0}});
    } else if (j_int) {
      sys.coupling.push_back(
          {rj, w, Point{mesh.vertices[e.first][0], mesh.vertices[e.first][1], 0.0}});
    }
  }
  sys.stiffness = CsrMatrix::from_triplets(ni, ni, triplets);
  return sys;
}

struct AInftyReport {
  double worst_offdiag = 0.0;  // largest assembled off-diagonal entry
  bool mass_is_diagonal = true;  // lumped quadrature: the w(1,1) term adds nothing off-diagonal
  bool pass = false;
};

/// Sign condition for the stepped stiffness matrix A + w(1,1) M. With the
/// lumped (diagonal) mass the w(1,1) term cannot create off-diagonal
/// entries, so the verdict reduces to the off-diagonal signs of the
/// gradient stiffness alone, checked over every assembled vertex pair.
inline AInftyReport check_a_infty(const FemSystem& sys, double kappa11) {
  if (kappa11 < 0.0) throw std::invalid_argument("check_a_infty: kappa11 must be >= 0");
  AInftyReport rep;
  rep.worst_offdiag = -1e300;
  for (const auto& e : sys.offdiag_edges)
    rep.worst_offdiag = std::max(rep.worst_offdiag, e.weight);
  rep.pass = rep.worst_offdiag <= 1e-12;
  return rep;
}

struct DelaunayReport {
  struct Edge {
    std::size_t v0, v1;
    double angle_sum;  // sum of the two opposite angles, radians
  };
  std::vector<Edge> edges;  // one entry per interior edge
  double worst_sum = 0.0;
  bool pass = false;
};

/// Delaunay criterion: the two angles opposite to each interior edge sum
/// to at most pi.
inline DelaunayReport check_delaunay(const Triangulation& mesh) {
  std::map<std::pair<std::size_t, std::size_t>, std::vector<double>> opposite;
  for (const auto& t : mesh.triangles) {
    for (int e = 0; e < 3; ++e) {
      const std::size_t a = t[e], b = t[(e + 1) % 3], c = t[(e + 2) % 3];
      // angle at c, opposite to edge (a, b)
      const auto& pa = mesh.vertices[a];
      const auto& pb = mesh.vertices[b];
      const auto& pc = mesh.vertices[c];
      const double ux = pa[0] - pc[0], uy = pa[1] - pc[1];
      const double vx = pb[0] - pc[0], vy = pb[1] - pc[1];
      const double angle = std::atan2(std::fabs(ux * vy - uy * vx), ux * vx + uy * vy);
      std::size_t u = a, v = b;
      if (u > v) std::swap(u, v);
      opposite[{u, v}].push_back(angle);
    }
  }
  DelaunayReport rep;
  for (const auto& [e, angles] : opposite) {
    if (angles.size() != 2) continue;  // boundary edge
    rep.edges.push_back({e.first, e.second, angles[0] + angles[1]});
    rep.worst_sum = std::max(rep.worst_sum, angles[0] + angles[1]);
  }
  rep.pass = rep.worst_sum <= M_PI + 1e-12;
  return rep;
}

}  // namespace fracl1
