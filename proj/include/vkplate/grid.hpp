#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "vkplate/errors.hpp"

namespace vkplate {

enum class Edge : std::uint8_t { left = 1, right = 2, bottom = 4, top = 8 };

/// Subset of the four sides of the rectangle.
class EdgeSet {
 public:
  constexpr EdgeSet() = default;
  constexpr EdgeSet(std::initializer_list<Edge> edges) {
    for (Edge e : edges) bits_ |= static_cast<std::uint8_t>(e);
  }
  static constexpr EdgeSet all() { return {Edge::left, Edge::right, Edge::bottom, Edge::top}; }

  constexpr bool contains(Edge e) const { return (bits_ & static_cast<std::uint8_t>(e)) != 0; }
  constexpr bool empty() const { return bits_ == 0; }
  constexpr void insert(Edge e) { bits_ |= static_cast<std::uint8_t>(e); }
  constexpr std::uint8_t bits() const { return bits_; }
  friend constexpr bool operator==(EdgeSet, EdgeSet) = default;

 private:
  std::uint8_t bits_ = 0;
};

inline Edge parse_edge(std::string_view name) {
  if (name == "left") return Edge::left;
  if (name == "right") return Edge::right;
  if (name == "bottom") return Edge::bottom;
  if (name == "top") return Edge::top;
  throw ValidationError("unknown edge '" + std::string(name) + "'");
}

/// Axis-aligned structured mesh of (0,lx) x (0,ly). Nodes are numbered
/// lexicographically with x fastest; element e = (i, j) has corners
/// (i,j), (i+1,j), (i+1,j+1), (i,j+1).
struct Grid2D {
  int nx = 0;
  int ny = 0;
  double lx = 1.0;
  double ly = 1.0;
  EdgeSet dirichlet;

  double hx() const { return lx / nx; }
  double hy() const { return ly / ny; }
  int num_nodes() const { return (nx + 1) * (ny + 1); }
  int num_elements() const { return nx * ny; }
  int node(int i, int j) const { return j * (nx + 1) + i; }
  int node_i(int n) const { return n % (nx + 1); }
  int node_j(int n) const { return n / (nx + 1); }
  Eigen::Vector2d node_xy(int n) const { return {node_i(n) * hx(), node_j(n) * hy()}; }
  Eigen::Vector2d element_origin(int e) const { return {(e % nx) * hx(), (e / nx) * hy()}; }

  std::array<int, 4> element_nodes(int e) const {
    const int i = e % nx;
    const int j = e / nx;
    return {node(i, j), node(i + 1, j), node(i + 1, j + 1), node(i, j + 1)};
  }

  bool on_edge(int n, Edge edge) const {
    switch (edge) {
      case Edge::left: return node_i(n) == 0;
      case Edge::right: return node_i(n) == nx;
      case Edge::bottom: return node_j(n) == 0;
      case Edge::top: return node_j(n) == ny;
    }
    return false;
  }

  bool on_dirichlet(int n) const {
    for (Edge e : {Edge::left, Edge::right, Edge::bottom, Edge::top}) {
      if (dirichlet.contains(e) && on_edge(n, e)) return true;
    }
    return false;
  }

  /// Constant element Jacobian diag(hx/2, hy/2) of the map from [-1,1]^2.
  Eigen::Matrix2d element_jacobian() const {
    return Eigen::Vector2d(hx() / 2, hy() / 2).asDiagonal();
  }
};

/// Degrees of freedom of the three fields. The mechanical vector is laid out
/// as [u (2 per node) | v (4 per node)]; v dofs per node are (value, d1, d2, d12).
struct DofLayout {
  int num_nodes = 0;
  std::vector<bool> mech_constrained;
  std::vector<int> mech_to_free;  ///< -1 for constrained dofs
  std::vector<int> free_to_mech;

  int num_u() const { return 2 * num_nodes; }
  int num_v() const { return 4 * num_nodes; }
  int num_mu() const { return num_nodes; }
  int num_mech() const { return num_u() + num_v(); }
  int num_free() const { return static_cast<int>(free_to_mech.size()); }
  int num_constrained() const { return num_mech() - num_free(); }

  static int u_dof(int node, int comp) { return 2 * node + comp; }
  static int v_dof(int node, int k) { return 4 * node + k; }
  int mech_u(int node, int comp) const { return u_dof(node, comp); }
  int mech_v(int node, int k) const { return num_u() + v_dof(node, k); }
};

struct PlateMesh {
  Grid2D grid;
  DofLayout dofs;
};

/// Dirichlet nodes get u = 0 and every v dof (value, gradient, twist) fixed.
inline PlateMesh build_grid(int nx, int ny, double lx, double ly, EdgeSet dirichlet_edges) {
  if (nx < 2 || ny < 2) throw ValidationError("grid needs nx, ny >= 2");
  if (!(lx > 0.0) || !(ly > 0.0)) throw ValidationError("grid side lengths must be positive");
  if (dirichlet_edges.empty()) {
    throw ValidationError(
        "mechanical problem is not well-posed without a Dirichlet boundary part "
        "(rigid motions in the kernel)");
  }
  PlateMesh m;
  m.grid = Grid2D{nx, ny, lx, ly, dirichlet_edges};
  const Eigen::Matrix2d jac = m.grid.element_jacobian();
  if (jac(0, 1) != 0.0 || jac(1, 0) != 0.0 || !(jac(0, 0) > 0.0) || !(jac(1, 1) > 0.0)) {
    throw ValidationError("element map is not affine axis-aligned");
  }

  DofLayout& d = m.dofs;
  d.num_nodes = m.grid.num_nodes();
  d.mech_constrained.assign(d.num_mech(), false);
  for (int n = 0; n < d.num_nodes; ++n) {
    if (!m.grid.on_dirichlet(n)) continue;
    for (int c = 0; c < 2; ++c) d.mech_constrained[d.mech_u(n, c)] = true;
    for (int k = 0; k < 4; ++k) d.mech_constrained[d.mech_v(n, k)] = true;
  }
  d.mech_to_free.assign(d.num_mech(), -1);
  for (int i = 0; i < d.num_mech(); ++i) {
    if (!d.mech_constrained[i]) {
      d.mech_to_free[i] = static_cast<int>(d.free_to_mech.size());
      d.free_to_mech.push_back(i);
    }
  }
  return m;
}

}  // namespace vkplate
