#pragma once
// Structured quadrilateral meshes on (0,L) x (0,H) with boundary sets and
// DOF numbering. Nodes are numbered lexicographically, x fastest; each node
// carries two DOFs ordered (u_x, u_y), so dof = 2*node + component.

#include <array>
#include <vector>

namespace respotopt {

struct PointLoad {
  int node = -1;
  std::array<double, 2> force{0.0, 0.0};
};

struct Grid {
  int nx = 0, ny = 0;
  double L = 0.0, H = 0.0;
  std::vector<std::array<double, 2>> node_coords;
  // Per element: 4 node indices, counterclockwise from the lower-left corner.
  std::vector<std::array<int, 4>> elem_conn;
  std::vector<std::array<double, 2>> elem_centers;
  // Constrained DOFs (sorted, unique) with prescribed values (parallel array).
  std::vector<int> dirichlet_dofs;
  std::vector<double> dirichlet_values;
  std::vector<PointLoad> traction;

  int num_nodes() const { return (nx + 1) * (ny + 1); }
  int num_elems() const { return nx * ny; }
  int num_dofs() const { return 2 * num_nodes(); }
  double elem_width() const { return L / nx; }
  double elem_height() const { return H / ny; }
  double elem_area() const { return elem_width() * elem_height(); }
  double volume() const { return L * H; }

  int node_index(int i, int j) const { return j * (nx + 1) + i; }
  int elem_index(int i, int j) const { return j * nx + i; }

  bool dirichlet_is_homogeneous() const;
};

Grid build_grid(int nx, int ny, double L, double H);

// Fixes every DOF on the x=0 edge and applies a downward point load
// (0, -load_magnitude) at the (L, 0) corner node.
Grid apply_cantilever_bcs(Grid grid, double load_magnitude);

// Adds a single constrained DOF (keeps the set sorted and unique; a repeated
// DOF overwrites the prescribed value). Traction nodes must stay unconstrained.
void fix_dof(Grid& grid, int dof, double value = 0.0);

}  // namespace respotopt
