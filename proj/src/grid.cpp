#include "respotopt/grid.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace respotopt {

bool Grid::dirichlet_is_homogeneous() const {
  return std::all_of(dirichlet_values.begin(), dirichlet_values.end(),
                     [](double v) { return v == 0.0; });
}

Grid build_grid(int nx, int ny, double L, double H) {
  if (nx < 1 || ny < 1)
    throw std::invalid_argument("build_grid: element counts must be >= 1, got " +
                                std::to_string(nx) + "x" + std::to_string(ny));
  if (!(L > 0.0) || !(H > 0.0))
    throw std::invalid_argument("build_grid: domain lengths must be positive");

  Grid g;
  g.nx = nx;
  g.ny = ny;
  g.L = L;
  g.H = H;

  const double hx = L / nx, hy = H / ny;
  g.node_coords.resize(g.num_nodes());
  for (int j = 0; j <= ny; ++j)
    for (int i = 0; i <= nx; ++i)
      g.node_coords[g.node_index(i, j)] = {i * hx, j * hy};

  g.elem_conn.resize(g.num_elems());
  g.elem_centers.resize(g.num_elems());
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const int e = g.elem_index(i, j);
      g.elem_conn[e] = {g.node_index(i, j), g.node_index(i + 1, j),
                        g.node_index(i + 1, j + 1), g.node_index(i, j + 1)};
      g.elem_centers[e] = {(i + 0.5) * hx, (j + 0.5) * hy};
    }
  }
  return g;
}

void fix_dof(Grid& grid, int dof, double value) {
  if (dof < 0 || dof >= grid.num_dofs())
    throw std::invalid_argument("fix_dof: dof out of range");
  for (const PointLoad& pl : grid.traction)
    if (dof / 2 == pl.node)
      throw std::invalid_argument("fix_dof: node carries a point load");
  auto it = std::lower_bound(grid.dirichlet_dofs.begin(), grid.dirichlet_dofs.end(), dof);
  const auto pos = it - grid.dirichlet_dofs.begin();
  if (it != grid.dirichlet_dofs.end() && *it == dof) {
    grid.dirichlet_values[pos] = value;
    return;
  }
  grid.dirichlet_dofs.insert(it, dof);
  grid.dirichlet_values.insert(grid.dirichlet_values.begin() + pos, value);
}

Grid apply_cantilever_bcs(Grid grid, double load_magnitude) {
  const int corner = grid.node_index(grid.nx, 0);
  grid.traction.push_back({corner, {0.0, -load_magnitude}});
  for (int j = 0; j <= grid.ny; ++j) {
    const int n = grid.node_index(0, j);
    fix_dof(grid, 2 * n + 0);
    fix_dof(grid, 2 * n + 1);
  }
  return grid;
}

}  // namespace respotopt
