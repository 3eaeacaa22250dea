#pragma once
// Result export: density CSV (bit-exact round trip), legacy VTK structured
// grid with cell data, PGM thumbnails, convergence log, and the run summary.
// All writes go through a temp-file-then-rename so readers never see partials.

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "respotopt/grid.hpp"
#include "respotopt/optimizer.hpp"

namespace respotopt {

struct DensityTable {
  std::vector<int> elem_index;
  std::vector<double> cx, cy, phi, rho, filtered_phi, filtered_rho;
};

void write_atomic(const std::string& path, const std::string& content);

// One row per element: elem_index,cx,cy,phi,rho,filtered_phi,filtered_rho.
// Doubles are printed with 17 significant digits, so a re-read reproduces the
// fields bit-exactly.
void write_density_csv(const std::string& path, const Grid& grid,
                       const DensityDesign& design, const Eigen::VectorXd& fphi,
                       const Eigen::VectorXd& frho);
DensityTable read_density_csv(const std::string& path);

// iter,objective,C0,C1,vol_r,vol_0,max_change
void write_convergence_csv(const std::string& path, const RunHistory& history);

// Legacy ASCII STRUCTURED_GRID with CELL_DATA arrays phi,rho,filtered_*.
void write_vtk(const std::string& path, const Grid& grid, const DensityDesign& design,
               const Eigen::VectorXd& fphi, const Eigen::VectorXd& frho);

// P2 thumbnail, nx columns by ny rows (row j = ny-1 first). Thresholds the
// filtered fields at 0.5: 0 = void, 128 = passive, 255 = responsive.
void write_pgm(const std::string& path, const Grid& grid,
               const Eigen::VectorXd& fphi, const Eigen::VectorXd& frho,
               bool voids_enabled);

// Debug export of a sparse matrix as row,col,value triplets.
void write_matrix_csv(const std::string& path, const Eigen::SparseMatrix<double>& m);

}  // namespace respotopt
