#include "respotopt/io.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace respotopt {

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

void write_atomic(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  if (target.has_parent_path()) fs::create_directories(target.parent_path());
  const fs::path tmp = target.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << content;
  }
  fs::rename(tmp, target);
}

void write_density_csv(const std::string& path, const Grid& grid,
                       const DensityDesign& design, const Eigen::VectorXd& fphi,
                       const Eigen::VectorXd& frho) {
  std::ostringstream out;
  out << "elem_index,cx,cy,phi,rho,filtered_phi,filtered_rho\n";
  for (int e = 0; e < grid.num_elems(); ++e) {
    out << e << ',' << fmt(grid.elem_centers[e][0]) << ',' << fmt(grid.elem_centers[e][1])
        << ',' << fmt(design.phi[e]) << ',' << fmt(design.rho[e]) << ','
        << fmt(fphi[e]) << ',' << fmt(frho[e]) << '\n';
  }
  write_atomic(path, out.str());
}

DensityTable read_density_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path);
  DensityTable t;
  std::string line;
  std::getline(in, line);  // header
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string cell;
    auto next = [&]() {
      if (!std::getline(ss, cell, ',')) throw std::runtime_error("bad CSV row: " + line);
      return cell;
    };
    t.elem_index.push_back(std::stoi(next()));
    t.cx.push_back(std::stod(next()));
    t.cy.push_back(std::stod(next()));
    t.phi.push_back(std::stod(next()));
    t.rho.push_back(std::stod(next()));
    t.filtered_phi.push_back(std::stod(next()));
    t.filtered_rho.push_back(std::stod(next()));
  }
  return t;
}

void write_convergence_csv(const std::string& path, const RunHistory& history) {
  std::ostringstream out;
  out << "iter,objective,C0,C1,vol_r,vol_0,max_change\n";
  for (const HistoryRow& r : history) {
    out << r.iter << ',' << fmt(r.objective) << ',' << fmt(r.C0) << ',' << fmt(r.C1)
        << ',' << fmt(r.vol_r) << ',' << fmt(r.vol_0) << ',' << fmt(r.max_change)
        << '\n';
  }
  write_atomic(path, out.str());
}

void write_vtk(const std::string& path, const Grid& grid, const DensityDesign& design,
               const Eigen::VectorXd& fphi, const Eigen::VectorXd& frho) {
  std::ostringstream out;
  out << "# vtk DataFile Version 3.0\n";
  out << "respotopt density fields\n";
  out << "ASCII\n";
  out << "DATASET STRUCTURED_GRID\n";
  out << "DIMENSIONS " << grid.nx + 1 << ' ' << grid.ny + 1 << " 1\n";
  out << "POINTS " << grid.num_nodes() << " double\n";
  for (const auto& xy : grid.node_coords)
    out << fmt(xy[0]) << ' ' << fmt(xy[1]) << " 0\n";
  out << "CELL_DATA " << grid.num_elems() << '\n';
  auto scalars = [&](const char* name, auto&& value) {
    out << "SCALARS " << name << " double 1\nLOOKUP_TABLE default\n";
    for (int e = 0; e < grid.num_elems(); ++e) out << fmt(value(e)) << '\n';
  };
  scalars("phi", [&](int e) { return design.phi[e]; });
  scalars("rho", [&](int e) { return design.rho[e]; });
  scalars("filtered_phi", [&](int e) { return fphi[e]; });
  scalars("filtered_rho", [&](int e) { return frho[e]; });
  write_atomic(path, out.str());
}

void write_matrix_csv(const std::string& path, const Eigen::SparseMatrix<double>& m) {
  std::ostringstream out;
  out << "row,col,value\n";
  for (int k = 0; k < m.outerSize(); ++k)
    for (Eigen::SparseMatrix<double>::InnerIterator it(m, k); it; ++it)
      out << it.row() << ',' << it.col() << ',' << fmt(it.value()) << '\n';
  write_atomic(path, out.str());
}

void write_pgm(const std::string& path, const Grid& grid,
               const Eigen::VectorXd& fphi, const Eigen::VectorXd& frho,
               bool voids_enabled) {
  std::ostringstream out;
  out << "P2\n" << grid.nx << ' ' << grid.ny << "\n255\n";
  for (int j = grid.ny - 1; j >= 0; --j) {
    for (int i = 0; i < grid.nx; ++i) {
      const int e = grid.elem_index(i, j);
      int gray = 128;
      if (voids_enabled && frho[e] < 0.5)
        gray = 0;
      else if (fphi[e] >= 0.5)
        gray = 255;
      out << gray << (i + 1 < grid.nx ? ' ' : '\n');
    }
  }
  write_atomic(path, out.str());
}

}  // namespace respotopt
