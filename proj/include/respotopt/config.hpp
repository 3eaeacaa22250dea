#pragma once
// Run configuration: JSON parsing with validation, defaults, and the bridges
// from a config to the grid / materials / filter / initial design.

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "respotopt/elasticity.hpp"
#include "respotopt/filter.hpp"
#include "respotopt/grid.hpp"
#include "respotopt/mma.hpp"
#include "respotopt/objectives.hpp"

namespace respotopt {

struct RunConfig {
  // geometry
  int nx = 60, ny = 60;
  double L = 1.0, H = 1.0;
  // materials
  double E_s = 1.0, nu_s = 0.3;
  double E_r = 1.0, nu_r = 0.3;
  Eigen::Matrix2d eps_star = (Eigen::Matrix2d() << -0.1, 0.0, 0.0, 0.1).finished();
  // load
  double load_magnitude = 1.0;
  // objective
  Objective objective;
  // simp
  double p = 3.0;
  double rho_min = 1e-3;
  bool voids = false;
  // filter: absolute radius wins over the element-width multiple when set
  double filter_radius_elem_widths = 1.5;
  std::optional<double> filter_radius_abs;
  // budgets (fractions of the domain volume)
  double Vr_frac = 0.5;
  double V0_frac = 1.0;
  // optimizer
  MmaOptions mma;
  int max_iter = 300;
  double tol_change = 0.01;
  std::uint64_t seed = 0;
  double perturbation = 0.0;
  // outputs
  std::string out_dir = "out";
  std::vector<std::string> formats = {"csv", "vtk", "pgm"};

  double filter_radius(const Grid& grid) const {
    return filter_radius_abs ? *filter_radius_abs
                             : filter_radius_elem_widths * grid.elem_width();
  }
};

// Parses and validates; error messages name the offending key and constraint.
RunConfig parse_config(const std::string& path);
RunConfig parse_config_text(const std::string& json_text);

// Full resolved config (defaults filled in), sufficient to reproduce the run.
std::string resolved_config_json(const RunConfig& config);

Grid make_grid(const RunConfig& config);
MaterialPair make_materials(const RunConfig& config);
FilterOperator make_filter(const RunConfig& config, const Grid& grid);

// Uniform phi = Vr/V0, rho = V0/V, with an optional seeded perturbation on phi
// (rescaled back into the responsive budget if the perturbation overshoots).
DensityDesign initial_design(const RunConfig& config, const Grid& grid);

}  // namespace respotopt
