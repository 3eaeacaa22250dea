#pragma once
// Central-finite-difference verification of the adjoint sensitivities.

#include <cstdint>

#include "respotopt/objectives.hpp"

namespace respotopt {

struct GradCheckResult {
  double max_rel_err_phi = 0.0;
  double max_rel_err_rho = 0.0;  // stays 0 without voids
  int probes = 0;
};

// Compares the adjoint gradient of the minimized objective against central
// finite differences with an absolute density step. n_probes == 0 probes every
// element, otherwise a seeded random subset. The design must keep a margin of
// at least `step` to its box bounds.
GradCheckResult adjoint_vs_fd(const Objective& objective, const Grid& grid,
                              const DensityDesign& design, const MaterialPair& mats,
                              const FilterOperator& filter, double p,
                              double step = 1e-6, int n_probes = 0,
                              std::uint64_t seed = 0);

// Seeded interior design for verification runs: phi in [0.1, 0.9] and, with
// voids, rho in [max(rho_min, 0.2), 0.95].
DensityDesign random_design(int n_elems, bool voids, double rho_min,
                            std::uint64_t seed);

}  // namespace respotopt
