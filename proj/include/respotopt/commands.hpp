#pragma once
// CLI subcommand implementations. Each returns a process exit status and
// reports to stdout, so the command-line tool stays a thin argument parser.

#include <cstdint>
#include <string>

#include "respotopt/config.hpp"

namespace respotopt {

// Full optimization run; writes density/convergence/summary artifacts (and the
// resolved config) into out_dir, or config.out_dir when empty.
int cmd_run(const RunConfig& config, const std::string& out_dir = "");

// Adjoint-vs-finite-difference verification on a mesh capped at
// mesh_cap x mesh_cap elements (cap must be <= 16). Nonzero exit when any
// relative error exceeds 1e-4.
int cmd_gradcheck(const RunConfig& config, int mesh_cap, int n_probes,
                  std::uint64_t seed);

// Identity suite: blocking amplitude vs 1 - C1/C0, workpiece kappa limits,
// equal-moduli compliance invariance, and load/eigenstrain superposition.
int cmd_identities(const RunConfig& config);

}  // namespace respotopt
