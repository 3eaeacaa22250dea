#include "respotopt/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <vector>

namespace respotopt {

namespace {

std::vector<int> pick_probes(int n_elems, int n_probes, std::uint64_t seed) {
  std::vector<int> all(n_elems);
  std::iota(all.begin(), all.end(), 0);
  if (n_probes <= 0 || n_probes >= n_elems) return all;
  std::mt19937_64 rng(seed);
  std::shuffle(all.begin(), all.end(), rng);
  all.resize(n_probes);
  std::sort(all.begin(), all.end());
  return all;
}

// Per-probe relative error, floored at 1e-3 of the gradient's max magnitude so
// entries at the central-difference noise floor (~1e-10 * |J| absolute) cannot
// dominate the verdict.
double max_rel_err(const std::vector<double>& adj, const std::vector<double>& fd) {
  double scale = 0.0;
  for (double v : fd) scale = std::max(scale, std::abs(v));
  double worst = 0.0;
  for (std::size_t k = 0; k < fd.size(); ++k) {
    const double denom = std::max(std::abs(fd[k]), 1e-30 + 1e-3 * scale);
    worst = std::max(worst, std::abs(adj[k] - fd[k]) / denom);
  }
  return worst;
}

}  // namespace

DensityDesign random_design(int n_elems, bool voids, double rho_min,
                            std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uphi(0.1, 0.9);
  std::uniform_real_distribution<double> urho(std::max(rho_min, 0.2), 0.95);
  DensityDesign d;
  d.rho_min = rho_min;
  d.voids_enabled = voids;
  d.phi.resize(n_elems);
  d.rho.resize(n_elems);
  for (int e = 0; e < n_elems; ++e) {
    d.phi[e] = uphi(rng);
    d.rho[e] = voids ? urho(rng) : 1.0;
  }
  d.validate();
  return d;
}

GradCheckResult adjoint_vs_fd(const Objective& objective, const Grid& grid,
                              const DensityDesign& design, const MaterialPair& mats,
                              const FilterOperator& filter, double p, double step,
                              int n_probes, std::uint64_t seed) {
  const ObjectiveReport report =
      sensitivities(objective, grid, design, mats, filter, p);
  const std::vector<int> probes = pick_probes(grid.num_elems(), n_probes, seed);

  auto fd_for = [&](bool on_phi) {
    std::vector<double> adj, fd;
    adj.reserve(probes.size());
    fd.reserve(probes.size());
    for (int e : probes) {
      DensityDesign d = design;
      auto& field = on_phi ? d.phi : d.rho;
      const double saved = field[e];
      field[e] = saved + step;
      const double jp =
          fd_functional(objective, evaluate(objective, grid, d, mats, filter, p));
      field[e] = saved - step;
      const double jm =
          fd_functional(objective, evaluate(objective, grid, d, mats, filter, p));
      fd.push_back((jp - jm) / (2.0 * step));
      adj.push_back(on_phi ? report.dphi[e] : report.drho[e]);
    }
    return max_rel_err(adj, fd);
  };

  GradCheckResult r;
  r.probes = static_cast<int>(probes.size());
  r.max_rel_err_phi = fd_for(true);
  if (design.voids_enabled) r.max_rel_err_rho = fd_for(false);
  return r;
}

}  // namespace respotopt
