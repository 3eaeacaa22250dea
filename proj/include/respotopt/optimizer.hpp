#pragma once
// Outer optimization loop: filter -> solve both stimuli -> adjoint
// sensitivities -> MMA update(s) -> convergence check. The voids formulation
// updates rho first under the total-material constraint, then phi under the
// responsive-material constraint linearized with the fresh rho.

#include <Eigen/Dense>
#include <functional>
#include <vector>

#include "respotopt/config.hpp"
#include "respotopt/elasticity.hpp"
#include "respotopt/mma.hpp"
#include "respotopt/objectives.hpp"

namespace respotopt {

struct VolumeBudget {
  double Vr_bar = 0.0;  // max responsive volume, sum(rho*phi*area) <= Vr_bar
  double V0_bar = 0.0;  // max total material volume, sum(rho*area) <= V0_bar
  Eigen::VectorXd element_areas;

  static VolumeBudget from_fractions(const Grid& grid, double Vr_frac, double V0_frac);
  void validate() const;
  double responsive_volume(const DensityDesign& d) const;
  double total_volume(const DensityDesign& d) const;
};

struct HistoryRow {
  int iter = 0;
  double objective = 0.0;  // reported objective value at this iterate
  double C0 = 0.0, C1 = 0.0;
  double vol_r = 0.0, vol_0 = 0.0;
  double max_change = 0.0;  // max |density change| applied after this iterate
};
using RunHistory = std::vector<HistoryRow>;

struct TwoFieldState {
  MmaState phi_state;
  MmaState rho_state;
};

// One design update. Without voids this is a single MMA step on phi under the
// responsive volume constraint; with voids, the sequential rho-then-phi scheme.
DensityDesign step_two_field(const DensityDesign& design, const ObjectiveReport& report,
                             const VolumeBudget& budget, TwoFieldState& states);

struct RunResult {
  DensityDesign design;
  RunHistory history;
  ObjectiveReport final_report;
  bool converged = false;
  int iterations = 0;
};

using IterationCallback = std::function<void(const HistoryRow&)>;

RunResult run(const RunConfig& config, const IterationCallback& on_iteration = {});

}  // namespace respotopt
