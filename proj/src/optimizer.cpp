#include "respotopt/optimizer.hpp"

#include <stdexcept>

namespace respotopt {

VolumeBudget VolumeBudget::from_fractions(const Grid& grid, double Vr_frac,
                                          double V0_frac) {
  VolumeBudget b;
  b.element_areas = Eigen::VectorXd::Constant(grid.num_elems(), grid.elem_area());
  b.Vr_bar = Vr_frac * grid.volume();
  b.V0_bar = V0_frac * grid.volume();
  b.validate();
  return b;
}

void VolumeBudget::validate() const {
  const double total = element_areas.sum();
  if (!(Vr_bar > 0.0 && Vr_bar <= V0_bar && V0_bar <= total * (1.0 + 1e-12)))
    throw std::invalid_argument(
        "VolumeBudget: need 0 < Vr_bar <= V0_bar <= total area");
}

double VolumeBudget::responsive_volume(const DensityDesign& d) const {
  return (element_areas.array() * d.rho.array() * d.phi.array()).sum();
}

double VolumeBudget::total_volume(const DensityDesign& d) const {
  return (element_areas.array() * d.rho.array()).sum();
}

DensityDesign step_two_field(const DensityDesign& design, const ObjectiveReport& report,
                             const VolumeBudget& budget, TwoFieldState& states) {
  const int ne = static_cast<int>(design.phi.size());
  if (report.dphi.size() != ne)
    throw std::invalid_argument("step_two_field: report lacks sensitivities");
  DensityDesign next = design;

  if (design.voids_enabled) {
    // rho first: linear total-material constraint.
    MmaConstraint total;
    total.value = budget.total_volume(design) - budget.V0_bar;
    total.gradient = budget.element_areas;
    next.rho = mma_update(design.rho, Eigen::VectorXd::Constant(ne, design.rho_min),
                          Eigen::VectorXd::Ones(ne), report.drho, {total},
                          states.rho_state);
  }

  // phi second: responsive constraint, linear given the fresh rho.
  MmaConstraint resp;
  resp.gradient = (budget.element_areas.array() * next.rho.array()).matrix();
  resp.value = resp.gradient.dot(design.phi) - budget.Vr_bar;
  next.phi = mma_update(design.phi, Eigen::VectorXd::Zero(ne),
                        Eigen::VectorXd::Ones(ne), report.dphi, {resp},
                        states.phi_state);
  return next;
}

RunResult run(const RunConfig& config, const IterationCallback& on_iteration) {
  const Grid grid = make_grid(config);
  const MaterialPair mats = make_materials(config);
  const FilterOperator filter = make_filter(config, grid);
  const VolumeBudget budget =
      VolumeBudget::from_fractions(grid, config.Vr_frac, config.V0_frac);

  RunResult result;
  result.design = initial_design(config, grid);
  TwoFieldState states;
  states.phi_state.options = config.mma;
  states.rho_state.options = config.mma;

  for (int iter = 1; iter <= config.max_iter; ++iter) {
    const ObjectiveReport report = sensitivities(config.objective, grid, result.design,
                                                 mats, filter, config.p);
    const DensityDesign next = step_two_field(result.design, report, budget, states);

    double max_change = (next.phi - result.design.phi).lpNorm<Eigen::Infinity>();
    if (result.design.voids_enabled)
      max_change = std::max(
          max_change, (next.rho - result.design.rho).lpNorm<Eigen::Infinity>());

    HistoryRow row;
    row.iter = iter;
    row.objective = report.value;
    row.C0 = report.C0;
    row.C1 = report.C1;
    row.vol_r = budget.responsive_volume(result.design);
    row.vol_0 = budget.total_volume(result.design);
    row.max_change = max_change;
    result.history.push_back(row);
    if (on_iteration) on_iteration(row);

    result.design = next;
    result.iterations = iter;
    if (max_change < config.tol_change) {
      result.converged = true;
      break;
    }
  }

  result.final_report =
      evaluate(config.objective, grid, result.design, mats, filter, config.p);
  return result;
}

}  // namespace respotopt
