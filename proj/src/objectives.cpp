#include "respotopt/objectives.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "respotopt/kernels/kernels.hpp"
#include "respotopt/util.hpp"

namespace respotopt {

namespace {

void reject_voids_actuation(const Objective& objective, const DensityDesign& design) {
  if (design.voids_enabled && objective.kind == Objective::Kind::ActuationWork &&
      !objective.allow_voids_actuation)
    throw std::invalid_argument(
        "ActuationWork with voids is unbounded and does not converge to "
        "meaningful designs; set allow_voids_actuation to override");
}

void validate_objective(const Objective& objective) {
  if (objective.kind == Objective::Kind::Workpiece && !(objective.kappa > 0.0))
    throw std::invalid_argument("Workpiece objective requires kappa > 0");
}

struct Pipeline {
  Eigen::VectorXd fphi, frho;
  std::shared_ptr<const StiffnessSystem> sys1, sys2;  // sys2 == sys1 unless C_r(S) hook
  EquilibriumState st1, st2;
  double delta_C = 0.0;  // C1 - C0 at full relative precision
};

Pipeline run_pipeline(const Grid& grid, const DensityDesign& design,
                      const MaterialPair& mats, const FilterOperator& filter,
                      double p) {
  design.validate();
  Pipeline pl;
  pl.fphi = filter.apply(design.phi);
  pl.frho = design.voids_enabled ? filter.apply(design.rho)
                                 : Eigen::VectorXd::Ones(grid.num_elems());
  pl.sys1 = std::make_shared<StiffnessSystem>(grid, pl.fphi, pl.frho, mats, p, mats.S1);
  pl.sys2 = mats.stimulus_dependent_modulus()
                ? std::make_shared<StiffnessSystem>(grid, pl.fphi, pl.frho, mats, p, mats.S2)
                : pl.sys1;
  pl.st1 = make_state(pl.sys1, grid, pl.fphi, pl.frho, mats, p, mats.S1);
  pl.st2 = make_state(pl.sys2, grid, pl.fphi, pl.frho, mats, p, mats.S2);
  solve_equilibrium(pl.st1);
  if (pl.sys2 == pl.sys1) {
    // Superposition: u2 = u1 + K^-1 (g2 - g1). Same solve count and the
    // compliance difference f.w does not cancel against C0.
    const Eigen::VectorXd w = pl.sys1->solve(pl.st2.g - pl.st1.g);
    pl.st2.u = pl.st1.u + w;
    pl.delta_C = pl.st2.f.dot(w);
    pl.st2.compliance = pl.st1.compliance + pl.delta_C;
    pl.st2.solved = true;
  } else {
    solve_equilibrium(pl.st2);
    pl.delta_C = pl.st2.compliance - pl.st1.compliance;
  }
  return pl;
}

void fill_values(const Objective& objective, const Pipeline& pl, ObjectiveReport& r) {
  const double C0 = pl.st1.compliance;
  r.C0 = C0;
  r.C1 = pl.st2.compliance;
  r.delta_C = pl.delta_C;
  const bool ratio_kind = objective.kind != Objective::Kind::ActuationWork;
  if (C0 == 0.0 && ratio_kind)
    throw DegenerateLoad("objective: unstimulated compliance is zero; ratio undefined");
  r.alpha = (C0 != 0.0) ? -r.delta_C / C0 + 0.0 : 0.0;  // +0.0 drops a negative zero
  switch (objective.kind) {
    case Objective::Kind::ActuationWork: r.value = -r.delta_C + 0.0; break;
    case Objective::Kind::BlockingLoad: r.value = r.C1 / C0; break;
    case Objective::Kind::Workpiece:
      r.value = (objective.kappa * r.C1 + 1.0) / (objective.kappa * C0 + 1.0);
      break;
  }
}

// dJ/dC0, dJ/dC1 of the minimized objective.
void objective_weights(const Objective& objective, double C0, double C1,
                       double& w0, double& w1) {
  switch (objective.kind) {
    case Objective::Kind::ActuationWork:
      w0 = -1.0;
      w1 = 1.0;
      break;
    case Objective::Kind::BlockingLoad:
      w0 = -C1 / (C0 * C0);
      w1 = 1.0 / C0;
      break;
    case Objective::Kind::Workpiece: {
      const double d = objective.kappa * C0 + 1.0;
      w0 = -objective.kappa * (objective.kappa * C1 + 1.0) / (d * d);
      w1 = objective.kappa / d;
      break;
    }
  }
}

// Gathers the 8 element DOF values of a global vector for every element.
Eigen::VectorXd pack_elements(const Grid& grid, const Eigen::VectorXd& u) {
  const int ne = grid.num_elems();
  Eigen::VectorXd packed(8 * ne);
  for (int e = 0; e < ne; ++e) {
    const auto& conn = grid.elem_conn[e];
    double* dst = packed.data() + 8 * e;
    for (int a = 0; a < 4; ++a) {
      dst[2 * a + 0] = u[2 * conn[a] + 0];
      dst[2 * a + 1] = u[2 * conn[a] + 1];
    }
  }
  return packed;
}

}  // namespace

double minimized_value(const Objective& objective, const ObjectiveReport& r) {
  return objective.kind == Objective::Kind::ActuationWork ? -r.value : r.value;
}

double fd_functional(const Objective& objective, const ObjectiveReport& r) {
  switch (objective.kind) {
    case Objective::Kind::ActuationWork: return r.delta_C;
    case Objective::Kind::BlockingLoad: return r.delta_C / r.C0;
    case Objective::Kind::Workpiece:
      return objective.kappa * r.delta_C / (objective.kappa * r.C0 + 1.0);
  }
  return 0.0;
}

ObjectiveReport evaluate(const Objective& objective, const Grid& grid,
                         const DensityDesign& design, const MaterialPair& mats,
                         const FilterOperator& filter, double p) {
  validate_objective(objective);
  reject_voids_actuation(objective, design);
  Pipeline pl = run_pipeline(grid, design, mats, filter, p);
  ObjectiveReport r;
  fill_values(objective, pl, r);
  return r;
}

ObjectiveReport sensitivities(const Objective& objective, const Grid& grid,
                              const DensityDesign& design, const MaterialPair& mats,
                              const FilterOperator& filter, double p,
                              AdjointPath path) {
  validate_objective(objective);
  reject_voids_actuation(objective, design);
  Pipeline pl = run_pipeline(grid, design, mats, filter, p);

  ObjectiveReport r;
  fill_values(objective, pl, r);
  double w[2];
  objective_weights(objective, r.C0, r.C1, w[0], w[1]);

  const int ne = grid.num_elems();
  const double ex = grid.elem_width(), ey = grid.elem_height();
  const ElemMatrix Ks = element_stiffness(mats.C_s, ex, ey);

  const Eigen::VectorXd f = pl.st1.f;
  const EquilibriumState* states[2] = {&pl.st1, &pl.st2};
  const StiffnessSystem* systems[2] = {pl.sys1.get(), pl.sys2.get()};
  const double stimuli[2] = {mats.S1, mats.S2};

  const Eigen::VectorXd phi_p = pow_field(pl.fphi, p);
  const Eigen::VectorXd phi_pm1 = pow_field(pl.fphi, p - 1.0);
  const Eigen::VectorXd rho_p = pow_field(pl.frho, p);
  const Eigen::VectorXd rho_pm1 = pow_field(pl.frho, p - 1.0);

  Eigen::VectorXd dphi_filt = Eigen::VectorXd::Zero(ne);
  Eigen::VectorXd drho_filt = Eigen::VectorXd::Zero(ne);
  Eigen::VectorXd lam_shared;  // shortcut adjoint for a shared system

  for (int i = 0; i < 2; ++i) {
    // lambda_i = -w_i * K_i^{-1} f; the shortcut reuses the load solve, the
    // explicit path runs the adjoint system directly.
    Eigen::VectorXd lam;
    if (path == AdjointPath::SelfAdjointShortcut) {
      if (i == 0 || systems[1] != systems[0]) {
        Eigen::VectorXd u_load =
            (stimuli[i] == 0.0 && !mats.stimulus_dependent_modulus())
                ? states[i]->u  // g(0) = 0, so the state solve already is K^-1 f
                : systems[i]->solve(f);
        lam_shared = std::move(u_load);
      }
      lam = -w[i] * lam_shared;
    } else {
      lam = systems[i]->solve(Eigen::VectorXd(-w[i] * f));
    }

    const ElemMatrix Kr = element_stiffness(mats.responsive_hooke(stimuli[i]), ex, ey);
    const ElemVector ge = element_eigenload(mats.responsive_hooke(stimuli[i]),
                                            mats.eps_star, stimuli[i], ex, ey);

    const Eigen::VectorXd lam_pack = pack_elements(grid, lam);
    const Eigen::VectorXd u_pack = pack_elements(grid, states[i]->u);
    Eigen::VectorXd ss(ne), sr(ne), gg(ne);
    kernels::bilinear_form8(ne, Ks.data(), lam_pack.data(), u_pack.data(), ss.data());
    kernels::bilinear_form8(ne, Kr.data(), lam_pack.data(), u_pack.data(), sr.data());
    kernels::dot8(ne, ge.data(), lam_pack.data(), gg.data());
    // Eigen stores column-major, but Ks/Kr are symmetric so data() is fine.

    for (int e = 0; e < ne; ++e) {
      dphi_filt[e] += p * phi_pm1[e] * rho_p[e] * (sr[e] - ss[e] - gg[e]);
      if (design.voids_enabled)
        drho_filt[e] += p * rho_pm1[e] *
                        ((1.0 - phi_p[e]) * ss[e] + phi_p[e] * sr[e] - phi_p[e] * gg[e]);
    }
  }

  r.dphi = filter.apply_transpose(dphi_filt);
  r.drho = design.voids_enabled ? filter.apply_transpose(drho_filt)
                                : Eigen::VectorXd::Zero(ne);
  return r;
}

double blocking_load_direct(const Grid& grid, const DensityDesign& design,
                            const MaterialPair& mats, const FilterOperator& filter,
                            double p, const Eigen::VectorXd* profile) {
  if (!grid.dirichlet_is_homogeneous())
    throw std::invalid_argument(
        "blocking_load_direct: requires homogeneous Dirichlet conditions");
  design.validate();
  const Eigen::VectorXd fphi = filter.apply(design.phi);
  const Eigen::VectorXd frho = design.voids_enabled
                                   ? filter.apply(design.rho)
                                   : Eigen::VectorXd::Ones(grid.num_elems());
  // The superposition u = alpha*u_load + v lives in the stimulated state.
  StiffnessSystem sys(grid, fphi, frho, mats, p, mats.S2);
  const Eigen::VectorXd fbar = profile ? *profile : traction_load(grid);
  if (fbar.size() != grid.num_dofs())
    throw std::invalid_argument("blocking_load_direct: profile length mismatch");
  const Eigen::VectorXd g = eigenstrain_load(grid, fphi, frho, mats, p, mats.S2);
  const Eigen::VectorXd u_load = sys.solve(fbar);
  const Eigen::VectorXd v = sys.solve(g);
  const double denom = fbar.dot(u_load);
  if (denom == 0.0)
    throw DegenerateLoad(
        "blocking_load_direct: load profile does no work on its own solution");
  return -fbar.dot(v) / denom;
}

double workpiece_spring_force(const Grid& grid, const DensityDesign& design,
                              const MaterialPair& mats, const FilterOperator& filter,
                              double p, double kappa, int node,
                              const Eigen::Vector2d& direction) {
  if (!(kappa > 0.0))
    throw std::invalid_argument("workpiece_spring_force: kappa must be positive");
  if (node < 0 || node >= grid.num_nodes())
    throw std::invalid_argument("workpiece_spring_force: node out of range");
  if (!grid.dirichlet_is_homogeneous())
    throw std::invalid_argument(
        "workpiece_spring_force: requires homogeneous Dirichlet conditions");
  const double norm = direction.norm();
  if (norm == 0.0)
    throw std::invalid_argument("workpiece_spring_force: zero direction");
  design.validate();

  Eigen::VectorXd fbar = Eigen::VectorXd::Zero(grid.num_dofs());
  fbar[2 * node + 0] = direction[0] / norm;
  fbar[2 * node + 1] = direction[1] / norm;

  const Eigen::VectorXd fphi = filter.apply(design.phi);
  const Eigen::VectorXd frho = design.voids_enabled
                                   ? filter.apply(design.rho)
                                   : Eigen::VectorXd::Ones(grid.num_elems());
  StiffnessSystem sys(grid, fphi, frho, mats, p, mats.S2);
  const Eigen::VectorXd g = eigenstrain_load(grid, fphi, frho, mats, p, mats.S2);
  const Eigen::VectorXd u_load = sys.solve(fbar);
  const Eigen::VectorXd v = sys.solve(g);
  const double c0 = fbar.dot(u_load);
  if (c0 == 0.0)
    throw DegenerateLoad(
        "workpiece_spring_force: load profile does no work on its own solution");
  return -kappa * fbar.dot(v) / (kappa * c0 + 1.0);
}

}  // namespace respotopt
