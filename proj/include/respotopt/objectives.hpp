#pragma once
// Compliance-based objectives for responsive structures and their exact
// design sensitivities via the adjoint method.
//
// With C0, C1 the compliances at the two stimuli, the minimized objectives are
//   ActuationWork : C1 - C0          (reported value is the work C0 - C1)
//   BlockingLoad  : C1 / C0
//   Workpiece     : (kappa*C1 + 1) / (kappa*C0 + 1)

#include <Eigen/Dense>

#include "respotopt/elasticity.hpp"
#include "respotopt/filter.hpp"
#include "respotopt/grid.hpp"

namespace respotopt {

struct Objective {
  enum class Kind { ActuationWork, BlockingLoad, Workpiece };
  Kind kind = Kind::ActuationWork;
  double kappa = 1.0;  // Workpiece spring stiffness, > 0
  // The actuation-work objective is unbounded in the voids formulation and is
  // rejected by default; set to experiment anyway.
  bool allow_voids_actuation = false;
};

struct ObjectiveReport {
  double value = 0.0;  // defining formula value (ActuationWork: C0 - C1)
  double C0 = 0.0;     // compliance at S1
  double C1 = 0.0;     // compliance at S2
  double alpha = 0.0;  // blocking amplitude 1 - C1/C0
  // C1 - C0 from the superposition solve w = K^-1 (g2 - g1), so the compliance
  // difference keeps full relative precision even when |C1 - C0| << C0.
  double delta_C = 0.0;
  // Gradients of the *minimized* objective w.r.t. the unfiltered design
  // fields (empty until sensitivities() fills them; drho is zero without voids).
  Eigen::VectorXd dphi;
  Eigen::VectorXd drho;
};

// The quantity the optimizer descends (value for ratio objectives, -value for
// ActuationWork).
double minimized_value(const Objective& objective, const ObjectiveReport& r);

// The minimized objective shifted by its design-independent constant and
// evaluated through delta_C, so central differences of it are not drowned by
// the constant part (BlockingLoad: delta_C/C0; Workpiece: k*delta_C/(k*C0+1)).
double fd_functional(const Objective& objective, const ObjectiveReport& r);

ObjectiveReport evaluate(const Objective& objective, const Grid& grid,
                         const DensityDesign& design, const MaterialPair& mats,
                         const FilterOperator& filter, double p);

// SelfAdjointShortcut scales the load solve (lambda_i = -w_i * u_load);
// ExplicitSolve runs the adjoint systems. Both give identical gradients and
// exist to cross-check each other.
enum class AdjointPath { SelfAdjointShortcut, ExplicitSolve };

ObjectiveReport sensitivities(const Objective& objective, const Grid& grid,
                              const DensityDesign& design, const MaterialPair& mats,
                              const FilterOperator& filter, double p,
                              AdjointPath path = AdjointPath::SelfAdjointShortcut);

// Blocking amplitude by superposition: with K u_load = f and K v = g(S2),
// alpha = -f.v / f.u_load. Equals 1 - C1/C0 whenever the responsive modulus is
// stimulus-independent. profile == nullptr uses the grid's traction vector.
double blocking_load_direct(const Grid& grid, const DensityDesign& design,
                            const MaterialPair& mats, const FilterOperator& filter,
                            double p, const Eigen::VectorXd* profile = nullptr);

// Force carried by a point spring of stiffness kappa attached at `node` along
// `direction` upon actuation: f0 = -kappa (fbar.v) / (kappa (fbar.u_load) + 1)
// with fbar the unit point load at the spring. Ranking designs by descending
// f0 equals ranking by ascending Workpiece objective under the same load.
double workpiece_spring_force(const Grid& grid, const DensityDesign& design,
                              const MaterialPair& mats, const FilterOperator& filter,
                              double p, double kappa, int node,
                              const Eigen::Vector2d& direction);

}  // namespace respotopt
