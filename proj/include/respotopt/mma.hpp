#pragma once
// Method of Moving Asymptotes update with box bounds and linear inequality
// constraints. The separable rational subproblem is solved through its dual
// with bisection on the multipliers (exact for the single volume constraint
// used here; cyclic ascent for more).

#include <Eigen/Dense>
#include <vector>

namespace respotopt {

struct MmaOptions {
  double move_limit = 0.2;      // fraction of the box width
  double asymptote_init = 0.5;
  double asymptote_incr = 1.2;
  double asymptote_decr = 0.7;
};

struct MmaState {
  MmaOptions options;
  Eigen::VectorXd lower_asymptotes, upper_asymptotes;
  Eigen::VectorXd x_prev, x_prev2;
  int iteration = 0;
  bool last_infeasible = false;  // subproblem had no feasible point; the
                                 // feasibility-restoration point was returned
};

struct MmaConstraint {
  double value = 0.0;        // g(x) in g(x) <= 0 form
  Eigen::VectorXd gradient;  // dg/dx at x
};

// One MMA update. Returns the new iterate (always inside [xmin, xmax] and
// within move_limit*(xmax-xmin) of x) and advances the state.
Eigen::VectorXd mma_update(const Eigen::VectorXd& x, const Eigen::VectorXd& xmin,
                           const Eigen::VectorXd& xmax, const Eigen::VectorXd& dobj,
                           const std::vector<MmaConstraint>& constraints,
                           MmaState& state);

}  // namespace respotopt
