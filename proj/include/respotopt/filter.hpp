#pragma once
// Renormalized discrete density filter: a row-stochastic sparse operator W
// built from a linear hat kernel on element centers, plus its transpose for
// the sensitivity chain rule.

#include <Eigen/Dense>
#include <vector>

#include "respotopt/grid.hpp"

namespace respotopt {

struct FilterOperator {
  double radius = 0.0;
  int n = 0;  // element count (W is n x n)

  // CSR storage of W (rows sum to 1) and of W^T.
  std::vector<int> row_ptr, cols;
  std::vector<double> vals;
  std::vector<int> t_row_ptr, t_cols;
  std::vector<double> t_vals;

  // W * field, clamped to the input's range so elementwise bounds and
  // constants are preserved exactly despite roundoff in the row sums.
  Eigen::VectorXd apply(const Eigen::VectorXd& field) const;
  // W^T * field (adjoint for the chain rule; no clamping).
  Eigen::VectorXd apply_transpose(const Eigen::VectorXd& field) const;
};

// Hat kernel max(0, 1 - |x - c_k| / R_f) evaluated at element centers
// (midpoint rule), row-renormalized. R_f below the element spacing
// degenerates to the identity.
FilterOperator build_filter(const Grid& grid, double R_f);

}  // namespace respotopt
