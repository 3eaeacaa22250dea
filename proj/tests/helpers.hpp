#pragma once
// Shared fixtures and independent oracles for the test suites.

#include <Eigen/Dense>
#include <random>

#include "respotopt/config.hpp"
#include "respotopt/elasticity.hpp"
#include "respotopt/filter.hpp"
#include "respotopt/grid.hpp"

namespace testutil {

using namespace respotopt;

inline Grid cantilever(int nx, int ny, double L, double H, double load = 1.0) {
  return apply_cantilever_bcs(build_grid(nx, ny, L, H), load);
}

inline MaterialPair materials(double Es, double Er, double nu = 0.3,
                              double e11 = -0.1, double e22 = 0.1, double e12 = 0.0) {
  MaterialPair m;
  m.C_s = hooke_plane_strain(Es, nu);
  m.C_r = hooke_plane_strain(Er, nu);
  m.eps_star << e11, e12, e12, e22;
  return m;
}

inline Eigen::VectorXd random_vector(int n, double lo, double hi, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(lo, hi);
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v[i] = u(rng);
  return v;
}

// Independent dense assembly + full-pivot solve. Scatters per-element
// matrices fa*Ks + fb*Kr into a dense matrix, slices out the constrained
// DOFs, and solves with dense LU. Cross-checks the sparse path end to end.
inline Eigen::VectorXd dense_solve_oracle(const Grid& grid, const Eigen::VectorXd& fa,
                                          const Eigen::VectorXd& fb,
                                          const ElemMatrix& Ks, const ElemMatrix& Kr,
                                          const Eigen::VectorXd& rhs_full) {
  const int n = grid.num_dofs();
  Eigen::MatrixXd K = Eigen::MatrixXd::Zero(n, n);
  for (int e = 0; e < grid.num_elems(); ++e) {
    const auto& conn = grid.elem_conn[e];
    int dofs[8];
    for (int a = 0; a < 4; ++a) {
      dofs[2 * a + 0] = 2 * conn[a] + 0;
      dofs[2 * a + 1] = 2 * conn[a] + 1;
    }
    for (int i = 0; i < 8; ++i)
      for (int j = 0; j < 8; ++j)
        K(dofs[i], dofs[j]) += fa[e] * Ks(i, j) + fb[e] * Kr(i, j);
  }
  std::vector<int> free;
  std::vector<bool> constrained(n, false);
  for (int d : grid.dirichlet_dofs) constrained[d] = true;
  for (int d = 0; d < n; ++d)
    if (!constrained[d]) free.push_back(d);
  const int nf = static_cast<int>(free.size());
  Eigen::MatrixXd Kff(nf, nf);
  Eigen::VectorXd rf(nf);
  for (int a = 0; a < nf; ++a) {
    rf[a] = rhs_full[free[a]];
    for (int b = 0; b < nf; ++b) Kff(a, b) = K(free[a], free[b]);
  }
  const Eigen::VectorXd uf = Kff.fullPivLu().solve(rf);
  Eigen::VectorXd u = Eigen::VectorXd::Zero(n);
  for (int a = 0; a < nf; ++a) u[free[a]] = uf[a];
  return u;
}

}  // namespace testutil
