#include "respotopt/elasticity.hpp"

#include <Eigen/IterativeLinearSolvers>
#include <cmath>
#include <stdexcept>
#include <string>

#include "respotopt/util.hpp"

namespace respotopt {

// ============================================================================
// Constitutive law and element integrals
// ============================================================================

IsotropicHooke hooke_plane_strain(double E, double nu) {
  if (!(E > 0.0))
    throw std::invalid_argument("hooke_plane_strain: E must be positive");
  if (!(nu >= 0.0 && nu < 0.5))
    throw std::invalid_argument(
        "hooke_plane_strain: nu must satisfy 0 <= nu < 0.5, got " + std::to_string(nu));
  IsotropicHooke h;
  h.E = E;
  h.nu = nu;
  const double c = E / ((1.0 + nu) * (1.0 - 2.0 * nu));
  h.voigt << c * (1.0 - nu), c * nu, 0.0,
             c * nu, c * (1.0 - nu), 0.0,
             0.0, 0.0, c * (1.0 - 2.0 * nu) / 2.0;
  return h;
}

namespace {

// B matrix (3x8) of the Q1 quad at natural coordinates (xi, eta) for an
// ex-by-ey rectangle; node order ccw from the lower-left corner.
Eigen::Matrix<double, 3, 8> q1_strain_matrix(double xi, double eta, double ex, double ey) {
  static const double xs[4] = {-1.0, 1.0, 1.0, -1.0};
  static const double es[4] = {-1.0, -1.0, 1.0, 1.0};
  Eigen::Matrix<double, 3, 8> B = Eigen::Matrix<double, 3, 8>::Zero();
  for (int i = 0; i < 4; ++i) {
    const double dNdx = 0.25 * xs[i] * (1.0 + eta * es[i]) * (2.0 / ex);
    const double dNdy = 0.25 * es[i] * (1.0 + xi * xs[i]) * (2.0 / ey);
    B(0, 2 * i + 0) = dNdx;
    B(1, 2 * i + 1) = dNdy;
    B(2, 2 * i + 0) = dNdy;
    B(2, 2 * i + 1) = dNdx;
  }
  return B;
}

constexpr double kGauss = 0.57735026918962576451;  // 1/sqrt(3)

}  // namespace

ElemMatrix element_stiffness(const IsotropicHooke& hooke, double ex, double ey) {
  if (!(ex > 0.0) || !(ey > 0.0))
    throw std::invalid_argument("element_stiffness: element sides must be positive");
  ElemMatrix Ke = ElemMatrix::Zero();
  const double detJ = ex * ey / 4.0;
  for (double xi : {-kGauss, kGauss}) {
    for (double eta : {-kGauss, kGauss}) {
      const auto B = q1_strain_matrix(xi, eta, ex, ey);
      Ke.noalias() += detJ * (B.transpose() * hooke.voigt * B);
    }
  }
  // Symmetrize exactly so the assembled K equals its transpose bitwise.
  Ke = (0.5 * (Ke + Ke.transpose())).eval();
  return Ke;
}

ElemVector element_eigenload(const IsotropicHooke& hooke_r,
                             const Eigen::Matrix2d& eps_star, double S,
                             double ex, double ey) {
  Eigen::Vector3d strain(S * eps_star(0, 0), S * eps_star(1, 1),
                         S * (eps_star(0, 1) + eps_star(1, 0)));
  const Eigen::Vector3d stress = hooke_r.voigt * strain;
  ElemVector ge = ElemVector::Zero();
  const double detJ = ex * ey / 4.0;
  for (double xi : {-kGauss, kGauss}) {
    for (double eta : {-kGauss, kGauss}) {
      const auto B = q1_strain_matrix(xi, eta, ex, ey);
      ge.noalias() += detJ * (B.transpose() * stress);
    }
  }
  return ge;
}

// ============================================================================
// Density design
// ============================================================================

DensityDesign DensityDesign::uniform(int n_elems, double phi0, double rho0,
                                     double rho_min, bool voids) {
  DensityDesign d;
  d.phi = Eigen::VectorXd::Constant(n_elems, phi0);
  d.rho = voids ? Eigen::VectorXd::Constant(n_elems, rho0)
                : Eigen::VectorXd::Ones(n_elems);
  d.rho_min = rho_min;
  d.voids_enabled = voids;
  d.validate();
  return d;
}

void DensityDesign::validate() const {
  if (!(rho_min > 0.0))
    throw std::invalid_argument("DensityDesign: rho_min must be positive");
  if (phi.size() != rho.size())
    throw std::invalid_argument("DensityDesign: phi/rho length mismatch");
  if ((phi.array() < 0.0).any() || (phi.array() > 1.0).any())
    throw std::invalid_argument("DensityDesign: phi out of [0,1]");
  if (voids_enabled) {
    if ((rho.array() < rho_min).any() || (rho.array() > 1.0).any())
      throw std::invalid_argument("DensityDesign: rho out of [rho_min,1]");
  } else if ((rho.array() != 1.0).any()) {
    throw std::invalid_argument("DensityDesign: rho must be 1 when voids are disabled");
  }
}

Eigen::VectorXd pow_field(const Eigen::VectorXd& x, double p) {
  const int ip = static_cast<int>(p);
  Eigen::VectorXd y(x.size());
  if (p == static_cast<double>(ip) && ip >= 1 && ip <= 8) {
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      double v = x[i], acc = v;
      for (int k = 1; k < ip; ++k) acc *= v;
      y[i] = acc;
    }
  } else {
    for (Eigen::Index i = 0; i < x.size(); ++i) y[i] = std::pow(x[i], p);
  }
  return y;
}

// ============================================================================
// Assembly
// ============================================================================

namespace {

void check_filtered_fields(const Grid& grid, const Eigen::VectorXd& fphi,
                           const Eigen::VectorXd& frho, double rho_min, double p) {
  if (fphi.size() != grid.num_elems() || frho.size() != grid.num_elems())
    throw std::invalid_argument("assemble: filtered field length mismatch");
  if (!(p > 1.0))
    throw std::invalid_argument("assemble: SIMP penalty p must exceed 1");
  if ((fphi.array() < 0.0).any() || (fphi.array() > 1.0).any())
    throw std::invalid_argument("assemble: filtered phi out of [0,1]");
  if ((frho.array() < rho_min).any() || (frho.array() > 1.0).any())
    throw std::invalid_argument("assemble: filtered rho out of [rho_min,1]");
}

}  // namespace

StiffnessSystem::StiffnessSystem(const Grid& grid, const Eigen::VectorXd& filtered_phi,
                                 const Eigen::VectorXd& filtered_rho,
                                 const MaterialPair& mats, double p,
                                 double S_for_modulus, SolverKind kind)
    : kind_(kind) {
  n_full_ = grid.num_dofs();
  if (grid.dirichlet_dofs.empty())
    throw SolverFailure("assemble: no Dirichlet constraints; stiffness would be singular");

  full_to_free_.assign(n_full_, -1);
  prescribed_ = Eigen::VectorXd::Zero(n_full_);
  {
    std::size_t c = 0;
    for (int dof = 0; dof < n_full_; ++dof) {
      if (c < grid.dirichlet_dofs.size() && grid.dirichlet_dofs[c] == dof) {
        prescribed_[dof] = grid.dirichlet_values[c];
        ++c;
      } else {
        full_to_free_[dof] = static_cast<int>(free_dofs_.size());
        free_dofs_.push_back(dof);
      }
    }
  }
  const int n_free = static_cast<int>(free_dofs_.size());
  const int ne = grid.num_elems();

  const ElemMatrix Ks =
      element_stiffness(mats.C_s, grid.elem_width(), grid.elem_height());
  const ElemMatrix Kr = element_stiffness(mats.responsive_hooke(S_for_modulus),
                                          grid.elem_width(), grid.elem_height());

  // Per-element interpolation factors a_e (structural) and b_e (responsive).
  const Eigen::VectorXd phi_p = pow_field(filtered_phi, p);
  const Eigen::VectorXd rho_p = pow_field(filtered_rho, p);
  Eigen::VectorXd fa(ne), fb(ne);
  for (int e = 0; e < ne; ++e) {
    fa[e] = rho_p[e] * (1.0 - phi_p[e]);
    fb[e] = rho_p[e] * phi_p[e];
  }

  // Fixed triplet structure; values filled elementwise in parallel. The
  // (row, col, value) order is independent of the thread count, and
  // setFromTriplets accumulates in that fixed order, so assembly is
  // deterministic.
  const bool homogeneous = grid.dirichlet_is_homogeneous();
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(static_cast<std::size_t>(ne) * 64);
  struct Slot { int row, col, elem, entry; };
  std::vector<Slot> slots;
  slots.reserve(static_cast<std::size_t>(ne) * 64);
  Eigen::VectorXd lift = Eigen::VectorXd::Zero(n_free);

  for (int e = 0; e < ne; ++e) {
    const auto& conn = grid.elem_conn[e];
    int dofs[8];
    for (int a = 0; a < 4; ++a) {
      dofs[2 * a + 0] = 2 * conn[a] + 0;
      dofs[2 * a + 1] = 2 * conn[a] + 1;
    }
    for (int i = 0; i < 8; ++i) {
      const int I = full_to_free_[dofs[i]];
      if (I < 0) continue;
      for (int j = 0; j < 8; ++j) {
        const int J = full_to_free_[dofs[j]];
        if (J >= 0) {
          slots.push_back({I, J, e, 8 * i + j});
        } else if (!homogeneous) {
          lift[I] += (fa[e] * Ks(i, j) + fb[e] * Kr(i, j)) * prescribed_[dofs[j]];
        }
      }
    }
  }

  std::vector<double> values(slots.size());
  parallel_for(static_cast<int>(slots.size()), [&](int begin, int end) {
    for (int s = begin; s < end; ++s) {
      const Slot& sl = slots[s];
      const int i = sl.entry / 8, j = sl.entry % 8;
      values[s] = fa[sl.elem] * Ks(i, j) + fb[sl.elem] * Kr(i, j);
    }
  });
  for (std::size_t s = 0; s < slots.size(); ++s)
    trips.emplace_back(slots[s].row, slots[s].col, values[s]);

  K_.resize(n_free, n_free);
  K_.setFromTriplets(trips.begin(), trips.end());
  K_.makeCompressed();
  lift_ = std::move(lift);
}

void StiffnessSystem::factorize() const {
  if (llt_) return;
  SolverKind kind = kind_;
  if (kind == SolverKind::Auto)
    kind = (K_.rows() > 400000) ? SolverKind::ConjugateGradient : SolverKind::Cholesky;
  if (kind == SolverKind::Cholesky) {
    auto llt = std::make_unique<Eigen::SimplicialLLT<SparseMat>>();
    llt->compute(K_);
    if (llt->info() != Eigen::Success)
      throw SolverFailure(
          "solve_equilibrium: sparse Cholesky failed; stiffness is not SPD "
          "(check Dirichlet constraints)");
    llt_ = std::move(llt);
  }
}

Eigen::VectorXd StiffnessSystem::solve(const Eigen::VectorXd& rhs_full) const {
  if (rhs_full.size() != n_full_)
    throw std::invalid_argument("StiffnessSystem::solve: rhs length mismatch");
  const int n_free = static_cast<int>(free_dofs_.size());
  Eigen::VectorXd r(n_free);
  for (int k = 0; k < n_free; ++k) r[k] = rhs_full[free_dofs_[k]];
  r -= lift_;

  Eigen::VectorXd y;
  const double rnorm = r.norm();
  if (rnorm == 0.0) {
    y = Eigen::VectorXd::Zero(n_free);
    last_residual_ = 0.0;
  } else {
    SolverKind kind = kind_;
    if (kind == SolverKind::Auto)
      kind = (K_.rows() > 400000) ? SolverKind::ConjugateGradient : SolverKind::Cholesky;
    if (kind == SolverKind::Cholesky) {
      factorize();
      y = llt_->solve(r);
    } else {
      Eigen::ConjugateGradient<SparseMat, Eigen::Lower | Eigen::Upper,
                               Eigen::DiagonalPreconditioner<double>>
          cg;
      cg.setTolerance(1e-12);
      cg.setMaxIterations(20 * K_.rows());
      cg.compute(K_);
      y = cg.solve(r);
      if (cg.info() != Eigen::Success && cg.info() != Eigen::NoConvergence)
        throw SolverFailure("solve_equilibrium: conjugate gradient failed");
    }
    last_residual_ = (K_ * y - r).norm() / rnorm;
    if (!(last_residual_ <= 1e-10))
      throw SolverFailure("solve_equilibrium: relative residual " +
                          std::to_string(last_residual_) + " exceeds 1e-10");
  }

  Eigen::VectorXd u = prescribed_;
  for (int k = 0; k < n_free; ++k) u[free_dofs_[k]] = y[k];
  return u;
}

Eigen::VectorXd eigenstrain_load(const Grid& grid, const Eigen::VectorXd& filtered_phi,
                                 const Eigen::VectorXd& filtered_rho,
                                 const MaterialPair& mats, double p, double S) {
  const int ne = grid.num_elems();
  Eigen::VectorXd g = Eigen::VectorXd::Zero(grid.num_dofs());
  const ElemVector ge = element_eigenload(mats.responsive_hooke(S), mats.eps_star,
                                          S, grid.elem_width(), grid.elem_height());
  const Eigen::VectorXd phi_p = pow_field(filtered_phi, p);
  const Eigen::VectorXd rho_p = pow_field(filtered_rho, p);
  for (int e = 0; e < ne; ++e) {
    const double c = rho_p[e] * phi_p[e];
    if (c == 0.0) continue;
    const auto& conn = grid.elem_conn[e];
    for (int a = 0; a < 4; ++a) {
      g[2 * conn[a] + 0] += c * ge[2 * a + 0];
      g[2 * conn[a] + 1] += c * ge[2 * a + 1];
    }
  }
  return g;
}

Eigen::VectorXd traction_load(const Grid& grid) {
  Eigen::VectorXd f = Eigen::VectorXd::Zero(grid.num_dofs());
  for (const PointLoad& pl : grid.traction) {
    f[2 * pl.node + 0] += pl.force[0];
    f[2 * pl.node + 1] += pl.force[1];
  }
  return f;
}

EquilibriumState make_state(std::shared_ptr<const StiffnessSystem> system,
                            const Grid& grid, const Eigen::VectorXd& filtered_phi,
                            const Eigen::VectorXd& filtered_rho,
                            const MaterialPair& mats, double p, double S) {
  EquilibriumState st;
  st.system = std::move(system);
  st.g = eigenstrain_load(grid, filtered_phi, filtered_rho, mats, p, S);
  st.f = traction_load(grid);
  st.stimulus = S;
  return st;
}

EquilibriumState assemble(const Grid& grid, const DensityDesign& design,
                          const Eigen::VectorXd& filtered_phi,
                          const Eigen::VectorXd& filtered_rho,
                          const MaterialPair& mats, double p, double S) {
  design.validate();
  check_filtered_fields(grid, filtered_phi, filtered_rho,
                        design.voids_enabled ? design.rho_min : 1.0, p);
  auto sys = std::make_shared<StiffnessSystem>(grid, filtered_phi, filtered_rho,
                                               mats, p, S);
  return make_state(std::move(sys), grid, filtered_phi, filtered_rho, mats, p, S);
}

void solve_equilibrium(EquilibriumState& state) {
  if (!state.system) throw std::logic_error("solve_equilibrium: no assembled system");
  state.u = state.system->solve(state.g + state.f);
  state.compliance = state.f.dot(state.u);
  state.solved = true;
}

double compliance(const EquilibriumState& state) {
  if (!state.solved)
    throw std::logic_error("compliance: state has not been solved");
  return state.compliance;
}

}  // namespace respotopt
