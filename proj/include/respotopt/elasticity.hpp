#pragma once
// Plane-strain linear elasticity with a two-material SIMP interpolation, an
// optional void density field, eigenstrain loads, and a shared-factorization
// sparse solve.
//
// Per-element stiffness:  (Frho_e)^p [ (1 - Fphi_e^p) Ke(C_s) + Fphi_e^p Ke(C_r) ]
// Per-element eigenload:  (Frho_e)^p Fphi_e^p * ge(C_r, S*eps_star)
// where Fphi/Frho are the filtered density fields.

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <memory>
#include <optional>
#include <vector>

#include "respotopt/grid.hpp"
#include "respotopt/util.hpp"

namespace respotopt {

using SparseMat = Eigen::SparseMatrix<double>;
using ElemMatrix = Eigen::Matrix<double, 8, 8>;
using ElemVector = Eigen::Matrix<double, 8, 1>;

struct IsotropicHooke {
  double E = 0.0;
  double nu = 0.0;
  Eigen::Matrix3d voigt = Eigen::Matrix3d::Zero();  // acts on (e11, e22, 2*e12)
};

IsotropicHooke hooke_plane_strain(double E, double nu);

struct MaterialPair {
  IsotropicHooke C_s;  // structural
  IsotropicHooke C_r;  // responsive
  Eigen::Matrix2d eps_star = Eigen::Matrix2d::Zero();  // spontaneous strain at S=1
  double S1 = 0.0;
  double S2 = 1.0;
  // Hook for a stimulus-dependent responsive modulus: when set, it is used at
  // S = S2 (factorization sharing between the stimuli is then disabled).
  std::optional<IsotropicHooke> C_r_at_S2;

  const IsotropicHooke& responsive_hooke(double S) const {
    return (C_r_at_S2 && S == S2) ? *C_r_at_S2 : C_r;
  }
  bool stimulus_dependent_modulus() const { return C_r_at_S2.has_value(); }
};

struct DensityDesign {
  Eigen::VectorXd phi;  // responsive fraction in [0,1]
  Eigen::VectorXd rho;  // solid fraction in [rho_min,1]; identically 1 without voids
  double rho_min = 1e-3;
  bool voids_enabled = false;

  static DensityDesign uniform(int n_elems, double phi0, double rho0,
                               double rho_min = 1e-3, bool voids = false);
  void validate() const;  // throws std::invalid_argument on a bounds breach
};

ElemMatrix element_stiffness(const IsotropicHooke& hooke, double ex, double ey);

// Integral of B^T (C_r * voigt(S*eps_star)) over one ex-by-ey element.
ElemVector element_eigenload(const IsotropicHooke& hooke_r,
                             const Eigen::Matrix2d& eps_star, double S,
                             double ex, double ey);

enum class SolverKind { Auto, Cholesky, ConjugateGradient };

// Stimulus-independent assembled stiffness: reduced SPD matrix on the free
// DOFs (Dirichlet rows/columns removed symmetrically) plus the lifting terms
// for inhomogeneous prescribed values. Factorizes lazily; after factorize()
// concurrent solve() calls are safe.
class StiffnessSystem {
 public:
  StiffnessSystem(const Grid& grid, const Eigen::VectorXd& filtered_phi,
                  const Eigen::VectorXd& filtered_rho, const MaterialPair& mats,
                  double p, double S_for_modulus,
                  SolverKind kind = SolverKind::Auto);

  const SparseMat& matrix() const { return K_; }
  int num_free() const { return static_cast<int>(free_dofs_.size()); }

  void factorize() const;  // throws SolverFailure if K is not SPD
  // rhs is full-size; the result is full-size with prescribed values inserted.
  Eigen::VectorXd solve(const Eigen::VectorXd& rhs_full) const;
  double last_relative_residual() const { return last_residual_; }

 private:
  SparseMat K_;
  std::vector<int> free_dofs_;
  std::vector<int> full_to_free_;  // -1 for constrained DOFs
  Eigen::VectorXd lift_;           // sum_c K_fc * u_c, reduced size
  Eigen::VectorXd prescribed_;     // full-size, zero on free DOFs
  int n_full_ = 0;
  SolverKind kind_ = SolverKind::Auto;
  mutable std::unique_ptr<Eigen::SimplicialLLT<SparseMat>> llt_;
  mutable double last_residual_ = 0.0;
};

struct EquilibriumState {
  std::shared_ptr<const StiffnessSystem> system;
  Eigen::VectorXd u;  // full-size displacement (valid after solve)
  Eigen::VectorXd g;  // eigenstrain load, full-size
  Eigen::VectorXd f;  // traction load, full-size
  double compliance = 0.0;
  double stimulus = 0.0;
  bool solved = false;
};

// Full-size eigenstrain load vector for stimulus S.
Eigen::VectorXd eigenstrain_load(const Grid& grid,
                                 const Eigen::VectorXd& filtered_phi,
                                 const Eigen::VectorXd& filtered_rho,
                                 const MaterialPair& mats, double p, double S);

// Full-size point-load vector from the grid's traction list.
Eigen::VectorXd traction_load(const Grid& grid);

// Builds a pre-solve state sharing an already-assembled system.
EquilibriumState make_state(std::shared_ptr<const StiffnessSystem> system,
                            const Grid& grid, const Eigen::VectorXd& filtered_phi,
                            const Eigen::VectorXd& filtered_rho,
                            const MaterialPair& mats, double p, double S);

// One-shot assembly (own system). Validates the filtered fields and p > 1.
EquilibriumState assemble(const Grid& grid, const DensityDesign& design,
                          const Eigen::VectorXd& filtered_phi,
                          const Eigen::VectorXd& filtered_rho,
                          const MaterialPair& mats, double p, double S);

void solve_equilibrium(EquilibriumState& state);
double compliance(const EquilibriumState& state);

// x^p elementwise; integral exponents use repeated multiplication so the
// common p=3 case stays cheap and exactly reproducible.
Eigen::VectorXd pow_field(const Eigen::VectorXd& x, double p);

}  // namespace respotopt
