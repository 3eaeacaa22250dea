#include <Eigen/Eigenvalues>
#include <cmath>
#include <stdexcept>

#include "doctest.h"
#include "helpers.hpp"

using namespace respotopt;
using testutil::cantilever;
using testutil::dense_solve_oracle;
using testutil::materials;
using testutil::random_vector;

namespace {

// Independent 2x2 Gauss quadrature of B^T s with a locally rebuilt B matrix;
// cross-checks the element integrals without touching the library's B.
ElemVector quad_oracle_bt_sigma(const Eigen::Vector3d& s, double ex, double ey) {
  const double gp = 1.0 / std::sqrt(3.0);
  const double xs[4] = {-1, 1, 1, -1};
  const double es[4] = {-1, -1, 1, 1};
  ElemVector out = ElemVector::Zero();
  for (double xi : {-gp, gp}) {
    for (double eta : {-gp, gp}) {
      for (int i = 0; i < 4; ++i) {
        const double dNdx = 0.25 * xs[i] * (1 + eta * es[i]) * 2.0 / ex;
        const double dNdy = 0.25 * es[i] * (1 + xi * xs[i]) * 2.0 / ey;
        out[2 * i + 0] += (dNdx * s[0] + dNdy * s[2]) * ex * ey / 4.0;
        out[2 * i + 1] += (dNdy * s[1] + dNdx * s[2]) * ex * ey / 4.0;
      }
    }
  }
  return out;
}

Eigen::VectorXd affine_field(const Grid& g, const Eigen::Matrix2d& A,
                             const Eigen::Vector2d& b) {
  Eigen::VectorXd u(g.num_dofs());
  for (int n = 0; n < g.num_nodes(); ++n) {
    const Eigen::Vector2d x(g.node_coords[n][0], g.node_coords[n][1]);
    u.segment<2>(2 * n) = A * x + b;
  }
  return u;
}

}  // namespace

TEST_CASE("plane strain Hooke matrix") {
  const IsotropicHooke h0 = hooke_plane_strain(1.0, 0.0);
  CHECK(h0.voigt(0, 0) == doctest::Approx(1.0));
  CHECK(h0.voigt(1, 1) == doctest::Approx(1.0));
  CHECK(h0.voigt(2, 2) == doctest::Approx(0.5));
  CHECK(h0.voigt(0, 1) == doctest::Approx(0.0));

  const IsotropicHooke h3 = hooke_plane_strain(1.0, 0.3);
  CHECK(h3.voigt(0, 0) == doctest::Approx(1.346153846153846).epsilon(1e-12));
  const IsotropicHooke h10 = hooke_plane_strain(10.0, 0.3);
  CHECK((h10.voigt - 10.0 * h3.voigt).norm() <= 1e-12 * h10.voigt.norm());

  // SPD within the admissible range.
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(h3.voigt);
  CHECK(es.eigenvalues().minCoeff() > 0.0);

  CHECK_THROWS_AS(hooke_plane_strain(1.0, 0.5), std::invalid_argument);
  CHECK_THROWS_AS(hooke_plane_strain(1.0, 0.55), std::invalid_argument);
  CHECK_THROWS_AS(hooke_plane_strain(1.0, -0.1), std::invalid_argument);
  CHECK_THROWS_AS(hooke_plane_strain(0.0, 0.3), std::invalid_argument);
}

TEST_CASE("element stiffness: symmetry, rank, rigid modes") {
  const IsotropicHooke h = hooke_plane_strain(2.0, 0.3);
  const ElemMatrix Ke = element_stiffness(h, 0.4, 0.7);
  CHECK((Ke - Ke.transpose()).lpNorm<Eigen::Infinity>() <= 1e-14 * Ke.norm());

  Eigen::SelfAdjointEigenSolver<ElemMatrix> es(Ke);
  int zeros = 0;
  for (int i = 0; i < 8; ++i)
    if (std::abs(es.eigenvalues()[i]) < 1e-12 * es.eigenvalues().maxCoeff()) ++zeros;
  CHECK(zeros == 3);

  ElemVector tx, ty, rot;
  const double xs[4] = {0.0, 0.4, 0.4, 0.0};
  const double ys[4] = {0.0, 0.0, 0.7, 0.7};
  for (int i = 0; i < 4; ++i) {
    tx[2 * i] = 1.0;
    tx[2 * i + 1] = 0.0;
    ty[2 * i] = 0.0;
    ty[2 * i + 1] = 1.0;
    rot[2 * i] = -ys[i];
    rot[2 * i + 1] = xs[i];
  }
  CHECK((Ke * tx).lpNorm<Eigen::Infinity>() <= 1e-12 * Ke.norm());
  CHECK((Ke * ty).lpNorm<Eigen::Infinity>() <= 1e-12 * Ke.norm());
  CHECK((Ke * rot).lpNorm<Eigen::Infinity>() <= 1e-12 * Ke.norm());
}

TEST_CASE("element stiffness reproduces uniform-strain tractions") {
  const double ex = 0.5, ey = 0.25;
  const IsotropicHooke h = hooke_plane_strain(3.0, 0.25);
  const Eigen::Vector3d strain(0.2, -0.1, 0.3);  // (e11, e22, 2 e12)
  const Eigen::Vector3d sigma = h.voigt * strain;

  // Nodal displacements of the matching affine field.
  ElemVector d;
  const double xs[4] = {0.0, ex, ex, 0.0};
  const double ys[4] = {0.0, 0.0, ey, ey};
  for (int i = 0; i < 4; ++i) {
    d[2 * i + 0] = strain[0] * xs[i] + 0.5 * strain[2] * ys[i];
    d[2 * i + 1] = strain[1] * ys[i] + 0.5 * strain[2] * xs[i];
  }
  const ElemVector f = element_stiffness(h, ex, ey) * d;

  // Closed-form integral of B^T sigma over the rectangle.
  const double xi[4] = {-1, 1, 1, -1};
  const double et[4] = {-1, -1, 1, 1};
  for (int i = 0; i < 4; ++i) {
    const double fx = sigma[0] * xi[i] * ey / 2.0 + sigma[2] * et[i] * ex / 2.0;
    const double fy = sigma[1] * et[i] * ex / 2.0 + sigma[2] * xi[i] * ey / 2.0;
    CHECK(f[2 * i + 0] == doctest::Approx(fx).epsilon(1e-12));
    CHECK(f[2 * i + 1] == doctest::Approx(fy).epsilon(1e-12));
  }
}

TEST_CASE("element eigenload") {
  const IsotropicHooke h = hooke_plane_strain(1.0, 0.3);
  Eigen::Matrix2d eps0 = Eigen::Matrix2d::Zero();
  CHECK(element_eigenload(h, eps0, 1.0, 0.5, 0.5).norm() == 0.0);

  Eigen::Matrix2d eps;
  eps << -0.1, 0.0, 0.0, 0.1;
  CHECK(element_eigenload(h, eps, 0.0, 0.5, 0.5).norm() == 0.0);

  // Independent quadrature oracle at the bimorph strain.
  const double ex = 0.3, ey = 0.6;
  const Eigen::Vector3d strain(-0.1, 0.1, 0.0);
  const ElemVector expect = quad_oracle_bt_sigma(h.voigt * strain, ex, ey);
  const ElemVector got = element_eigenload(h, eps, 1.0, ex, ey);
  CHECK((got - expect).lpNorm<Eigen::Infinity>() <= 1e-13);

  // Linear in S.
  const ElemVector half = element_eigenload(h, eps, 0.5, ex, ey);
  CHECK((2.0 * half - got).lpNorm<Eigen::Infinity>() <= 1e-14);
}

TEST_CASE("assembly degenerate fields") {
  const Grid g = cantilever(3, 2, 1.5, 1.0);
  const MaterialPair mats = materials(1.0, 2.0);
  const int ne = g.num_elems();
  DensityDesign design = DensityDesign::uniform(ne, 0.0, 1.0);
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(ne);
  const Eigen::VectorXd zeros = Eigen::VectorXd::Zero(ne);

  // phi = 0: zero eigenload, pure structural stiffness.
  EquilibriumState st = assemble(g, design, zeros, ones, mats, 3.0, 1.0);
  CHECK(st.g.norm() == 0.0);
  StiffnessSystem pure_s(g, zeros, ones, MaterialPair{mats.C_s, mats.C_s, mats.eps_star},
                         3.0, 1.0);
  CHECK((st.system->matrix() - pure_s.matrix()).norm() <= 1e-14 * pure_s.matrix().norm());

  // phi = 1: pure responsive stiffness.
  design.phi.setOnes();
  EquilibriumState st1 = assemble(g, design, ones, ones, mats, 3.0, 1.0);
  StiffnessSystem pure_r(g, ones, ones, MaterialPair{mats.C_r, mats.C_r, mats.eps_star},
                         3.0, 1.0);
  CHECK((st1.system->matrix() - pure_r.matrix()).norm() <=
        1e-14 * pure_r.matrix().norm());

  // Equal moduli: stiffness independent of phi.
  const MaterialPair eq = materials(2.0, 2.0);
  const Eigen::VectorXd f1 = random_vector(ne, 0.0, 1.0, 1);
  const Eigen::VectorXd f2 = random_vector(ne, 0.0, 1.0, 2);
  StiffnessSystem k1(g, f1, ones, eq, 3.0, 1.0);
  StiffnessSystem k2(g, f2, ones, eq, 3.0, 1.0);
  const Eigen::VectorXd probe = random_vector(k1.matrix().rows(), -1.0, 1.0, 3);
  CHECK((k1.matrix() * probe - k2.matrix() * probe).lpNorm<Eigen::Infinity>() <=
        1e-14 * (k1.matrix() * probe).lpNorm<Eigen::Infinity>());
}

TEST_CASE("assembly contract violations") {
  const Grid g = cantilever(2, 2, 1.0, 1.0);
  const MaterialPair mats = materials(1.0, 1.0);
  const int ne = g.num_elems();
  const DensityDesign design = DensityDesign::uniform(ne, 0.5, 1.0);
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(ne);
  Eigen::VectorXd bad = ones;
  bad[0] = 1.5;
  CHECK_THROWS_AS(assemble(g, design, bad, ones, mats, 3.0, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(assemble(g, design, ones, ones, mats, 1.0, 0.0), std::invalid_argument);

  Grid unconstrained = build_grid(2, 2, 1.0, 1.0);
  CHECK_THROWS_AS(StiffnessSystem(unconstrained, ones, ones, mats, 3.0, 0.0),
                  SolverFailure);
}

TEST_CASE("solve: zero rhs and dense oracle") {
  const MaterialPair mats = materials(1.0, 0.7, 0.3);

  // Zero load: zero displacement and compliance.
  {
    Grid g = cantilever(2, 2, 1.0, 1.0, 0.0);
    const int ne = g.num_elems();
    DensityDesign design = DensityDesign::uniform(ne, 0.0, 1.0);
    EquilibriumState st = assemble(g, design, Eigen::VectorXd::Zero(ne),
                                   Eigen::VectorXd::Ones(ne), mats, 3.0, 0.0);
    solve_equilibrium(st);
    CHECK(st.u.norm() == 0.0);
    CHECK(compliance(st) == 0.0);
  }

  // Single-element cantilever and a 2x2 mesh against the dense oracle.
  for (auto [nx, ny] : {std::pair{1, 1}, std::pair{2, 2}}) {
    Grid g = cantilever(nx, ny, 1.0, 1.0);
    const int ne = g.num_elems();
    const Eigen::VectorXd fphi = random_vector(ne, 0.2, 0.8, 11);
    const Eigen::VectorXd ones = Eigen::VectorXd::Ones(ne);
    DensityDesign design = DensityDesign::uniform(ne, 0.5, 1.0);
    EquilibriumState st = assemble(g, design, fphi, ones, mats, 3.0, 1.0);
    solve_equilibrium(st);

    const ElemMatrix Ks = element_stiffness(mats.C_s, g.elem_width(), g.elem_height());
    const ElemMatrix Kr = element_stiffness(mats.C_r, g.elem_width(), g.elem_height());
    Eigen::VectorXd fa(ne), fb(ne);
    for (int e = 0; e < ne; ++e) {
      const double b = std::pow(fphi[e], 3.0);
      fa[e] = 1.0 - b;
      fb[e] = b;
    }
    const Eigen::VectorXd u_ref =
        dense_solve_oracle(g, fa, fb, Ks, Kr, st.g + st.f);
    CHECK((st.u - u_ref).lpNorm<Eigen::Infinity>() <=
          1e-10 * (1.0 + u_ref.lpNorm<Eigen::Infinity>()));
    CHECK(compliance(st) == doctest::Approx(st.f.dot(u_ref)).epsilon(1e-10));
  }
}

TEST_CASE("stress-free eigenstrain on a minimally constrained domain") {
  Grid g = build_grid(6, 4, 1.2, 0.8);
  // Pin rigid modes only, compatibly with u = alpha*x: corner (0,0) fully,
  // u_x at (0,H).
  fix_dof(g, 2 * g.node_index(0, 0) + 0);
  fix_dof(g, 2 * g.node_index(0, 0) + 1);
  fix_dof(g, 2 * g.node_index(0, g.ny) + 0);

  const double alpha = 0.05;
  MaterialPair mats = materials(1.0, 1.0);
  mats.eps_star = alpha * Eigen::Matrix2d::Identity();

  const int ne = g.num_elems();
  DensityDesign design = DensityDesign::uniform(ne, 1.0, 1.0);
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(ne);
  EquilibriumState st = assemble(g, design, ones, ones, mats, 3.0, 1.0);
  solve_equilibrium(st);

  const Eigen::VectorXd expect =
      affine_field(g, alpha * Eigen::Matrix2d::Identity(), Eigen::Vector2d::Zero());
  CHECK((st.u - expect).lpNorm<Eigen::Infinity>() <=
        1e-12 * expect.lpNorm<Eigen::Infinity>());
}

TEST_CASE("patch test: affine boundary data is reproduced") {
  Eigen::Matrix2d A;
  A << 0.3, 0.1, -0.2, 0.4;
  const Eigen::Vector2d b(0.05, -0.02);

  auto run_patch = [&](const MaterialPair& mats, const Eigen::VectorXd& fphi) {
    Grid g = build_grid(5, 4, 1.0, 0.8);
    const Eigen::VectorXd expect = affine_field(g, A, b);
    for (int j = 0; j <= g.ny; ++j) {
      for (int i = 0; i <= g.nx; ++i) {
        if (i != 0 && i != g.nx && j != 0 && j != g.ny) continue;
        const int n = g.node_index(i, j);
        fix_dof(g, 2 * n + 0, expect[2 * n + 0]);
        fix_dof(g, 2 * n + 1, expect[2 * n + 1]);
      }
    }
    const int ne = g.num_elems();
    DensityDesign design = DensityDesign::uniform(ne, 0.5, 1.0);
    EquilibriumState st = assemble(g, design, fphi, Eigen::VectorXd::Ones(ne),
                                   MaterialPair{mats.C_s, mats.C_r, Eigen::Matrix2d::Zero()},
                                   3.0, 1.0);
    solve_equilibrium(st);
    CHECK((st.u - expect).lpNorm<Eigen::Infinity>() <=
          1e-12 * expect.lpNorm<Eigen::Infinity>());
  };

  // Uniform SIMP field with distinct materials.
  run_patch(materials(1.0, 0.1), Eigen::VectorXd::Constant(20, 0.37));
  // Arbitrary SIMP field with equal moduli (uniform effective coefficient).
  run_patch(materials(2.0, 2.0), random_vector(20, 0.0, 1.0, 5));
}

TEST_CASE("superposition and symmetry") {
  const Grid g = cantilever(4, 4, 2.0, 1.0);
  const MaterialPair mats = materials(1.0, 0.5);
  const int ne = g.num_elems();
  const Eigen::VectorXd fphi = random_vector(ne, 0.1, 0.9, 21);
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(ne);

  StiffnessSystem sys(g, fphi, ones, mats, 3.0, 1.0);
  // Exact symmetry of the assembled matrix.
  const SparseMat Kt = SparseMat(sys.matrix().transpose());
  CHECK((sys.matrix() - Kt).norm() == 0.0);

  const Eigen::VectorXd f = traction_load(g);
  const Eigen::VectorXd gvec = eigenstrain_load(g, fphi, ones, mats, 3.0, 1.0);
  const Eigen::VectorXd u_full = sys.solve(gvec + f);
  const Eigen::VectorXd u_load = sys.solve(f);
  const Eigen::VectorXd v = sys.solve(gvec);
  CHECK((u_full - u_load - v).lpNorm<Eigen::Infinity>() <=
        1e-10 * u_full.lpNorm<Eigen::Infinity>());
  CHECK(f.dot(u_full) ==
        doctest::Approx(f.dot(u_load) + f.dot(v)).epsilon(1e-10));
}

TEST_CASE("compliance scales inversely with stiffness") {
  const Grid g = cantilever(4, 2, 2.0, 1.0);
  const int ne = g.num_elems();
  const Eigen::VectorXd fphi = random_vector(ne, 0.2, 0.8, 31);
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(ne);
  const DensityDesign design = DensityDesign::uniform(ne, 0.5, 1.0);

  auto c0_for = [&](double scale) {
    EquilibriumState st = assemble(g, design, fphi, ones,
                                   materials(scale * 1.0, scale * 0.5), 3.0, 0.0);
    solve_equilibrium(st);
    return compliance(st);
  };
  const double c = 3.7;
  CHECK(c0_for(c) == doctest::Approx(c0_for(1.0) / c).epsilon(1e-12));
}

TEST_CASE("conjugate gradient fallback agrees with Cholesky") {
  const Grid g = cantilever(6, 3, 2.0, 1.0);
  const MaterialPair mats = materials(1.0, 0.3);
  const int ne = g.num_elems();
  const Eigen::VectorXd fphi = random_vector(ne, 0.1, 0.9, 41);
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(ne);

  StiffnessSystem chol(g, fphi, ones, mats, 3.0, 1.0, SolverKind::Cholesky);
  StiffnessSystem cg(g, fphi, ones, mats, 3.0, 1.0, SolverKind::ConjugateGradient);
  const Eigen::VectorXd f = traction_load(g);
  const Eigen::VectorXd a = chol.solve(f);
  const Eigen::VectorXd b = cg.solve(f);
  CHECK(cg.last_relative_residual() <= 1e-10);
  CHECK((a - b).lpNorm<Eigen::Infinity>() <= 1e-8 * a.lpNorm<Eigen::Infinity>());
}

TEST_CASE("compliance on an unsolved state is rejected") {
  const Grid g = cantilever(2, 2, 1.0, 1.0);
  const int ne = g.num_elems();
  const DensityDesign design = DensityDesign::uniform(ne, 0.5, 1.0);
  EquilibriumState st = assemble(g, design, Eigen::VectorXd::Constant(ne, 0.5),
                                 Eigen::VectorXd::Ones(ne), materials(1.0, 1.0), 3.0, 0.0);
  CHECK_THROWS_AS(compliance(st), std::logic_error);
}
