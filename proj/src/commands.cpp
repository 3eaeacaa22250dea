#include "respotopt/commands.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <stdexcept>

#include "json.hpp"
#include "respotopt/gradcheck.hpp"
#include "respotopt/io.hpp"
#include "respotopt/kernels/kernels.hpp"
#include "respotopt/optimizer.hpp"
#include "respotopt/util.hpp"

namespace respotopt {

namespace {

const char* kind_name(Objective::Kind k) {
  switch (k) {
    case Objective::Kind::ActuationWork: return "actuation_work";
    case Objective::Kind::BlockingLoad: return "blocking_load";
    case Objective::Kind::Workpiece: return "workpiece";
  }
  return "?";
}

}  // namespace

int cmd_run(const RunConfig& config_in, const std::string& out_dir) {
  RunConfig config = config_in;
  if (!out_dir.empty()) config.out_dir = out_dir;
  try {
    std::printf("respotopt run: %dx%d mesh, objective %s, kernels %s\n", config.nx,
                config.ny, kind_name(config.objective.kind),
                kernels::backend_name(kernels::active_backend()));
    const RunResult res = run(config, [](const HistoryRow& r) {
      std::printf("iter %4d  obj % .6e  C0 % .6e  C1 % .6e  change %.3e\n", r.iter,
                  r.objective, r.C0, r.C1, r.max_change);
    });

    const Grid grid = make_grid(config);
    const FilterOperator filter = make_filter(config, grid);
    const Eigen::VectorXd fphi = filter.apply(res.design.phi);
    const Eigen::VectorXd frho = res.design.voids_enabled
                                     ? filter.apply(res.design.rho)
                                     : Eigen::VectorXd::Ones(grid.num_elems());
    const VolumeBudget budget =
        VolumeBudget::from_fractions(grid, config.Vr_frac, config.V0_frac);

    namespace fs = std::filesystem;
    const fs::path out(config.out_dir);
    write_density_csv((out / "density.csv").string(), grid, res.design, fphi, frho);
    write_convergence_csv((out / "convergence.csv").string(), res.history);
    write_atomic((out / "resolved_config.json").string(), resolved_config_json(config));
    for (const std::string& f : config.formats) {
      if (f == "vtk")
        write_vtk((out / "design.vtk").string(), grid, res.design, fphi, frho);
      if (f == "pgm")
        write_pgm((out / "design.pgm").string(), grid, fphi, frho,
                  res.design.voids_enabled);
    }

    nlohmann::json summary;
    summary["objective"] = kind_name(config.objective.kind);
    summary["value"] = res.final_report.value;
    summary["C0"] = res.final_report.C0;
    summary["C1"] = res.final_report.C1;
    summary["alpha"] = res.final_report.alpha;
    summary["vol_r_frac"] = budget.responsive_volume(res.design) / grid.volume();
    summary["vol_0_frac"] = budget.total_volume(res.design) / grid.volume();
    summary["iterations"] = res.iterations;
    summary["converged"] = res.converged;
    write_atomic((out / "summary.json").string(), summary.dump(2) + "\n");

    std::printf(
        "done: %s after %d iters, value % .6e, C0 % .6e, C1 % .6e, alpha % .6e, "
        "vol_r/V %.4f, vol_0/V %.4f\n",
        res.converged ? "converged" : "iteration cap", res.iterations,
        res.final_report.value, res.final_report.C0, res.final_report.C1,
        res.final_report.alpha, budget.responsive_volume(res.design) / grid.volume(),
        budget.total_volume(res.design) / grid.volume());
    return 0;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}

int cmd_gradcheck(const RunConfig& config, int mesh_cap, int n_probes,
                  std::uint64_t seed) {
  try {
    if (mesh_cap < 2 || mesh_cap > 16)
      throw std::invalid_argument(
          "gradcheck: mesh cap must lie in [2,16] (finite differences get "
          "expensive beyond 16x16)");
    RunConfig small = config;
    small.nx = std::min(small.nx, mesh_cap);
    small.ny = std::min(small.ny, mesh_cap);
    const Grid grid = make_grid(small);
    const MaterialPair mats = make_materials(small);
    const FilterOperator filter = make_filter(small, grid);
    const DensityDesign design =
        random_design(grid.num_elems(), small.voids, small.rho_min, seed);

    constexpr double kTol = 1e-4;
    bool ok = true;
    std::printf("gradcheck: %dx%d mesh, %d probes, step 1e-6\n", small.nx, small.ny,
                n_probes);
    for (Objective::Kind kind :
         {Objective::Kind::ActuationWork, Objective::Kind::BlockingLoad,
          Objective::Kind::Workpiece}) {
      Objective obj = small.objective;
      obj.kind = kind;
      if (kind == Objective::Kind::ActuationWork && small.voids &&
          !obj.allow_voids_actuation) {
        std::printf("  %-15s skipped (rejected with voids)\n", kind_name(kind));
        continue;
      }
      const GradCheckResult r = adjoint_vs_fd(obj, grid, design, mats, filter,
                                              small.p, 1e-6, n_probes, seed + 1);
      const bool pass = r.max_rel_err_phi <= kTol &&
                        (!small.voids || r.max_rel_err_rho <= kTol);
      ok = ok && pass;
      if (small.voids)
        std::printf("  %-15s max rel err dphi %.3e drho %.3e  %s\n", kind_name(kind),
                    r.max_rel_err_phi, r.max_rel_err_rho, pass ? "PASS" : "FAIL");
      else
        std::printf("  %-15s max rel err dphi %.3e  %s\n", kind_name(kind),
                    r.max_rel_err_phi, pass ? "PASS" : "FAIL");
    }
    return ok ? 0 : 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}

int cmd_identities(const RunConfig& config) {
  try {
    const Grid grid = make_grid(config);
    const MaterialPair mats = make_materials(config);
    const FilterOperator filter = make_filter(config, grid);
    const int ne = grid.num_elems();
    bool ok = true;
    auto report = [&ok](const char* name, double residual, double tol) {
      const bool pass = residual <= tol;
      ok = ok && pass;
      std::printf("  %-28s residual %.3e (tol %.0e)  %s\n", name, residual, tol,
                  pass ? "PASS" : "FAIL");
    };
    std::printf("identities: %dx%d mesh\n", config.nx, config.ny);

    // 1. Blocking amplitude vs 1 - C1/C0.
    {
      double worst = 0.0;
      Objective obj;
      obj.kind = Objective::Kind::BlockingLoad;
      for (std::uint64_t s = 0; s < 10; ++s) {
        const DensityDesign d = random_design(ne, config.voids, config.rho_min, s);
        const double alpha =
            blocking_load_direct(grid, d, mats, filter, config.p);
        const ObjectiveReport r = evaluate(obj, grid, d, mats, filter, config.p);
        worst = std::max(worst, std::abs(alpha - (1.0 - r.C1 / r.C0)));
      }
      report("blocking alpha = 1 - C1/C0", worst, 1e-10);
    }

    // 2. Workpiece kappa limits.
    {
      double worst_small = 0.0, worst_large = 0.0;
      for (std::uint64_t s = 0; s < 3; ++s) {
        const DensityDesign d = random_design(ne, config.voids, config.rho_min, 100 + s);
        Objective obj;
        obj.kind = Objective::Kind::Workpiece;
        obj.kappa = 1e-6;
        const ObjectiveReport lo = evaluate(obj, grid, d, mats, filter, config.p);
        const double taylor = 1.0 + obj.kappa * (lo.C1 - lo.C0);
        worst_small = std::max(worst_small,
                               std::abs(lo.value - taylor) /
                                   (10.0 * obj.kappa * obj.kappa *
                                    std::abs(lo.C0 * lo.C1)));
        obj.kappa = 1e6;
        const ObjectiveReport hi = evaluate(obj, grid, d, mats, filter, config.p);
        worst_large = std::max(worst_large, std::abs(hi.value - hi.C1 / hi.C0));
      }
      report("workpiece kappa->0 Taylor", worst_small, 1.0);
      report("workpiece kappa->inf ratio", worst_large, 1e-4);
    }

    // 3. Equal moduli make C0 design-independent.
    {
      MaterialPair eq = mats;
      eq.C_r = eq.C_s;
      Objective obj;
      obj.kind = Objective::Kind::ActuationWork;
      double cmin = 0.0, cmax = 0.0;
      for (std::uint64_t s = 0; s < 10; ++s) {
        const DensityDesign d = random_design(ne, config.voids, config.rho_min, 200 + s);
        const double c0 = evaluate(obj, grid, d, eq, filter, config.p).C0;
        if (s == 0) cmin = cmax = c0;
        cmin = std::min(cmin, c0);
        cmax = std::max(cmax, c0);
      }
      report("equal-moduli C0 spread", (cmax - cmin) / std::abs(cmax), 1e-12);
    }

    // 4. Superposition u(g+f) = u(f) + u(g).
    {
      const DensityDesign d = random_design(ne, config.voids, config.rho_min, 300);
      const Eigen::VectorXd fphi = filter.apply(d.phi);
      const Eigen::VectorXd frho =
          config.voids ? filter.apply(d.rho) : Eigen::VectorXd::Ones(ne);
      StiffnessSystem sys(grid, fphi, frho, mats, config.p, mats.S2);
      const Eigen::VectorXd f = traction_load(grid);
      const Eigen::VectorXd g =
          eigenstrain_load(grid, fphi, frho, mats, config.p, mats.S2);
      const Eigen::VectorXd u_full = sys.solve(g + f);
      const Eigen::VectorXd u_load = sys.solve(f);
      const Eigen::VectorXd v = sys.solve(g);
      const double res_u =
          (u_full - u_load - v).norm() / (u_full.norm() + 1e-300);
      const double res_c = std::abs(f.dot(u_full) - (f.dot(u_load) + f.dot(v))) /
                           (std::abs(f.dot(u_full)) + 1e-300);
      report("superposition displacement", res_u, 1e-10);
      report("superposition compliance", res_c, 1e-10);
    }

    return ok ? 0 : 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}

}  // namespace respotopt
