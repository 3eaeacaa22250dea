#include "respotopt/config.hpp"

#include <fstream>
#include <random>
#include <sstream>

#include "json.hpp"
#include "respotopt/util.hpp"

namespace respotopt {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& key, const std::string& constraint) {
  throw ConfigError("config: '" + key + "' " + constraint);
}

double get_num(const json& j, const std::string& section, const std::string& key,
               double fallback, bool* present = nullptr) {
  if (!j.contains(key)) {
    if (present) *present = false;
    return fallback;
  }
  if (present) *present = true;
  if (!j.at(key).is_number()) fail(section + "." + key, "must be a number");
  return j.at(key).get<double>();
}

int get_int(const json& j, const std::string& section, const std::string& key,
            int fallback) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_number_integer()) fail(section + "." + key, "must be an integer");
  return j.at(key).get<int>();
}

void check_nu(const std::string& key, double nu) {
  if (!(nu >= 0.0 && nu < 0.5))
    fail(key, "must satisfy 0 <= nu < 0.5 (plane strain), got " + std::to_string(nu));
}

}  // namespace

RunConfig parse_config_text(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config: invalid JSON: ") + e.what());
  }

  RunConfig c;

  if (j.contains("geometry")) {
    const json& g = j.at("geometry");
    c.nx = get_int(g, "geometry", "nx", c.nx);
    c.ny = get_int(g, "geometry", "ny", c.ny);
    c.L = get_num(g, "geometry", "L", c.L);
    c.H = get_num(g, "geometry", "H", c.H);
  }
  if (c.nx < 1 || c.ny < 1) fail("geometry.nx/ny", "must be >= 1");
  if (!(c.L > 0.0) || !(c.H > 0.0)) fail("geometry.L/H", "must be positive");

  if (j.contains("materials")) {
    const json& m = j.at("materials");
    c.E_s = get_num(m, "materials", "E_s", c.E_s);
    c.nu_s = get_num(m, "materials", "nu_s", c.nu_s);
    c.E_r = get_num(m, "materials", "E_r", c.E_r);
    c.nu_r = get_num(m, "materials", "nu_r", c.nu_r);
    if (m.contains("eps_star")) {
      const json& es = m.at("eps_star");
      if (!es.is_array() || es.size() != 2 || !es[0].is_array() || es[0].size() != 2 ||
          !es[1].is_array() || es[1].size() != 2)
        fail("materials.eps_star", "must be a 2x2 array");
      for (int r = 0; r < 2; ++r)
        for (int s = 0; s < 2; ++s) c.eps_star(r, s) = es[r][s].get<double>();
      if (c.eps_star(0, 1) != c.eps_star(1, 0))
        fail("materials.eps_star", "must be symmetric");
    }
  }
  if (!(c.E_s > 0.0)) fail("materials.E_s", "must be positive");
  if (!(c.E_r > 0.0)) fail("materials.E_r", "must be positive");
  check_nu("materials.nu_s", c.nu_s);
  check_nu("materials.nu_r", c.nu_r);

  if (j.contains("load")) {
    c.load_magnitude = get_num(j.at("load"), "load", "magnitude", c.load_magnitude);
    if (!std::isfinite(c.load_magnitude)) fail("load.magnitude", "must be finite");
  }

  if (j.contains("objective")) {
    const json& o = j.at("objective");
    if (o.contains("kind")) {
      const std::string kind = o.at("kind").get<std::string>();
      if (kind == "actuation_work")
        c.objective.kind = Objective::Kind::ActuationWork;
      else if (kind == "blocking_load")
        c.objective.kind = Objective::Kind::BlockingLoad;
      else if (kind == "workpiece")
        c.objective.kind = Objective::Kind::Workpiece;
      else
        fail("objective.kind",
             "must be one of actuation_work, blocking_load, workpiece; got " + kind);
    }
    c.objective.kappa = get_num(o, "objective", "kappa", c.objective.kappa);
    if (o.contains("allow_voids_actuation"))
      c.objective.allow_voids_actuation = o.at("allow_voids_actuation").get<bool>();
  }
  if (c.objective.kind == Objective::Kind::Workpiece && !(c.objective.kappa > 0.0))
    fail("objective.kappa", "must be positive for the workpiece objective");

  if (j.contains("simp")) {
    const json& s = j.at("simp");
    c.p = get_num(s, "simp", "p", c.p);
    c.rho_min = get_num(s, "simp", "rho_min", c.rho_min);
    if (s.contains("voids")) c.voids = s.at("voids").get<bool>();
  }
  if (!(c.p > 1.0)) fail("simp.p", "penalty must exceed 1");
  if (!(c.rho_min > 0.0 && c.rho_min < 1.0)) fail("simp.rho_min", "must lie in (0,1)");

  if (j.contains("filter")) {
    const json& f = j.at("filter");
    bool present = false;
    const double abs = get_num(f, "filter", "radius", 0.0, &present);
    if (present) {
      if (!(abs > 0.0)) fail("filter.radius", "must be positive");
      c.filter_radius_abs = abs;
    }
    c.filter_radius_elem_widths =
        get_num(f, "filter", "radius_elem_widths", c.filter_radius_elem_widths);
    if (!(c.filter_radius_elem_widths > 0.0))
      fail("filter.radius_elem_widths", "must be positive");
  }

  if (j.contains("budgets")) {
    const json& b = j.at("budgets");
    c.Vr_frac = get_num(b, "budgets", "Vr_frac", c.Vr_frac);
    c.V0_frac = get_num(b, "budgets", "V0_frac", c.V0_frac);
  }
  if (!c.voids) c.V0_frac = 1.0;
  if (!(c.Vr_frac > 0.0 && c.Vr_frac <= 1.0)) fail("budgets.Vr_frac", "must lie in (0,1]");
  if (!(c.V0_frac > 0.0 && c.V0_frac <= 1.0)) fail("budgets.V0_frac", "must lie in (0,1]");
  if (c.Vr_frac > c.V0_frac) fail("budgets.Vr_frac", "must not exceed V0_frac");

  if (j.contains("optimizer")) {
    const json& o = j.at("optimizer");
    c.mma.move_limit = get_num(o, "optimizer", "move_limit", c.mma.move_limit);
    c.mma.asymptote_init = get_num(o, "optimizer", "asymptote_init", c.mma.asymptote_init);
    c.mma.asymptote_incr = get_num(o, "optimizer", "asymptote_incr", c.mma.asymptote_incr);
    c.mma.asymptote_decr = get_num(o, "optimizer", "asymptote_decr", c.mma.asymptote_decr);
    c.max_iter = get_int(o, "optimizer", "max_iter", c.max_iter);
    c.tol_change = get_num(o, "optimizer", "tol_change", c.tol_change);
    if (o.contains("seed")) c.seed = o.at("seed").get<std::uint64_t>();
    c.perturbation = get_num(o, "optimizer", "perturbation", c.perturbation);
  }
  if (!(c.mma.move_limit > 0.0 && c.mma.move_limit <= 1.0))
    fail("optimizer.move_limit", "must lie in (0,1]");
  if (!(c.mma.asymptote_decr < 1.0 && 1.0 < c.mma.asymptote_incr))
    fail("optimizer.asymptote_incr/decr", "must bracket 1");
  if (c.max_iter < 1) fail("optimizer.max_iter", "must be >= 1");
  if (!(c.tol_change >= 0.0)) fail("optimizer.tol_change", "must be >= 0");
  if (!(c.perturbation >= 0.0)) fail("optimizer.perturbation", "must be >= 0");

  if (j.contains("outputs")) {
    const json& o = j.at("outputs");
    if (o.contains("directory")) c.out_dir = o.at("directory").get<std::string>();
    if (o.contains("formats")) {
      c.formats.clear();
      for (const auto& f : o.at("formats")) {
        const std::string s = f.get<std::string>();
        if (s != "csv" && s != "vtk" && s != "pgm")
          fail("outputs.formats", "entries must be csv, vtk or pgm; got " + s);
        c.formats.push_back(s);
      }
    }
  }
  return c;
}

RunConfig parse_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

std::string resolved_config_json(const RunConfig& c) {
  json j;
  j["geometry"] = {{"nx", c.nx}, {"ny", c.ny}, {"L", c.L}, {"H", c.H}};
  j["materials"] = {{"E_s", c.E_s},
                    {"nu_s", c.nu_s},
                    {"E_r", c.E_r},
                    {"nu_r", c.nu_r},
                    {"eps_star",
                     {{c.eps_star(0, 0), c.eps_star(0, 1)},
                      {c.eps_star(1, 0), c.eps_star(1, 1)}}}};
  j["load"] = {{"magnitude", c.load_magnitude}};
  const char* kind = "actuation_work";
  if (c.objective.kind == Objective::Kind::BlockingLoad) kind = "blocking_load";
  if (c.objective.kind == Objective::Kind::Workpiece) kind = "workpiece";
  j["objective"] = {{"kind", kind},
                    {"kappa", c.objective.kappa},
                    {"allow_voids_actuation", c.objective.allow_voids_actuation}};
  j["simp"] = {{"p", c.p}, {"rho_min", c.rho_min}, {"voids", c.voids}};
  if (c.filter_radius_abs)
    j["filter"] = {{"radius", *c.filter_radius_abs}};
  else
    j["filter"] = {{"radius_elem_widths", c.filter_radius_elem_widths}};
  j["budgets"] = {{"Vr_frac", c.Vr_frac}, {"V0_frac", c.V0_frac}};
  j["optimizer"] = {{"move_limit", c.mma.move_limit},
                    {"asymptote_init", c.mma.asymptote_init},
                    {"asymptote_incr", c.mma.asymptote_incr},
                    {"asymptote_decr", c.mma.asymptote_decr},
                    {"max_iter", c.max_iter},
                    {"tol_change", c.tol_change},
                    {"seed", c.seed},
                    {"perturbation", c.perturbation}};
  j["outputs"] = {{"directory", c.out_dir}, {"formats", c.formats}};
  return j.dump(2) + "\n";
}

Grid make_grid(const RunConfig& c) {
  return apply_cantilever_bcs(build_grid(c.nx, c.ny, c.L, c.H), c.load_magnitude);
}

MaterialPair make_materials(const RunConfig& c) {
  MaterialPair m;
  m.C_s = hooke_plane_strain(c.E_s, c.nu_s);
  m.C_r = hooke_plane_strain(c.E_r, c.nu_r);
  m.eps_star = c.eps_star;
  return m;
}

FilterOperator make_filter(const RunConfig& c, const Grid& grid) {
  return build_filter(grid, c.filter_radius(grid));
}

DensityDesign initial_design(const RunConfig& c, const Grid& grid) {
  const double phi0 = c.Vr_frac / c.V0_frac;
  DensityDesign d = DensityDesign::uniform(grid.num_elems(), phi0, c.V0_frac,
                                           c.rho_min, c.voids);
  if (c.perturbation > 0.0) {
    std::mt19937_64 rng(c.seed);
    std::uniform_real_distribution<double> u(-c.perturbation, c.perturbation);
    for (Eigen::Index e = 0; e < d.phi.size(); ++e)
      d.phi[e] = std::clamp(d.phi[e] + u(rng), 0.0, 1.0);
    // Project back into the responsive budget if the perturbation overshot.
    const double vol_r = (d.rho.array() * d.phi.array()).sum() * grid.elem_area();
    const double budget = c.Vr_frac * grid.volume();
    if (vol_r > budget) d.phi *= budget / vol_r;
  }
  return d;
}

}  // namespace respotopt
