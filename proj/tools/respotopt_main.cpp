// respotopt command-line tool: run / gradcheck / identities.

#include <cstdio>
#include <string>

#include "CLI11.hpp"
#include "respotopt/commands.hpp"
#include "respotopt/util.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Topology optimization of integrated responsive structures"};
  app.set_version_flag("--version", std::string("respotopt ") + respotopt::kVersion);
  app.require_subcommand(1);

  std::string config_path, out_dir;
  int probes = 0, mesh_cap = 8;
  std::uint64_t seed = 0;

  CLI::App* run = app.add_subcommand("run", "optimize a design from a JSON config");
  run->add_option("config", config_path, "config JSON path")->required();
  run->add_option("--out", out_dir, "output directory (overrides the config)");

  CLI::App* grad =
      app.add_subcommand("gradcheck", "adjoint vs finite-difference verification");
  grad->add_option("config", config_path, "config JSON path")->required();
  grad->add_option("--probes", probes, "elements to probe (0 = all)");
  grad->add_option("--seed", seed, "random design seed");
  grad->add_option("--mesh-cap", mesh_cap, "mesh cap per axis (<= 16)");

  CLI::App* ident = app.add_subcommand("identities", "run the identity check suite");
  ident->add_option("config", config_path, "config JSON path")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    const respotopt::RunConfig config = respotopt::parse_config(config_path);
    if (run->parsed()) return respotopt::cmd_run(config, out_dir);
    if (grad->parsed()) return respotopt::cmd_gradcheck(config, mesh_cap, probes, seed);
    if (ident->parsed()) return respotopt::cmd_identities(config);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
