#include "osgood_cli/commands.hpp"

#include "CLI11.hpp"

#include <iostream>

namespace {

void add_common(CLI::App* cmd, std::string& config, osgood::cli::CommandOptions& o) {
  cmd->add_option("--config", config, "Run configuration (JSON)")->required();
  cmd->add_option("--out", o.out, "Output directory");
  cmd->add_option("--seed", o.seed, "Seed for randomized sweeps");
  cmd->add_option("--t-min", o.t_min, "Smallest search time");
  cmd->add_option("--t-max", o.t_max, "Largest search time");
  cmd->add_option("--t-grid", o.t_grid, "Number of geometric grid points");
  cmd->add_option("--horizon", o.horizon, "Simulation horizon");
  cmd->add_option("--threshold", o.threshold, "Divergence threshold on the sup norm");
  cmd->add_option("--sweep", o.sweep, "Parameter sweep key=v1,v2,... (repeatable)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Blow-up certificates and mild solutions for semilinear heat equations"};
  app.require_subcommand(1);

  std::string config;
  osgood::cli::CommandOptions options;
  auto* certify = app.add_subcommand("certify", "Search for a blow-up certificate");
  auto* simulate = app.add_subcommand("simulate", "Integrate the mild solution");
  auto* criteria = app.add_subcommand("criteria", "Evaluate the growth criteria");
  auto* validate = app.add_subcommand("validate", "Check semigroup and kernel axioms");
  for (auto* cmd : {certify, simulate, criteria, validate}) {
    add_common(cmd, config, options);
  }
  certify->add_option("--verify-only", options.verify_only, "Recompute a stored certificate.json");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : osgood::cli::kExitInputError;
  }
  const std::string command = app.get_subcommands().front()->get_name();
  return osgood::cli::run_command(command, config, options, std::cout, std::cerr);
}
