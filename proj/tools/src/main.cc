#include <iostream>

#include <CLI11.hpp>

#include "commands.h"
#include "lumion/error.h"

namespace {

using namespace lumion;
using namespace lumion::cli;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitInvariant = 3;
constexpr int kExitRouting = 4;

void AddCommonFlags(CLI::App& cmd, CommandOptions& o, std::string& format) {
  cmd.add_option("--config", o.config_path, "Scenario JSON file");
  cmd.add_option("--seed", o.seed, "Master seed");
  cmd.add_option("--racks", o.racks, "Number of racks to simulate");
  cmd.add_option("--out", o.out_dir, "Output directory")->capture_default_str();
  cmd.add_option("--format", format, "Artifact format: json, csv or both")->capture_default_str();
  cmd.add_option("--policies", o.policies, "Comma-separated policies (lumion,tpu_migration,kubernetes)");
  cmd.add_option("--placement", o.placement, "Spare placement: single or all")->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spare provisioning, fault simulation and routing for optically patched TPU racks"};
  app.require_subcommand(1);
  app.set_version_flag("--version", LUMION_VERSION);

  CommandOptions options;
  std::string format = "both";
  CLI::App* spares = app.add_subcommand("spares", "Spare counts per probability range and SRG granularity");
  CLI::App* simulate = app.add_subcommand("simulate", "Per-rack overprovisioning of each recovery policy");
  CLI::App* fibers = app.add_subcommand("fibers", "Extra fibers: exact routing vs k-shortest-paths");
  CLI::App* mesh = app.add_subcommand("mesh", "Edge-disjoint routing on a merged MZI mesh");
  for (CLI::App* cmd : {spares, simulate, fibers, mesh}) AddCommonFlags(*cmd, options, format);
  mesh->add_option("--rows", options.rows, "Mesh rows");
  mesh->add_option("--cols", options.cols, "Mesh columns");
  mesh->add_option("--requests", options.requests, "Random port-to-port requests");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    options.format = ParseFormat(format);
    const ScenarioConfig config = ResolveConfig(options);
    if (spares->parsed()) RunSpares(config, options, std::cout);
    if (simulate->parsed()) RunSimulate(config, options, std::cout);
    if (fibers->parsed()) RunFibers(config, options, std::cout);
    if (mesh->parsed()) RunMesh(config, options, std::cout);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const RouteUnavailable& e) {
    std::cerr << "routing infeasible at request " << e.index() << ": " << e.what() << '\n';
    return kExitRouting;
  } catch (const InvariantViolation& e) {
    std::cerr << "invariant violated: " << e.what() << '\n';
    return kExitInvariant;
  } catch (const DomainError& e) {
    std::cerr << "invariant violated: " << e.what() << '\n';
    return kExitInvariant;
  } catch (const NoSpareAvailable& e) {
    std::cerr << "invariant violated: " << e.what() << '\n';
    return kExitInvariant;
  }
  return kExitOk;
}
