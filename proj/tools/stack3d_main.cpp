// stack3d: design-space exploration for high-density 3D-IC stacking.
// Subcommands: cost, flow, roadmap, pdn, calibrate.
// Exit codes: 0 success, 2 configuration error, 3 runtime/model error.

#include <cstdint>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "stack3d/errors.hpp"
#include "stack3d/explorer.hpp"

namespace {

struct CliArgs {
  std::string config;
  std::string out = ".";
  std::vector<std::string> seeds;
  int jobs = 1;
  std::string format = "csv";
};

void add_common(CLI::App* cmd, CliArgs& args, bool config_required) {
  auto* c = cmd->add_option("--config", args.config, "key = value config file");
  if (config_required) c->required();
  cmd->add_option("--out", args.out, "output directory")
      ->capture_default_str();
  cmd->add_option("--seed", args.seeds,
                  "seed list (repeatable or comma separated)")
      ->delimiter(',');
  cmd->add_option("--jobs", args.jobs, "worker pool size for sweeps")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  cmd->add_option("--format", args.format, "output format")
      ->capture_default_str()
      ->check(CLI::IsMember({"csv", "json"}));
}

stack3d::RunOptions to_options(const CliArgs& args) {
  stack3d::RunOptions opts;
  opts.config_path = args.config;
  opts.out_dir = args.out;
  opts.jobs = args.jobs;
  opts.format = args.format;
  for (const std::string& s : args.seeds)
    opts.seeds.push_back(std::stoull(s));
  return opts;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"3D-IC stacking cost / placement / PDN exploration"};
  app.require_subcommand(1);

  CliArgs args;
  CLI::App* cost = app.add_subcommand(
      "cost", "2D vs 3D die-cost scenarios over an area sweep");
  add_common(cost, args, true);
  CLI::App* flow = app.add_subcommand(
      "flow", "2D and pseudo-3D placement, path timing and PDN pipeline");
  add_common(flow, args, true);
  CLI::App* roadmap = app.add_subcommand(
      "roadmap", "3D connection pitch vs density table");
  add_common(roadmap, args, false);
  CLI::App* pdn = app.add_subcommand(
      "pdn", "bump current, power density and optional IR-drop report");
  add_common(pdn, args, true);
  CLI::App* calibrate = app.add_subcommand(
      "calibrate", "fit the shrink wafer-cost ratio to a target saving");
  add_common(calibrate, args, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    const stack3d::RunOptions opts = to_options(args);
    if (cost->parsed()) stack3d::run_cost(opts);
    if (flow->parsed()) stack3d::run_flow(opts);
    if (roadmap->parsed()) stack3d::run_roadmap(opts);
    if (pdn->parsed()) stack3d::run_pdn(opts);
    if (calibrate->parsed()) stack3d::run_calibrate(opts);
  } catch (const stack3d::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
