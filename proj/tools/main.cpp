// tworing: run scenarios from a config file or a preset, and compare
// bifurcation summaries.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "tworing/presets.hpp"
#include "tworing/scenario.hpp"

namespace {

constexpr int kConfigError = 1;
constexpr int kRuntimeError = 2;

void add_run_options(CLI::App* cmd, tworing::RunOverrides& o, std::string& out, bool& no_traj) {
  cmd->add_option("--out", out, "Output directory");
  cmd->add_option("--seed", o.base_seed, "Base seed");
  cmd->add_option("--replications", o.replications, "Replication count")->check(CLI::PositiveNumber);
  cmd->add_option("--parallelism", o.parallelism, "Worker threads")->check(CLI::PositiveNumber);
  cmd->add_flag("--no-trajectories", no_traj, "Skip trajectory CSVs");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Two-ring network traffic simulation"};
  app.require_subcommand(1);

  tworing::RunOverrides overrides;
  std::string out;
  bool no_traj = false;

  std::string config_path;
  auto* run = app.add_subcommand("run", "Run the scenario described by a config file");
  run->add_option("--config", config_path, "Scenario config (YAML)")->required();
  add_run_options(run, overrides, out, no_traj);

  std::string preset;
  auto* pre = app.add_subcommand("preset", "Run a named preset");
  pre->add_option("--preset", preset, "Preset name")
      ->required()
      ->check(CLI::IsMember(tworing::preset_names()));
  add_run_options(pre, overrides, out, no_traj);

  std::vector<std::string> summaries;
  auto* cmp = app.add_subcommand("compare", "Compare bifurcation summaries");
  cmp->add_option("summaries", summaries, "bifurcation.csv files")->required()->expected(2, -1);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kConfigError;
  }
  overrides.write_trajectories = !no_traj;

  try {
    if (*run) {
      tworing::ScenarioConfig c = tworing::load_config(config_path);
      if (!out.empty()) c.output_directory = out;
      overrides.apply(c);
      const auto report = tworing::run_scenario(c);
      for (const auto& l : report.replications) {
        if (!l.ok) fmt::print(stderr, "replication {} failed: {}\n", l.replication, l.error);
      }
      return report.ok() ? 0 : kRuntimeError;
    }
    if (*pre) {
      const int status = tworing::run_preset(preset, out.empty() ? "out" : out, overrides);
      if (status != 0) fmt::print(stderr, "{}: some replications failed\n", preset);
      return status;
    }
    std::vector<std::filesystem::path> paths(summaries.begin(), summaries.end());
    tworing::print_comparison(std::cout, tworing::compare_runs(paths));
    return 0;
  } catch (const tworing::ConfigError& e) {
    fmt::print(stderr, "config error: {}\n", e.what());
    return kConfigError;
  } catch (const std::exception& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return kRuntimeError;
  }
}
