#pragma once

// Named experiment presets and the batch runner that turns a scenario into
// its CSV set.

#include <filesystem>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tworing/csv.hpp"
#include "tworing/scenario.hpp"

namespace tworing {

/// All preset names, in a fixed order.
const std::vector<std::string>& preset_names();

/// The scenarios of a preset; a sweep yields one scenario per penetration
/// level. Throws ConfigError for an unknown name.
std::vector<ScenarioConfig> preset_scenarios(std::string_view name);

struct ScenarioReport {
  std::string name;
  std::vector<csv::ReplicationLine> replications;
  std::vector<BifurcationRow> bifurcations;
  double max_network_flow = 0.0;

  bool ok() const;
};

/// Runs every replication of `config` and writes, under
/// <output_directory>/<name>/: per-replication trajectories (optional),
/// events, metrics and phase paths, plus bifurcation.csv,
/// replications.csv, fd_theory.csv and equilibria.csv.
/// Throws ConfigError on an incomplete configuration.
ScenarioReport run_scenario(const ScenarioConfig& config);

/// Command-line overrides applied on top of a scenario.
struct RunOverrides {
  std::optional<std::uint64_t> base_seed;
  std::optional<int> replications;
  std::optional<int> parallelism;
  bool write_trajectories = true;

  void apply(ScenarioConfig& c) const;
};

/// Runs a preset under `out_dir`. Returns 0 on success, 2 if any
/// replication failed; throws ConfigError for an unknown preset.
int run_preset(std::string_view name, const std::filesystem::path& out_dir,
               const RunOverrides& overrides = {});

struct ComparisonRow {
  std::string source;
  std::string scenario;
  int replications = 0;
  int detected = 0;
  double mean_k = 0.0;
  double sd_k = 0.0;
  double mean_ratio = 0.0;
  double sd_ratio = 0.0;
  /// Gaps to the first row; zero when either side is undetected.
  double delta_k = 0.0;
  double delta_ratio = 0.0;
};

/// Per-(file, scenario) statistics over detected rows, in input order.
/// Throws csv::FormatError on an unreadable or incompatible summary and
/// std::invalid_argument for fewer than two paths.
std::vector<ComparisonRow> compare_runs(const std::vector<std::filesystem::path>& paths);

/// Fixed-width table; undetected scenarios print "undetected".
void print_comparison(std::ostream& os, const std::vector<ComparisonRow>& rows);

}  // namespace tworing
