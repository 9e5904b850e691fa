#pragma once

// Scenario configuration: a flat "section.key: value" file (nested maps are
// accepted and flattened). Unknown keys are rejected; every default equals
// the standard experiment setup except the turning probability, which must
// be given before a run.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "tworing/macro_model.hpp"
#include "tworing/sim_engine.hpp"

namespace tworing {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ScenarioConfig {
  std::string name = "custom";
  SimulationSetup sim;
  /// Unset until the file (or a preset) supplies turning.p_turn.
  std::optional<double> turn_probability;
  int replications = 6;
  std::uint64_t base_seed = 20210601;
  int parallelism = 1;
  double cadence = 10.0;
  double smoothing_window = 60.0;
  std::filesystem::path output_directory = "out";
  bool write_trajectories = true;

  friend bool operator==(const ScenarioConfig&, const ScenarioConfig&);
};

/// Parses configuration text. Throws ConfigError naming the offending key.
ScenarioConfig parse_config(const std::string& text);
/// Reads and parses a file. Throws ConfigError when it cannot be read.
ScenarioConfig load_config(const std::filesystem::path& path);
/// Serializes every key; parse_config(write_config(c)) == c.
std::string write_config(const ScenarioConfig& c);

/// Checks everything a run needs (including turning.p_turn) and returns the
/// simulation setup with the turning probability applied. Throws ConfigError.
SimulationSetup resolve_setup(const ScenarioConfig& c);

/// Mix-weighted triangle: spacings are averaged over the class shares.
TriangularFd fleet_fd(const SimulationSetup& s);

}  // namespace tworing
