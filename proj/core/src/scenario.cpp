#include "tworing/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <numbers>
#include <sstream>

#include <fmt/format.h>
#include <yaml-cpp/yaml.h>

namespace tworing {

namespace {

struct Key {
  std::string name;
  std::function<void(ScenarioConfig&, const YAML::Node&)> set;
  std::function<std::optional<std::string>(const ScenarioConfig&)> get;
};

std::string shortest(double x) { return fmt::format("{}", x); }

template <class T>
T scalar(const YAML::Node& n, const char* what) {
  try {
    return n.as<T>();
  } catch (const YAML::Exception&) {
    throw ConfigError(fmt::format("expected {} but got '{}'", what, n.Scalar()));
  }
}

template <class Access>
Key real_key(std::string name, Access access) {
  return {std::move(name),
          [access](ScenarioConfig& c, const YAML::Node& n) { access(c) = scalar<double>(n, "a number"); },
          [access](const ScenarioConfig& c) {
            return std::optional<std::string>(shortest(access(c)));
          }};
}

template <class Access>
Key int_key(std::string name, Access access) {
  return {std::move(name),
          [access](ScenarioConfig& c, const YAML::Node& n) { access(c) = scalar<int>(n, "an integer"); },
          [access](const ScenarioConfig& c) {
            return std::optional<std::string>(std::to_string(access(c)));
          }};
}

const std::vector<Key>& keys() {
  static const std::vector<Key> table = [] {
    using C = ScenarioConfig;
    std::vector<Key> k;
    k.push_back({"scenario.name",
                 [](C& c, const YAML::Node& n) { c.name = scalar<std::string>(n, "a string"); },
                 [](const C& c) { return std::optional<std::string>(c.name); }});
    k.push_back({"geometry.ring_radius",
                 [](C& c, const YAML::Node& n) {
                   const double r = scalar<double>(n, "a number");
                   c.sim.geometry.ring_radius = {r, r};
                 },
                 [](const C& c) { return std::optional<std::string>(shortest(c.sim.geometry.ring_radius[0])); }});
    k.push_back(real_key("geometry.diverge_to_merge", [](auto& c) -> auto& { return c.sim.geometry.diverge_to_merge; }));
    k.push_back(real_key("geometry.connector_length", [](auto& c) -> auto& { return c.sim.geometry.connector_length; }));
    k.push_back(real_key("geometry.speed_limit", [](auto& c) -> auto& { return c.sim.geometry.speed_limit; }));
    k.push_back(real_key("geometry.merge_zone_length", [](auto& c) -> auto& { return c.sim.geometry.merge_zone_length; }));
    k.push_back(real_key("geometry.entry_offset", [](auto& c) -> auto& { return c.sim.geometry.entry_offset; }));
    k.push_back(real_key("demand.rate_vph", [](auto& c) -> auto& { return c.sim.demand.rate_vph; }));
    k.push_back(real_key("demand.horizon", [](auto& c) -> auto& { return c.sim.horizon; }));
    k.push_back(real_key("fleet.mix.hv", [](auto& c) -> auto& { return c.sim.demand.mix.hv; }));
    k.push_back(real_key("fleet.mix.connected_hv", [](auto& c) -> auto& { return c.sim.demand.mix.connected_hv; }));
    k.push_back(real_key("fleet.mix.av", [](auto& c) -> auto& { return c.sim.demand.mix.av; }));
    k.push_back(real_key("fleet.mix.cav", [](auto& c) -> auto& { return c.sim.demand.mix.cav; }));
    k.push_back(real_key("fleet.vehicle_length", [](auto& c) -> auto& { return c.sim.vehicle_length; }));
    for (const char* cls : {"hv", "av"}) {
      const bool human = std::string_view(cls) == "hv";
      auto p = [human](auto& c) -> auto& { return human ? c.sim.hv : c.sim.av; };
      const std::string pre = fmt::format("fleet.{}.", cls);
      k.push_back(real_key(pre + "desired_speed", [p](auto& c) -> auto& { return p(c).desired_speed; }));
      k.push_back(real_key(pre + "safe_headway", [p](auto& c) -> auto& { return p(c).safe_headway; }));
      k.push_back(real_key(pre + "max_accel", [p](auto& c) -> auto& { return p(c).max_accel; }));
      k.push_back(real_key(pre + "comfort_decel", [p](auto& c) -> auto& { return p(c).comfort_decel; }));
      k.push_back(real_key(pre + "jam_gap", [p](auto& c) -> auto& { return p(c).jam_gap; }));
    }
    k.push_back(real_key("human.reaction_time.mean", [](auto& c) -> auto& { return c.sim.human.reaction_time.mean; }));
    k.push_back(real_key("human.reaction_time.scale", [](auto& c) -> auto& { return c.sim.human.reaction_time.scale; }));
    k.push_back(real_key("human.reaction_time.shape", [](auto& c) -> auto& { return c.sim.human.reaction_time.shape; }));
    k.push_back(real_key("human.reaction_time.min", [](auto& c) -> auto& { return c.sim.human.reaction_time.min; }));
    k.push_back(real_key("human.reaction_time.max", [](auto& c) -> auto& { return c.sim.human.reaction_time.max; }));
    k.push_back(real_key("human.noise_sd", [](auto& c) -> auto& { return c.sim.human.noise_sd; }));
    k.push_back(int_key("human.anticipated_leaders", [](auto& c) -> auto& { return c.sim.human.anticipated_leaders; }));
    k.push_back({"turning.p_turn",
                 [](C& c, const YAML::Node& n) { c.turn_probability = scalar<double>(n, "a number"); },
                 [](const C& c) {
                   return c.turn_probability ? std::optional<std::string>(shortest(*c.turn_probability))
                                             : std::nullopt;
                 }});
    k.push_back(real_key("cooperation.detection_range", [](auto& c) -> auto& { return c.sim.geometry.detection_range; }));
    k.push_back(real_key("cooperation.headway_factor", [](auto& c) -> auto& { return c.sim.cooperation.headway_factor; }));
    k.push_back(real_key("cooperation.gap_floor", [](auto& c) -> auto& { return c.sim.cooperation.gap_floor; }));
    k.push_back(real_key("execution.dt", [](auto& c) -> auto& { return c.sim.dt; }));
    k.push_back(int_key("execution.replications", [](auto& c) -> auto& { return c.replications; }));
    k.push_back({"execution.base_seed",
                 [](C& c, const YAML::Node& n) { c.base_seed = scalar<std::uint64_t>(n, "an unsigned integer"); },
                 [](const C& c) { return std::optional<std::string>(std::to_string(c.base_seed)); }});
    k.push_back(int_key("execution.parallelism", [](auto& c) -> auto& { return c.parallelism; }));
    k.push_back(real_key("execution.lookahead", [](auto& c) -> auto& { return c.sim.lookahead; }));
    k.push_back(real_key("metrics.cadence", [](auto& c) -> auto& { return c.cadence; }));
    k.push_back(real_key("metrics.smoothing_window", [](auto& c) -> auto& { return c.smoothing_window; }));
    k.push_back({"output.directory",
                 [](C& c, const YAML::Node& n) { c.output_directory = scalar<std::string>(n, "a path"); },
                 [](const C& c) { return std::optional<std::string>(c.output_directory.string()); }});
    k.push_back({"output.trajectories",
                 [](C& c, const YAML::Node& n) { c.write_trajectories = scalar<bool>(n, "true or false"); },
                 [](const C& c) { return std::optional<std::string>(c.write_trajectories ? "true" : "false"); }});
    return k;
  }();
  return table;
}

void flatten(const YAML::Node& node, const std::string& prefix, std::map<std::string, YAML::Node>& out) {
  for (const auto& kv : node) {
    const std::string key = prefix.empty() ? kv.first.as<std::string>()
                                           : prefix + "." + kv.first.as<std::string>();
    const YAML::Node& v = kv.second;
    if (v.IsMap()) {
      flatten(v, key, out);
    } else if (v.IsScalar()) {
      if (out.count(key)) throw ConfigError(fmt::format("{}: given more than once", key));
      out.emplace(key, v);
    } else {
      throw ConfigError(fmt::format("{}: expected a scalar value", key));
    }
  }
}

void check(bool ok, std::string_view key, std::string_view what) {
  if (!ok) throw ConfigError(fmt::format("{}: {}", key, what));
}

void validate(const ScenarioConfig& c) {
  const auto& s = c.sim;
  const auto& g = s.geometry;
  check(g.ring_radius[0] > 0.0, "geometry.ring_radius", "must be positive");
  check(g.connector_length > 0.0, "geometry.connector_length", "must be positive");
  check(g.speed_limit > 0.0, "geometry.speed_limit", "must be positive");
  check(g.merge_zone_length > 0.0, "geometry.merge_zone_length", "must be positive");
  check(g.detection_range > 0.0, "cooperation.detection_range", "must be positive");
  check(g.entry_offset >= 0.0, "geometry.entry_offset", "must be non-negative");
  check(s.demand.rate_vph >= 0.0, "demand.rate_vph", "must be non-negative");
  check(s.horizon > 0.0, "demand.horizon", "must be positive");
  check(s.dt > 0.0, "execution.dt", "must be positive");
  check(s.vehicle_length > 0.0, "fleet.vehicle_length", "must be positive");
  const ClassMix& m = s.demand.mix;
  for (auto [key, v] : {std::pair{"fleet.mix.hv", m.hv}, std::pair{"fleet.mix.connected_hv", m.connected_hv},
                        std::pair{"fleet.mix.av", m.av}, std::pair{"fleet.mix.cav", m.cav}}) {
    check(v >= 0.0, key, "must be non-negative");
  }
  const double sum = m.hv + m.connected_hv + m.av + m.cav;
  if (std::abs(sum - 1.0) > 1e-9) {
    throw ConfigError(fmt::format(
        "fleet.mix.hv={}, fleet.mix.connected_hv={}, fleet.mix.av={}, fleet.mix.cav={}: shares sum to {}, not 1",
        m.hv, m.connected_hv, m.av, m.cav, sum));
  }
  if (c.turn_probability) {
    check(*c.turn_probability >= 0.0 && *c.turn_probability <= 1.0, "turning.p_turn", "must lie in [0, 1]");
  }
  check(c.replications >= 0, "execution.replications", "must be non-negative");
  check(c.parallelism >= 1, "execution.parallelism", "must be at least 1");
  check(c.cadence > 0.0, "metrics.cadence", "must be positive");
  check(c.smoothing_window > 0.0, "metrics.smoothing_window", "must be positive");
  const double bins = s.horizon / c.cadence;
  check(std::abs(bins - std::round(bins)) <= 1e-9 * std::max(1.0, bins), "metrics.cadence",
        "must divide demand.horizon");
  const double w = c.smoothing_window / c.cadence;
  check(w >= 1.0 - 1e-9 && std::abs(w - std::round(w)) <= 1e-9 * w, "metrics.smoothing_window",
        "must be a positive multiple of metrics.cadence");

  SimulationSetup probe = s;
  probe.geometry.turn_probability = c.turn_probability.value_or(0.0);
  try {
    probe.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

}  // namespace

bool operator==(const ScenarioConfig& a, const ScenarioConfig& b) {
  return write_config(a) == write_config(b);
}

ScenarioConfig parse_config(const std::string& text) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::Exception& e) {
    throw ConfigError(fmt::format("parse error: {}", e.what()));
  }
  ScenarioConfig c;
  if (root.IsNull()) {
    validate(c);
    return c;
  }
  if (!root.IsMap()) throw ConfigError("configuration must be a key-value map");

  std::map<std::string, YAML::Node> flat;
  flatten(root, "", flat);
  for (const auto& [name, node] : flat) {
    const auto it = std::find_if(keys().begin(), keys().end(), [&](const Key& k) { return k.name == name; });
    if (it == keys().end()) throw ConfigError(fmt::format("{}: unknown key", name));
    try {
      it->set(c, node);
    } catch (const ConfigError& e) {
      throw ConfigError(fmt::format("{}: {}", name, e.what()));
    }
  }
  // The short arc follows the radius unless given explicitly.
  if (flat.count("geometry.ring_radius") && !flat.count("geometry.diverge_to_merge")) {
    c.sim.geometry.diverge_to_merge = 2.0 * std::numbers::pi * c.sim.geometry.ring_radius[0] / 6.0;
  }
  validate(c);
  return c;
}

ScenarioConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("{}: cannot open configuration", path.string()));
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string write_config(const ScenarioConfig& c) {
  YAML::Emitter out;
  out << YAML::BeginMap;
  for (const Key& k : keys()) {
    if (auto v = k.get(c)) out << YAML::Key << k.name << YAML::Value << *v;
  }
  out << YAML::EndMap;
  return std::string(out.c_str()) + "\n";
}

SimulationSetup resolve_setup(const ScenarioConfig& c) {
  validate(c);
  if (!c.turn_probability) throw ConfigError("turning.p_turn: required (no default)");
  SimulationSetup s = c.sim;
  s.geometry.turn_probability = *c.turn_probability;
  return s;
}

TriangularFd fleet_fd(const SimulationSetup& s) {
  const ClassMix& m = s.demand.mix;
  const double human = m.hv + m.connected_hv;
  const double automated = m.av + m.cav;
  const double total = human + automated;
  const double wh = total > 0.0 ? human / total : 1.0;
  const double wa = 1.0 - wh;
  const double lim = s.geometry.speed_limit;
  const double v = wh * std::min(s.hv.desired_speed, lim) + wa * std::min(s.av.desired_speed, lim);
  const double headway = wh * s.hv.safe_headway + wa * s.av.safe_headway;
  const double jam_gap = wh * s.hv.jam_gap + wa * s.av.jam_gap;
  return fd_from_driver_params(headway, jam_gap, s.vehicle_length, v);
}

}  // namespace tworing
