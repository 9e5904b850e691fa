#include "tworing/presets.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <mutex>
#include <ostream>

#include <boost/math/statistics/univariate_statistics.hpp>
#include <fmt/format.h>
#include <fmt/ostream.h>

namespace tworing {

namespace {

enum class Rest { HV, ConnectedHV, AV };

ScenarioConfig base(std::string name, double p_turn, double cav, Rest rest) {
  ScenarioConfig c;
  c.name = std::move(name);
  c.turn_probability = p_turn;
  ClassMix& m = c.sim.demand.mix;
  m = {0.0, 0.0, 0.0, cav};
  switch (rest) {
    case Rest::HV: m.hv = 1.0 - cav; break;
    case Rest::ConnectedHV: m.connected_hv = 1.0 - cav; break;
    case Rest::AV: m.av = 1.0 - cav; break;
  }
  return c;
}

std::vector<ScenarioConfig> sweep(const std::string& name, Rest rest) {
  std::vector<ScenarioConfig> out;
  for (int pct = 0; pct <= 100; pct += 25) {
    out.push_back(base(fmt::format("{}_cav{}", name, pct), 0.5, pct / 100.0, rest));
  }
  return out;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error(fmt::format("cannot write {}", path.string()));
  return os;
}

double sample_sd(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  return std::sqrt(boost::math::statistics::sample_variance(v));
}

}  // namespace

const std::vector<std::string>& preset_names() {
  static const std::vector<std::string> names{
      "scenario_I_hv",   "scenario_I_av",   "scenario_II_hv",
      "scenario_II_av",  "scenario_II_cav", "scenario_III_hv",
      "scenario_III_av", "scenario_III_cav", "penetration_sweep_unconnected",
      "penetration_sweep_connected"};
  return names;
}

std::vector<ScenarioConfig> preset_scenarios(std::string_view name) {
  const std::string n(name);
  if (n == "scenario_I_hv") return {base(n, 0.0, 0.0, Rest::HV)};
  if (n == "scenario_I_av") return {base(n, 0.0, 0.0, Rest::AV)};
  if (n == "scenario_II_hv") return {base(n, 0.15, 0.0, Rest::HV)};
  if (n == "scenario_II_av") return {base(n, 0.15, 0.0, Rest::AV)};
  if (n == "scenario_II_cav") return {base(n, 0.15, 1.0, Rest::AV)};
  if (n == "scenario_III_hv") return {base(n, 0.5, 0.0, Rest::HV)};
  if (n == "scenario_III_av") return {base(n, 0.5, 0.0, Rest::AV)};
  if (n == "scenario_III_cav") return {base(n, 0.5, 1.0, Rest::AV)};
  if (n == "penetration_sweep_unconnected") return sweep(n, Rest::HV);
  if (n == "penetration_sweep_connected") return sweep(n, Rest::ConnectedHV);
  throw ConfigError(fmt::format("unknown preset '{}'", n));
}

bool ScenarioReport::ok() const {
  return std::all_of(replications.begin(), replications.end(),
                     [](const csv::ReplicationLine& l) { return l.ok; });
}

ScenarioReport run_scenario(const ScenarioConfig& config) {
  const SimulationSetup setup = resolve_setup(config);
  const TriangularFd fd = fleet_fd(setup);
  const Network net = build_two_ring(setup.geometry);
  const auto dir = config.output_directory / config.name;
  std::filesystem::create_directories(dir);

  const ReplicationPlan plan = make_replication_plan(config.replications, config.base_seed);
  std::vector<csv::ReplicationLine> lines(plan.seeds.size());
  std::vector<ReplicationPhase> phases(plan.seeds.size());
  std::mutex mu;

  // Trajectories are always recorded: the metrics are built from them.
  for_each_replication(setup, plan, config.parallelism, [&](ReplicationResult&& r) {
    csv::ReplicationLine line;
    line.replication = r.index;
    line.seed = r.seed;
    ReplicationPhase phase{r.index, {}};
    if (!r.ok()) {
      line.ok = false;
      line.error = r.error;
    } else {
      const ReplicationOutput& out = *r.output;
      const EdieSeries series = build_edie_series(out.trajectories, net, config.cadence, setup.horizon);
      const PhasePath raw = phase_path(series);
      phase.smoothed = smooth_path(raw, config.smoothing_window);
      line.max_network_flow = max_flow(series.network);
      const double tail = std::max(0.0, setup.horizon - 300.0);
      line.final_density_ring1 = mean_density(series.ring1, tail, setup.horizon);
      line.final_density_ring2 = mean_density(series.ring2, tail, setup.horizon);
      line.inserted = out.inserted[0] + out.inserted[1];
      line.unserved = out.unserved[0] + out.unserved[1];
      line.overlaps = out.overlap_count;
      line.emergency_brakes = out.emergency_count;
      line.merge_stops = out.merge_stop_count;

      const std::string tag = fmt::format("r{:02d}", r.index);
      if (config.write_trajectories) {
        auto os = open_out(dir / fmt::format("trajectories_{}.csv", tag));
        csv::write_trajectories(os, out.trajectories);
      }
      auto ev = open_out(dir / fmt::format("events_{}.csv", tag));
      csv::write_events(ev, out.events);
      auto me = open_out(dir / fmt::format("metrics_{}.csv", tag));
      csv::write_metrics(me, series);
      auto ph = open_out(dir / fmt::format("phase_{}.csv", tag));
      csv::write_phase_path(ph, raw, phase.smoothed);
    }
    std::lock_guard lock(mu);
    lines[static_cast<std::size_t>(r.index)] = std::move(line);
    phases[static_cast<std::size_t>(r.index)] = std::move(phase);
  });

  ScenarioReport report;
  report.name = config.name;
  std::vector<ReplicationPhase> done;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (lines[i].ok) done.push_back(phases[i]);
    report.max_network_flow = std::max(report.max_network_flow, lines[i].max_network_flow);
  }
  // Without turning there is no route choice and nothing to detect.
  if (setup.geometry.turn_probability > 0.0) {
    report.bifurcations = bifurcation_summary(config.name, done, fd.jam_density());
  }
  report.replications = std::move(lines);

  auto bif = open_out(dir / "bifurcation.csv");
  csv::write_bifurcations(bif, report.bifurcations);
  auto reps = open_out(dir / "replications.csv");
  csv::write_replications(reps, report.replications);
  auto fdc = open_out(dir / "fd_theory.csv");
  csv::write_fd_curve(fdc, config.name, fd);
  auto eq = open_out(dir / "equilibria.csv");
  csv::write_equilibria(eq, config.name, fd);
  return report;
}

void RunOverrides::apply(ScenarioConfig& c) const {
  if (base_seed) c.base_seed = *base_seed;
  if (replications) c.replications = *replications;
  if (parallelism) c.parallelism = *parallelism;
  if (!write_trajectories) c.write_trajectories = false;
}

int run_preset(std::string_view name, const std::filesystem::path& out_dir,
               const RunOverrides& overrides) {
  int status = 0;
  for (ScenarioConfig c : preset_scenarios(name)) {
    c.output_directory = out_dir;
    overrides.apply(c);
    if (!run_scenario(c).ok()) status = 2;
  }
  return status;
}

std::vector<ComparisonRow> compare_runs(const std::vector<std::filesystem::path>& paths) {
  if (paths.size() < 2) throw std::invalid_argument("compare needs at least two summaries");
  std::vector<ComparisonRow> out;
  for (const auto& path : paths) {
    std::ifstream is(path);
    if (!is) throw csv::FormatError(fmt::format("cannot read {}", path.string()));
    std::vector<csv::SummaryRow> rows;
    try {
      rows = csv::read_bifurcations(is);
    } catch (const csv::FormatError& e) {
      throw csv::FormatError(fmt::format("{}: {}", path.string(), e.what()));
    }
    std::vector<std::string> order;
    std::map<std::string, std::vector<const csv::SummaryRow*>> groups;
    for (const auto& r : rows) {
      auto [it, fresh] = groups.try_emplace(r.scenario);
      if (fresh) order.push_back(r.scenario);
      it->second.push_back(&r);
    }
    for (const auto& name : order) {
      ComparisonRow c;
      c.source = path.string();
      c.scenario = name;
      std::vector<double> ks, ratios;
      for (const auto* r : groups[name]) {
        ++c.replications;
        if (!r->detected) continue;
        ks.push_back(r->mean_density);
        ratios.push_back(r->ratio_to_jam);
      }
      c.detected = static_cast<int>(ks.size());
      if (!ks.empty()) {
        c.mean_k = boost::math::statistics::mean(ks);
        c.mean_ratio = boost::math::statistics::mean(ratios);
        c.sd_k = sample_sd(ks);
        c.sd_ratio = sample_sd(ratios);
      }
      out.push_back(std::move(c));
    }
  }
  const ComparisonRow& ref = out.front();
  for (auto& c : out) {
    if (c.detected == 0 || ref.detected == 0) continue;
    c.delta_k = c.mean_k - ref.mean_k;
    c.delta_ratio = c.mean_ratio - ref.mean_ratio;
  }
  return out;
}

void print_comparison(std::ostream& os, const std::vector<ComparisonRow>& rows) {
  fmt::print(os, "{:<40} {:>9} {:>12} {:>12} {:>12} {:>12} {:>12} {:>12}\n", "scenario",
             "detected", "mean_K", "sd_K", "mean_ratio", "sd_ratio", "delta_K", "delta_ratio");
  const bool ref_detected = !rows.empty() && rows.front().detected > 0;
  for (const auto& r : rows) {
    const std::string det = fmt::format("{}/{}", r.detected, r.replications);
    if (r.detected == 0) {
      fmt::print(os, "{:<40} {:>9} {:>12} {:>12} {:>12} {:>12} {:>12} {:>12}\n", r.scenario, det,
                 "undetected", "-", "-", "-", "-", "-");
    } else if (!ref_detected) {
      fmt::print(os, "{:<40} {:>9} {:>12.6f} {:>12.6f} {:>12.4f} {:>12.4f} {:>12} {:>12}\n",
                 r.scenario, det, r.mean_k, r.sd_k, r.mean_ratio, r.sd_ratio, "-", "-");
    } else {
      fmt::print(os, "{:<40} {:>9} {:>12.6f} {:>12.6f} {:>12.4f} {:>12.4f} {:>12.6f} {:>12.4f}\n",
                 r.scenario, det, r.mean_k, r.sd_k, r.mean_ratio, r.sd_ratio, r.delta_k,
                 r.delta_ratio);
    }
  }
}

}  // namespace tworing
