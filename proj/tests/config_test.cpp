#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "tworing/csv.hpp"
#include "tworing/presets.hpp"
#include "tworing/scenario.hpp"

namespace tworing {
namespace {

std::string error_of(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return {};
}

TEST(Config, EmptyFileGivesDefaults) {
  const ScenarioConfig c = parse_config("");
  EXPECT_EQ(c.replications, 6);
  EXPECT_EQ(c.sim.dt, 0.1);
  EXPECT_EQ(c.sim.horizon, 1800.0);
  EXPECT_EQ(c.sim.demand.rate_vph, 180.0);
  EXPECT_EQ(c.sim.geometry.ring_radius[0], 50.0);
  EXPECT_EQ(c.sim.geometry.connector_length, 100.0);
  EXPECT_DOUBLE_EQ(c.sim.geometry.speed_limit, 30.0 / 3.6);
  EXPECT_EQ(c.sim.geometry.detection_range, 30.0);
  EXPECT_EQ(c.sim.human.noise_sd, 0.2);
  EXPECT_EQ(c.sim.human.anticipated_leaders, 3);
  EXPECT_EQ(c.sim.hv, DriverParams::human());
  EXPECT_EQ(c.sim.av, DriverParams::automated());
  EXPECT_FALSE(c.turn_probability.has_value());
  EXPECT_THROW(resolve_setup(c), ConfigError);
}

TEST(Config, MixNotSummingToOneNamesTheKeys) {
  const std::string e = error_of("fleet.mix.hv: 0.5\nfleet.mix.av: 0.4\n");
  EXPECT_NE(e.find("fleet.mix.hv=0.5"), std::string::npos) << e;
  EXPECT_NE(e.find("fleet.mix.av=0.4"), std::string::npos) << e;
  EXPECT_NE(e.find("0.9"), std::string::npos) << e;
}

TEST(Config, KeyLevelDiagnostics) {
  EXPECT_NE(error_of("execution.dt: -0.1\n").find("execution.dt"), std::string::npos);
  EXPECT_NE(error_of("geometry.warp: 3\n").find("geometry.warp: unknown key"), std::string::npos);
  EXPECT_NE(error_of("execution.replications: many\n").find("execution.replications"), std::string::npos);
  EXPECT_NE(error_of("turning.p_turn: 1.5\n").find("turning.p_turn"), std::string::npos);
  EXPECT_NE(error_of("metrics.cadence: 7\n").find("metrics.cadence"), std::string::npos);
  EXPECT_NE(error_of("turning:\n  p_turn: 0.1\nturning.p_turn: 0.2\n").find("more than once"),
            std::string::npos);
  EXPECT_NE(error_of("[1, 2]").find("key-value map"), std::string::npos);
  EXPECT_NE(error_of("a: [\n").find("parse error"), std::string::npos);
}

TEST(Config, NestedAndFlatFormsAgree) {
  const ScenarioConfig a = parse_config("turning:\n  p_turn: 0.15\nfleet:\n  mix:\n    hv: 0\n    cav: 1\n");
  const ScenarioConfig b = parse_config("turning.p_turn: 0.15\nfleet.mix.hv: 0\nfleet.mix.cav: 1\n");
  EXPECT_EQ(a, b);
  EXPECT_EQ(*a.turn_probability, 0.15);
  EXPECT_EQ(a.sim.demand.mix.cav, 1.0);
}

TEST(Config, RadiusSetsTheShortArcUnlessGiven) {
  const ScenarioConfig a = parse_config("geometry.ring_radius: 60\n");
  EXPECT_DOUBLE_EQ(a.sim.geometry.diverge_to_merge, 20.0 * 3.141592653589793);
  const ScenarioConfig b = parse_config("geometry.ring_radius: 60\ngeometry.diverge_to_merge: 70\n");
  EXPECT_EQ(b.sim.geometry.diverge_to_merge, 70.0);
}

TEST(Config, RoundTrip) {
  ScenarioConfig c = parse_config("");
  EXPECT_EQ(parse_config(write_config(c)), c);
  c.name = "odd, name: with # chars";
  c.turn_probability = 0.15;
  c.sim.demand.mix = {0.1, 0.2, 0.3, 0.4};
  c.sim.hv.safe_headway = 1.0 / 3.0;
  c.sim.geometry.diverge_to_merge = 40.0;
  c.base_seed = 18446744073709551615ull;
  c.output_directory = "some dir/out";
  c.write_trajectories = false;
  const ScenarioConfig back = parse_config(write_config(c));
  EXPECT_EQ(back, c);
  EXPECT_EQ(back.name, c.name);
  EXPECT_EQ(back.sim.hv.safe_headway, 1.0 / 3.0);
  EXPECT_EQ(back.base_seed, c.base_seed);
}

TEST(Config, LoadMissingFile) {
  EXPECT_THROW(load_config("/nonexistent/config.yaml"), ConfigError);
}

TEST(Config, FleetTriangleMatchesPureFleets) {
  ScenarioConfig c = parse_config("turning.p_turn: 0\n");
  SimulationSetup s = resolve_setup(c);
  EXPECT_DOUBLE_EQ(fleet_fd(s).jam_density(), 1.0 / 7.0);
  s.demand.mix = {0, 0, 0, 1};
  EXPECT_DOUBLE_EQ(fleet_fd(s).jam_density(), 1.0 / 5.5);
  s.demand.mix = {0.5, 0, 0, 0.5};
  EXPECT_DOUBLE_EQ(fleet_fd(s).jam_density(), 1.0 / 6.25);
}

TEST(Csv, RealFormatting) {
  EXPECT_EQ(csv::real(0.0), "0");
  EXPECT_EQ(csv::real(-0.0), "0");
  EXPECT_EQ(csv::real(1.5), "1.5");
  EXPECT_EQ(csv::real(1.0 / 3.0), "0.333333333");
  EXPECT_EQ(csv::real(123456789012.0), "1.23456789e+11");
  EXPECT_EQ(csv::schema_line("x"), "# schema: x v1");
}

TEST(Csv, BifurcationSummaryRoundTrip) {
  const std::vector<BifurcationRow> rows{
      {"a,b", 0, BifurcationPoint{4, 0.05, 0.07, 0.06}, 0.142857},
      {"a,b", 1, std::nullopt, 0.142857}};
  std::stringstream ss;
  csv::write_bifurcations(ss, rows);
  const auto back = csv::read_bifurcations(ss);
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[0].scenario, "a,b");
  EXPECT_TRUE(back[0].detected);
  EXPECT_EQ(back[0].index, 4);
  EXPECT_DOUBLE_EQ(back[0].mean_density, 0.06);
  EXPECT_NEAR(back[0].ratio_to_jam, 0.06 / 0.142857, 1e-8);
  EXPECT_FALSE(back[1].detected);
}

TEST(Csv, RejectsOtherSchemas) {
  std::stringstream v2("# schema: tworing.bifurcation v2\n");
  EXPECT_THROW(csv::read_bifurcations(v2), csv::FormatError);
  std::stringstream wrong("# schema: tworing.metrics v1\n");
  EXPECT_THROW(csv::read_bifurcations(wrong), csv::FormatError);
  std::stringstream bad(
      "# schema: tworing.bifurcation v1\nscenario,replication,detected,index,k1,k2,K,ratio_to_jam\n"
      "s,0,maybe,,,,,\n");
  EXPECT_THROW(csv::read_bifurcations(bad), csv::FormatError);
}

TEST(Csv, TrajectoryHeader) {
  TrajectoryTable t;
  t.records.push_back({0.1, 3, VehicleClass::CAV, 2, 12.25, 8.0, -0.5});
  std::stringstream ss;
  csv::write_trajectories(ss, t);
  EXPECT_EQ(ss.str(),
            "# schema: tworing.trajectory v1\n"
            "time_s,vehicle_id,class,link_id,position_m,speed_mps,accel_mps2\n"
            "0.1,3,CAV,2,12.25,8,-0.5\n");
}

TEST(Presets, Definitions) {
  EXPECT_EQ(preset_names().size(), 10u);
  for (const auto& n : preset_names()) {
    for (const auto& c : preset_scenarios(n)) EXPECT_NO_THROW(resolve_setup(c)) << n;
  }
  EXPECT_EQ(*preset_scenarios("scenario_I_av")[0].turn_probability, 0.0);
  EXPECT_EQ(*preset_scenarios("scenario_II_cav")[0].turn_probability, 0.15);
  EXPECT_EQ(preset_scenarios("scenario_III_cav")[0].sim.demand.mix.cav, 1.0);
  EXPECT_EQ(preset_scenarios("scenario_III_hv")[0].replications, 6);
  const auto sweep = preset_scenarios("penetration_sweep_connected");
  ASSERT_EQ(sweep.size(), 5u);
  EXPECT_EQ(sweep[2].name, "penetration_sweep_connected_cav50");
  EXPECT_EQ(sweep[2].sim.demand.mix.cav, 0.5);
  EXPECT_EQ(sweep[2].sim.demand.mix.connected_hv, 0.5);
  EXPECT_EQ(preset_scenarios("penetration_sweep_unconnected")[1].sim.demand.mix.hv, 0.75);
  EXPECT_THROW(preset_scenarios("scenario_IV"), ConfigError);
}

class PresetRun : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = std::filesystem::temp_directory_path() /
           ("tworing_test_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    std::filesystem::remove_all(dir_);
  }
  void TearDown() override { std::filesystem::remove_all(dir_); }
  std::filesystem::path dir_;
};

TEST_F(PresetRun, ScenarioOneWritesItsFiles) {
  ScenarioConfig c = preset_scenarios("scenario_I_hv")[0];
  c.sim.horizon = 120.0;
  c.replications = 2;
  c.output_directory = dir_;
  const ScenarioReport r = run_scenario(c);
  EXPECT_TRUE(r.ok());
  EXPECT_TRUE(r.bifurcations.empty());
  const auto out = dir_ / "scenario_I_hv";
  for (const char* f : {"bifurcation.csv", "replications.csv", "fd_theory.csv", "equilibria.csv",
                        "events_r00.csv", "metrics_r01.csv", "phase_r00.csv", "trajectories_r01.csv"}) {
    EXPECT_TRUE(std::filesystem::exists(out / f)) << f;
  }
  std::ifstream ev(out / "events_r00.csv");
  std::string line;
  while (std::getline(ev, line)) EXPECT_EQ(line.find("switch"), std::string::npos);
}

TEST_F(PresetRun, CompareRuns) {
  ScenarioConfig c = preset_scenarios("scenario_III_hv")[0];
  c.sim.horizon = 300.0;
  c.replications = 2;
  c.output_directory = dir_;
  c.write_trajectories = false;
  run_scenario(c);
  const auto summary = dir_ / "scenario_III_hv" / "bifurcation.csv";
  const auto rows = compare_runs({summary, summary});
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[1].delta_k, 0.0);
  EXPECT_EQ(rows[1].delta_ratio, 0.0);
  EXPECT_EQ(rows[0].mean_k, rows[1].mean_k);

  const auto none = dir_ / "none.csv";
  {
    std::ofstream os(none);
    csv::write_bifurcations(os, std::vector<BifurcationRow>{{"x", 0, std::nullopt, 0.1}});
  }
  const auto mixed = compare_runs({summary, none});
  EXPECT_EQ(mixed.back().detected, 0);
  std::stringstream table;
  print_comparison(table, mixed);
  EXPECT_NE(table.str().find("undetected"), std::string::npos);

  const auto old = dir_ / "old.csv";
  std::ofstream(old) << "# schema: tworing.bifurcation v0\n";
  EXPECT_THROW(compare_runs({summary, old}), csv::FormatError);
  EXPECT_THROW(compare_runs({summary}), std::invalid_argument);
}

}  // namespace
}  // namespace tworing
