#include <benchmark/benchmark.h>

#include "tworing/cf_models.hpp"
#include "tworing/macro_model.hpp"
#include "tworing/metrics.hpp"
#include "tworing/network.hpp"
#include "tworing/presets.hpp"
#include "tworing/scenario.hpp"
#include "tworing/sim_engine.hpp"

namespace {

using namespace tworing;

SimulationSetup setup_for(const char* preset, double horizon) {
  SimulationSetup s = resolve_setup(preset_scenarios(preset).front());
  s.horizon = horizon;
  return s;
}

void BM_IdmAccel(benchmark::State& state) {
  const DriverParams p = DriverParams::human();
  LeaderObservation o{20.0, 1.0, 7.0, 1, false};
  double v = 8.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(idm_accel(p, v, o));
    o.gap += 1e-9;
  }
}
BENCHMARK(BM_IdmAccel);

void BM_EnumerateEquilibria(benchmark::State& state) {
  const TriangularFd fd = fd_from_driver_params(1.5, 2.0, 5.0, 30.0 / 3.6);
  double K = 0.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(enumerate_equilibria(fd, K));
    K += 1e-3;
    if (K > fd.jam_density()) K = 0.0;
  }
}
BENCHMARK(BM_EnumerateEquilibria);

// A warmed-up network, then steps timed one at a time.
void BM_SimulationStep(benchmark::State& state, const char* preset) {
  const SimulationSetup s = setup_for(preset, 1800.0);
  Simulation sim(s, 20210601, {.mirror = false, .record_trajectories = false});
  for (int i = 0; i < 3000; ++i) sim.step();
  for (auto _ : state) {
    if (sim.finished()) {
      state.SkipWithError("horizon reached");
      break;
    }
    sim.step();
  }
}
BENCHMARK_CAPTURE(BM_SimulationStep, hv, "scenario_II_hv")->Iterations(10000);
BENCHMARK_CAPTURE(BM_SimulationStep, cav, "scenario_III_cav")->Iterations(10000);

void BM_ScanLeaders(benchmark::State& state) {
  const SimulationSetup s = setup_for("scenario_II_hv", 1800.0);
  Simulation sim(s, 20210601, {.mirror = false, .record_trajectories = false});
  for (int i = 0; i < 3000; ++i) sim.step();
  const int n = static_cast<int>(sim.world().vehicles().size());
  int id = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(scan_leaders(sim.world(), id, 3));
    id = (id + 1) % n;
  }
}
BENCHMARK(BM_ScanLeaders);

void BM_Replication(benchmark::State& state) {
  const SimulationSetup s = setup_for("scenario_II_av", 300.0);
  for (auto _ : state) benchmark::DoNotOptimize(run_replication(s, 20210601));
}
BENCHMARK(BM_Replication)->Unit(benchmark::kMillisecond);

void BM_EdieSeries(benchmark::State& state) {
  const SimulationSetup s = setup_for("scenario_II_hv", 600.0);
  const ReplicationOutput out = run_replication(s, 20210601);
  const Network net = build_two_ring(s.geometry);
  for (auto _ : state) benchmark::DoNotOptimize(build_edie_series(out.trajectories, net, 10.0, 600.0));
  state.counters["records"] = static_cast<double>(out.trajectories.records.size());
}
BENCHMARK(BM_EdieSeries)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
