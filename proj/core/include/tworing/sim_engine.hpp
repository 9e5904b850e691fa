#pragma once

// Fixed-step simulation of the two-ring network: synchronous acceleration
// update, ballistic integration, route-following link transfer, demand
// insertion, and trajectory/event recording. Replications are independent
// and may run on several threads.

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "tworing/cf_models.hpp"
#include "tworing/history.hpp"
#include "tworing/network.hpp"
#include "tworing/random.hpp"
#include "tworing/trajectory.hpp"

namespace tworing {

/// Skew-normal reaction time, rejected outside [min, max]. The location is
/// chosen so the untruncated mean equals `mean`. scale == 0 gives a constant.
struct ReactionTimeDistribution {
  double mean = 1.2;
  double scale = 0.3;
  double shape = 3.0;
  double min = 0.3;
  double max = 3.0;

  friend bool operator==(const ReactionTimeDistribution&, const ReactionTimeDistribution&) = default;
};

double sample_reaction_time(Rng& rng, const ReactionTimeDistribution& d);

struct HumanConfig {
  ReactionTimeDistribution reaction_time;
  double noise_sd = 0.2;
  int anticipated_leaders = 3;

  friend bool operator==(const HumanConfig&, const HumanConfig&) = default;
};

struct SimulationSetup {
  GeometryConfig geometry;
  Demand demand;
  DriverParams hv = DriverParams::human();
  DriverParams av = DriverParams::automated();
  double vehicle_length = 5.0;
  HumanConfig human;
  CooperationRule cooperation;
  double horizon = 1800.0;
  double dt = 0.1;
  double lookahead = kDefaultLookahead;

  /// Throws std::invalid_argument on any inconsistent value.
  void validate() const;
};

class SimulationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RunOptions {
  /// Run the ring-swapped twin: ring insertion order reversed and the ring
  /// key of every random stream swapped.
  bool mirror = false;
  bool record_trajectories = true;
};

struct ReplicationOutput {
  int replication = 0;
  std::uint64_t seed = 0;
  TrajectoryTable trajectories;
  EventLog events;
  std::array<int, 2> inserted{};
  std::array<int, 2> unserved{};
  int overlap_count = 0;
  int emergency_count = 0;
  int merge_stop_count = 0;
  /// Largest number of link boundaries any vehicle crossed in one step.
  int max_boundary_crossings = 0;
};

class SimClock {
 public:
  SimClock(double dt, double horizon);
  double dt() const { return dt_; }
  int steps() const { return steps_; }
  double time_at(int n) const { return static_cast<double>(n) * dt_; }

 private:
  double dt_;
  int steps_;
};

/// One replication, steppable for inspection.
class Simulation {
 public:
  Simulation(const SimulationSetup& setup, std::uint64_t seed, RunOptions options = {});
  Simulation(const Simulation&) = delete;
  Simulation& operator=(const Simulation&) = delete;

  const Network& network() const { return network_; }
  const World& world() const { return world_; }
  const SimClock& clock() const { return clock_; }
  int step_index() const { return step_; }
  double time() const { return clock_.time_at(step_); }
  bool finished() const { return step_ >= clock_.steps(); }

  /// Adds a vehicle with a prescribed state, outside the demand schedule.
  /// Its random streams are keyed by (origin_ring, insertion_index); a
  /// pending route on a link ending at a diverge is drawn immediately.
  int place_vehicle(VehicleState v);

  /// Computes accelerations at the current instant, records them, then
  /// moves everything one step forward.
  void step();
  /// Steps to the horizon and records the final instant.
  ReplicationOutput run();

  const EventLog& events() const { return out_.events; }
  const TrajectoryTable& trajectories() const { return out_.trajectories; }

 private:
  void compute_accelerations();
  void record();
  void integrate();
  void detect_overlaps();
  void insert();
  void track(int id);
  int stream_ring(int ring) const { return options_.mirror ? 1 - ring : ring; }
  void log(int vehicle, EventKind kind, std::string detail);

  SimulationSetup setup_;
  std::uint64_t seed_;
  RunOptions options_;
  Network network_;
  World world_;
  SimClock clock_;
  DemandState demand_;
  int step_ = 0;

  std::vector<HistoryBuffer> history_;
  std::vector<Rng> noise_rng_;
  std::vector<Rng> turn_rng_;
  std::vector<std::uint8_t> in_emergency_;
  std::vector<std::uint8_t> in_overlap_;
  ReplicationOutput out_;
};

ReplicationOutput run_replication(const SimulationSetup& setup, std::uint64_t seed,
                                  RunOptions options = {});

struct ReplicationResult {
  int index = 0;
  std::uint64_t seed = 0;
  std::optional<ReplicationOutput> output;
  std::string error;

  bool ok() const { return output.has_value(); }
};

/// Runs every replication of the plan on up to `parallelism` threads and
/// hands each finished result to `sink` from the worker thread (the sink
/// must be thread-safe). A failing replication is reported through its
/// result and does not stop the others. Results are independent of
/// `parallelism`.
void for_each_replication(const SimulationSetup& setup, const ReplicationPlan& plan,
                          int parallelism, const std::function<void(ReplicationResult&&)>& sink,
                          RunOptions options = {});

/// Collects all results, ordered by replication index.
std::vector<ReplicationResult> run_batch(const SimulationSetup& setup, const ReplicationPlan& plan,
                                         int parallelism, RunOptions options = {});

}  // namespace tworing
