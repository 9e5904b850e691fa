#pragma once

// Edie's generalized flow and density over recorded trajectories, per-ring
// and network series, phase-path smoothing, and bifurcation detection.

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tworing/network.hpp"
#include "tworing/trajectory.hpp"

namespace tworing {

enum class Region : std::uint8_t { Ring1, Ring2, Network };
std::string_view to_string(Region r);

struct MetricsSample {
  double interval_start = 0.0;
  Region region = Region::Network;
  double density = 0.0;  // veh/m
  double flow = 0.0;     // veh/s

  friend bool operator==(const MetricsSample&, const MetricsSample&) = default;
};

/// Raw Edie totals for one region and interval.
struct EdieTotals {
  double distance = 0.0;  // vehicle-metres
  double time = 0.0;      // vehicle-seconds
};

/// Edie totals over [t0, t0 + interval] for the links in `region_links`.
/// Consecutive records of a vehicle are joined linearly; a step that crosses
/// a link boundary is split at the boundary in proportion to distance.
/// Throws std::domain_error for an empty region or non-positive interval.
EdieTotals edie_totals(const TrajectoryTable& traj, const Network& net,
                       std::span<const int> region_links, double t0, double interval);

/// Q = distance / (L T), K = time / (L T) with L the summed link length.
MetricsSample edie_metrics(const TrajectoryTable& traj, const Network& net,
                           std::span<const int> region_links, double t0, double interval,
                           Region label = Region::Network);

/// Per-interval samples for both rings and the network, computed in one
/// pass. Indexing is [interval]; intervals are [i c, (i+1) c).
struct EdieSeries {
  double cadence = 10.0;
  std::vector<MetricsSample> ring1;
  std::vector<MetricsSample> ring2;
  std::vector<MetricsSample> network;
};

/// Throws std::invalid_argument unless cadence > 0 divides horizon.
EdieSeries build_edie_series(const TrajectoryTable& traj, const Network& net, double cadence,
                             double horizon);

/// Ring1 and Ring2 samples interleaved per interval.
std::vector<MetricsSample> build_fd_series(const TrajectoryTable& traj, const Network& net,
                                           double cadence, double horizon);

/// Network samples over both rings, connectors excluded.
std::vector<MetricsSample> build_nfd_series(const TrajectoryTable& traj, const Network& net,
                                            double cadence, double horizon);

/// Combines equal-length ring samples into the network sample.
MetricsSample network_sample(const MetricsSample& ring1, const MetricsSample& ring2);

struct PhasePoint {
  double k1 = 0.0;
  double k2 = 0.0;

  friend bool operator==(const PhasePoint&, const PhasePoint&) = default;
};

struct PhasePath {
  double cadence = 10.0;
  std::vector<PhasePoint> points;
};

PhasePath phase_path(const EdieSeries& series);

/// Centered moving average over window/cadence samples: indices
/// [n - w/2, n + (w - 1) - w/2], truncated at the ends. Throws
/// std::invalid_argument unless window is a positive multiple of cadence.
PhasePath smooth_path(const PhasePath& path, double window = 60.0);

struct BifurcationPoint {
  int index = 0;
  double k1 = 0.0;
  double k2 = 0.0;
  double mean_density = 0.0;

  double distance_from_origin() const;
};

/// First pair (n, n+1) where |k1 - k2| strictly grows and the connecting
/// slope is strictly negative; reports sample n+1. A pair with no change in
/// k1 never qualifies.
std::optional<BifurcationPoint> detect_bifurcation(const PhasePath& smoothed);

struct BifurcationRow {
  std::string scenario;
  int replication = 0;
  std::optional<BifurcationPoint> point;
  double jam_density = 0.0;

  double ratio_to_jam() const;
};

struct ReplicationPhase {
  int replication = 0;
  PhasePath smoothed;
};

std::vector<BifurcationRow> bifurcation_summary(const std::string& scenario,
                                                std::span<const ReplicationPhase> phases,
                                                double jam_density);

/// Mean ring density over [t0, t1) from a per-interval series.
double mean_density(std::span<const MetricsSample> samples, double t0, double t1);

/// Largest flow in a series.
double max_flow(std::span<const MetricsSample> samples);

}  // namespace tworing
