#pragma once

// CSV emission. Every file starts with one "# schema: <name> v<version>"
// comment line; reals are written with 9 significant digits so outputs are
// byte-stable across runs and machines.

#include <iosfwd>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "tworing/macro_model.hpp"
#include "tworing/metrics.hpp"
#include "tworing/trajectory.hpp"

namespace tworing::csv {

inline constexpr int kSchemaVersion = 1;

class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// 9 significant digits, shortest form; negative zero prints as "0".
std::string real(double x);

std::string schema_line(std::string_view name, int version = kSchemaVersion);

void write_trajectories(std::ostream& os, const TrajectoryTable& table);
void write_events(std::ostream& os, const EventLog& log);
void write_metrics(std::ostream& os, const EdieSeries& series);
void write_phase_path(std::ostream& os, const PhasePath& raw, const PhasePath& smoothed);
void write_bifurcations(std::ostream& os, std::span<const BifurcationRow> rows);

/// Theoretical FD curve sampled on `points` densities in [0, k_j].
void write_fd_curve(std::ostream& os, std::string_view label, const TriangularFd& fd,
                    int points = 101);
/// Two-bin equilibria and theoretical NFD over a density grid.
void write_equilibria(std::ostream& os, std::string_view label, const TriangularFd& fd,
                      int points = 101);

/// Per-replication overview line items.
struct ReplicationLine {
  int replication = 0;
  std::uint64_t seed = 0;
  bool ok = true;
  std::string error;
  double max_network_flow = 0.0;
  double final_density_ring1 = 0.0;
  double final_density_ring2 = 0.0;
  int inserted = 0;
  int unserved = 0;
  int overlaps = 0;
  int emergency_brakes = 0;
  int merge_stops = 0;
};
void write_replications(std::ostream& os, std::span<const ReplicationLine> lines);

/// One parsed row of a bifurcation summary file.
struct SummaryRow {
  std::string scenario;
  int replication = 0;
  bool detected = false;
  int index = 0;
  double k1 = 0.0;
  double k2 = 0.0;
  double mean_density = 0.0;
  double ratio_to_jam = 0.0;
};

/// Reads a bifurcation summary. Throws FormatError on a missing or
/// different schema line or malformed rows.
std::vector<SummaryRow> read_bifurcations(std::istream& is);

}  // namespace tworing::csv
