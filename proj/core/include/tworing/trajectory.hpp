#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "tworing/network.hpp"

namespace tworing {

/// One vehicle at one instant. Consecutive records of a vehicle are joined
/// by straight lines in (time, distance) when measuring.
struct TrajectoryRecord {
  double time = 0.0;
  int vehicle = 0;
  VehicleClass cls = VehicleClass::HV;
  std::uint8_t link = 0;
  double position = 0.0;
  double speed = 0.0;
  double accel = 0.0;

  friend bool operator==(const TrajectoryRecord&, const TrajectoryRecord&) = default;
};

/// Records in non-decreasing time order; within one instant ordered by
/// vehicle id.
struct TrajectoryTable {
  std::vector<TrajectoryRecord> records;
};

enum class EventKind : std::uint8_t {
  Insert,
  Turn,
  Merge,
  MergeStop,
  EmergencyBrake,
  Overlap,
};

std::string_view to_string(EventKind k);

struct EventRecord {
  double time = 0.0;
  int vehicle = 0;
  EventKind kind = EventKind::Insert;
  std::string detail;

  friend bool operator==(const EventRecord&, const EventRecord&) = default;
};

struct EventLog {
  std::vector<EventRecord> events;

  std::size_t count(EventKind kind) const;
};

}  // namespace tworing
