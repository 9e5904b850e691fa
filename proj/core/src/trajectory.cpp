#include "tworing/trajectory.hpp"

#include <algorithm>

namespace tworing {

std::string_view to_string(EventKind k) {
  switch (k) {
    case EventKind::Insert: return "insert";
    case EventKind::Turn: return "turn";
    case EventKind::Merge: return "merge";
    case EventKind::MergeStop: return "merge_stop";
    case EventKind::EmergencyBrake: return "emergency_brake";
    case EventKind::Overlap: return "overlap";
  }
  return "unknown";
}

std::size_t EventLog::count(EventKind kind) const {
  return static_cast<std::size_t>(
      std::count_if(events.begin(), events.end(), [kind](const EventRecord& e) { return e.kind == kind; }));
}

}  // namespace tworing
