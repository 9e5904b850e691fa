#include "tworing/history.hpp"

#include <algorithm>

namespace tworing {

namespace {

DelayedSample copy_of(const HistoryEntry& e, bool padded) {
  DelayedSample s;
  s.speed = e.speed;
  s.accel = e.accel;
  s.leaders = e.leaders;
  s.leader_count = e.leader_count;
  s.padded = padded;
  return s;
}

}  // namespace

DelayedSample HistoryBuffer::sample(double t) const {
  if (size_ == 0) throw std::logic_error("sampling an empty history");
  if (t <= at(0).time) return copy_of(at(0), t < at(0).time);
  if (t >= latest().time) return copy_of(latest(), false);

  // Binary search for the bracketing pair (entries are time-ordered).
  std::size_t lo = 0;
  std::size_t hi = size_ - 1;
  while (hi - lo > 1) {
    const std::size_t mid = (lo + hi) / 2;
    if (at(mid).time <= t) lo = mid; else hi = mid;
  }
  const HistoryEntry& a = at(lo);
  const HistoryEntry& b = at(hi);
  const double w = (t - a.time) / (b.time - a.time);
  const HistoryEntry& nearer = w < 0.5 ? a : b;

  DelayedSample s;
  s.speed = a.speed + w * (b.speed - a.speed);
  s.accel = a.accel + w * (b.accel - a.accel);
  s.leader_count = nearer.leader_count;
  for (int m = 0; m < s.leader_count; ++m) {
    const auto i = static_cast<std::size_t>(m);
    const bool same = m < a.leader_count && m < b.leader_count &&
                      a.leaders[i].leader_id == b.leaders[i].leader_id;
    if (!same) {
      s.leaders[i] = nearer.leaders[i];
      continue;
    }
    LeaderObservation o = nearer.leaders[i];
    o.gap = a.leaders[i].gap + w * (b.leaders[i].gap - a.leaders[i].gap);
    o.leader_speed = a.leaders[i].leader_speed + w * (b.leaders[i].leader_speed - a.leaders[i].leader_speed);
    o.speed_difference = s.speed - o.leader_speed;
    s.leaders[i] = o;
  }
  return s;
}

}  // namespace tworing
