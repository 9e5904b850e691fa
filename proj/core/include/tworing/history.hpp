#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

#include "tworing/cf_models.hpp"

namespace tworing {

inline constexpr int kMaxAnticipatedLeaders = 8;

struct HistoryEntry {
  double time = 0.0;
  double speed = 0.0;
  double accel = 0.0;
  std::array<LeaderObservation, kMaxAnticipatedLeaders> leaders{};
  int leader_count = 0;

  std::span<const LeaderObservation> observed() const {
    return {leaders.data(), static_cast<std::size_t>(leader_count)};
  }
};

/// Delayed state reconstructed from the buffer; owns its leader copies.
struct DelayedSample {
  double speed = 0.0;
  double accel = 0.0;
  std::array<LeaderObservation, kMaxAnticipatedLeaders> leaders{};
  int leader_count = 0;
  /// True when the lookup fell before the oldest stored entry.
  bool padded = false;

  DelayedState view() const {
    return {speed, accel, {leaders.data(), static_cast<std::size_t>(leader_count)}};
  }
};

/// Fixed-capacity ring of per-step observations for one vehicle.
class HistoryBuffer {
 public:
  HistoryBuffer() = default;
  explicit HistoryBuffer(std::size_t capacity) : entries_(capacity) {
    if (capacity < 2) throw std::invalid_argument("history needs at least two entries");
  }

  /// Entries needed to look back max_delay seconds at step dt.
  static std::size_t capacity_for(double max_delay, double dt) {
    return static_cast<std::size_t>(std::ceil(max_delay / dt)) + 2;
  }

  std::size_t capacity() const { return entries_.size(); }
  std::size_t size() const { return size_; }
  bool empty() const { return size_ == 0; }

  /// Oldest-first access.
  const HistoryEntry& at(std::size_t i) const {
    return entries_[(head_ + i) % entries_.size()];
  }
  const HistoryEntry& latest() const { return at(size_ - 1); }

  /// Timestamps must be strictly increasing.
  void push(const HistoryEntry& e) {
    if (size_ > 0 && !(e.time > latest().time)) {
      throw std::logic_error("history timestamps must increase");
    }
    if (size_ < entries_.size()) {
      entries_[(head_ + size_) % entries_.size()] = e;
      ++size_;
    } else {
      entries_[head_] = e;
      head_ = (head_ + 1) % entries_.size();
    }
  }

  void set_latest_accel(double a) { entries_[(head_ + size_ - 1) % entries_.size()].accel = a; }

  /// State at time t. Between entries speed and acceleration are linearly
  /// interpolated; leader observations are interpolated when both entries
  /// saw the same leader in that slot, otherwise the nearer entry is used.
  /// Before the oldest entry the oldest one is returned (cold-start pad).
  DelayedSample sample(double t) const;

 private:
  std::vector<HistoryEntry> entries_;
  std::size_t head_ = 0;
  std::size_t size_ = 0;
};

}  // namespace tworing
