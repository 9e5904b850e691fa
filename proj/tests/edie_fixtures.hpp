#pragma once

// Hand-built piecewise-linear trajectories with closed-form Edie totals.
// Each vehicle follows a fixed link route at piecewise-constant speed; the
// oracle intersects time intervals analytically instead of walking records.

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "tworing/metrics.hpp"
#include "tworing/network.hpp"

namespace tworing::fixtures {

struct Segment {
  double duration = 0.0;
  double speed = 0.0;
};

struct Path {
  int vehicle = 0;
  double start_time = 0.0;
  double start_offset = 0.0;  // metres along the route from the first link's start
  std::vector<int> route;
  std::vector<Segment> segments;
};

struct Fixture {
  std::string name;
  std::vector<Path> paths;
  std::vector<int> region;
  double t0 = 0.0;
  double interval = 10.0;
};

inline std::vector<double> boundaries(const Network& net, const Path& p) {
  std::vector<double> b{0.0};
  for (int l : p.route) b.push_back(b.back() + net.link(l).length);
  return b;
}

/// Records every `step` seconds plus at every speed change.
inline TrajectoryTable records(const Network& net, const std::vector<Path>& paths, double step = 0.5) {
  TrajectoryTable t;
  for (const Path& p : paths) {
    const auto b = boundaries(net, p);
    std::vector<double> times{p.start_time};
    double ts = p.start_time;
    for (const Segment& s : p.segments) {
      const double te = ts + s.duration;
      for (double x = ts + step; x < te - 1e-9; x += step) times.push_back(x);
      times.push_back(te);
      ts = te;
    }
    for (double time : times) {
      double s_pos = p.start_offset;
      double seg_start = p.start_time;
      double speed = 0.0;
      for (const Segment& s : p.segments) {
        speed = s.speed;
        const double dt = std::min(time, seg_start + s.duration) - seg_start;
        if (dt <= 0.0) break;
        s_pos += s.speed * dt;
        seg_start += s.duration;
      }
      std::size_t j = 0;
      while (j + 2 < b.size() && s_pos >= b[j + 1]) ++j;
      t.records.push_back({time, p.vehicle, VehicleClass::AV, static_cast<std::uint8_t>(p.route[j]),
                           s_pos - b[j], speed, 0.0});
    }
  }
  // Interleave by time the way the engine records.
  std::stable_sort(t.records.begin(), t.records.end(),
                   [](const TrajectoryRecord& a, const TrajectoryRecord& b) { return a.time < b.time; });
  return t;
}

inline EdieTotals oracle(const Network& net, const Fixture& f) {
  EdieTotals out;
  const double w0 = f.t0;
  const double w1 = f.t0 + f.interval;
  auto in_region = [&](int link) {
    return std::find(f.region.begin(), f.region.end(), link) != f.region.end();
  };
  for (const Path& p : f.paths) {
    const auto b = boundaries(net, p);
    double ta = p.start_time;
    double sa = p.start_offset;
    for (const Segment& s : p.segments) {
      const double tb = ta + s.duration;
      for (std::size_t j = 0; j + 1 < b.size(); ++j) {
        if (!in_region(p.route[j])) continue;
        double lo = ta, hi = tb;
        if (s.speed == 0.0) {
          if (!(sa >= b[j] && sa < b[j + 1])) continue;
        } else {
          lo = std::max(lo, ta + (b[j] - sa) / s.speed);
          hi = std::min(hi, ta + (b[j + 1] - sa) / s.speed);
        }
        lo = std::max(lo, w0);
        hi = std::min(hi, w1);
        if (hi <= lo) continue;
        out.time += hi - lo;
        out.distance += s.speed * (hi - lo);
      }
      sa += s.speed * s.duration;
      ta = tb;
    }
  }
  return out;
}

inline std::vector<Fixture> all() {
  using namespace links;
  const std::vector<int> ring1{kRing1Main, kRing1Approach};
  const std::vector<int> ring2{kRing2Main, kRing2Approach};
  const std::vector<int> loop1{kRing1Main, kRing1Approach, kRing1Main, kRing1Approach};
  const std::vector<int> switch12{kRing1Main, kConnector12, kRing2Main, kRing2Approach};
  const std::vector<int> switch21{kRing2Approach, kRing2Main, kConnector21, kRing1Main};
  std::vector<Fixture> v;
  v.push_back({"constant_speed_whole_interval", {{0, 0.0, 20.0, loop1, {{10.0, 8.0}}}}, ring1, 0.0, 10.0});
  v.push_back({"stopped_whole_interval", {{0, 0.0, 50.0, loop1, {{10.0, 0.0}}}}, ring1, 0.0, 10.0});
  v.push_back({"empty_region", {{0, 0.0, 50.0, loop1, {{10.0, 5.0}}}}, ring2, 0.0, 10.0});
  v.push_back({"enters_mid_interval", {{0, 4.0, 0.0, loop1, {{6.0, 6.0}}}}, ring1, 0.0, 10.0});
  v.push_back({"leaves_mid_interval", {{0, 0.0, 0.0, loop1, {{3.5, 6.0}}}}, ring1, 0.0, 10.0});
  v.push_back({"crosses_ring_link_boundary", {{0, 0.0, 250.0, loop1, {{10.0, 7.5}}}}, ring1, 0.0, 10.0});
  v.push_back({"single_link_region", {{0, 0.0, 250.0, loop1, {{10.0, 7.5}}}}, {kRing1Main}, 0.0, 10.0});
  v.push_back({"approach_link_region", {{0, 0.0, 250.0, loop1, {{10.0, 7.5}}}}, {kRing1Approach}, 0.0, 10.0});
  v.push_back({"leaves_ring_for_connector", {{0, 0.0, 240.0, switch12, {{20.0, 8.0}}}}, ring1, 0.0, 20.0});
  v.push_back({"connector_only", {{0, 0.0, 240.0, switch12, {{20.0, 8.0}}}}, {kConnector12}, 0.0, 20.0});
  v.push_back({"arrives_on_other_ring", {{0, 0.0, 240.0, switch12, {{40.0, 8.0}}}}, ring2, 0.0, 40.0});
  v.push_back({"window_inside_trajectory", {{0, 0.0, 0.0, loop1, {{30.0, 5.0}}}}, ring1, 12.3, 7.4});
  v.push_back({"speed_change_inside_window",
               {{0, 0.0, 10.0, loop1, {{3.0, 2.0}, {4.0, 8.0}, {3.0, 0.0}}}}, ring1, 0.0, 10.0});
  v.push_back({"stop_and_go", {{0, 0.0, 100.0, loop1, {{2.0, 0.0}, {2.0, 6.0}, {2.0, 0.0}, {4.0, 6.0}}}},
               ring1, 0.0, 10.0});
  v.push_back({"two_vehicles_one_ring",
               {{0, 0.0, 10.0, loop1, {{10.0, 6.0}}}, {1, 0.0, 40.0, loop1, {{10.0, 7.0}}}}, ring1, 0.0, 10.0});
  v.push_back({"three_vehicles_two_rings",
               {{0, 0.0, 10.0, loop1, {{10.0, 6.0}}},
                {1, 0.0, 240.0, switch12, {{10.0, 8.0}}},
                {2, 0.0, 30.0, ring2, {{10.0, 4.0}}}},
               ring2, 0.0, 10.0});
  v.push_back({"reverse_switch", {{0, 0.0, 10.0, switch21, {{40.0, 7.0}}}}, ring1, 10.0, 30.0});
  v.push_back({"whole_network", {{0, 0.0, 240.0, switch12, {{40.0, 8.0}}}, {1, 5.0, 10.0, loop1, {{20.0, 3.0}}}},
               {kRing1Main, kRing1Approach, kRing2Main, kRing2Approach, kConnector12, kConnector21}, 0.0, 40.0});
  v.push_back({"partial_window_with_stop", {{0, 0.0, 60.0, loop1, {{5.0, 8.0}, {10.0, 0.0}, {5.0, 4.0}}}},
               ring1, 3.0, 10.0});
  v.push_back({"late_window_after_exit", {{0, 0.0, 240.0, switch12, {{10.0, 8.0}}}}, ring1, 20.0, 10.0});
  return v;
}

}  // namespace tworing::fixtures
