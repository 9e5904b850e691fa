#include "tworing/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include <fmt/format.h>

namespace tworing {

std::string_view to_string(Region r) {
  switch (r) {
    case Region::Ring1: return "ring1";
    case Region::Ring2: return "ring2";
    case Region::Network: return "network";
  }
  return "unknown";
}

namespace {

/// Calls f(link, ta, tb, distance) for each straight piece of every
/// vehicle's trajectory, one piece per link visited between two records.
template <class F>
void for_each_piece(const TrajectoryTable& traj, const Network& net, F&& f) {
  const auto& rec = traj.records;
  std::vector<std::size_t> order(rec.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return rec[a].vehicle < rec[b].vehicle; });
  for (std::size_t i = 1; i < order.size(); ++i) {
    const TrajectoryRecord& a = rec[order[i - 1]];
    const TrajectoryRecord& b = rec[order[i]];
    if (a.vehicle != b.vehicle || !(b.time > a.time)) continue;
    if (a.link == b.link) {
      f(a.link, a.time, b.time, b.position - a.position);
      continue;
    }
    const double before = std::max(0.0, net.link(a.link).length - a.position);
    const double after = std::max(0.0, b.position);
    const double total = before + after;
    const double tc = total > 0.0 ? a.time + (b.time - a.time) * before / total : a.time;
    f(a.link, a.time, tc, before);
    f(b.link, tc, b.time, after);
  }
}

double region_length(const Network& net, std::span<const int> links) {
  double total = 0.0;
  for (int l : links) total += net.link(l).length;
  return total;
}

std::vector<char> membership(const Network& net, std::span<const int> links) {
  std::vector<char> in(net.links().size(), 0);
  for (int l : links) in.at(static_cast<std::size_t>(l)) = 1;
  return in;
}

}  // namespace

EdieTotals edie_totals(const TrajectoryTable& traj, const Network& net,
                       std::span<const int> region_links, double t0, double interval) {
  if (region_links.empty()) throw std::domain_error("empty measurement region");
  if (!(interval > 0.0)) throw std::domain_error("interval must be positive");
  const auto in = membership(net, region_links);
  const double t1 = t0 + interval;
  EdieTotals out;
  for_each_piece(traj, net, [&](int link, double ta, double tb, double d) {
    if (!in[static_cast<std::size_t>(link)] || !(tb > ta)) return;
    const double overlap = std::min(tb, t1) - std::max(ta, t0);
    if (overlap <= 0.0) return;
    out.time += overlap;
    out.distance += d * overlap / (tb - ta);
  });
  return out;
}

MetricsSample edie_metrics(const TrajectoryTable& traj, const Network& net,
                           std::span<const int> region_links, double t0, double interval,
                           Region label) {
  const EdieTotals tot = edie_totals(traj, net, region_links, t0, interval);
  const double area = region_length(net, region_links) * interval;
  return {t0, label, tot.time / area, tot.distance / area};
}

MetricsSample network_sample(const MetricsSample& ring1, const MetricsSample& ring2) {
  return {ring1.interval_start, Region::Network, 0.5 * (ring1.density + ring2.density),
          0.5 * (ring1.flow + ring2.flow)};
}

EdieSeries build_edie_series(const TrajectoryTable& traj, const Network& net, double cadence,
                             double horizon) {
  if (!(cadence > 0.0) || !(horizon > 0.0)) {
    throw std::invalid_argument("cadence and horizon must be positive");
  }
  const double ratio = horizon / cadence;
  const long bins_l = std::lround(ratio);
  if (bins_l < 1 || std::abs(ratio - static_cast<double>(bins_l)) > 1e-9 * std::max(1.0, ratio)) {
    throw std::invalid_argument(fmt::format("cadence {} does not divide horizon {}", cadence, horizon));
  }
  const auto bins = static_cast<std::size_t>(bins_l);

  std::array<std::vector<EdieTotals>, 2> tot{std::vector<EdieTotals>(bins),
                                             std::vector<EdieTotals>(bins)};
  for_each_piece(traj, net, [&](int link, double ta, double tb, double d) {
    const int ring = net.link(link).ring;
    if (ring < 0 || !(tb > ta)) return;
    auto& acc = tot[static_cast<std::size_t>(ring)];
    const double rate = d / (tb - ta);
    auto i = static_cast<std::size_t>(std::max(0.0, std::floor(ta / cadence)));
    for (; i < bins; ++i) {
      const double start = static_cast<double>(i) * cadence;
      const double end = start + cadence;
      if (start >= tb) break;
      const double overlap = std::min(tb, end) - std::max(ta, start);
      if (overlap <= 0.0) continue;
      acc[i].time += overlap;
      acc[i].distance += rate * overlap;
    }
  });

  EdieSeries s;
  s.cadence = cadence;
  const std::array<double, 2> area{net.ring_length(0) * cadence, net.ring_length(1) * cadence};
  for (std::size_t i = 0; i < bins; ++i) {
    const double start = static_cast<double>(i) * cadence;
    MetricsSample r1{start, Region::Ring1, tot[0][i].time / area[0], tot[0][i].distance / area[0]};
    MetricsSample r2{start, Region::Ring2, tot[1][i].time / area[1], tot[1][i].distance / area[1]};
    const double both = area[0] + area[1];
    MetricsSample nw{start, Region::Network, (tot[0][i].time + tot[1][i].time) / both,
                     (tot[0][i].distance + tot[1][i].distance) / both};
    s.ring1.push_back(r1);
    s.ring2.push_back(r2);
    s.network.push_back(nw);
  }
  return s;
}

std::vector<MetricsSample> build_fd_series(const TrajectoryTable& traj, const Network& net,
                                           double cadence, double horizon) {
  const EdieSeries s = build_edie_series(traj, net, cadence, horizon);
  std::vector<MetricsSample> out;
  out.reserve(2 * s.ring1.size());
  for (std::size_t i = 0; i < s.ring1.size(); ++i) {
    out.push_back(s.ring1[i]);
    out.push_back(s.ring2[i]);
  }
  return out;
}

std::vector<MetricsSample> build_nfd_series(const TrajectoryTable& traj, const Network& net,
                                            double cadence, double horizon) {
  return build_edie_series(traj, net, cadence, horizon).network;
}

PhasePath phase_path(const EdieSeries& series) {
  PhasePath p;
  p.cadence = series.cadence;
  p.points.reserve(series.ring1.size());
  for (std::size_t i = 0; i < series.ring1.size(); ++i) {
    p.points.push_back({series.ring1[i].density, series.ring2[i].density});
  }
  return p;
}

PhasePath smooth_path(const PhasePath& path, double window) {
  const double ratio = window / path.cadence;
  const long w = std::lround(ratio);
  if (!(window > 0.0) || w < 1 || std::abs(ratio - static_cast<double>(w)) > 1e-9 * ratio) {
    throw std::invalid_argument(
        fmt::format("smoothing window {} is not a positive multiple of {}", window, path.cadence));
  }
  const auto n = static_cast<long>(path.points.size());
  PhasePath out;
  out.cadence = path.cadence;
  out.points.resize(path.points.size());
  for (long i = 0; i < n; ++i) {
    const long lo = std::max(0L, i - w / 2);
    const long hi = std::min(n - 1, i + (w - 1) - w / 2);
    PhasePoint sum;
    for (long j = lo; j <= hi; ++j) {
      sum.k1 += path.points[static_cast<std::size_t>(j)].k1;
      sum.k2 += path.points[static_cast<std::size_t>(j)].k2;
    }
    const auto count = static_cast<double>(hi - lo + 1);
    out.points[static_cast<std::size_t>(i)] = {sum.k1 / count, sum.k2 / count};
  }
  return out;
}

double BifurcationPoint::distance_from_origin() const { return std::hypot(k1, k2); }

std::optional<BifurcationPoint> detect_bifurcation(const PhasePath& smoothed) {
  const auto& p = smoothed.points;
  for (std::size_t n = 0; n + 1 < p.size(); ++n) {
    const PhasePoint& a = p[n];
    const PhasePoint& b = p[n + 1];
    if (!(std::abs(a.k1 - a.k2) < std::abs(b.k1 - b.k2))) continue;
    const double dk1 = b.k1 - a.k1;
    if (dk1 == 0.0) continue;
    if (!((b.k2 - a.k2) / dk1 < 0.0)) continue;
    return BifurcationPoint{static_cast<int>(n + 1), b.k1, b.k2, 0.5 * (b.k1 + b.k2)};
  }
  return std::nullopt;
}

double BifurcationRow::ratio_to_jam() const {
  return point ? point->mean_density / jam_density : 0.0;
}

std::vector<BifurcationRow> bifurcation_summary(const std::string& scenario,
                                                std::span<const ReplicationPhase> phases,
                                                double jam_density) {
  std::vector<BifurcationRow> rows;
  rows.reserve(phases.size());
  for (const auto& ph : phases) {
    rows.push_back({scenario, ph.replication, detect_bifurcation(ph.smoothed), jam_density});
  }
  return rows;
}

double mean_density(std::span<const MetricsSample> samples, double t0, double t1) {
  double sum = 0.0;
  int n = 0;
  for (const auto& s : samples) {
    if (s.interval_start >= t0 && s.interval_start < t1) {
      sum += s.density;
      ++n;
    }
  }
  return n > 0 ? sum / n : 0.0;
}

double max_flow(std::span<const MetricsSample> samples) {
  double m = 0.0;
  for (const auto& s : samples) m = std::max(m, s.flow);
  return m;
}

}  // namespace tworing
