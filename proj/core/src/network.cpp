#include "tworing/network.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <fmt/format.h>

namespace tworing {

std::string_view to_string(VehicleClass c) {
  switch (c) {
    case VehicleClass::HV: return "HV";
    case VehicleClass::ConnectedHV: return "ConnectedHV";
    case VehicleClass::AV: return "AV";
    case VehicleClass::CAV: return "CAV";
  }
  return "unknown";
}

bool is_human(VehicleClass c) { return c == VehicleClass::HV || c == VehicleClass::ConnectedHV; }

bool is_connected(VehicleClass c) {
  return c == VehicleClass::ConnectedHV || c == VehicleClass::CAV;
}

std::string_view to_string(RouteDecision r) {
  switch (r) {
    case RouteDecision::Pending: return "pending";
    case RouteDecision::Stay: return "stay";
    case RouteDecision::Switch: return "switch";
  }
  return "unknown";
}

int mirror_link(int link_id) {
  switch (link_id) {
    case links::kRing1Main: return links::kRing2Main;
    case links::kRing1Approach: return links::kRing2Approach;
    case links::kRing2Main: return links::kRing1Main;
    case links::kRing2Approach: return links::kRing1Approach;
    case links::kConnector12: return links::kConnector21;
    case links::kConnector21: return links::kConnector12;
    default: throw std::out_of_range(fmt::format("no link {}", link_id));
  }
}

double Network::ring_length(int ring) const {
  double total = 0.0;
  for (const auto& l : links_) {
    if (l.ring == ring) total += l.length;
  }
  return total;
}

std::vector<int> Network::ring_links(int ring) const {
  std::vector<int> out;
  for (const auto& l : links_) {
    if (l.ring == ring) out.push_back(l.id);
  }
  return out;
}

const MergeNode* Network::merge_for_approach(int link_id) const {
  for (const auto& m : merges_) {
    if (m.approach_links[0] == link_id || m.approach_links[1] == link_id) return &m;
  }
  return nullptr;
}

const DivergeNode* Network::diverge_for_incoming(int link_id) const {
  for (const auto& d : diverges_) {
    if (d.incoming_link == link_id) return &d;
  }
  return nullptr;
}

Network build_two_ring(const GeometryConfig& g) {
  auto fail = [](const std::string& what) { throw std::invalid_argument("geometry: " + what); };
  if (!(g.ring_radius[0] > 0.0) || !(g.ring_radius[1] > 0.0)) fail("ring radius must be positive");
  if (std::abs(g.ring_radius[0] - g.ring_radius[1]) > 1e-12 * g.ring_radius[0]) {
    fail(fmt::format("rings must be symmetric (radii {} vs {})", g.ring_radius[0], g.ring_radius[1]));
  }
  if (!(g.connector_length > 0.0)) fail("connector length must be positive");
  if (!(g.speed_limit > 0.0)) fail("speed limit must be positive");
  if (!(g.detection_range > 0.0)) fail("detection range must be positive");
  if (!(g.merge_zone_length > 0.0)) fail("merge zone length must be positive");
  if (!(g.turn_probability >= 0.0 && g.turn_probability <= 1.0)) fail("p_turn must lie in [0, 1]");
  const double circumference = 2.0 * std::numbers::pi * g.ring_radius[0];
  if (!(g.diverge_to_merge > 0.0 && g.diverge_to_merge < circumference)) {
    fail("diverge-to-merge distance must lie inside the ring");
  }
  if (g.merge_zone_length > g.diverge_to_merge || g.merge_zone_length > g.connector_length) {
    fail("merge zone longer than an approach");
  }
  const double main_length = circumference - g.diverge_to_merge;
  if (!(g.entry_offset >= 0.0 && g.entry_offset < main_length)) fail("entry offset outside ring");

  Network net;
  net.entry_offset_ = g.entry_offset;
  const double v = g.speed_limit;
  using enum LinkKind;
  net.links_ = {
      {links::kRing1Main, "ring1_main", main_length, v, Ring1Segment, {NodeKind::Diverge, 0}, 0},
      {links::kRing1Approach, "ring1_approach", g.diverge_to_merge, v, Ring1Segment, {NodeKind::Merge, 0}, 0},
      {links::kRing2Main, "ring2_main", main_length, v, Ring2Segment, {NodeKind::Diverge, 1}, 1},
      {links::kRing2Approach, "ring2_approach", g.diverge_to_merge, v, Ring2Segment, {NodeKind::Merge, 1}, 1},
      {links::kConnector12, "connector_12", g.connector_length, v, Connector, {NodeKind::Merge, 1}, -1},
      {links::kConnector21, "connector_21", g.connector_length, v, Connector, {NodeKind::Merge, 0}, -1},
  };
  net.merges_ = {
      MergeNode{0, {links::kRing1Approach, links::kConnector21}, links::kRing1Main,
                g.detection_range, g.merge_zone_length},
      MergeNode{1, {links::kRing2Approach, links::kConnector12}, links::kRing2Main,
                g.detection_range, g.merge_zone_length},
  };
  net.diverges_ = {
      DivergeNode{0, links::kRing1Main, links::kRing1Approach, links::kConnector12, g.turn_probability},
      DivergeNode{1, links::kRing2Main, links::kRing2Approach, links::kConnector21, g.turn_probability},
  };
  return net;
}

// --- world -------------------------------------------------------------

World::World(const Network& network)
    : network_(&network), by_link_(network.links().size()) {}

int World::add_vehicle(VehicleState v) {
  v.id = static_cast<int>(vehicles_.size());
  vehicles_.push_back(std::move(v));
  rank_.push_back(0);
  reindex();
  return vehicles_.back().id;
}

void World::reindex() {
  for (auto& list : by_link_) list.clear();
  for (const auto& v : vehicles_) by_link_[static_cast<std::size_t>(v.link)].push_back(v.id);
  for (auto& list : by_link_) {
    std::sort(list.begin(), list.end(), [this](int a, int b) {
      const double pa = vehicles_[static_cast<std::size_t>(a)].position;
      const double pb = vehicles_[static_cast<std::size_t>(b)].position;
      return pa < pb || (pa == pb && a < b);
    });
    for (std::size_t r = 0; r < list.size(); ++r) rank_[static_cast<std::size_t>(list[r])] = r;
  }
}

// --- lookahead -----------------------------------------------------------

namespace {

int next_link(const Network& net, int link_id, RouteDecision route) {
  const Link& l = net.link(link_id);
  if (l.downstream.kind == NodeKind::Merge) return net.merge(l.downstream.index).outgoing_link;
  const DivergeNode& d = net.diverge(l.downstream.index);
  switch (route) {
    case RouteDecision::Stay: return d.stay_link;
    case RouteDecision::Switch: return d.switch_link;
    case RouteDecision::Pending: return -1;
  }
  return -1;
}

struct Candidate {
  double front = 0.0;  // front bumper, metres ahead of the origin
  double length = 0.0;
  double speed = 0.0;
  int id = -1;
  bool cross = false;
};

struct ScanOrigin {
  int link = 0;
  double position = 0.0;
  double speed = 0.0;
  RouteDecision route = RouteDecision::Pending;
  int self_id = -1;
  // First index in on_link(link) that lies ahead of the origin.
  std::size_t first_ahead = 0;
};

std::vector<Candidate> collect_ahead(const World& world, const ScanOrigin& o, int count,
                                     double lookahead) {
  const Network& net = world.network();
  const auto want = static_cast<std::size_t>(std::max(count, 0));
  std::vector<Candidate> cands;
  if (want == 0) return cands;

  const auto& own = world.on_link(o.link);
  for (std::size_t r = o.first_ahead; r < own.size() && cands.size() < want; ++r) {
    const VehicleState& v = world.vehicle(own[r]);
    if (v.id == o.self_id) continue;
    cands.push_back({v.position - o.position, v.length, v.speed, v.id, false});
  }

  const double to_node = net.link(o.link).length - o.position;
  if (const MergeNode* m = net.merge_for_approach(o.link); m && to_node <= m->merge_zone_length) {
    const int other = m->approach_links[0] == o.link ? m->approach_links[1] : m->approach_links[0];
    const double other_len = net.link(other).length;
    const auto& list = world.on_link(other);
    for (auto it = list.rbegin(); it != list.rend(); ++it) {
      const VehicleState& v = world.vehicle(*it);
      const double d = other_len - v.position;
      if (d > m->merge_zone_length) break;
      const bool ahead = d < to_node || (d == to_node && o.self_id >= 0 && v.id < o.self_id);
      if (!ahead) continue;
      cands.push_back({to_node - d, v.length, v.speed, v.id, true});
    }
  }
  std::sort(cands.begin(), cands.end(), [](const Candidate& a, const Candidate& b) {
    return a.front < b.front || (a.front == b.front && a.id < b.id);
  });
  if (cands.size() > want) cands.resize(want);

  double offset = to_node;
  int cur = o.link;
  RouteDecision route = o.route;
  while (cands.size() < want && offset < lookahead) {
    const int next = next_link(net, cur, route);
    if (next < 0) break;
    if (net.link(cur).downstream.kind == NodeKind::Diverge) route = RouteDecision::Pending;
    for (int id : world.on_link(next)) {
      if (id == o.self_id) continue;
      const VehicleState& v = world.vehicle(id);
      if (offset + v.position - v.length > lookahead) break;
      cands.push_back({offset + v.position, v.length, v.speed, v.id, false});
      if (cands.size() >= want) break;
    }
    offset += net.link(next).length;
    cur = next;
  }
  return cands;
}

std::vector<LeaderObservation> to_observations(const std::vector<Candidate>& cands,
                                               double own_speed) {
  std::vector<LeaderObservation> out;
  out.reserve(cands.size());
  double gap = 0.0;
  for (std::size_t m = 0; m < cands.size(); ++m) {
    const Candidate& c = cands[m];
    if (m == 0) {
      gap = c.front - c.length;
    } else {
      gap += std::max(0.0, c.front - c.length - cands[m - 1].front);
    }
    out.push_back({gap, own_speed - c.speed, c.speed, c.id, c.cross});
  }
  return out;
}

ScanOrigin origin_of(const World& world, int vehicle_id) {
  const VehicleState& v = world.vehicle(vehicle_id);
  return {v.link, v.position, v.speed, v.route, v.id, world.rank(vehicle_id) + 1};
}

}  // namespace

std::vector<LeaderObservation> scan_leaders(const World& world, int vehicle_id, int count,
                                            double lookahead) {
  const ScanOrigin o = origin_of(world, vehicle_id);
  return to_observations(collect_ahead(world, o, count, lookahead), o.speed);
}

LeaderObservation virtual_leader(const World& world, int vehicle_id, double lookahead) {
  auto obs = scan_leaders(world, vehicle_id, 1, lookahead);
  if (!obs.empty()) return obs.front();
  const VehicleState& v = world.vehicle(vehicle_id);
  const double scanned = std::max(lookahead, world.network().link(v.link).length - v.position);
  return {scanned + kFreeRoadGap, 0.0, v.speed, -1, false};
}

std::optional<double> distance_to_merge(const World& world, int vehicle_id) {
  const VehicleState& v = world.vehicle(vehicle_id);
  const Network& net = world.network();
  if (!net.merge_for_approach(v.link)) return std::nullopt;
  return net.link(v.link).length - v.position;
}

bool detect_merge_conflict(const World& world, int vehicle_id) {
  const VehicleState& v = world.vehicle(vehicle_id);
  if (v.cls != VehicleClass::CAV) return false;
  const Network& net = world.network();
  const MergeNode* m = net.merge_for_approach(v.link);
  if (!m) return false;
  const double range = m->detection_range;
  if (net.link(v.link).length - v.position > range) return false;
  const int other = m->approach_links[0] == v.link ? m->approach_links[1] : m->approach_links[0];
  const double other_len = net.link(other).length;
  const auto& list = world.on_link(other);
  for (auto it = list.rbegin(); it != list.rend(); ++it) {
    const VehicleState& u = world.vehicle(*it);
    if (other_len - u.position > range) break;
    if (is_connected(u.cls)) return true;
  }
  return false;
}

RouteDecision decide_turn(Rng& rng, double turn_probability) {
  // 53-bit uniform in [0, 1) straight from the engine output.
  const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
  return u < turn_probability ? RouteDecision::Switch : RouteDecision::Stay;
}

// --- insertion -----------------------------------------------------------

double ClassMix::share(VehicleClass c) const {
  switch (c) {
    case VehicleClass::HV: return hv;
    case VehicleClass::ConnectedHV: return connected_hv;
    case VehicleClass::AV: return av;
    case VehicleClass::CAV: return cav;
  }
  return 0.0;
}

VehicleClass ClassMix::pick(double u) const {
  double cumulative = 0.0;
  VehicleClass last = VehicleClass::HV;
  for (VehicleClass c : kAllClasses) {
    const double s = share(c);
    if (s <= 0.0) continue;
    last = c;
    cumulative += s;
    if (u < cumulative) return c;
  }
  return last;
}

bool can_insert(const World& world, int ring, const VehicleState& candidate, double speed) {
  const Network& net = world.network();
  const int entry = net.entry_link(ring);
  const double front = net.entry_offset() + candidate.length;
  const double rear = net.entry_offset();
  const auto& list = world.on_link(entry);

  std::size_t first_ahead = 0;
  while (first_ahead < list.size() && world.vehicle(list[first_ahead]).position <= front) {
    ++first_ahead;
  }

  ScanOrigin o{entry, front, speed, candidate.route, -1, first_ahead};
  const auto ahead = to_observations(collect_ahead(world, o, 1, kDefaultLookahead), speed);
  if (!ahead.empty()) {
    const Accel a = idm_accel(candidate.params, speed, ahead.front());
    if (a.emergency || a.value < -candidate.params.comfort_decel) return false;
  }

  auto follower_ok = [&](const VehicleState& f, double gap) {
    const Accel a = idm_accel(f.params, f.speed, {gap, f.speed - speed, speed, -1, false});
    return !a.emergency && a.value >= -f.params.comfort_decel;
  };

  if (first_ahead > 0) {
    const VehicleState& f = world.vehicle(list[first_ahead - 1]);
    return follower_ok(f, rear - f.position);
  }
  for (const MergeNode& m : net.merges()) {
    if (m.outgoing_link != entry) continue;
    for (int approach : m.approach_links) {
      const auto& up = world.on_link(approach);
      if (up.empty()) continue;
      const VehicleState& f = world.vehicle(up.back());
      if (!follower_ok(f, net.link(approach).length - f.position + rear)) return false;
    }
  }
  return true;
}

std::vector<int> insert_vehicles(World& world, DemandState& state, const Demand& demand, double now,
                                 const ClassDraw& draw_class, const VehicleFactory& factory,
                                 bool mirror) {
  std::vector<int> inserted;
  if (!(demand.rate_vph > 0.0)) return inserted;
  const double headway = 3600.0 / demand.rate_vph;
  const Network& net = world.network();
  const std::array<int, 2> order = mirror ? std::array<int, 2>{1, 0} : std::array<int, 2>{0, 1};
  for (int ring : order) {
    RingDemandState& rs = state.rings[static_cast<std::size_t>(ring)];
    while (static_cast<double>(rs.scheduled) * headway <= now + 1e-9) {
      const int idx = rs.scheduled++;
      rs.pending.push_back(
          {idx, demand.mix.pick(draw_class(ring, idx)), static_cast<double>(idx) * headway});
    }
    if (rs.pending.empty()) continue;
    const PendingInsertion& next = rs.pending.front();
    VehicleState v = factory(next.cls, ring, next.insertion_index);
    const int entry = net.entry_link(ring);
    const double speed = net.link(entry).speed_limit;
    v.link = entry;
    v.position = net.entry_offset() + v.length;
    v.speed = speed;
    v.accel = 0.0;
    v.origin_ring = ring;
    v.insertion_index = next.insertion_index;
    if (!can_insert(world, ring, v, speed)) continue;
    inserted.push_back(world.add_vehicle(std::move(v)));
    rs.pending.pop_front();
    ++rs.inserted;
  }
  return inserted;
}

}  // namespace tworing
