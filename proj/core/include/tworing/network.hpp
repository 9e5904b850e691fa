#pragma once

// Two-ring topology, vehicle state, and the read-only world queries used by
// the step loop: multi-leader lookahead with virtual-gap superposition at
// merges, merge-conflict detection for cooperative vehicles, Bernoulli
// turning, and demand-driven insertion.

#include <array>
#include <cstdint>
#include <deque>
#include <functional>
#include <numbers>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tworing/cf_models.hpp"

namespace tworing {

enum class VehicleClass : std::uint8_t { HV = 0, ConnectedHV = 1, AV = 2, CAV = 3 };
inline constexpr std::array<VehicleClass, 4> kAllClasses = {
    VehicleClass::HV, VehicleClass::ConnectedHV, VehicleClass::AV, VehicleClass::CAV};

std::string_view to_string(VehicleClass c);
bool is_human(VehicleClass c);
/// Connected vehicles can be detected by cooperating CAVs.
bool is_connected(VehicleClass c);

enum class LinkKind : std::uint8_t { Ring1Segment, Ring2Segment, Connector };
enum class NodeKind : std::uint8_t { Merge, Diverge };

struct NodeRef {
  NodeKind kind = NodeKind::Merge;
  int index = 0;
};

struct Link {
  int id = 0;
  std::string name;
  double length = 0.0;
  double speed_limit = 0.0;
  LinkKind kind = LinkKind::Connector;
  NodeRef downstream;
  /// 0 or 1 for ring segments, -1 for connectors.
  int ring = -1;
};

struct MergeNode {
  int id = 0;
  std::array<int, 2> approach_links{};
  int outgoing_link = 0;
  double detection_range = 30.0;
  double merge_zone_length = 30.0;
};

struct DivergeNode {
  int id = 0;
  int incoming_link = 0;
  int stay_link = 0;
  int switch_link = 0;
  double turn_probability = 0.0;
};

struct GeometryConfig {
  std::array<double, 2> ring_radius{50.0, 50.0};
  double connector_length = 100.0;
  double speed_limit = 30.0 / 3.6;
  /// Ring distance from each diverge down to the merge of the same ring.
  double diverge_to_merge = 2.0 * std::numbers::pi * 50.0 / 6.0;
  double detection_range = 30.0;
  double merge_zone_length = 30.0;
  /// Distance from the merge node to the rear bumper of an inserted vehicle.
  double entry_offset = 0.0;
  double turn_probability = 0.0;
};

/// Fixed link numbering of the two-ring system.
namespace links {
inline constexpr int kRing1Main = 0;      // merge 1 -> diverge 1
inline constexpr int kRing1Approach = 1;  // diverge 1 -> merge 1
inline constexpr int kRing2Main = 2;      // merge 2 -> diverge 2
inline constexpr int kRing2Approach = 3;  // diverge 2 -> merge 2
inline constexpr int kConnector12 = 4;    // diverge 1 -> merge 2
inline constexpr int kConnector21 = 5;    // diverge 2 -> merge 1
inline constexpr int kCount = 6;
}  // namespace links

/// Ring-1 <-> ring-2 relabelling of link ids.
int mirror_link(int link_id);

class Network {
 public:
  const std::vector<Link>& links() const { return links_; }
  const Link& link(int id) const { return links_.at(static_cast<std::size_t>(id)); }
  const std::array<MergeNode, 2>& merges() const { return merges_; }
  const std::array<DivergeNode, 2>& diverges() const { return diverges_; }
  const MergeNode& merge(int index) const { return merges_.at(static_cast<std::size_t>(index)); }
  const DivergeNode& diverge(int index) const {
    return diverges_.at(static_cast<std::size_t>(index));
  }

  double ring_length(int ring) const;
  /// Ring segments of one ring (region used by the measurements).
  std::vector<int> ring_links(int ring) const;
  double turn_probability() const { return diverges_[0].turn_probability; }
  double entry_offset() const { return entry_offset_; }
  int entry_link(int ring) const { return ring == 0 ? links::kRing1Main : links::kRing2Main; }

  /// Merge whose approach this link is, if any.
  const MergeNode* merge_for_approach(int link_id) const;
  /// Diverge fed by this link, if any.
  const DivergeNode* diverge_for_incoming(int link_id) const;

  friend Network build_two_ring(const GeometryConfig& geometry);

 private:
  std::vector<Link> links_;
  std::array<MergeNode, 2> merges_{};
  std::array<DivergeNode, 2> diverges_{};
  double entry_offset_ = 0.0;
};

/// Builds the symmetric two-ring system. Throws std::invalid_argument on
/// non-positive geometry, unequal ring radii, or a merge zone longer than
/// either approach.
Network build_two_ring(const GeometryConfig& geometry);

enum class RouteDecision : std::uint8_t { Pending, Stay, Switch };
std::string_view to_string(RouteDecision r);

struct VehicleState {
  int id = 0;
  VehicleClass cls = VehicleClass::HV;
  int link = 0;
  double position = 0.0;  // front bumper, metres from link start
  double speed = 0.0;
  double accel = 0.0;
  double length = 5.0;
  DriverParams params;
  std::optional<HumanFactors> human;
  std::optional<CooperationState> cooperation;
  RouteDecision route = RouteDecision::Pending;
  int origin_ring = 0;
  int insertion_index = 0;
};

/// Vehicles plus a per-link index sorted by position.
class World {
 public:
  explicit World(const Network& network);

  const Network& network() const { return *network_; }
  const std::vector<VehicleState>& vehicles() const { return vehicles_; }
  std::vector<VehicleState>& vehicles() { return vehicles_; }
  const VehicleState& vehicle(int id) const { return vehicles_.at(static_cast<std::size_t>(id)); }
  VehicleState& vehicle(int id) { return vehicles_.at(static_cast<std::size_t>(id)); }

  /// Vehicle ids on a link ordered by ascending position (ties by id).
  const std::vector<int>& on_link(int link_id) const {
    return by_link_[static_cast<std::size_t>(link_id)];
  }

  /// Index of the vehicle within on_link(vehicle.link).
  std::size_t rank(int id) const { return rank_[static_cast<std::size_t>(id)]; }

  /// Appends a vehicle, assigning the next id. Returns the id.
  int add_vehicle(VehicleState v);
  /// Re-sorts the per-link index after positions or links changed.
  void reindex();

  double time = 0.0;

 private:
  const Network* network_;
  std::vector<VehicleState> vehicles_;
  std::vector<std::vector<int>> by_link_;
  std::vector<std::size_t> rank_;  // position of each vehicle in its link list
};

inline constexpr double kDefaultLookahead = 200.0;
/// Added to the scanned distance when no vehicle is found ahead.
inline constexpr double kFreeRoadGap = 1.0e4;

/// Up to `count` vehicles ahead of `vehicle_id` along its route, nearest
/// first, within `lookahead` metres. Inside a merge zone the two approaches
/// are superimposed onto a common axis ending at the merge point; equal
/// superimposed positions are ordered by vehicle id. Gaps are cumulative net
/// gaps (vehicle lengths removed), kept non-decreasing beyond the first.
std::vector<LeaderObservation> scan_leaders(const World& world, int vehicle_id, int count,
                                            double lookahead = kDefaultLookahead);

/// Immediate (possibly virtual) leader. With nothing in range the gap is the
/// scanned distance plus kFreeRoadGap.
LeaderObservation virtual_leader(const World& world, int vehicle_id,
                                 double lookahead = kDefaultLookahead);

/// Distance from the front bumper to the merge point when the vehicle is on
/// a merge approach, otherwise nullopt.
std::optional<double> distance_to_merge(const World& world, int vehicle_id);

/// True iff a connected vehicle (ConnectedHV or CAV) is within detection
/// range of the merge point on the other approach. Only CAVs inside the
/// range can detect; anything else returns false.
bool detect_merge_conflict(const World& world, int vehicle_id);

/// Bernoulli turning draw: Switch with probability p_turn.
RouteDecision decide_turn(Rng& rng, double turn_probability);

// --- insertion ---------------------------------------------------------

struct ClassMix {
  double hv = 1.0;
  double connected_hv = 0.0;
  double av = 0.0;
  double cav = 0.0;

  double share(VehicleClass c) const;
  /// Class for a uniform draw u in [0, 1).
  VehicleClass pick(double u) const;

  friend bool operator==(const ClassMix&, const ClassMix&) = default;
};

struct Demand {
  double rate_vph = 180.0;  // per ring
  ClassMix mix;
};

struct PendingInsertion {
  int insertion_index = 0;
  VehicleClass cls = VehicleClass::HV;
  double scheduled_time = 0.0;
};

struct RingDemandState {
  int scheduled = 0;  // slots released so far
  int inserted = 0;
  std::deque<PendingInsertion> pending;
};

struct DemandState {
  std::array<RingDemandState, 2> rings;
};

/// Builds the vehicle for a slot (params, human factors, route). The
/// returned state's link/position/speed are overwritten by the inserter.
using VehicleFactory = std::function<VehicleState(VehicleClass, int ring, int insertion_index)>;
/// Uniform [0,1) class draw for a slot.
using ClassDraw = std::function<double(int ring, int insertion_index)>;

/// Whether a vehicle with these parameters can enter at the ring's entry
/// point at `speed`: its own IDM response to the vehicle ahead and the IDM
/// response of the nearest follower on each upstream path must both be no
/// harsher than the comfortable deceleration.
bool can_insert(const World& world, int ring, const VehicleState& candidate, double speed);

/// Releases slots due by time `now` (one every 3600/rate seconds per ring,
/// starting at t = 0) and inserts at most one queued vehicle per ring when
/// feasible. Ring order is reversed when `mirror` is set. Returns the ids
/// inserted.
std::vector<int> insert_vehicles(World& world, DemandState& state, const Demand& demand, double now,
                                 const ClassDraw& draw_class, const VehicleFactory& factory,
                                 bool mirror = false);

}  // namespace tworing
