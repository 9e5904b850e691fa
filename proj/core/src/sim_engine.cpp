#include "tworing/sim_engine.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <numbers>
#include <thread>

#include <boost/random/normal_distribution.hpp>
#include <fmt/format.h>

namespace tworing {

double sample_reaction_time(Rng& rng, const ReactionTimeDistribution& d) {
  if (d.scale == 0.0) return d.mean;
  const double delta = d.shape / std::sqrt(1.0 + d.shape * d.shape);
  const double location = d.mean - d.scale * delta * std::sqrt(2.0 / std::numbers::pi);
  boost::random::normal_distribution<double> normal(0.0, 1.0);
  for (int attempt = 0; attempt < 100000; ++attempt) {
    const double u0 = normal(rng);
    const double u1 = normal(rng);
    const double z = delta * std::abs(u0) + std::sqrt(1.0 - delta * delta) * u1;
    const double x = location + d.scale * z;
    if (x >= d.min && x <= d.max) return x;
  }
  throw std::invalid_argument("reaction-time truncation window has no mass");
}

void SimulationSetup::validate() const {
  auto fail = [](const std::string& what) { throw std::invalid_argument(what); };
  (void)build_two_ring(geometry);
  hv.validate();
  av.validate();
  if (!(dt > 0.0)) fail("dt must be positive");
  if (!(horizon > 0.0)) fail("horizon must be positive");
  const double steps = horizon / dt;
  if (std::abs(steps - std::round(steps)) > 1e-6 * std::max(1.0, steps)) {
    fail(fmt::format("horizon {} is not a whole number of steps of {}", horizon, dt));
  }
  if (!(vehicle_length > 0.0)) fail("vehicle length must be positive");
  if (!(lookahead > 0.0)) fail("lookahead must be positive");
  if (!(demand.rate_vph >= 0.0)) fail("demand rate must be non-negative");
  const ClassMix& m = demand.mix;
  if (m.hv < 0.0 || m.connected_hv < 0.0 || m.av < 0.0 || m.cav < 0.0) {
    fail("class shares must be non-negative");
  }
  if (std::abs(m.hv + m.connected_hv + m.av + m.cav - 1.0) > 1e-9) fail("class shares must sum to 1");
  if (!(human.noise_sd >= 0.0)) fail("noise standard deviation must be non-negative");
  if (human.anticipated_leaders < 1 || human.anticipated_leaders > kMaxAnticipatedLeaders) {
    fail(fmt::format("anticipated leaders must lie in [1, {}]", kMaxAnticipatedLeaders));
  }
  const ReactionTimeDistribution& r = human.reaction_time;
  if (!(r.min > 0.0) || !(r.min <= r.max)) fail("reaction-time bounds must satisfy 0 < min <= max");
  if (!(r.scale >= 0.0)) fail("reaction-time scale must be non-negative");
  if (!(r.mean >= r.min && r.mean <= r.max)) fail("reaction-time mean outside its bounds");
  if (!(cooperation.headway_factor > 0.0)) fail("cooperation headway factor must be positive");
  if (!(cooperation.gap_floor > 0.0 && cooperation.gap_floor <= 1.0)) {
    fail("cooperation gap floor must lie in (0, 1]");
  }
}

SimClock::SimClock(double dt, double horizon)
    : dt_(dt), steps_(static_cast<int>(std::llround(horizon / dt))) {}

Simulation::Simulation(const SimulationSetup& setup, std::uint64_t seed, RunOptions options)
    : setup_(setup),
      seed_(seed),
      options_(options),
      network_(build_two_ring(setup.geometry)),
      world_(network_),
      clock_(setup.dt, setup.horizon) {
  setup_.validate();
  out_.seed = seed;
  insert();
}

void Simulation::log(int vehicle, EventKind kind, std::string detail) {
  out_.events.events.push_back({time(), vehicle, kind, std::move(detail)});
}

void Simulation::compute_accelerations() {
  const double t = time();
  for (VehicleState& v : world_.vehicles()) {
    const auto id = static_cast<std::size_t>(v.id);
    const int count = v.human ? v.human->anticipated_leaders : 1;
    const auto leaders = scan_leaders(world_, v.id, count, setup_.lookahead);

    Accel a;
    const LeaderObservation* cause = leaders.empty() ? nullptr : &leaders.front();
    DelayedSample delayed;
    if (v.human) {
      HistoryEntry e;
      e.time = t;
      e.speed = v.speed;
      e.accel = v.accel;
      e.leader_count = static_cast<int>(leaders.size());
      std::copy(leaders.begin(), leaders.end(), e.leaders.begin());
      history_[id].push(e);
    }

    if (cause && !(cause->gap > 0.0)) {
      a = Accel::brake();
    } else if (v.human) {
      delayed = history_[id].sample(t - v.human->reaction_time);
      a = hdm_accel(v.params, *v.human, delayed.view(), noise_rng_[id]);
      if (a.emergency) {
        for (int m = 0; m < delayed.leader_count; ++m) {
          const auto& o = delayed.leaders[static_cast<std::size_t>(m)];
          if (!(o.gap - v.human->reaction_time * o.speed_difference > 0.0)) {
            cause = &o;
            break;
          }
        }
      }
    } else if (v.cls == VehicleClass::CAV) {
      const auto dist = distance_to_merge(world_, v.id);
      const double range = dist ? network_.merge_for_approach(v.link)->detection_range : 0.0;
      const bool conflict = dist && detect_merge_conflict(world_, v.id);
      v.cooperation = cidm_factors(conflict, dist.value_or(std::numeric_limits<double>::infinity()),
                                   dist ? range : setup_.geometry.detection_range, setup_.cooperation);
      a = leaders.empty() ? idm_free_accel(v.params, v.speed)
                          : cidm_accel(v.params, *v.cooperation, v.speed, leaders.front());
    } else {
      a = leaders.empty() ? idm_free_accel(v.params, v.speed)
                          : idm_accel(v.params, v.speed, leaders.front());
    }

    if (!std::isfinite(a.value)) {
      throw SimulationError(fmt::format("non-finite acceleration for vehicle {} at t={}", v.id, t));
    }
    v.accel = a.emergency ? -kEmergencyDecel : a.value;
    if (v.human) history_[id].set_latest_accel(v.accel);

    if (a.emergency && !in_emergency_[id]) {
      if (cause && cause->cross_approach) {
        log(v.id, EventKind::MergeStop, fmt::format("leader {}", cause->leader_id));
        ++out_.merge_stop_count;
      } else {
        log(v.id, EventKind::EmergencyBrake,
            cause ? fmt::format("leader {}", cause->leader_id) : std::string{});
        ++out_.emergency_count;
      }
    }
    in_emergency_[id] = a.emergency ? 1 : 0;
  }
}

void Simulation::record() {
  if (!options_.record_trajectories) return;
  const double t = time();
  auto& rec = out_.trajectories.records;
  for (const VehicleState& v : world_.vehicles()) {
    rec.push_back({t, v.id, v.cls, static_cast<std::uint8_t>(v.link), v.position, v.speed, v.accel});
  }
}

void Simulation::integrate() {
  const double dt = clock_.dt();
  const double p_turn = network_.turn_probability();
  for (VehicleState& v : world_.vehicles()) {
    const double a = v.accel;
    const double next_speed = v.speed + a * dt;
    if (next_speed < 0.0) {
      v.position += v.speed * v.speed / (2.0 * -a);
      v.speed = 0.0;
    } else {
      v.position += v.speed * dt + 0.5 * a * dt * dt;
      v.speed = next_speed;
    }
    if (!std::isfinite(v.position) || !std::isfinite(v.speed)) {
      throw SimulationError(fmt::format("non-finite state for vehicle {} at t={}", v.id, time()));
    }

    int crossings = 0;
    while (v.position >= network_.link(v.link).length) {
      const Link& from = network_.link(v.link);
      int next = 0;
      if (from.downstream.kind == NodeKind::Diverge) {
        const DivergeNode& d = network_.diverge(from.downstream.index);
        if (v.route == RouteDecision::Pending) {
          throw SimulationError(fmt::format("vehicle {} reached a diverge without a route", v.id));
        }
        next = v.route == RouteDecision::Switch ? d.switch_link : d.stay_link;
        log(v.id, EventKind::Turn, std::string(to_string(v.route)));
        v.route = RouteDecision::Pending;
      } else {
        next = network_.merge(from.downstream.index).outgoing_link;
        log(v.id, EventKind::Merge, from.name);
      }
      v.position -= from.length;
      v.link = next;
      if (network_.link(next).downstream.kind == NodeKind::Diverge) {
        v.route = decide_turn(turn_rng_[static_cast<std::size_t>(v.id)], p_turn);
      }
      ++crossings;
    }
    out_.max_boundary_crossings = std::max(out_.max_boundary_crossings, crossings);
  }
  world_.reindex();
}

void Simulation::detect_overlaps() {
  for (const Link& l : network_.links()) {
    const auto& list = world_.on_link(l.id);
    for (std::size_t r = 0; r < list.size(); ++r) {
      const auto fid = static_cast<std::size_t>(list[r]);
      bool overlapping = false;
      if (r + 1 < list.size()) {
        const VehicleState& f = world_.vehicle(list[r]);
        const VehicleState& lead = world_.vehicle(list[r + 1]);
        overlapping = lead.position - lead.length - f.position < 0.0;
        if (overlapping && !in_overlap_[fid]) {
          log(f.id, EventKind::Overlap, fmt::format("leader {}", lead.id));
          ++out_.overlap_count;
        }
      }
      in_overlap_[fid] = overlapping ? 1 : 0;
    }
  }
}

void Simulation::insert() {
  const double p_turn = network_.turn_probability();
  auto draw_class = [this](int ring, int idx) {
    Rng rng = make_stream(seed_, stream_ring(ring), idx, StreamPurpose::ClassAssignment);
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
  };
  auto factory = [&](VehicleClass cls, int ring, int idx) {
    const int key = stream_ring(ring);
    VehicleState v;
    v.cls = cls;
    v.length = setup_.vehicle_length;
    v.params = is_human(cls) ? setup_.hv : setup_.av;
    v.params.desired_speed = std::min(v.params.desired_speed, setup_.geometry.speed_limit);
    if (is_human(cls)) {
      Rng rt = make_stream(seed_, key, idx, StreamPurpose::ReactionTime);
      v.human = HumanFactors{sample_reaction_time(rt, setup_.human.reaction_time),
                             setup_.human.noise_sd, setup_.human.anticipated_leaders};
    }
    if (cls == VehicleClass::CAV) v.cooperation = CooperationState{};
    Rng turn = make_stream(seed_, key, idx, StreamPurpose::Turning);
    v.route = decide_turn(turn, p_turn);
    return v;
  };

  const auto ids = insert_vehicles(world_, demand_, setup_.demand, time(), draw_class, factory,
                                   options_.mirror);
  for (int id : ids) {
    track(id);
    (void)decide_turn(turn_rng_.back(), p_turn);  // already spent on the entry link
    log(id, EventKind::Insert, fmt::format("ring{}", world_.vehicle(id).origin_ring + 1));
  }
}

void Simulation::track(int id) {
  const VehicleState& v = world_.vehicle(id);
  const int key = stream_ring(v.origin_ring);
  history_.emplace_back(v.human ? HistoryBuffer::capacity_for(v.human->reaction_time, clock_.dt())
                                : std::size_t{2});
  noise_rng_.push_back(make_stream(seed_, key, v.insertion_index, StreamPurpose::Noise));
  turn_rng_.push_back(make_stream(seed_, key, v.insertion_index, StreamPurpose::Turning));
  in_emergency_.push_back(0);
  in_overlap_.push_back(0);
}

int Simulation::place_vehicle(VehicleState v) {
  if (v.link < 0 || v.link >= links::kCount) throw std::invalid_argument("no such link");
  if (v.human && v.human->anticipated_leaders > kMaxAnticipatedLeaders) {
    throw std::invalid_argument("too many anticipated leaders");
  }
  const int id = world_.add_vehicle(std::move(v));
  track(id);
  VehicleState& placed = world_.vehicle(id);
  if (placed.route == RouteDecision::Pending &&
      network_.link(placed.link).downstream.kind == NodeKind::Diverge) {
    placed.route = decide_turn(turn_rng_.back(), network_.turn_probability());
  }
  log(id, EventKind::Insert, "placed");
  return id;
}

void Simulation::step() {
  if (finished()) throw std::logic_error("simulation already at its horizon");
  compute_accelerations();
  record();
  integrate();
  detect_overlaps();
  ++step_;
  world_.time = time();
  insert();
}

ReplicationOutput Simulation::run() {
  while (!finished()) step();
  compute_accelerations();
  record();
  for (int ring = 0; ring < 2; ++ring) {
    const auto& rs = demand_.rings[static_cast<std::size_t>(ring)];
    out_.inserted[static_cast<std::size_t>(ring)] = rs.inserted;
    out_.unserved[static_cast<std::size_t>(ring)] = static_cast<int>(rs.pending.size());
  }
  return std::move(out_);
}

ReplicationOutput run_replication(const SimulationSetup& setup, std::uint64_t seed,
                                  RunOptions options) {
  Simulation sim(setup, seed, options);
  return sim.run();
}

void for_each_replication(const SimulationSetup& setup, const ReplicationPlan& plan,
                          int parallelism, const std::function<void(ReplicationResult&&)>& sink,
                          RunOptions options) {
  const int count = static_cast<int>(plan.seeds.size());
  if (count == 0) return;
  const int threads = std::clamp(parallelism, 1, count);
  std::atomic<int> next{0};
  std::mutex sink_error_mutex;
  std::exception_ptr sink_error;

  auto worker = [&] {
    for (int i = next.fetch_add(1); i < count; i = next.fetch_add(1)) {
      ReplicationResult r;
      r.index = i;
      r.seed = plan.seeds[static_cast<std::size_t>(i)];
      try {
        r.output = run_replication(setup, r.seed, options);
        r.output->replication = i;
      } catch (const std::exception& e) {
        r.error = e.what();
      }
      try {
        sink(std::move(r));
      } catch (...) {
        std::lock_guard lock(sink_error_mutex);
        if (!sink_error) sink_error = std::current_exception();
      }
    }
  };

  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(threads));
    for (int i = 0; i < threads; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (sink_error) std::rethrow_exception(sink_error);
}

std::vector<ReplicationResult> run_batch(const SimulationSetup& setup, const ReplicationPlan& plan,
                                         int parallelism, RunOptions options) {
  std::vector<ReplicationResult> results(plan.seeds.size());
  std::mutex m;
  for_each_replication(
      setup, plan, parallelism,
      [&](ReplicationResult&& r) {
        std::lock_guard lock(m);
        results[static_cast<std::size_t>(r.index)] = std::move(r);
      },
      options);
  return results;
}

}  // namespace tworing
