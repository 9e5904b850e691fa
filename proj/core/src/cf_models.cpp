#include "tworing/cf_models.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <boost/random/normal_distribution.hpp>

namespace tworing {

void DriverParams::validate() const {
  if (!(desired_speed > 0.0) || !(safe_headway > 0.0) || !(max_accel > 0.0) ||
      !(comfort_decel > 0.0) || !(jam_gap > 0.0)) {
    throw std::invalid_argument("driver parameters must all be positive");
  }
}

DriverParams DriverParams::human() { return {120.0 / 3.6, 1.5, 1.5, 2.0, 2.0}; }

DriverParams DriverParams::automated() { return {120.0 / 3.6, 0.5, 1.5, 2.0, 0.5}; }

double idm_desired_gap(const DriverParams& p, double speed, double speed_difference) {
  const double dynamic = speed * speed_difference / (2.0 * std::sqrt(p.max_accel * p.comfort_decel));
  return std::max(p.jam_gap, p.jam_gap + p.safe_headway * speed + dynamic);
}

namespace {

double free_term(const DriverParams& p, double speed) {
  const double r = speed / p.desired_speed;
  return 1.0 - (r * r) * (r * r);
}

}  // namespace

Accel idm_free_accel(const DriverParams& p, double speed) {
  return Accel::of(p.max_accel * free_term(p, speed));
}

Accel idm_accel(const DriverParams& p, double speed, const LeaderObservation& obs) {
  if (!(obs.gap > 0.0)) return Accel::brake();
  const double ratio = idm_desired_gap(p, speed, obs.speed_difference) / obs.gap;
  return Accel::of(p.max_accel * (free_term(p, speed) - ratio * ratio));
}

Accel hdm_accel(const DriverParams& p, const HumanFactors& h, const DelayedState& delayed,
                Rng& rng) {
  const double tr = h.reaction_time;
  const double v_anticipated = std::max(0.0, delayed.speed + tr * delayed.accel);

  double interaction = 0.0;
  const auto count = std::min<std::size_t>(delayed.leaders.size(),
                                           static_cast<std::size_t>(std::max(1, h.anticipated_leaders)));
  for (std::size_t m = 0; m < count; ++m) {
    const LeaderObservation& leader = delayed.leaders[m];
    const double gap = leader.gap - tr * leader.speed_difference;
    if (!(gap > 0.0)) return Accel::brake();
    const double ratio = idm_desired_gap(p, v_anticipated, leader.speed_difference) / gap;
    interaction += ratio * ratio;
  }

  double accel = p.max_accel * free_term(p, v_anticipated) - p.max_accel * interaction;
  if (h.noise_sd > 0.0) {
    boost::random::normal_distribution<double> noise(0.0, h.noise_sd);
    accel += noise(rng);
  }
  return Accel::of(accel);
}

CooperationState cidm_factors(bool conflict, double distance_to_merge, double detection_range,
                              const CooperationRule& rule) {
  CooperationState cs;
  cs.distance_to_merge = distance_to_merge;
  cs.detection_range = detection_range;
  if (!conflict || distance_to_merge > detection_range) return cs;
  const double x = std::max(0.0, distance_to_merge) / detection_range;
  cs.active = true;
  cs.lambda_headway = rule.headway_factor;
  cs.lambda_gap = std::max(rule.gap_floor, x * x);
  return cs;
}

Accel cidm_accel(const DriverParams& p, const CooperationState& cs, double speed,
                 const LeaderObservation& obs) {
  if (!cs.active) return idm_accel(p, speed, obs);
  DriverParams scaled = p;
  scaled.safe_headway *= cs.lambda_headway;
  scaled.max_accel *= cs.lambda_accel;
  scaled.comfort_decel *= cs.lambda_decel;
  LeaderObservation perceived = obs;
  perceived.gap *= cs.lambda_gap;
  return idm_accel(scaled, speed, perceived);
}

}  // namespace tworing
