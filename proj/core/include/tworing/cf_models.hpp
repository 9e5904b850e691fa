#pragma once

// Longitudinal acceleration laws: IDM for automated vehicles, the human
// driver metamodel on top of IDM for human drivers, and the cooperative
// merging factors applied by connected automated vehicles.

#include <random>
#include <span>

namespace tworing {

using Rng = std::mt19937_64;

/// Deceleration applied on the emergency-brake path (m/s^2, positive).
inline constexpr double kEmergencyDecel = 9.0;
inline constexpr double kAccelExponent = 4.0;

struct DriverParams {
  double desired_speed = 120.0 / 3.6;  // v0, m/s
  double safe_headway = 1.5;           // T, s
  double max_accel = 1.5;              // a, m/s^2
  double comfort_decel = 2.0;          // b, m/s^2
  double jam_gap = 2.0;                // s0, m

  /// Throws std::invalid_argument unless every field is positive.
  void validate() const;

  static DriverParams human();
  static DriverParams automated();

  friend bool operator==(const DriverParams&, const DriverParams&) = default;
};

struct HumanFactors {
  double reaction_time = 1.2;  // s
  double noise_sd = 0.2;       // m/s^2
  int anticipated_leaders = 3;

  friend bool operator==(const HumanFactors&, const HumanFactors&) = default;
};

/// What a follower perceives about one vehicle ahead. The gap is net
/// (bumper to bumper) and may be negative for a leader on the other merge
/// approach.
struct LeaderObservation {
  double gap = 0.0;
  double speed_difference = 0.0;  // own speed minus leader speed
  double leader_speed = 0.0;
  int leader_id = -1;
  bool cross_approach = false;

  friend bool operator==(const LeaderObservation&, const LeaderObservation&) = default;
};

/// Acceleration command, or a request for the caller to brake at
/// kEmergencyDecel because the perceived gap is not positive.
struct Accel {
  double value = 0.0;
  bool emergency = false;

  static Accel brake() { return {-kEmergencyDecel, true}; }
  static Accel of(double v) { return {v, false}; }
};

struct CooperationState {
  bool active = false;
  double distance_to_merge = 0.0;
  double detection_range = 30.0;
  double lambda_headway = 1.0;  // lambda_T
  double lambda_gap = 1.0;      // lambda_s
  double lambda_accel = 1.0;    // lambda_a, fixed
  double lambda_decel = 1.0;    // lambda_b, fixed
};

struct CooperationRule {
  double headway_factor = 2.0;
  double gap_floor = 0.4;
};

/// s* = s0 + T v + v dv / (2 sqrt(ab)), never below s0.
double idm_desired_gap(const DriverParams& p, double speed, double speed_difference);

/// Plain IDM. Non-positive gaps return Accel::brake().
Accel idm_accel(const DriverParams& p, double speed, const LeaderObservation& obs);

/// Free-road IDM (no leader in range).
Accel idm_free_accel(const DriverParams& p, double speed);

/// Delayed own state plus the leader observations recorded at that time.
struct DelayedState {
  double speed = 0.0;
  double accel = 0.0;
  std::span<const LeaderObservation> leaders;
};

/// Human driver model: reaction-delayed inputs, constant-velocity gap and
/// constant-acceleration speed anticipation, one interaction term per
/// anticipated leader (cumulative net gaps), plus white acceleration noise.
/// With no leaders only the free term applies. The noise draw is skipped
/// entirely when noise_sd is zero so the stream is left untouched.
Accel hdm_accel(const DriverParams& p, const HumanFactors& h, const DelayedState& delayed,
                Rng& rng);

/// Factors for a CAV given whether a connected vehicle was detected on the
/// other approach and the distance left to the merge point.
CooperationState cidm_factors(bool conflict, double distance_to_merge, double detection_range,
                              const CooperationRule& rule = {});

/// IDM with T scaled by lambda_T and the perceived gap by lambda_s.
Accel cidm_accel(const DriverParams& p, const CooperationState& cs, double speed,
                 const LeaderObservation& obs);

}  // namespace tworing
