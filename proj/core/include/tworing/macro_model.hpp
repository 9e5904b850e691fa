#pragma once

// Two-bin idealization of the two-ring system: triangular fundamental
// diagram algebra, the mass-conservation ODE pair, closed-form equilibria
// and their stability, and the theoretical network fundamental diagram.

#include <optional>
#include <string_view>
#include <utility>
#include <vector>

namespace tworing {

/// Equilibrium flow tolerance (veh/s) used to accept closed-form roots.
inline constexpr double kEquilibriumFlowTolerance = 1e-9;
/// Density tolerance (veh/m) for detecting a gridlocked bin.
inline constexpr double kGridlockTolerance = 1e-9;

class TriangularFd {
 public:
  /// Builds the triangle from its free-flow slope, apex density and jam
  /// density. Capacity and the congested wave speed follow from those.
  TriangularFd(double free_flow_speed, double critical_density, double jam_density);

  double free_flow_speed() const { return free_flow_speed_; }
  double critical_density() const { return critical_density_; }
  double jam_density() const { return jam_density_; }
  double capacity() const { return capacity_; }
  /// Positive magnitude of the congested-branch slope.
  double wave_speed() const { return wave_speed_; }

  /// q(k); throws std::domain_error outside [0, jam_density].
  double flow(double density) const;

  /// One-sided slopes of q at k. They differ only at the apex.
  double slope_right(double density) const;
  double slope_left(double density) const;

 private:
  double free_flow_speed_;
  double critical_density_;
  double jam_density_;
  double capacity_;
  double wave_speed_;
};

/// Free function form of TriangularFd::flow.
double flow(const TriangularFd& fd, double density);

/// Triangle implied by car-following parameters: jam density is the
/// reciprocal of the jam spacing, the apex sits at the spacing held at the
/// free speed with the safe time headway.
TriangularFd fd_from_driver_params(double headway, double jam_gap, double vehicle_length,
                                   double free_speed);

struct TwoBinState {
  double k1 = 0.0;
  double k2 = 0.0;
  double time = 0.0;
};

struct TwoBinParams {
  double turn_probability = 0.0;
  double ring_length = 0.0;
};

struct TwoBinRates {
  double dk1 = 0.0;
  double dk2 = 0.0;
};

enum class Stability { Stable, Unstable };
enum class Branch { Symmetric, Asymmetric, Gridlock };

std::string_view to_string(Stability s);
std::string_view to_string(Branch b);

struct Equilibrium {
  double k1 = 0.0;
  double k2 = 0.0;
  Stability stability = Stability::Stable;
  Branch branch = Branch::Symmetric;

  friend bool operator==(const Equilibrium&, const Equilibrium&) = default;
};

/// Right-hand side of the two-bin mass balance. Both rates vanish once
/// either bin is gridlocked.
TwoBinRates two_bin_derivatives(const TwoBinState& state, const TriangularFd& fd,
                                const TwoBinParams& params);

struct Perturbation {
  double delta1 = 0.0;
  double delta2 = 0.0;
};

/// Explicit Euler integration. The trajectory includes the (perturbed)
/// initial state and one entry per step. A bin reaching jam density freezes
/// the system for the remainder of the horizon.
std::vector<TwoBinState> integrate_two_bin(const TwoBinState& initial, const TriangularFd& fd,
                                           const TwoBinParams& params, double dt, double horizon,
                                           std::optional<Perturbation> perturbation = std::nullopt);

/// All equilibria with mean density K, sorted by k1 (closed under swapping).
std::vector<Equilibrium> enumerate_equilibria(const TriangularFd& fd, double mean_density);

/// Linear stability along the mass-conserving perturbation direction.
/// Uses one-sided slopes so that states on the apex are classified by the
/// branch each perturbation actually moves onto. Gridlocked states are
/// absorbing and reported as stable. Throws std::domain_error when the pair
/// is not an equilibrium.
Stability classify_stability(const TriangularFd& fd, double k1, double k2);

struct NfdPoint {
  double mean_density = 0.0;
  /// Network flow of every stable equilibrium at this density, ascending,
  /// duplicates removed.
  std::vector<double> stable_flows;
};

std::vector<NfdPoint> theoretical_nfd(const TriangularFd& fd, const std::vector<double>& densities);

/// Network flow of an equilibrium: the mean ring flow, or zero once the
/// network has locked up.
double network_flow(const TriangularFd& fd, const Equilibrium& eq);

}  // namespace tworing
