#include "tworing/macro_model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <fmt/format.h>

namespace tworing {

TriangularFd::TriangularFd(double free_flow_speed, double critical_density, double jam_density)
    : free_flow_speed_(free_flow_speed),
      critical_density_(critical_density),
      jam_density_(jam_density) {
  if (!(free_flow_speed > 0.0) || !(critical_density > 0.0) ||
      !(critical_density < jam_density)) {
    throw std::invalid_argument(fmt::format(
        "triangular FD needs v_f > 0 and 0 < k_cr < k_j (got v_f={}, k_cr={}, k_j={})",
        free_flow_speed, critical_density, jam_density));
  }
  capacity_ = free_flow_speed_ * critical_density_;
  wave_speed_ = capacity_ / (jam_density_ - critical_density_);
}

double TriangularFd::flow(double density) const {
  if (!(density >= 0.0) || density > jam_density_) {
    throw std::domain_error(
        fmt::format("density {} outside [0, {}]", density, jam_density_));
  }
  if (density <= critical_density_) return free_flow_speed_ * density;
  return wave_speed_ * (jam_density_ - density);
}

double TriangularFd::slope_right(double density) const {
  return density < critical_density_ ? free_flow_speed_ : -wave_speed_;
}

double TriangularFd::slope_left(double density) const {
  return density <= critical_density_ ? free_flow_speed_ : -wave_speed_;
}

double flow(const TriangularFd& fd, double density) { return fd.flow(density); }

TriangularFd fd_from_driver_params(double headway, double jam_gap, double vehicle_length,
                                   double free_speed) {
  if (!(headway > 0.0) || !(jam_gap > 0.0) || !(vehicle_length > 0.0) || !(free_speed > 0.0)) {
    throw std::invalid_argument("driver parameters must all be positive");
  }
  const double jam_spacing = jam_gap + vehicle_length;
  const double critical_spacing = free_speed * headway + jam_spacing;
  return TriangularFd(free_speed, 1.0 / critical_spacing, 1.0 / jam_spacing);
}

std::string_view to_string(Stability s) {
  return s == Stability::Stable ? "stable" : "unstable";
}

std::string_view to_string(Branch b) {
  switch (b) {
    case Branch::Symmetric: return "symmetric";
    case Branch::Asymmetric: return "asymmetric";
    case Branch::Gridlock: return "gridlock";
  }
  return "unknown";
}

namespace {

bool is_gridlocked(const TriangularFd& fd, double k1, double k2) {
  const double jam = fd.jam_density() - kGridlockTolerance;
  return k1 >= jam || k2 >= jam;
}

}  // namespace

TwoBinRates two_bin_derivatives(const TwoBinState& state, const TriangularFd& fd,
                                const TwoBinParams& params) {
  if (is_gridlocked(fd, state.k1, state.k2)) return {};
  const double rate =
      params.turn_probability / params.ring_length * (fd.flow(state.k2) - fd.flow(state.k1));
  return {rate, -rate};
}

std::vector<TwoBinState> integrate_two_bin(const TwoBinState& initial, const TriangularFd& fd,
                                           const TwoBinParams& params, double dt, double horizon,
                                           std::optional<Perturbation> perturbation) {
  if (!(dt > 0.0) || horizon < dt) {
    throw std::invalid_argument("integrate_two_bin needs dt > 0 and horizon >= dt");
  }
  if (!(params.ring_length > 0.0)) throw std::invalid_argument("ring length must be positive");

  TwoBinState state = initial;
  if (perturbation) {
    state.k1 += perturbation->delta1;
    state.k2 += perturbation->delta2;
  }
  const auto steps = static_cast<std::size_t>(std::llround(horizon / dt));
  std::vector<TwoBinState> path;
  path.reserve(steps + 1);
  path.push_back(state);

  const double jam = fd.jam_density();
  bool frozen = is_gridlocked(fd, state.k1, state.k2);
  for (std::size_t n = 1; n <= steps; ++n) {
    if (!frozen) {
      const double total = state.k1 + state.k2;
      const TwoBinRates r = two_bin_derivatives(state, fd, params);
      state.k1 += dt * r.dk1;
      state.k2 += dt * r.dk2;
      // Overshooting the jam density is clamped onto it, keeping the total.
      if (state.k1 > jam) {
        state.k1 = jam;
        state.k2 = total - jam;
      } else if (state.k2 > jam) {
        state.k2 = jam;
        state.k1 = total - jam;
      }
      frozen = is_gridlocked(fd, state.k1, state.k2);
    }
    state.time = initial.time + static_cast<double>(n) * dt;
    path.push_back(state);
  }
  return path;
}

Stability classify_stability(const TriangularFd& fd, double k1, double k2) {
  if (is_gridlocked(fd, k1, k2)) return Stability::Stable;
  if (std::abs(fd.flow(k1) - fd.flow(k2)) > kEquilibriumFlowTolerance) {
    throw std::domain_error(fmt::format("({}, {}) is not an equilibrium", k1, k2));
  }
  // Perturbation (+e, -e) decays iff q'_+(k1) + q'_-(k2) > 0; (-e, +e) iff
  // q'_-(k1) + q'_+(k2) > 0. Away from the apex both reduce to q'(k1) + q'(k2).
  const bool forward = fd.slope_right(k1) + fd.slope_left(k2) > 0.0;
  const bool backward = fd.slope_left(k1) + fd.slope_right(k2) > 0.0;
  return forward && backward ? Stability::Stable : Stability::Unstable;
}

std::vector<Equilibrium> enumerate_equilibria(const TriangularFd& fd, double mean_density) {
  const double jam = fd.jam_density();
  const double kcr = fd.critical_density();
  if (mean_density < 0.0 || mean_density > jam + kGridlockTolerance) {
    throw std::domain_error(fmt::format("mean density {} outside [0, {}]", mean_density, jam));
  }
  const double K = std::min(mean_density, jam);
  const double tol = kGridlockTolerance;

  std::vector<Equilibrium> out;
  auto add = [&](double a, double b, Branch branch) {
    for (const auto& e : out) {
      if (std::abs(e.k1 - a) <= tol && std::abs(e.k2 - b) <= tol) return;
    }
    out.push_back({a, b, classify_stability(fd, a, b), branch});
  };

  if (K >= jam - tol) {
    add(jam, jam, Branch::Gridlock);
  } else {
    add(K, K, Branch::Symmetric);
  }

  // Cross-branch roots: v_f * k_free = w * (k_j - k_cong), k_free + k_cong = 2K.
  const double vf = fd.free_flow_speed();
  const double w = fd.wave_speed();
  if (std::abs(vf - w) > 1e-12 * std::max(vf, w)) {
    double k_free = w * (jam - 2.0 * K) / (vf - w);
    double k_cong = 2.0 * K - k_free;
    const bool valid = k_free >= -tol && k_free <= kcr + tol && k_cong >= kcr - tol &&
                       k_cong <= jam + tol && std::abs(k_cong - k_free) > tol;
    if (valid) {
      if (k_cong >= jam - tol) {
        k_cong = jam;
        k_free = std::max(0.0, 2.0 * K - jam);
        add(k_free, k_cong, Branch::Gridlock);
        add(k_cong, k_free, Branch::Gridlock);
      } else {
        k_free = std::max(0.0, k_free);
        add(k_free, k_cong, Branch::Asymmetric);
        add(k_cong, k_free, Branch::Asymmetric);
      }
    }
  }

  // One bin jammed holds the rest: reachable only once K >= k_j / 2.
  const double rest = 2.0 * K - jam;
  if (rest >= -tol && rest < jam - tol) {
    add(std::max(0.0, rest), jam, Branch::Gridlock);
    add(jam, std::max(0.0, rest), Branch::Gridlock);
  }

  std::sort(out.begin(), out.end(),
            [](const Equilibrium& a, const Equilibrium& b) { return a.k1 < b.k1; });
  return out;
}

double network_flow(const TriangularFd& fd, const Equilibrium& eq) {
  if (eq.branch == Branch::Gridlock) return 0.0;
  return 0.5 * (fd.flow(eq.k1) + fd.flow(eq.k2));
}

std::vector<NfdPoint> theoretical_nfd(const TriangularFd& fd,
                                      const std::vector<double>& densities) {
  std::vector<NfdPoint> out;
  out.reserve(densities.size());
  for (double K : densities) {
    NfdPoint point{K, {}};
    for (const auto& eq : enumerate_equilibria(fd, K)) {
      if (eq.stability != Stability::Stable) continue;
      const double q = network_flow(fd, eq);
      const bool seen = std::any_of(point.stable_flows.begin(), point.stable_flows.end(),
                                    [&](double x) { return std::abs(x - q) <= 1e-12; });
      if (!seen) point.stable_flows.push_back(q);
    }
    std::sort(point.stable_flows.begin(), point.stable_flows.end());
    out.push_back(std::move(point));
  }
  return out;
}

}  // namespace tworing
