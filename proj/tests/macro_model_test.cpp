#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "tworing/macro_model.hpp"

namespace tworing {
namespace {

constexpr double kLimit = 30.0 / 3.6;

TriangularFd hv_fd() { return fd_from_driver_params(1.5, 2.0, 5.0, kLimit); }
TriangularFd av_fd() { return fd_from_driver_params(0.5, 0.5, 5.0, kLimit); }

TEST(TriangularFd, FlowAtKeyDensities) {
  const TriangularFd fd = hv_fd();
  EXPECT_EQ(fd.flow(0.0), 0.0);
  EXPECT_NEAR(fd.flow(fd.jam_density()), 0.0, 1e-15);
  EXPECT_DOUBLE_EQ(fd.flow(fd.critical_density()), fd.capacity());
  EXPECT_DOUBLE_EQ(fd.flow(fd.critical_density() / 2), fd.capacity() / 2);
  EXPECT_DOUBLE_EQ(flow(fd, 0.01), fd.flow(0.01));
}

TEST(TriangularFd, OutOfRangeDensityThrows) {
  const TriangularFd fd = hv_fd();
  EXPECT_THROW(fd.flow(-1e-6), std::domain_error);
  EXPECT_THROW(fd.flow(fd.jam_density() + 1e-6), std::domain_error);
  EXPECT_THROW(TriangularFd(1.0, 0.2, 0.1), std::invalid_argument);
}

TEST(TriangularFd, ApexConsistency) {
  for (const TriangularFd& fd : {hv_fd(), av_fd()}) {
    EXPECT_NEAR(fd.capacity(), fd.free_flow_speed() * fd.critical_density(), 1e-15);
    EXPECT_NEAR(fd.capacity(), fd.wave_speed() * (fd.jam_density() - fd.critical_density()), 1e-15);
    EXPECT_GT(fd.wave_speed(), 0.0);
  }
}

TEST(FdFromDriverParams, TableValues) {
  const TriangularFd hv = hv_fd();
  const TriangularFd av = av_fd();
  EXPECT_DOUBLE_EQ(hv.jam_density(), 1.0 / 7.0);
  EXPECT_DOUBLE_EQ(av.jam_density(), 1.0 / 5.5);
  // v T + s0 + L by hand: 12.5 + 7 and 4.1667 + 5.5.
  EXPECT_NEAR(hv.critical_density(), 1.0 / 19.5, 1e-15);
  EXPECT_NEAR(av.critical_density(), 1.0 / (kLimit * 0.5 + 5.5), 1e-15);
  EXPECT_NEAR(hv.capacity(), kLimit / 19.5, 1e-15);
}

TEST(FdFromDriverParams, VanishingHeadwayClosesTheFreeBranch) {
  const TriangularFd fd = fd_from_driver_params(1e-12, 2.0, 5.0, kLimit);
  EXPECT_NEAR(fd.critical_density(), fd.jam_density(), 1e-12);
}

TEST(FdFromDriverParams, AutomatedTriangleEnvelopsHuman) {
  EXPECT_GT(av_fd().capacity(), hv_fd().capacity());
  EXPECT_GT(av_fd().jam_density(), hv_fd().jam_density());
}

TEST(TwoBin, Derivatives) {
  const TriangularFd fd = hv_fd();
  const TwoBinParams p{0.15, 314.159};
  auto r = two_bin_derivatives({0.03, 0.03}, fd, p);
  EXPECT_EQ(r.dk1, 0.0);
  EXPECT_EQ(r.dk2, 0.0);

  r = two_bin_derivatives({fd.jam_density(), 0.01}, fd, p);
  EXPECT_EQ(r.dk1, 0.0);
  EXPECT_EQ(r.dk2, 0.0);

  // q(0.03) = 0.25, q(0.13) = w (k_j - 0.13) is smaller.
  r = two_bin_derivatives({0.03, 0.13}, fd, p);
  const double expected = 0.15 / 314.159 * (fd.flow(0.13) - fd.flow(0.03));
  EXPECT_LT(r.dk1, 0.0);
  EXPECT_GT(r.dk2, 0.0);
  EXPECT_DOUBLE_EQ(r.dk1, expected);
  EXPECT_EQ(r.dk1, -r.dk2);
}

TEST(TwoBin, MassConservation) {
  const TriangularFd fd = hv_fd();
  const TwoBinParams p{0.5, 100.0};
  const auto path = integrate_two_bin({0.02, 0.09}, fd, p, 0.1, 600.0);
  const double total = path.front().k1 + path.front().k2;
  for (const auto& s : path) EXPECT_NEAR(s.k1 + s.k2, total, 1e-12 * total);
  EXPECT_EQ(path.size(), 6001u);
  EXPECT_DOUBLE_EQ(path.back().time, 600.0);
}

TEST(TwoBin, SymmetricStartIsConstant) {
  const TriangularFd fd = hv_fd();
  const auto path = integrate_two_bin({0.06, 0.06}, fd, {0.15, 314.0}, 0.1, 100.0);
  for (const auto& s : path) {
    EXPECT_EQ(s.k1, 0.06);
    EXPECT_EQ(s.k2, 0.06);
  }
}

TEST(TwoBin, PerturbationAboveCriticalDiverges) {
  const TriangularFd fd = hv_fd();
  const double K = 0.06;
  const auto path = integrate_two_bin({K, K}, fd, {0.15, 314.0}, 0.1, 20000.0, Perturbation{1e-4, -1e-4});
  const auto& end = path.back();
  EXPECT_GT(std::abs(end.k1 - end.k2), 0.01);
  // Settles on the asymmetric branch.
  bool near_branch = false;
  for (const auto& eq : enumerate_equilibria(fd, K)) {
    if (eq.branch == Branch::Asymmetric && std::abs(eq.k1 - end.k1) < 1e-6) near_branch = true;
  }
  EXPECT_TRUE(near_branch);
}

TEST(TwoBin, PerturbationBelowCriticalDecays) {
  const TriangularFd fd = hv_fd();
  const auto path = integrate_two_bin({0.03, 0.03}, fd, {0.15, 314.0}, 0.1, 5000.0, Perturbation{1e-4, -1e-4});
  EXPECT_LT(std::abs(path.back().k1 - path.back().k2), 1e-8);
}

TEST(TwoBin, GridlockFreezesTheSystem) {
  const TriangularFd fd = hv_fd();
  const auto path = integrate_two_bin({fd.jam_density(), 0.01}, fd, {0.5, 100.0}, 0.1, 10.0);
  for (const auto& s : path) {
    EXPECT_EQ(s.k1, fd.jam_density());
    EXPECT_EQ(s.k2, 0.01);
  }
}

TEST(Equilibria, BelowCriticalUniqueStableSymmetric) {
  const TriangularFd fd = hv_fd();
  for (double K : {0.0, 0.01, 0.03, 0.05}) {
    const auto eqs = enumerate_equilibria(fd, K);
    ASSERT_EQ(eqs.size(), 1u) << K;
    EXPECT_EQ(eqs[0].branch, Branch::Symmetric);
    EXPECT_EQ(eqs[0].stability, Stability::Stable);
    EXPECT_DOUBLE_EQ(eqs[0].k1, K);
  }
}

TEST(Equilibria, BetweenCriticalAndHalfJamThreeEquilibria) {
  const TriangularFd fd = hv_fd();
  const double K = 0.06;
  const auto eqs = enumerate_equilibria(fd, K);
  ASSERT_EQ(eqs.size(), 3u);
  EXPECT_EQ(eqs[1].branch, Branch::Symmetric);
  EXPECT_EQ(eqs[1].stability, Stability::Unstable);
  for (const auto& e : {eqs[0], eqs[2]}) {
    EXPECT_EQ(e.branch, Branch::Asymmetric);
    EXPECT_EQ(e.stability, Stability::Stable);
    EXPECT_NEAR(fd.flow(e.k1), fd.flow(e.k2), 1e-9);
    EXPECT_NEAR(0.5 * (e.k1 + e.k2), K, 1e-12);
  }
  EXPECT_NEAR(eqs[0].k1, eqs[2].k2, 1e-15);
}

TEST(Equilibria, HalfJamDensityIsGridlock) {
  const TriangularFd fd = hv_fd();
  const auto eqs = enumerate_equilibria(fd, fd.jam_density() / 2);
  bool endpoint = false;
  for (const auto& e : eqs) {
    if (e.branch == Branch::Gridlock && e.k1 == 0.0 && e.k2 == fd.jam_density()) endpoint = true;
    if (e.stability == Stability::Stable) EXPECT_NEAR(network_flow(fd, e), 0.0, 1e-12);
  }
  EXPECT_TRUE(endpoint);
}

TEST(Equilibria, ClosedUnderSwap) {
  const TriangularFd fd = av_fd();
  for (int i = 0; i <= 100; ++i) {
    const double K = fd.jam_density() * i / 100.0;
    const auto eqs = enumerate_equilibria(fd, K);
    for (const auto& e : eqs) {
      const bool mirrored = std::any_of(eqs.begin(), eqs.end(), [&](const Equilibrium& o) {
        return std::abs(o.k1 - e.k2) < 1e-12 && std::abs(o.k2 - e.k1) < 1e-12;
      });
      EXPECT_TRUE(mirrored) << K;
    }
  }
}

TEST(Equilibria, IndependentOfTurningProbability) {
  const TriangularFd fd = hv_fd();
  for (double K : {0.02, 0.06, 0.07, 0.1}) {
    for (const auto& e : enumerate_equilibria(fd, K)) {
      for (double p : {0.05, 0.15, 0.5, 1.0}) {
        const auto r = two_bin_derivatives({e.k1, e.k2}, fd, {p, 314.0});
        EXPECT_NEAR(r.dk1, 0.0, 1e-12);
      }
    }
  }
}

TEST(Stability, Examples) {
  const TriangularFd fd = hv_fd();
  EXPECT_EQ(classify_stability(fd, 0.03, 0.03), Stability::Stable);
  EXPECT_EQ(classify_stability(fd, 0.06, 0.06), Stability::Unstable);
  const auto eqs = enumerate_equilibria(fd, 0.06);
  ASSERT_GT(fd.free_flow_speed(), fd.wave_speed());
  EXPECT_EQ(classify_stability(fd, eqs.front().k1, eqs.front().k2), Stability::Stable);
  EXPECT_THROW(classify_stability(fd, 0.01, 0.02), std::domain_error);
}

TEST(TheoreticalNfd, Examples) {
  const TriangularFd fd = hv_fd();
  const auto nfd = theoretical_nfd(fd, {0.0, fd.critical_density(), fd.jam_density() / 2});
  ASSERT_EQ(nfd.size(), 3u);
  EXPECT_EQ(nfd[0].stable_flows, std::vector<double>{0.0});
  ASSERT_EQ(nfd[1].stable_flows.size(), 1u);
  EXPECT_NEAR(nfd[1].stable_flows[0], fd.capacity(), 1e-12);
  ASSERT_FALSE(nfd[2].stable_flows.empty());
  EXPECT_NEAR(nfd[2].stable_flows.back(), 0.0, 1e-12);
}

TEST(TheoreticalNfd, AsymmetricBranchFlowIsLinearInK) {
  const TriangularFd fd = hv_fd();
  // Along the branch q(k_free) = v_f k_free with k_free = w (k_j - 2K)/(v_f - w).
  const double vf = fd.free_flow_speed();
  const double w = fd.wave_speed();
  for (double K : {0.055, 0.06, 0.065, 0.07}) {
    const auto pt = theoretical_nfd(fd, {K}).front();
    ASSERT_EQ(pt.stable_flows.size(), 1u);
    EXPECT_NEAR(pt.stable_flows[0], vf * w * (fd.jam_density() - 2 * K) / (vf - w), 1e-12);
  }
}

}  // namespace
}  // namespace tworing
