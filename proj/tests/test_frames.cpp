#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "evasion/dynamics.hpp"
#include "evasion/engagement.hpp"
#include "evasion/errors.hpp"
#include "evasion/frames.hpp"

namespace evasion {
namespace {

constexpr double kPi = std::numbers::pi;

void expect_vec_near(const GeoVector& a, const GeoVector& b, double tol) {
  EXPECT_NEAR(a.x, b.x, tol);
  EXPECT_NEAR(a.y, b.y, tol);
  EXPECT_NEAR(a.z, b.z, tol);
}

TEST(LaunchFrameOffset, CoincidentPointsGiveZero) {
  const GeoVector r{1e6, 2e6, 3e6};
  EXPECT_EQ(launch_frame_offset(r, LaunchBasis{}, r), (GeoVector{0, 0, 0}));
}

TEST(LaunchFrameOffset, IdentityBasisPassesOffsetThrough) {
  const GeoVector p{10, 20, 30};
  expect_vec_near(launch_frame_offset(p, LaunchBasis{}, p + GeoVector{1, 2, 3}),
                  {1, 2, 3}, 1e-12);
}

TEST(LaunchFrameOffset, QuarterTurnAboutZ) {
  // Columns of the rotation by +90 deg about Z.
  LaunchBasis b;
  b.axes = {GeoVector{0, 1, 0}, GeoVector{-1, 0, 0}, GeoVector{0, 0, 1}};
  expect_vec_near(launch_frame_offset({}, b, {1, 0, 0}), {0, -1, 0}, 1e-15);
}

TEST(LaunchFrameOffset, RejectsNonOrthonormalBasis) {
  LaunchBasis b;
  b.axes[0] = {1.0, 1e-6, 0.0};
  EXPECT_THROW(launch_frame_offset({}, b, {1, 0, 0}), InvalidFrameError);
}

TEST(LosAngles, DeadAheadAboveAndDiagonal) {
  const LosAngles a = los_angles({1, 0, 0});
  EXPECT_EQ(a.epsilon, 0.0);
  EXPECT_EQ(a.eta, 0.0);
  const LosAngles up = los_angles({0, 1, 0});
  EXPECT_DOUBLE_EQ(up.epsilon, kPi / 2);
  EXPECT_EQ(up.eta, 0.0);
  const LosAngles diag = los_angles({1, 1, 0});
  EXPECT_DOUBLE_EQ(diag.epsilon, kPi / 4);
  EXPECT_EQ(diag.eta, 0.0);
}

TEST(LosAngles, ZeroOffsetIsDegenerate) {
  EXPECT_THROW(los_angles({0, 0, 0}), DegenerateGeometryError);
}

TEST(LosAngles, EtaStaysInHalfOpenRange) {
  const LosAngles behind = los_angles({-1, 0, 0});
  EXPECT_EQ(behind.eta, kPi);
  const LosAngles behind_neg_zero = los_angles({-1, 0, -0.0});
  EXPECT_EQ(behind_neg_zero.eta, kPi);
}

TEST(LosAngles, ReconstructsOffsetFromAngles) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-5000.0, 5000.0);
  for (int i = 0; i < 1000; ++i) {
    const GeoVector d{u(rng), u(rng), u(rng)};
    const LosAngles a = los_angles(d);
    ASSERT_GE(a.epsilon, -kPi / 2);
    ASSERT_LE(a.epsilon, kPi / 2);
    ASSERT_GT(a.eta, -kPi);
    ASSERT_LE(a.eta, kPi);
    const GeoVector unit{std::cos(a.epsilon) * std::cos(a.eta),
                         std::sin(a.epsilon),
                         -std::cos(a.epsilon) * std::sin(a.eta)};
    const GeoVector back = unit * norm(d);
    EXPECT_LE(norm(back - d), 1e-9 * norm(d));
  }
}

TEST(RelativeState, ThreeFourFive) {
  VehicleState e{{3, 4, 0}, {1, 1, 1}};
  VehicleState p{{0, 0, 0}, {0, 1, 0}};
  const RelativeState r = relative_state(e, p);
  EXPECT_EQ(r.d_vec, (GeoVector{3, 4, 0}));
  EXPECT_EQ(r.v_rel, (GeoVector{1, 0, 1}));
  EXPECT_DOUBLE_EQ(r.distance, 5.0);
}

TEST(RelativeState, CoincidentAndAntisymmetric) {
  VehicleState a{{7e6, 1, 2}, {3, 4, 5}};
  EXPECT_EQ(relative_state(a, a).distance, 0.0);
  VehicleState b{{7e6 + 12, -3, 9}, {0, 0, 1}};
  const RelativeState ab = relative_state(a, b);
  const RelativeState ba = relative_state(b, a);
  EXPECT_EQ(ab.d_vec, -ba.d_vec);
  EXPECT_EQ(ab.distance, ba.distance);
  EXPECT_NEAR(ab.distance, norm(ab.d_vec), 1e-9 * ab.distance);
}

TEST(RelativeState, DefaultInitialRange) {
  const World w = initial_world(ScenarioConfig{});
  EXPECT_NEAR(relative_state(w.efv, w.pfv).distance, 2000.0, 1e-6);
}

TEST(NormHandlesLargeMagnitudes, NoOverflow) {
  EXPECT_DOUBLE_EQ(norm({3e8, 4e8, 0}), 5e8);
  EXPECT_DOUBLE_EQ(norm({3e200, 4e200, 0}), 5e200);
}

TEST(LosRates, StationaryIsZero) {
  const LosAngles a{0.3, -1.2};
  const auto [de, dn] = los_rates(a, a, 0.01);
  EXPECT_EQ(de, 0.0);
  EXPECT_EQ(dn, 0.0);
}

TEST(LosRates, BackwardDifference) {
  const auto [de, dn] = los_rates({0.10, 0.0}, {0.11, 0.0}, 0.01);
  EXPECT_NEAR(de, 1.0, 1e-12);
  EXPECT_EQ(dn, 0.0);
}

TEST(LosRates, EtaUsesShortestArc) {
  const auto [de, dn] = los_rates({0.0, 3.14}, {0.0, -3.14}, 0.01);
  EXPECT_EQ(de, 0.0);
  // 2*pi - 6.28 = 0.0031853..., over 0.01 s.
  EXPECT_NEAR(dn, (2 * kPi - 6.28) / 0.01, 1e-9);
  EXPECT_GT(dn, 0.0);
}

TEST(LosRates, RejectsNonPositiveStep) {
  EXPECT_THROW(los_rates({}, {}, 0.0), InvalidStepError);
  EXPECT_THROW(los_rates({}, {}, -0.01), InvalidStepError);
}

TEST(LaunchBasis, AtLaunchIsOrthonormalAndAligned) {
  const World w = initial_world(ScenarioConfig{});
  EXPECT_TRUE(w.basis.orthonormal(1e-12));
  // Radial up at the pursuer.
  expect_vec_near(w.basis.y_axis(), normalized(w.pfv.position), 1e-12);
  // Evader dead ahead along +X' for a level line of sight.
  const LosAngles a =
      los_angles(launch_frame_offset(w.pfv.position, w.basis, w.efv.position));
  EXPECT_NEAR(a.epsilon, 0.0, 1e-9);
  EXPECT_NEAR(a.eta, 0.0, 1e-9);
}

}  // namespace
}  // namespace evasion
