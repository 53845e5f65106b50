#include "homing/common/error.hpp"
#include "homing/eval/presets.hpp"
#include "homing/scenario/scenario.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

#include <array>
#include <cmath>
#include <numbers>

using namespace homing;
using namespace homing::scenario;

TEST(PlaceTarget, Examples) {
  EXPECT_NEAR((place_target(50000, 0, 1.234) - Vec3(0, 0, 50000)).norm(), 0.0, 1e-9);
  EXPECT_NEAR((place_target(50000, deg2rad(90), 0) - Vec3(50000, 0, 0)).norm(), 0.0, 1e-9);
  Rng rng(1);
  for (int i = 0; i < 100; ++i) {
    const double r = uniform(rng, 1, 1e5);
    EXPECT_NEAR(place_target(r, uniform(rng, -3, 3), uniform(rng, -3, 3)).norm(), r, 1e-9);
  }
}

TEST(TargetVelocity, Examples) {
  EXPECT_EQ(target_velocity(4000, 0, 0), Vec3(0, 0, 4000));
  EXPECT_NEAR((target_velocity(4000, 0, std::numbers::pi) - Vec3(0, 0, -4000)).norm(), 0.0, 1e-9);
  EXPECT_NEAR(target_velocity(4000, 0.3, -0.7).norm(), 4000.0, 1e-9);
}

TEST(LeadAngle, PlanarExample) {
  EXPECT_NEAR(rad2deg(lead_angle(4000, deg2rad(30), 3000)), rad2deg(std::asin(2.0 / 3.0)), 1e-12);
  EXPECT_NEAR(rad2deg(lead_angle(4000, deg2rad(30), 3000)), 41.81, 5e-3);
  EXPECT_EQ(lead_angle(4000, 0.0, 3000), 0.0);
  try {
    lead_angle(4000, deg2rad(60), 3000);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNoCollisionSolution);
  }
}

TEST(CollisionVelocity, TargetAlongLineOfSight) {
  const Vec3 los = Vec3(0.1, -0.2, 1).normalized();
  const Vec3 vm = collision_velocity(-4000 * los, los, 3000);
  EXPECT_NEAR((vm - 3000 * los).norm(), 0.0, 1e-9);
}

TEST(CollisionVelocity, ThirtyDegreePlanarTriangle) {
  // Target crossing at 30 deg from the reversed LOS, in the x-z plane.
  const Vec3 los(0, 0, 1);
  const Vec3 vt = 4000 * Vec3(std::sin(deg2rad(30)), 0, -std::cos(deg2rad(30)));
  const Vec3 vm = collision_velocity(vt, los, 3000);
  EXPECT_NEAR(vm.norm(), 3000, 1e-9);
  EXPECT_NEAR(oracle::angle_between(vm, los), std::asin(2.0 / 3.0), 1e-12);
  EXPECT_NEAR(vm.y(), 0.0, 1e-12);
  // Relative velocity parallel to -LOS: the target flies straight down the line.
  const Vec3 vrel = vt - vm;
  EXPECT_NEAR(vrel.cross(los).norm(), 0.0, 1e-9);
  EXPECT_LT(vrel.dot(los), 0.0);
}

TEST(CollisionVelocity, InfeasibleTriangle) {
  const Vec3 los(0, 0, 1);
  const Vec3 vt = 4000 * Vec3(1, 0, 0);  // crossing at 90 deg, faster than the missile
  EXPECT_THROW(collision_velocity(vt, los, 3000), Error);
}

TEST(CollisionVelocity, BallisticMissBelowOneMetre) {
  ScenarioConfig cfg;
  cfg.heading_error_deg = {0, 0};
  cfg.maneuver_kind = ManeuverKind::kNone;
  const sim::MissileConfig mc;
  double worst = 0.0;
  for (std::uint64_t i = 0; i < 200; ++i) {
    Rng rng = episode_rng(i);
    const Scenario sc = sample_scenario(cfg, mc, rng);
    worst = std::max(worst, oracle::ballistic_closest_approach(sc.state.r_tm(), sc.state.v_tm()));
  }
  EXPECT_LT(worst, 1.0);
}

TEST(PerturbOnCone, ZeroAngleIsIdentity) {
  Rng rng(5);
  const Vec3 v(1, 2, 3);
  EXPECT_EQ(perturb_on_cone(v, 0.0, rng), v);
}

TEST(PerturbOnCone, ExactAngleAndMagnitude) {
  Rng rng(5);
  double worst_angle = 0.0, worst_mag = 0.0;
  for (int i = 0; i < 2000; ++i) {
    const Vec3 ideal(uniform(rng, -3e3, 3e3), uniform(rng, -3e3, 3e3), uniform(rng, -3e3, 3e3));
    const double cone = uniform(rng, 0.0, deg2rad(10.0));
    const Vec3 out = perturb_on_cone(ideal, cone, rng);
    worst_angle = std::max(worst_angle, std::abs(oracle::angle_between(out, ideal) - cone));
    worst_mag = std::max(worst_mag, std::abs(out.norm() - ideal.norm()) / ideal.norm());
  }
  EXPECT_LE(worst_angle, 1e-9);
  EXPECT_LE(worst_mag, 1e-9);
}

TEST(PerturbOnCone, AzimuthUniformChiSquare) {
  Rng rng(2024);
  const Vec3 ideal = Vec3(0.3, -0.4, 1.0).normalized();
  // Fixed basis perpendicular to ideal, chosen independently of the library.
  const Vec3 e1 = ideal.cross(Vec3(0, 1, 0)).normalized();
  const Vec3 e2 = ideal.cross(e1);
  constexpr int kBins = 16, kDraws = 10000;
  std::array<int, kBins> counts{};
  for (int i = 0; i < kDraws; ++i) {
    const Vec3 d = perturb_on_cone(ideal, deg2rad(5.0), rng) - ideal;
    double az = std::atan2(d.dot(e2), d.dot(e1));
    if (az < 0) az += 2 * std::numbers::pi;
    ++counts[std::min(kBins - 1, int(az / (2 * std::numbers::pi) * kBins))];
  }
  const double expected = double(kDraws) / kBins;
  double chi2 = 0.0;
  for (int c : counts) chi2 += (c - expected) * (c - expected) / expected;
  // 15 degrees of freedom: P(chi2 > 37.70) = 0.001.
  EXPECT_LT(chi2, 37.70);
}

TEST(AttitudeFromXAxis, MapsBodyXOntoAxis) {
  const Vec3 x = Vec3(0.2, 0.1, 1.0).normalized();
  const Quat q = attitude_from_x_axis(x);
  EXPECT_NEAR((q * Vec3::UnitX() - x).norm(), 0.0, 1e-12);
  EXPECT_NEAR(q.norm(), 1.0, 1e-12);
}

TEST(SampleScenario, ParametersStayInsideIntervals) {
  const ScenarioConfig cfg;
  const sim::MissileConfig mc;
  Rng rng(99);
  for (int i = 0; i < 100000; ++i) {
    const Scenario sc = sample_scenario(cfg, mc, rng);
    const auto& p = sc.params;
    ASSERT_TRUE(cfg.range_km.contains(p.range / 1000.0));
    ASSERT_NEAR(sc.state.r_tm().norm(), p.range, 1e-6);
    ASSERT_TRUE(cfg.theta_deg.contains(rad2deg(p.theta)));
    ASSERT_TRUE(cfg.phi_deg.contains(rad2deg(p.phi)));
    ASSERT_TRUE(cfg.beta_deg.contains(rad2deg(p.beta)));
    ASSERT_TRUE(cfg.alpha_deg.contains(rad2deg(p.alpha)));
    ASSERT_TRUE(cfg.heading_error_deg.contains(rad2deg(p.heading_error)));
    ASSERT_TRUE(cfg.attitude_error_deg.contains(rad2deg(p.attitude_error)));
    ASSERT_LE(sc.maneuver.accel_magnitude, 5 * kStandardGravity);
    ASSERT_GE(sc.maneuver.accel_magnitude, 0.0);
  }
}

TEST(SampleScenario, HeadingAndAttitudeCones) {
  ScenarioConfig cfg;
  cfg.heading_error_deg = {5, 5};
  cfg.attitude_error_deg = {5, 5};
  const sim::MissileConfig mc;
  Rng rng(4);
  for (int i = 0; i < 200; ++i) {
    const Scenario sc = sample_scenario(cfg, mc, rng);
    const Vec3 body_x = sc.state.missile.attitude * Vec3::UnitX();
    EXPECT_NEAR(oracle::angle_between(body_x, sc.state.missile.velocity), deg2rad(5), 1e-9);
    EXPECT_NEAR(oracle::angle_between(sc.state.missile.velocity, sc.ideal_missile_velocity),
                deg2rad(5), 1e-9);
  }
}

TEST(SampleScenario, SeekerFrameFrozenAtAttitude) {
  const ScenarioConfig cfg;
  Rng rng(8);
  const Scenario sc = sample_scenario(cfg, sim::MissileConfig{}, rng);
  const auto a = seeker::seeker_angles(sc.state.r_tm(), sc.frame.c_sn);
  EXPECT_EQ(a.u, sc.frame.theta_u0);
  EXPECT_EQ(a.v, sc.frame.theta_v0);
  EXPECT_LT(std::abs(a.u), seeker::kDefaultFovHalfAngle);
}

TEST(SampleScenario, Reproducible) {
  const ScenarioConfig cfg;
  Rng a = episode_rng(17), b = episode_rng(17);
  const Scenario x = sample_scenario(cfg, sim::MissileConfig{}, a);
  const Scenario y = sample_scenario(cfg, sim::MissileConfig{}, b);
  EXPECT_EQ(x.state.missile.velocity, y.state.missile.velocity);
  EXPECT_EQ(x.state.target.position, y.state.target.position);
  EXPECT_EQ(x.maneuver.n1, y.maneuver.n1);
}

TEST(SampleScenario, ExtendedInitialConditionsPreset) {
  const ScenarioConfig cfg = eval::scenario_preset("extended-ic");
  EXPECT_NO_THROW(cfg.validate());
  Rng rng(3);
  for (int i = 0; i < 2000; ++i) {
    const Scenario sc = sample_scenario(cfg, sim::MissileConfig{}, rng);
    EXPECT_TRUE(cfg.range_km.contains(sc.params.range / 1000.0));
    EXPECT_LE(sc.params.range, 75000.0);
  }
}

TEST(ManeuverAccel, BangBangSchedule) {
  ManeuverProfile p;
  p.kind = ManeuverKind::kBangBang;
  p.accel_magnitude = 30.0;
  p.n1 = Vec3(1, 0, 0);
  p.start_time = 1.0;
  p.switch_time = 2.5;
  p.duration = 4.0;
  const Vec3 v(0, 0, -4000);
  EXPECT_EQ(maneuver_accel(p, v, 0.5), Vec3::Zero());
  EXPECT_NEAR((maneuver_accel(p, v, 1.5) - Vec3(30, 0, 0)).norm(), 0.0, 1e-12);
  EXPECT_NEAR((maneuver_accel(p, v, 3.0) - Vec3(-30, 0, 0)).norm(), 0.0, 1e-12);
  EXPECT_EQ(maneuver_accel(p, v, 5.5), Vec3::Zero());
}

TEST(ManeuverAccel, OrthogonalToCurrentVelocity) {
  ManeuverProfile p;
  p.kind = ManeuverKind::kBangBang;
  p.accel_magnitude = 5 * kStandardGravity;
  p.n1 = Vec3(1, 0, 0);
  p.start_time = 0.0;
  p.switch_time = 3.0;
  p.duration = 6.0;
  const Vec3 bent(300, 120, -3980);  // velocity after some turning
  const Vec3 a = maneuver_accel(p, bent, 1.0);
  EXPECT_LE(std::abs(a.dot(bent)), 1e-9 * a.norm() * bent.norm());
  EXPECT_NEAR(a.norm(), p.accel_magnitude, 1e-12);
}

TEST(ManeuverAccel, BarrelRollHalfPeriodAntiparallel) {
  ManeuverProfile p;
  p.kind = ManeuverKind::kBarrelRoll;
  p.accel_magnitude = 5 * kStandardGravity;
  p.n1 = Vec3(1, 0, 0);
  p.n2 = Vec3(0, 1, 0);
  p.weave_period = 2.0;
  p.phase = 0.4;
  p.duration = 1e9;
  const Vec3 v(0, 0, -4000);
  for (double t : {0.0, 0.3, 1.7, 4.2}) {
    const Vec3 a = maneuver_accel(p, v, t);
    const Vec3 b = maneuver_accel(p, v, t + 1.0);
    EXPECT_NEAR((a.normalized() + b.normalized()).norm(), 0.0, 1e-6);
    EXPECT_NEAR(a.norm(), p.accel_magnitude, 1e-9);
  }
}

TEST(ManeuverAccel, GeneratedManeuversAreOrthogonalAtStart) {
  ScenarioConfig cfg;
  cfg.maneuver_start = {0.0, 0.0};
  for (auto kind : {ManeuverKind::kBangBang, ManeuverKind::kBarrelRoll}) {
    cfg.maneuver_kind = kind;
    Rng rng(12);
    for (int i = 0; i < 100; ++i) {
      const Scenario sc = sample_scenario(cfg, sim::MissileConfig{}, rng);
      const Vec3 v = sc.state.target.velocity;
      const Vec3 a = maneuver_accel(sc.maneuver, v, 0.0);
      EXPECT_LE(std::abs(a.dot(v)), 1e-9 * std::max(1.0, a.norm()) * v.norm());
      EXPECT_LE(a.norm(), 5 * kStandardGravity + 1e-9);
    }
  }
}

TEST(ScenarioConfig, Validation) {
  ScenarioConfig cfg;
  cfg.range_km = {60, 50};
  EXPECT_THROW(cfg.validate(), Error);
  cfg = ScenarioConfig{};
  cfg.target_accel_max = 60.0;
  EXPECT_THROW(cfg.validate(), Error);
  cfg = ScenarioConfig{};
  cfg.missile_speed = {0, 0};
  EXPECT_THROW(cfg.validate(), Error);
}

TEST(ScenarioConfig, WorstCasePinsMaxima) {
  const ScenarioConfig w = worst_case(ScenarioConfig{});
  EXPECT_EQ(w.heading_error_deg.min, 5.0);
  EXPECT_EQ(w.attitude_error_deg.min, 5.0);
  EXPECT_EQ(w.target_accel.min, 5 * kStandardGravity);
  EXPECT_EQ(w.target_accel.max, 5 * kStandardGravity);
}

TEST(ManeuverKind, NamesRoundTrip) {
  for (auto k : {ManeuverKind::kNone, ManeuverKind::kBangBang, ManeuverKind::kBarrelRoll})
    EXPECT_EQ(parse_maneuver_kind(maneuver_kind_name(k)), k);
  EXPECT_THROW(parse_maneuver_kind("spiral"), Error);
}
