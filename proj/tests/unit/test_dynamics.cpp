#include "homing/common/error.hpp"
#include "homing/sim/dynamics.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <limits>

using namespace homing;
using namespace homing::sim;

namespace {

MissileConfig nominal() { return make_missile_config(kNominalMaxThrust, kNominalIsp); }

}  // namespace

TEST(Thrusters, DefaultTableGeometry) {
  const ThrusterSet t = default_thrusters(kNominalMaxThrust);
  EXPECT_EQ(t[0].direction, Vec3(0, -1, 0));
  EXPECT_EQ(t[1].direction, Vec3(0, 1, 0));
  EXPECT_EQ(t[2].direction, Vec3(0, 0, 1));
  EXPECT_EQ(t[3].direction, Vec3(0, 0, -1));
  for (const auto& th : t) {
    EXPECT_NEAR(th.direction.norm(), 1.0, 1e-12);
    EXPECT_DOUBLE_EQ(th.position.norm(), 0.25);
    EXPECT_DOUBLE_EQ(th.max_thrust, kNominalMaxThrust);
    EXPECT_DOUBLE_EQ(th.min_thrust, 0.0);
  }
}

TEST(BodyForceTorque, NoThrust) {
  const auto ft = body_force_torque({0, 0, 0, 0}, nominal().thrusters, Vec3::Zero());
  EXPECT_EQ(ft.force, Vec3::Zero());
  EXPECT_EQ(ft.torque, Vec3::Zero());
}

TEST(BodyForceTorque, SinglePlusYThruster) {
  const auto ft = body_force_torque({0, 1, 0, 0}, nominal().thrusters, Vec3::Zero());
  EXPECT_EQ(ft.force, Vec3(0, 2452.5, 0));
  // (0, 0.25, 0) x (0, 2452.5, 0) = 0
  EXPECT_EQ(ft.torque, Vec3::Zero());
}

TEST(BodyForceTorque, OpposingPairsCancel) {
  const auto all = body_force_torque({1, 1, 1, 1}, nominal().thrusters, Vec3::Zero());
  EXPECT_EQ(all.force, Vec3::Zero());
  EXPECT_EQ(all.torque, Vec3::Zero());
  EXPECT_EQ(body_force_torque({1, 1, 0, 0}, nominal().thrusters, Vec3::Zero()).force, Vec3::Zero());
  EXPECT_EQ(body_force_torque({0, 0, 1, 1}, nominal().thrusters, Vec3::Zero()).force, Vec3::Zero());
}

TEST(BodyForceTorque, OffsetComGivesTorque) {
  // com shifted along x by 0.1: (r - r_com) x F for the +y thruster at (0, .25, 0).
  const Vec3 r_com(0.1, 0, 0);
  const auto ft = body_force_torque({0, 1, 0, 0}, nominal().thrusters, r_com);
  const Vec3 expected = Vec3(-0.1, 0.25, 0).cross(Vec3(0, 2452.5, 0));
  EXPECT_NEAR((ft.torque - expected).norm(), 0.0, 1e-9);
}

TEST(BodyToInertial, Identity) {
  EXPECT_EQ(body_to_inertial(Vec3(1, 2, 3), Quat::Identity()), Vec3(1, 2, 3));
}

TEST(BodyToInertial, NinetyDegreesAboutZ) {
  const Quat q(Eigen::AngleAxisd(std::numbers::pi / 2, Vec3::UnitZ()));
  const Vec3 out = body_to_inertial(Vec3(1, 0, 0), q);
  EXPECT_NEAR((out - Vec3(0, 1, 0)).norm(), 0.0, 1e-12);
  // Against a rotation matrix built independently from the same axis/angle.
  const Vec3 oracle = oracle::axis_angle_matrix(Vec3::UnitZ(), std::numbers::pi / 2) * Vec3(1, 0, 0);
  EXPECT_NEAR((out - oracle).norm(), 0.0, 1e-12);
}

TEST(BodyToInertial, MatchesRodriguesForArbitraryAttitudes) {
  Rng rng(7);
  for (int i = 0; i < 200; ++i) {
    const Vec3 axis(uniform(rng, -1, 1), uniform(rng, -1, 1), uniform(rng, -1, 1));
    const double angle = uniform(rng, -3.0, 3.0);
    const Quat q(Eigen::AngleAxisd(angle, axis.normalized()));
    const Vec3 f(uniform(rng, -5, 5), uniform(rng, -5, 5), uniform(rng, -5, 5));
    const Vec3 out = body_to_inertial(f, q);
    EXPECT_NEAR((out - oracle::axis_angle_matrix(axis, angle) * f).norm(), 0.0, 1e-12);
    EXPECT_NEAR(out.norm(), f.norm(), 1e-12);
  }
}

TEST(BodyToInertial, DcmIsOrthonormal) {
  const Quat q(Eigen::AngleAxisd(1.1, Vec3(1, 2, 3).normalized()));
  const Dcm d = inertial_to_body(q);
  EXPECT_NEAR((d.transpose() * d - Dcm::Identity()).norm(), 0.0, 1e-12);
  EXPECT_NEAR(d.determinant(), 1.0, 1e-12);
}

TEST(BodyToInertial, RejectsNonUnitQuaternion) {
  const Quat q(1.01, 0, 0, 0);
  try {
    body_to_inertial(Vec3(1, 0, 0), q);
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInvalidAttitude);
  }
  // Within 1e-6 is accepted.
  EXPECT_NO_THROW(body_to_inertial(Vec3(1, 0, 0), Quat(1.0 + 5e-7, 0, 0, 0)));
}

TEST(MissileDerivatives, CoastingHasNoAcceleration) {
  MissileBody m;
  m.velocity = Vec3(3000, 1, 2);
  const auto d = missile_derivatives(m, {0, 0, 0, 0}, nominal());
  EXPECT_EQ(d.position_dot, m.velocity);
  EXPECT_EQ(d.velocity_dot, Vec3::Zero());
  EXPECT_EQ(d.mass_dot, 0.0);
}

TEST(MissileDerivatives, MassFlowOfOneThruster) {
  MissileBody m;
  const auto d = missile_derivatives(m, {0, 1, 0, 0}, nominal());
  EXPECT_NEAR(d.mass_dot, -2452.5 / (250.0 * 9.8), 1e-12);
  EXPECT_NEAR(d.mass_dot, -1.00102, 1e-5);
  EXPECT_NEAR((d.velocity_dot - Vec3(0, 2452.5 / 50.0, 0)).norm(), 0.0, 1e-12);
}

TEST(MissileDerivatives, FuelExhaustionCutsThrust) {
  MissileBody m;
  m.mass = 25.0;
  const auto d = missile_derivatives(m, {1, 1, 1, 1}, nominal());
  EXPECT_EQ(d.velocity_dot, Vec3::Zero());
  EXPECT_EQ(d.mass_dot, 0.0);
  const auto single = missile_derivatives(m, {0, 1, 0, 0}, nominal());
  EXPECT_EQ(single.velocity_dot, Vec3::Zero());
}

TEST(TargetDerivatives, ReturnsVelocityAndCommand) {
  TargetBody t;
  t.velocity = Vec3(1, 2, 3);
  t.commanded_accel = Vec3(0, 4, 0);
  const auto d = target_derivatives(t);
  EXPECT_EQ(d.position_dot, t.velocity);
  EXPECT_EQ(d.velocity_dot, t.commanded_accel);
}

TEST(Rk4, ConstantTargetAccelerationFromRest) {
  const Dynamics dyn(nominal(), IntegratorConfig{});
  EngagementState s;
  s.target.commanded_accel = Vec3(0, 49.05, 0);
  for (int i = 0; i < 50; ++i) s = dyn.rk4_step(s, {0, 0, 0, 0}, 0.02);
  EXPECT_NEAR((s.target.velocity - Vec3(0, 49.05, 0)).norm(), 0.0, 1e-9);
  EXPECT_NEAR((s.target.position - Vec3(0, 0.5 * 49.05, 0)).norm(), 0.0, 1e-9);
}

TEST(Rk4, ZeroThrustIsExactlyLinear) {
  const Dynamics dyn(nominal(), IntegratorConfig{});
  EngagementState s;
  s.missile.velocity = Vec3(3000, 10, -5);
  s.target.position = Vec3(0, 0, 50000);
  s.target.velocity = Vec3(0, 0, -4000);
  EngagementState t = s;
  for (int i = 0; i < 5; ++i) t = dyn.rk4_step(t, {0, 0, 0, 0}, 0.02);
  EXPECT_NEAR((t.missile.position - s.missile.velocity * 0.1).norm(), 0.0, 1e-9);
  EXPECT_NEAR((t.target.position - (s.target.position + s.target.velocity * 0.1)).norm(), 0.0, 1e-9);
  EXPECT_EQ(t.missile.mass, 50.0);
  EXPECT_NEAR(t.time, 0.1, 1e-15);
}

TEST(Rk4, ConstantThrustConstantMassIsQuadraticExact) {
  MissileConfig mc = nominal();
  mc.isp = std::numeric_limits<double>::infinity();
  const Dynamics dyn(mc, IntegratorConfig{});
  EngagementState s;
  s.missile.velocity = Vec3(100, 0, 0);
  const ThrusterAction act{0, 1, 1, 0};
  const Vec3 a = Vec3(0, 2452.5, 2452.5) / 50.0;
  EngagementState t = s;
  for (int i = 0; i < 100; ++i) t = dyn.rk4_step(t, act, 0.01);
  const double time = 1.0;
  const Vec3 v = s.missile.velocity + a * time;
  const Vec3 r = s.missile.velocity * time + 0.5 * a * time * time;
  EXPECT_LE((t.missile.velocity - v).norm() / v.norm(), 1e-10);
  EXPECT_LE((t.missile.position - r).norm() / r.norm(), 1e-10);
  EXPECT_EQ(t.missile.mass, 50.0);
}

TEST(Rk4, MassClampedAtDry) {
  const Dynamics dyn(nominal(), IntegratorConfig{});
  EngagementState s;
  s.missile.mass = 25.5;
  double prev = s.missile.mass;
  for (int i = 0; i < 200; ++i) {
    s = dyn.rk4_step(s, {1, 0, 1, 0}, 0.02);
    EXPECT_LE(s.missile.mass, prev);
    EXPECT_GE(s.missile.mass, 25.0);
    prev = s.missile.mass;
  }
  EXPECT_EQ(s.missile.mass, 25.0);
  EXPECT_DOUBLE_EQ(s.fuel_used, 25.0);
}

TEST(Rk4, FourthOrderConvergence) {
  const auto study = oracle::rk4_convergence();
  EXPECT_GT(study.err_h, 0.0);
  EXPECT_GE(study.ratio, 12.0) << study.err_h << " " << study.err_h2;
  EXPECT_LE(study.ratio, 20.0) << study.err_h << " " << study.err_h2;
}

TEST(Rk4, RejectsNonPositiveStep) {
  const Dynamics dyn(nominal(), IntegratorConfig{});
  EXPECT_THROW(dyn.rk4_step(EngagementState{}, {0, 0, 0, 0}, 0.0), Error);
}

TEST(GuidanceCycle, HeadOnPassClosestApproach) {
  const Dynamics dyn(nominal(), IntegratorConfig{});
  EngagementState s;
  s.target.position = Vec3(100, 10, 0);
  s.target.velocity = Vec3(-1000, 0, 0);
  const auto out = dyn.propagate_guidance_cycle(s, {0, 0, 0, 0});
  EXPECT_NEAR(out.min_range, 10.0, 1e-9);
  EXPECT_NEAR(out.min_range_time, 0.1, 1e-9);
  EXPECT_NEAR(oracle::ballistic_closest_approach(s.r_tm(), s.v_tm()), 10.0, 1e-12);
}

TEST(GuidanceCycle, CoarseStepsAtLongRange) {
  const Dynamics dyn(nominal(), IntegratorConfig{});
  EngagementState s;
  s.target.position = Vec3(0, 0, 50000);
  s.target.velocity = Vec3(0, 0, -4000);
  const auto out = dyn.propagate_guidance_cycle(s, {0, 0, 0, 0});
  EXPECT_EQ(out.substeps, 5);
  EXPECT_NEAR(out.state.time, 0.1, 1e-15);
  EXPECT_NEAR(out.min_range, 50000 - 400, 1e-6);
}

TEST(GuidanceCycle, FineStepsInsideSwitchRange) {
  const Dynamics dyn(nominal(), IntegratorConfig{});
  EngagementState s;
  s.target.position = Vec3(0, 0, 900);
  s.target.velocity = Vec3(0, 0, -10);
  const auto out = dyn.propagate_guidance_cycle(s, {0, 0, 0, 0});
  // 0.1 / 0.067e-3 = 1492.5 fine steps; the last sliver is merged.
  EXPECT_GE(out.substeps, 1492);
  EXPECT_LE(out.substeps, 1493);
}

TEST(GuidanceCycle, MomentumConservedWhenCoasting) {
  const MissileConfig mc = nominal();
  const Dynamics dyn(mc, IntegratorConfig{});
  EngagementState s;
  s.missile.velocity = Vec3(2900, 50, 10);
  s.target.position = Vec3(100, -300, 30000);
  s.target.velocity = Vec3(5, 20, -4000);
  const double m_t = 100.0;  // any target mass: both momenta are separately constant
  const Vec3 p0 = s.missile.mass * s.missile.velocity + m_t * s.target.velocity;
  for (int i = 0; i < 80; ++i) s = dyn.propagate_guidance_cycle(s, {0, 0, 0, 0}).state;
  const Vec3 p1 = s.missile.mass * s.missile.velocity + m_t * s.target.velocity;
  EXPECT_LE((p1 - p0).norm() / p0.norm(), 1e-9);
}

TEST(SegmentClosestApproach, InteriorAndEndpoints) {
  auto [d, s] = segment_closest_approach(Vec3(-1, 1, 0), Vec3(1, 1, 0));
  EXPECT_DOUBLE_EQ(d, 1.0);
  EXPECT_DOUBLE_EQ(s, 0.5);
  std::tie(d, s) = segment_closest_approach(Vec3(2, 0, 0), Vec3(3, 0, 0));
  EXPECT_DOUBLE_EQ(d, 2.0);
  EXPECT_DOUBLE_EQ(s, 0.0);
}

TEST(MissileConfig, Validation) {
  MissileConfig mc;
  mc.dry_mass = 60.0;
  EXPECT_THROW(mc.validate(), Error);
  mc = MissileConfig{};
  mc.thrusters[0].direction = Vec3(0, 2, 0);
  EXPECT_THROW(mc.validate(), Error);
  EXPECT_NO_THROW(MissileConfig{}.validate());
  EXPECT_DOUBLE_EQ(MissileConfig{}.max_accel(), kCalibratedMaxThrust / 25.0);
}
