// Translational missile/target dynamics with pulsed divert thrusters.
//
// The missile attitude is held fixed for the whole engagement (attitude
// control is assumed perfect), so only the translational states and the
// missile mass are integrated. Gravity is not modeled.
#pragma once

#include "homing/common/types.hpp"

#include <functional>
#include <utility>

namespace homing::sim {

struct ThrusterSpec {
  Vec3 direction;  // unit vector, body frame
  Vec3 position;   // m, body frame, relative to the centroid
  double max_thrust = 0.0;  // N
  double min_thrust = 0.0;  // N
};

using ThrusterSet = std::array<ThrusterSpec, kNumThrusters>;

// Four lateral thrusters: -y, +y, +z, -z at 0.25 m from the centroid.
ThrusterSet default_thrusters(double max_thrust);

// Thrust and specific impulse default to the calibrated operating point
// (docs/calibration.md). The nominal 10 g reading is make_missile_config(
// kNominalMaxThrust, kNominalIsp).
inline constexpr double kNominalMaxThrust = 2452.5;  // N, 10 g at dry mass
inline constexpr double kNominalIsp = 250.0;         // s
inline constexpr double kCalibratedMaxThrust = 9319.5;  // N, 38 g at dry mass
inline constexpr double kCalibratedIsp = 300.0;         // s

struct MissileConfig {
  double wet_mass = 50.0;     // kg
  double dry_mass = 25.0;     // kg
  double isp = kCalibratedIsp;  // s
  double g_ref = 9.8;         // m/s^2
  double max_thrust = kCalibratedMaxThrust;  // N per thruster
  Vec3 r_com = Vec3::Zero();
  ThrusterSet thrusters = default_thrusters(kCalibratedMaxThrust);

  /// Maximum thrust over dry mass, the acceleration scale used by the pulse mapper.
  double max_accel() const { return max_thrust / dry_mass; }
  void validate() const;
};

/// Builds a config whose thruster table matches `max_thrust`.
MissileConfig make_missile_config(double max_thrust, double isp);

struct IntegratorConfig {
  double guidance_period = 0.1;   // s, 10 Hz
  double coarse_dt = 0.020;       // s
  double fine_dt = 0.067e-3;      // s
  double fine_range = 1000.0;     // m, switch to fine_dt at or below this range
  void validate() const;
};

struct MissileBody {
  Vec3 position = Vec3::Zero();
  Vec3 velocity = Vec3::Zero();
  Quat attitude = Quat::Identity();  // body relative to inertial
  double mass = 50.0;
};

struct TargetBody {
  Vec3 position = Vec3::Zero();
  Vec3 velocity = Vec3::Zero();
  Vec3 commanded_accel = Vec3::Zero();
};

struct EngagementState {
  MissileBody missile;
  TargetBody target;
  double time = 0.0;
  double fuel_used = 0.0;

  Vec3 r_tm() const { return target.position - missile.position; }
  Vec3 v_tm() const { return target.velocity - missile.velocity; }
};

struct ForceTorque {
  Vec3 force = Vec3::Zero();
  Vec3 torque = Vec3::Zero();
};

ForceTorque body_force_torque(const ThrusterAction& action, const ThrusterSet& thrusters,
                              const Vec3& r_com);

/// Direction cosine matrix mapping inertial-frame vectors into the body frame.
Dcm inertial_to_body(const Quat& q);

/// F_N = [BN(q)]^T F_B. Throws kInvalidAttitude if |q| deviates from 1 by more than 1e-6.
Vec3 body_to_inertial(const Vec3& force_body, const Quat& q);

struct MissileRates {
  Vec3 position_dot;
  Vec3 velocity_dot;
  double mass_dot = 0.0;
};

MissileRates missile_derivatives(const MissileBody& missile, const ThrusterAction& action,
                                 const MissileConfig& cfg);

struct TargetRates {
  Vec3 position_dot;
  Vec3 velocity_dot;
};

TargetRates target_derivatives(const TargetBody& target);

/// Target acceleration as a function of time and the current target velocity.
/// An empty function means the stored commanded_accel is held constant.
using TargetAccelFn = std::function<Vec3(double t, const Vec3& target_velocity)>;

struct CycleResult {
  EngagementState state;
  double min_range = 0.0;       // m, closest approach within the cycle
  double min_range_time = 0.0;  // s, absolute time of that approach
  int substeps = 0;
};

class Dynamics {
 public:
  Dynamics(MissileConfig missile, IntegratorConfig integrator, TargetAccelFn target_accel = {});

  const MissileConfig& missile() const { return missile_; }
  const IntegratorConfig& integrator() const { return integrator_; }

  // Classical RK4 over the joint missile + target ODE. The action is held
  // constant across the step and the mass is clamped at dry mass.
  EngagementState rk4_step(const EngagementState& state, const ThrusterAction& action,
                           double dt) const;

  // One guidance period: coarse substeps while range > fine_range, fine
  // substeps after. Reports the analytic closest approach over all substeps.
  CycleResult propagate_guidance_cycle(const EngagementState& state,
                                       const ThrusterAction& action) const;

 private:
  Vec3 target_accel(double t, const TargetBody& target) const;

  MissileConfig missile_;
  IntegratorConfig integrator_;
  TargetAccelFn target_accel_;
};

/// Minimum of |r0 + (r1 - r0) s| over s in [0, 1], with the minimizing s.
std::pair<double, double> segment_closest_approach(const Vec3& r0, const Vec3& r1);

}  // namespace homing::sim
