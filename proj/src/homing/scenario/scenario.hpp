// Randomized head-on engagement generation and target maneuvers.
#pragma once

#include "homing/common/random.hpp"
#include "homing/common/types.hpp"
#include "homing/seeker/seeker.hpp"
#include "homing/sim/dynamics.hpp"

#include <string>

namespace homing::scenario {

struct Interval {
  double min = 0.0;
  double max = 0.0;
  bool contains(double x) const { return x >= min && x <= max; }
};

enum class ManeuverKind { kNone, kBangBang, kBarrelRoll };

const char* maneuver_kind_name(ManeuverKind kind);
ManeuverKind parse_maneuver_kind(const std::string& name);

struct ScenarioConfig {
  Interval range_km{50.0, 55.0};
  Interval missile_speed{3000.0, 3000.0};  // m/s
  Interval target_speed{4000.0, 4000.0};   // m/s
  Interval theta_deg{-10.0, 10.0};
  Interval phi_deg{-10.0, 10.0};
  Interval beta_deg{-10.0, 10.0};
  Interval alpha_deg{-10.0, 10.0};
  Interval heading_error_deg{0.0, 5.0};
  Interval attitude_error_deg{0.0, 5.0};
  double target_accel_max = 5.0 * kStandardGravity;  // m/s^2
  Interval target_accel{0.0, 5.0 * kStandardGravity};  // magnitude draw
  ManeuverKind maneuver_kind = ManeuverKind::kBangBang;

  // Bang-bang timing draws (s).
  Interval maneuver_start{0.0, 5.0};
  Interval maneuver_switch_offset{1.0, 4.0};
  Interval maneuver_duration{2.0, 10.0};
  // Barrel-roll weave period (s).
  Interval weave_period{1.0, 5.0};

  void validate() const;
};

/// Pins heading error, attitude error and target acceleration at their maxima.
ScenarioConfig worst_case(ScenarioConfig cfg);

struct ManeuverProfile {
  ManeuverKind kind = ManeuverKind::kNone;
  double accel_magnitude = 0.0;
  Vec3 n1 = Vec3::UnitX();  // orthonormal pair perpendicular to the initial target velocity
  Vec3 n2 = Vec3::UnitY();
  double start_time = 0.0;
  double switch_time = 0.0;  // absolute
  double duration = 0.0;
  double weave_period = 1.0;
  double phase = 0.0;  // barrel roll only
};

Vec3 maneuver_accel(const ManeuverProfile& profile, const Vec3& v_t_current, double t);

/// Target position in the missile-centered frame.
Vec3 place_target(double range, double theta, double phi);

/// |v| (sin b cos a, sin b sin a, cos b).
Vec3 target_velocity(double speed, double alpha, double beta);

/// Planar lead angle L = asin(|vT| sin(beta + gamma) / |vM|). Throws kNoCollisionSolution.
double lead_angle(double target_speed, double los_angle_sum, double missile_speed);

// Missile velocity of magnitude missile_speed putting the missile on a
// collision triangle with a constant-velocity target seen along los_hat.
// Solved in the plane spanned by v_t and los_hat, then mapped back to 3D.
Vec3 collision_velocity(const Vec3& v_t, const Vec3& los_hat, double missile_speed);

/// Vector of the same length as `ideal` at exactly `cone_angle` from it, azimuth uniform.
Vec3 perturb_on_cone(const Vec3& ideal, double cone_angle, Rng& rng);

/// Attitude whose body x-axis is `x_axis`, via the minimal rotation from inertial x.
Quat attitude_from_x_axis(const Vec3& x_axis);

struct ScenarioParams {
  double range = 0.0;  // m
  double missile_speed = 0.0;
  double target_speed = 0.0;
  double theta = 0.0, phi = 0.0, beta = 0.0, alpha = 0.0;  // rad
  double heading_error = 0.0;   // rad
  double attitude_error = 0.0;  // rad
};

struct Scenario {
  sim::EngagementState state;
  seeker::SeekerFrame frame;
  ManeuverProfile maneuver;
  ScenarioParams params;
  Vec3 ideal_missile_velocity = Vec3::Zero();
};

Scenario sample_scenario(const ScenarioConfig& cfg, const sim::MissileConfig& missile, Rng& rng,
                         double fov_half = seeker::kDefaultFovHalfAngle);

}  // namespace homing::scenario
