#include "homing/scenario/scenario.hpp"

#include "homing/common/error.hpp"

#include <cmath>
#include <limits>
#include <numbers>

namespace homing::scenario {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr int kMaxSampleAttempts = 100;

void check_interval(const Interval& iv, const char* name) {
  if (!(iv.min <= iv.max))
    throw Error(ErrorCode::kConfig, std::string("scenario.") + name + ": min must not exceed max");
}

// Any unit vector orthogonal to a (a need not be normalized).
Vec3 any_orthogonal(const Vec3& a) {
  const Vec3 u = a.normalized();
  const Vec3 helper = std::abs(u.x()) < 0.9 ? Vec3::UnitX() : Vec3::UnitY();
  return u.cross(helper).normalized();
}

}  // namespace

const char* maneuver_kind_name(ManeuverKind kind) {
  switch (kind) {
    case ManeuverKind::kNone: return "none";
    case ManeuverKind::kBangBang: return "bang-bang";
    case ManeuverKind::kBarrelRoll: return "barrel-roll";
  }
  return "none";
}

ManeuverKind parse_maneuver_kind(const std::string& name) {
  if (name == "none") return ManeuverKind::kNone;
  if (name == "bang-bang") return ManeuverKind::kBangBang;
  if (name == "barrel-roll") return ManeuverKind::kBarrelRoll;
  throw Error(ErrorCode::kConfig, "unknown maneuver kind '" + name +
                                      "' (expected none, bang-bang or barrel-roll)");
}

void ScenarioConfig::validate() const {
  check_interval(range_km, "range_km");
  check_interval(missile_speed, "missile_speed");
  check_interval(target_speed, "target_speed");
  check_interval(theta_deg, "theta_deg");
  check_interval(phi_deg, "phi_deg");
  check_interval(beta_deg, "beta_deg");
  check_interval(alpha_deg, "alpha_deg");
  check_interval(heading_error_deg, "heading_error_deg");
  check_interval(attitude_error_deg, "attitude_error_deg");
  check_interval(target_accel, "target_accel");
  check_interval(maneuver_start, "maneuver_start");
  check_interval(maneuver_switch_offset, "maneuver_switch_offset");
  check_interval(maneuver_duration, "maneuver_duration");
  check_interval(weave_period, "weave_period");
  if (!(range_km.min > 0.0)) throw Error(ErrorCode::kConfig, "scenario.range_km must be positive");
  if (!(missile_speed.min > 0.0) || !(target_speed.min > 0.0))
    throw Error(ErrorCode::kConfig, "scenario: speeds must be positive");
  if (heading_error_deg.min < 0.0 || attitude_error_deg.min < 0.0)
    throw Error(ErrorCode::kConfig, "scenario: cone angles must be non-negative");
  if (!(target_accel_max >= 0.0) || target_accel_max > 5.0 * kStandardGravity + 1e-12)
    throw Error(ErrorCode::kConfig, "scenario.target_accel_max must lie in [0, 5 g]");
  if (target_accel.min < 0.0 || target_accel.max > target_accel_max)
    throw Error(ErrorCode::kConfig, "scenario.target_accel must lie in [0, target_accel_max]");
  if (!(weave_period.min > 0.0))
    throw Error(ErrorCode::kConfig, "scenario.weave_period must be positive");
  if (maneuver_start.min < 0.0 || maneuver_switch_offset.min < 0.0 || maneuver_duration.min < 0.0)
    throw Error(ErrorCode::kConfig, "scenario: maneuver times must be non-negative");
}

ScenarioConfig worst_case(ScenarioConfig cfg) {
  cfg.heading_error_deg.min = cfg.heading_error_deg.max;
  cfg.attitude_error_deg.min = cfg.attitude_error_deg.max;
  cfg.target_accel = {cfg.target_accel_max, cfg.target_accel_max};
  return cfg;
}

Vec3 maneuver_accel(const ManeuverProfile& p, const Vec3& v_t_current, double t) {
  Vec3 dir;
  switch (p.kind) {
    case ManeuverKind::kNone:
      return Vec3::Zero();
    case ManeuverKind::kBangBang:
      if (t < p.start_time || t >= p.start_time + p.duration) return Vec3::Zero();
      dir = t < p.switch_time ? p.n1 : Vec3(-p.n1);
      break;
    case ManeuverKind::kBarrelRoll: {
      if (t < p.start_time) return Vec3::Zero();
      const double angle = kTwoPi * (t - p.start_time) / p.weave_period + p.phase;
      dir = p.n1 * std::cos(angle) + p.n2 * std::sin(angle);
      break;
    }
  }
  if (p.accel_magnitude == 0.0) return Vec3::Zero();
  // Keep the command perpendicular to the current velocity.
  const double speed = v_t_current.norm();
  if (speed > 0.0) {
    const Vec3 vhat = v_t_current / speed;
    dir -= dir.dot(vhat) * vhat;
  }
  const double n = dir.norm();
  if (n < 1e-12) return Vec3::Zero();
  return dir * (p.accel_magnitude / n);
}

Vec3 place_target(double range, double theta, double phi) {
  return range * Vec3(std::sin(theta) * std::cos(phi), std::sin(theta) * std::sin(phi),
                      std::cos(theta));
}

Vec3 target_velocity(double speed, double alpha, double beta) {
  return speed * Vec3(std::sin(beta) * std::cos(alpha), std::sin(beta) * std::sin(alpha),
                      std::cos(beta));
}

double lead_angle(double target_speed, double los_angle_sum, double missile_speed) {
  const double arg = target_speed * std::sin(los_angle_sum) / missile_speed;
  if (!(std::abs(arg) <= 1.0))
    throw Error(ErrorCode::kNoCollisionSolution,
                "no collision triangle: |vT sin(beta+gamma) / vM| = " + std::to_string(arg) +
                    " > 1");
  return std::asin(arg);
}

Vec3 collision_velocity(const Vec3& v_t, const Vec3& los_hat, double missile_speed) {
  const Vec3 lam = los_hat.normalized();
  const double vt = v_t.norm();
  // In-plane basis: first axis along the LOS, second along the target's
  // velocity component across the LOS.
  const Vec3 across = v_t - v_t.dot(lam) * lam;
  const double across_norm = across.norm();
  if (vt == 0.0 || across_norm <= 1e-12 * vt) {
    // Target moves along the LOS line; no lead needed.
    if (vt > 0.0 && v_t.dot(lam) > missile_speed)
      throw Error(ErrorCode::kNoCollisionSolution, "target outruns missile along the LOS");
    return missile_speed * lam;
  }
  const Vec3 e2 = across / across_norm;
  // Angle between the target velocity and the (reversed) LOS in that plane.
  const double angle_sum = std::atan2(across_norm, -v_t.dot(lam));
  const double lead = lead_angle(vt, angle_sum, missile_speed);
  const Vec3 vm = missile_speed * (std::cos(lead) * lam + std::sin(lead) * e2);
  if (!((vm - v_t).dot(lam) > 0.0))
    throw Error(ErrorCode::kNoCollisionSolution, "collision triangle does not close");
  return vm;
}

Vec3 perturb_on_cone(const Vec3& ideal, double cone_angle, Rng& rng) {
  const double azimuth = uniform(rng, 0.0, kTwoPi);
  const double mag = ideal.norm();
  if (cone_angle == 0.0 || mag == 0.0) return ideal;
  const Vec3 axis = ideal / mag;
  const Vec3 p1 = any_orthogonal(axis);
  const Vec3 p2 = axis.cross(p1);
  const Vec3 radial = std::cos(azimuth) * p1 + std::sin(azimuth) * p2;
  return mag * (std::cos(cone_angle) * axis + std::sin(cone_angle) * radial);
}

Quat attitude_from_x_axis(const Vec3& x_axis) {
  Quat q = Quat::FromTwoVectors(Vec3::UnitX(), x_axis.normalized());
  q.normalize();
  return q;
}

Scenario sample_scenario(const ScenarioConfig& cfg, const sim::MissileConfig& missile, Rng& rng,
                         double fov_half) {
  cfg.validate();
  for (int attempt = 0; attempt < kMaxSampleAttempts; ++attempt) {
    ScenarioParams p;
    p.range = 1000.0 * uniform(rng, cfg.range_km.min, cfg.range_km.max);
    p.missile_speed = uniform(rng, cfg.missile_speed.min, cfg.missile_speed.max);
    p.target_speed = uniform(rng, cfg.target_speed.min, cfg.target_speed.max);
    p.theta = deg2rad(uniform(rng, cfg.theta_deg.min, cfg.theta_deg.max));
    p.phi = deg2rad(uniform(rng, cfg.phi_deg.min, cfg.phi_deg.max));
    p.beta = deg2rad(uniform(rng, cfg.beta_deg.min, cfg.beta_deg.max));
    p.alpha = deg2rad(uniform(rng, cfg.alpha_deg.min, cfg.alpha_deg.max));
    p.heading_error = deg2rad(uniform(rng, cfg.heading_error_deg.min, cfg.heading_error_deg.max));
    p.attitude_error =
        deg2rad(uniform(rng, cfg.attitude_error_deg.min, cfg.attitude_error_deg.max));

    Scenario sc;
    sc.params = p;
    const Vec3 r_t = place_target(p.range, p.theta, p.phi);
    // Head-on: the target flies back toward the missile.
    const Vec3 v_t = -target_velocity(p.target_speed, p.alpha, p.beta);
    try {
      sc.ideal_missile_velocity = collision_velocity(v_t, r_t.normalized(), p.missile_speed);
    } catch (const Error& e) {
      if (e.code() == ErrorCode::kNoCollisionSolution) continue;
      throw;
    }
    const Vec3 v_m = perturb_on_cone(sc.ideal_missile_velocity, p.heading_error, rng);
    const Vec3 body_x = perturb_on_cone(v_m.normalized(), p.attitude_error, rng);

    sc.state.missile.position = Vec3::Zero();
    sc.state.missile.velocity = v_m;
    sc.state.missile.attitude = attitude_from_x_axis(body_x);
    sc.state.missile.mass = missile.wet_mass;
    sc.state.target.position = r_t;
    sc.state.target.velocity = v_t;
    sc.state.time = 0.0;
    sc.state.fuel_used = 0.0;
    sc.frame = seeker::make_frame(sc.state.missile.attitude, r_t, fov_half);

    ManeuverProfile& m = sc.maneuver;
    m.kind = cfg.maneuver_kind;
    const Vec3 p1 = any_orthogonal(v_t);
    const Vec3 p2 = v_t.normalized().cross(p1);
    if (m.kind == ManeuverKind::kBangBang) {
      const double psi = uniform(rng, 0.0, kTwoPi);
      m.n1 = std::cos(psi) * p1 + std::sin(psi) * p2;
      m.n2 = v_t.normalized().cross(m.n1);
      m.accel_magnitude = uniform(rng, cfg.target_accel.min, cfg.target_accel.max);
      m.start_time = uniform(rng, cfg.maneuver_start.min, cfg.maneuver_start.max);
      m.switch_time =
          m.start_time + uniform(rng, cfg.maneuver_switch_offset.min, cfg.maneuver_switch_offset.max);
      m.duration = uniform(rng, cfg.maneuver_duration.min, cfg.maneuver_duration.max);
    } else if (m.kind == ManeuverKind::kBarrelRoll) {
      m.n1 = p1;
      m.n2 = p2;
      m.accel_magnitude = uniform(rng, cfg.target_accel.min, cfg.target_accel.max);
      m.weave_period = uniform(rng, cfg.weave_period.min, cfg.weave_period.max);
      m.phase = uniform(rng, 0.0, kTwoPi);
      m.start_time = 0.0;
      m.duration = std::numeric_limits<double>::infinity();
    }
    sc.state.target.commanded_accel = maneuver_accel(m, v_t, 0.0);
    return sc;
  }
  throw Error(ErrorCode::kNoCollisionSolution,
              "no feasible collision triangle after " + std::to_string(kMaxSampleAttempts) +
                  " scenario draws");
}

}  // namespace homing::scenario
