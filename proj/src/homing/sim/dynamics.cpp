#include "homing/sim/dynamics.hpp"

#include "homing/common/error.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace homing::sim {

ThrusterSet default_thrusters(double max_thrust) {
  ThrusterSet set;
  set[0] = {Vec3(0, -1, 0), Vec3(0, -0.25, 0), max_thrust, 0.0};
  set[1] = {Vec3(0, 1, 0), Vec3(0, 0.25, 0), max_thrust, 0.0};
  set[2] = {Vec3(0, 0, 1), Vec3(0, 0, 0.25), max_thrust, 0.0};
  set[3] = {Vec3(0, 0, -1), Vec3(0, 0, -0.25), max_thrust, 0.0};
  return set;
}

MissileConfig make_missile_config(double max_thrust, double isp) {
  MissileConfig cfg;
  cfg.max_thrust = max_thrust;
  cfg.isp = isp;
  cfg.thrusters = default_thrusters(max_thrust);
  cfg.validate();
  return cfg;
}

void MissileConfig::validate() const {
  if (!(dry_mass > 0.0) || !(wet_mass >= dry_mass))
    throw Error(ErrorCode::kConfig, "missile: require 0 < dry_mass <= wet_mass");
  if (!(isp > 0.0) || !(g_ref > 0.0))
    throw Error(ErrorCode::kConfig, "missile: isp and g_ref must be positive");
  if (!(max_thrust > 0.0)) throw Error(ErrorCode::kConfig, "missile: max_thrust must be positive");
  for (const auto& t : thrusters) {
    if (std::abs(t.direction.norm() - 1.0) > 1e-12)
      throw Error(ErrorCode::kConfig, "missile: thruster direction must be a unit vector");
  }
}

void IntegratorConfig::validate() const {
  if (!(guidance_period > 0.0) || !(coarse_dt > 0.0) || !(fine_dt > 0.0) || !(fine_range >= 0.0))
    throw Error(ErrorCode::kConfig, "integrator: periods and steps must be positive");
}

ForceTorque body_force_torque(const ThrusterAction& action, const ThrusterSet& thrusters,
                              const Vec3& r_com) {
  ForceTorque out;
  for (int i = 0; i < kNumThrusters; ++i) {
    if (!action[i]) continue;
    const Vec3 f = thrusters[i].direction * thrusters[i].max_thrust;
    out.force += f;
    out.torque += (thrusters[i].position - r_com).cross(f);
  }
  return out;
}

Dcm inertial_to_body(const Quat& q) { return q.toRotationMatrix().transpose(); }

Vec3 body_to_inertial(const Vec3& force_body, const Quat& q) {
  if (std::abs(q.norm() - 1.0) > 1e-6)
    throw Error(ErrorCode::kInvalidAttitude,
                "attitude quaternion is not unit norm (|q| = " + std::to_string(q.norm()) + ")");
  return inertial_to_body(q).transpose() * force_body;
}

namespace {

double thrust_magnitude_sum(const ThrusterAction& action, const ThrusterSet& thrusters) {
  double sum = 0.0;
  for (int i = 0; i < kNumThrusters; ++i)
    if (action[i]) sum += thrusters[i].max_thrust;
  return sum;
}

// Flat joint state: missile r, v, m then target r, v.
struct Joint {
  Vec3 rm, vm;
  double m;
  Vec3 rt, vt;

  Joint axpy(double h, const Joint& d) const {
    return {rm + h * d.rm, vm + h * d.vm, m + h * d.m, rt + h * d.rt, vt + h * d.vt};
  }
};

}  // namespace

MissileRates missile_derivatives(const MissileBody& missile, const ThrusterAction& action,
                                 const MissileConfig& cfg) {
  MissileRates rates;
  rates.position_dot = missile.velocity;
  rates.velocity_dot = Vec3::Zero();
  if (missile.mass <= cfg.dry_mass) return rates;  // out of fuel
  const ForceTorque ft = body_force_torque(action, cfg.thrusters, cfg.r_com);
  rates.velocity_dot = body_to_inertial(ft.force, missile.attitude) / missile.mass;
  rates.mass_dot = -thrust_magnitude_sum(action, cfg.thrusters) / (cfg.isp * cfg.g_ref);
  return rates;
}

TargetRates target_derivatives(const TargetBody& target) {
  return {target.velocity, target.commanded_accel};
}

Dynamics::Dynamics(MissileConfig missile, IntegratorConfig integrator, TargetAccelFn target_accel)
    : missile_(std::move(missile)),
      integrator_(integrator),
      target_accel_(std::move(target_accel)) {
  missile_.validate();
  integrator_.validate();
}

Vec3 Dynamics::target_accel(double t, const TargetBody& target) const {
  return target_accel_ ? target_accel_(t, target.velocity) : target.commanded_accel;
}

EngagementState Dynamics::rk4_step(const EngagementState& state, const ThrusterAction& action,
                                   double dt) const {
  if (!(dt > 0.0)) throw Error(ErrorCode::kInvalidArgument, "rk4_step: dt must be positive");

  // Thrust direction is constant over the step (fixed attitude), so the body
  // force is resolved once.
  const ForceTorque ft = body_force_torque(action, missile_.thrusters, missile_.r_com);
  const Vec3 force_n = body_to_inertial(ft.force, state.missile.attitude);
  const double mdot_on = -thrust_magnitude_sum(action, missile_.thrusters) /
                         (missile_.isp * missile_.g_ref);
  const double dry = missile_.dry_mass;

  auto deriv = [&](double t, const Joint& y) {
    Joint d;
    d.rm = y.vm;
    if (y.m > dry) {
      d.vm = force_n / y.m;
      d.m = mdot_on;
    } else {
      d.vm = Vec3::Zero();
      d.m = 0.0;
    }
    d.rt = y.vt;
    TargetBody tb{y.rt, y.vt, state.target.commanded_accel};
    d.vt = target_accel(t, tb);
    return d;
  };

  const double t0 = state.time;
  const Joint y0{state.missile.position, state.missile.velocity, state.missile.mass,
                 state.target.position, state.target.velocity};
  const Joint k1 = deriv(t0, y0);
  const Joint k2 = deriv(t0 + 0.5 * dt, y0.axpy(0.5 * dt, k1));
  const Joint k3 = deriv(t0 + 0.5 * dt, y0.axpy(0.5 * dt, k2));
  const Joint k4 = deriv(t0 + dt, y0.axpy(dt, k3));

  const double w = dt / 6.0;
  EngagementState next = state;
  next.missile.position = y0.rm + w * (k1.rm + 2.0 * k2.rm + 2.0 * k3.rm + k4.rm);
  next.missile.velocity = y0.vm + w * (k1.vm + 2.0 * k2.vm + 2.0 * k3.vm + k4.vm);
  next.missile.mass = std::max(dry, y0.m + w * (k1.m + 2.0 * k2.m + 2.0 * k3.m + k4.m));
  next.target.position = y0.rt + w * (k1.rt + 2.0 * k2.rt + 2.0 * k3.rt + k4.rt);
  next.target.velocity = y0.vt + w * (k1.vt + 2.0 * k2.vt + 2.0 * k3.vt + k4.vt);
  next.time = t0 + dt;
  next.fuel_used = missile_.wet_mass - next.missile.mass;
  if (target_accel_) next.target.commanded_accel = target_accel_(next.time, next.target.velocity);
  return next;
}

std::pair<double, double> segment_closest_approach(const Vec3& r0, const Vec3& r1) {
  const Vec3 d = r1 - r0;
  const double dd = d.squaredNorm();
  double s = 0.0;
  if (dd > 0.0) s = std::clamp(-r0.dot(d) / dd, 0.0, 1.0);
  return {(r0 + s * d).norm(), s};
}

CycleResult Dynamics::propagate_guidance_cycle(const EngagementState& state,
                                               const ThrusterAction& action) const {
  CycleResult out;
  out.state = state;
  out.min_range = state.r_tm().norm();
  out.min_range_time = state.time;

  const double t_end = state.time + integrator_.guidance_period;
  // Steps shorter than this are absorbed into the previous one to avoid
  // round-off slivers at the end of the cycle.
  const double sliver = 1e-9 * integrator_.guidance_period;
  while (t_end - out.state.time > sliver) {
    const Vec3 r0 = out.state.r_tm();
    double dt = r0.norm() > integrator_.fine_range ? integrator_.coarse_dt : integrator_.fine_dt;
    if (t_end - out.state.time - dt <= sliver) dt = t_end - out.state.time;
    EngagementState next = rk4_step(out.state, action, dt);
    const auto [range, s] = segment_closest_approach(r0, next.r_tm());
    if (range < out.min_range) {
      out.min_range = range;
      out.min_range_time = out.state.time + s * dt;
    }
    out.state = std::move(next);
    ++out.substeps;
  }
  out.state.time = t_end;
  return out;
}

}  // namespace homing::sim
