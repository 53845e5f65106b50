#include "homing/guidance/guidance.hpp"

#include "homing/common/error.hpp"

namespace homing::guidance {

namespace {

double closing_velocity(const Vec3& r_tm, const Vec3& v_tm) {
  const double range = r_tm.norm();
  if (!(range > 0.0)) throw Error(ErrorCode::kDegenerateGeometry, "guidance: zero range");
  const double v_c = -r_tm.dot(v_tm) / range;
  if (!(v_c > 0.0))
    throw Error(ErrorCode::kTargetOpening, "guidance: closing velocity is not positive");
  return v_c;
}

}  // namespace

ZemCommand zem_command(const Vec3& r_tm, const Vec3& v_tm, const Vec3& a_t, double n) {
  ZemCommand c;
  c.v_c = closing_velocity(r_tm, v_tm);
  c.t_go = r_tm.norm() / c.v_c;
  c.zem = r_tm + v_tm * c.t_go + 0.5 * a_t * c.t_go * c.t_go;
  c.a_com = n * c.zem / (c.t_go * c.t_go);
  return c;
}

Vec3 pn_command(const Vec3& r_tm, const Vec3& v_tm, double n) {
  const double v_c = closing_velocity(r_tm, v_tm);
  const double r2 = r_tm.squaredNorm();
  const Vec3 omega = r_tm.cross(v_tm) / r2;
  return n * v_c * omega.cross(r_tm / std::sqrt(r2));
}

ThrusterAction pulse_map(const Vec3& a_com_inertial, const Quat& q,
                         const sim::ThrusterSet& thrusters, double a_max) {
  if (!(a_max > 0.0)) throw Error(ErrorCode::kInvalidArgument, "pulse_map: a_max must be positive");
  const Vec3 a_body = sim::inertial_to_body(q) * a_com_inertial;
  const double threshold = a_max / 3.0;
  ThrusterAction action{};
  for (int i = 0; i < kNumThrusters; ++i)
    action[i] = a_body.dot(thrusters[i].direction) > threshold ? 1 : 0;
  return action;
}

ThrusterAction ground_truth_action(Law law, const sim::EngagementState& state,
                                   const sim::MissileConfig& missile) {
  Vec3 a_com;
  try {
    if (law == Law::kZem)
      a_com = zem_command(state.r_tm(), state.v_tm(), state.target.commanded_accel).a_com;
    else
      a_com = pn_command(state.r_tm(), state.v_tm());
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kTargetOpening) return ThrusterAction{};
    throw;
  }
  return pulse_map(a_com, state.missile.attitude, missile.thrusters, missile.max_accel());
}

}  // namespace homing::guidance
