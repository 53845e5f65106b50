#include "homing/seeker/seeker.hpp"

#include "homing/common/error.hpp"

#include <algorithm>
#include <cmath>

namespace homing::seeker {

SeekerAngles seeker_angles(const Vec3& r_tm_inertial, const Dcm& c_sn) {
  const double range = r_tm_inertial.norm();
  if (!(range > 0.0)) throw Error(ErrorCode::kDegenerateGeometry, "seeker: zero range to target");
  const Vec3 los = c_sn * (r_tm_inertial / range);
  return {std::asin(std::clamp(los.y(), -1.0, 1.0)), std::asin(std::clamp(los.z(), -1.0, 1.0))};
}

SeekerFrame make_frame(const Quat& q0, const Vec3& r_tm0, double fov_half) {
  SeekerFrame frame;
  frame.c_sn = sim::inertial_to_body(q0.normalized());
  const SeekerAngles a0 = seeker_angles(r_tm0, frame.c_sn);
  frame.theta_u0 = a0.u;
  frame.theta_v0 = a0.v;
  frame.fov_half = fov_half;
  return frame;
}

Measurement observe(const sim::EngagementState& state, const SeekerFrame& frame,
                    const std::optional<SeekerAngles>& prev, Rng* noise_rng) {
  Measurement m;
  m.angles = seeker_angles(state.r_tm(), frame.c_sn);
  if (frame.noise_sigma > 0.0 && noise_rng != nullptr) {
    m.angles.u += frame.noise_sigma * standard_normal(*noise_rng);
    m.angles.v += frame.noise_sigma * standard_normal(*noise_rng);
  }
  m.obs.e_u = m.angles.u - frame.theta_u0;
  m.obs.e_v = m.angles.v - frame.theta_v0;
  if (prev) {
    m.obs.d_theta_u = m.angles.u - prev->u;
    m.obs.d_theta_v = m.angles.v - prev->v;
  }
  return m;
}

bool fov_violated(const SeekerAngles& angles, double fov_half) {
  return std::max(std::abs(angles.u), std::abs(angles.v)) > fov_half;
}

}  // namespace homing::seeker
