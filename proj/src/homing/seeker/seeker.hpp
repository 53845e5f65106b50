// Stabilized passive seeker. The seeker platform is frozen at the missile
// attitude at homing start and measures two line-of-sight angles.
#pragma once

#include "homing/common/random.hpp"
#include "homing/common/types.hpp"
#include "homing/sim/dynamics.hpp"

#include <array>
#include <optional>

namespace homing::seeker {

inline constexpr double kDefaultFovHalfAngle = deg2rad(67.5);

struct SeekerAngles {
  double u = 0.0;  // rad, projection on seeker y
  double v = 0.0;  // rad, projection on seeker z
};

struct SeekerFrame {
  Dcm c_sn = Dcm::Identity();  // inertial -> seeker
  double theta_u0 = 0.0;
  double theta_v0 = 0.0;
  double fov_half = kDefaultFovHalfAngle;
  double noise_sigma = 0.0;  // rad, zero-mean Gaussian angle noise; off by default
};

struct SeekerObservation {
  double e_u = 0.0;
  double e_v = 0.0;
  double d_theta_u = 0.0;  // rad per guidance cycle
  double d_theta_v = 0.0;

  std::array<double, 4> as_array() const { return {e_u, e_v, d_theta_u, d_theta_v}; }
};

/// Throws kDegenerateGeometry when r_tm is zero.
SeekerAngles seeker_angles(const Vec3& r_tm_inertial, const Dcm& c_sn);

/// Freezes the seeker platform at attitude q0 and records the starting angles.
SeekerFrame make_frame(const Quat& q0, const Vec3& r_tm0, double fov_half = kDefaultFovHalfAngle);

struct Measurement {
  SeekerObservation obs;
  SeekerAngles angles;
};

// Angle errors against the homing-start angles plus the raw per-cycle change.
// `noise_rng` is only consulted when frame.noise_sigma > 0.
Measurement observe(const sim::EngagementState& state, const SeekerFrame& frame,
                    const std::optional<SeekerAngles>& prev, Rng* noise_rng = nullptr);

bool fov_violated(const SeekerAngles& angles, double fov_half = kDefaultFovHalfAngle);

}  // namespace homing::seeker
