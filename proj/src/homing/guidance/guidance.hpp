// Ground-truth benchmark guidance: augmented zero-effort miss and a pure
// proportional-navigation baseline, both discretized to pulsed thrusters.
#pragma once

#include "homing/common/types.hpp"
#include "homing/sim/dynamics.hpp"

namespace homing::guidance {

struct ZemCommand {
  Vec3 zem = Vec3::Zero();  // m
  double v_c = 0.0;         // m/s
  double t_go = 0.0;        // s
  Vec3 a_com = Vec3::Zero();  // m/s^2, inertial
};

inline constexpr double kAugmentedZemGain = 3.0;

/// ZEM = r + v t_go + a_T t_go^2 / 2, a_com = N ZEM / t_go^2.
/// Throws kTargetOpening when the closing velocity is not positive.
ZemCommand zem_command(const Vec3& r_tm, const Vec3& v_tm, const Vec3& a_t,
                       double n = kAugmentedZemGain);

/// a_com = N v_c (Omega x los_hat), with Omega = (r x v) / |r|^2.
/// Throws kTargetOpening like zem_command.
Vec3 pn_command(const Vec3& r_tm, const Vec3& v_tm, double n = kAugmentedZemGain);

// Fires thruster i iff the body-frame command projected on its thrust
// direction exceeds a_max / 3. The body x component is unreachable and dropped.
ThrusterAction pulse_map(const Vec3& a_com_inertial, const Quat& q,
                         const sim::ThrusterSet& thrusters, double a_max);

enum class Law { kZem, kPn };

/// Full-state law evaluated on the current engagement state; coasts when opening.
ThrusterAction ground_truth_action(Law law, const sim::EngagementState& state,
                                   const sim::MissileConfig& missile);

}  // namespace homing::guidance
