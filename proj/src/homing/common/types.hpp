#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <array>
#include <cstdint>
#include <numbers>

namespace homing {

using Vec3 = Eigen::Vector3d;
using Quat = Eigen::Quaterniond;
using Dcm = Eigen::Matrix3d;

inline constexpr int kNumThrusters = 4;

/// On/off command per divert thruster, indexed like the thruster table.
using ThrusterAction = std::array<std::uint8_t, kNumThrusters>;

inline constexpr double kStandardGravity = 9.81;

constexpr double deg2rad(double deg) { return deg * std::numbers::pi / 180.0; }
constexpr double rad2deg(double rad) { return rad * 180.0 / std::numbers::pi; }

}  // namespace homing
