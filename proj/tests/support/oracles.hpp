// Reference computations shared by unit and acceptance tests. These are
// written independently of the library code they check.
#pragma once

#include "homing/nn/network.hpp"
#include "homing/scenario/scenario.hpp"
#include "homing/sim/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

namespace homing::oracle {

// Rodrigues rotation matrix for a rotation of `angle` about unit `axis`.
inline Dcm axis_angle_matrix(const Vec3& axis, double angle) {
  const Vec3 k = axis.normalized();
  Dcm kx;
  kx << 0, -k.z(), k.y(), k.z(), 0, -k.x(), -k.y(), k.x(), 0;
  return Dcm::Identity() + std::sin(angle) * kx + (1.0 - std::cos(angle)) * kx * kx;
}

// Closest approach of two constant-velocity points over t >= 0.
inline double ballistic_closest_approach(const Vec3& r_rel, const Vec3& v_rel) {
  const double vv = v_rel.squaredNorm();
  double t = vv > 0.0 ? -r_rel.dot(v_rel) / vv : 0.0;
  t = std::max(t, 0.0);
  return (r_rel + v_rel * t).norm();
}

// Angle between two vectors via atan2, accurate near 0 and pi.
inline double angle_between(const Vec3& a, const Vec3& b) {
  return std::atan2(a.cross(b).norm(), a.dot(b));
}

// Standard single-discount return G_k = sum_l gamma^(l-k) r_l.
inline std::vector<double> single_gamma_returns(const std::vector<double>& rewards, double gamma) {
  std::vector<double> g(rewards.size(), 0.0);
  for (std::size_t k = 0; k < rewards.size(); ++k) {
    double sum = 0.0, w = 1.0;
    for (std::size_t l = k; l < rewards.size(); ++l) {
      sum += w * rewards[l];
      w *= gamma;
    }
    g[k] = sum;
  }
  return g;
}

struct ConvergenceStudy {
  double err_h = 0.0;
  double err_h2 = 0.0;
  double ratio = 0.0;
};

// Integrates a thrusting missile against a barrel-rolling target for `span`
// seconds at step h and h/2, measuring both against a h/64 reference. The
// error is the largest position component difference of either body.
// Two thrusters at Isp 150 s burn the 25 kg of fuel in about 1.97 s; the span
// stays short of exhaustion so the right-hand side remains smooth.
inline ConvergenceStudy rk4_convergence(double h = 0.05, double span = 1.5) {
  sim::MissileConfig mc = sim::make_missile_config(sim::kCalibratedMaxThrust, 150.0);
  scenario::ManeuverProfile roll;
  roll.kind = scenario::ManeuverKind::kBarrelRoll;
  roll.accel_magnitude = 5.0 * kStandardGravity;
  roll.n1 = Vec3(0, 1, 0);
  roll.n2 = Vec3(1, 0, 0);
  roll.weave_period = 1.0;
  roll.start_time = 0.0;
  roll.duration = 1e9;
  const sim::TargetAccelFn accel = [roll](double t, const Vec3& v) {
    return scenario::maneuver_accel(roll, v, t);
  };
  const sim::Dynamics dyn(mc, sim::IntegratorConfig{}, accel);

  sim::EngagementState s0;
  s0.missile.velocity = Vec3(2900.0, 300.0, -100.0);
  s0.missile.attitude = Quat(Eigen::AngleAxisd(0.3, Vec3(0.2, 0.5, 1.0).normalized()));
  s0.missile.mass = mc.wet_mass;
  s0.target.position = Vec3(500.0, -200.0, 20000.0);
  s0.target.velocity = Vec3(0.0, 0.0, -4000.0);
  s0.target.commanded_accel = accel(0.0, s0.target.velocity);
  const ThrusterAction action{0, 1, 1, 0};

  auto run = [&](double dt) {
    sim::EngagementState s = s0;
    const int n = static_cast<int>(std::lround(span / dt));
    for (int i = 0; i < n; ++i) s = dyn.rk4_step(s, action, dt);
    return s;
  };
  auto err = [](const sim::EngagementState& a, const sim::EngagementState& b) {
    return std::max((a.missile.position - b.missile.position).cwiseAbs().maxCoeff(),
                    (a.target.position - b.target.position).cwiseAbs().maxCoeff());
  };
  const sim::EngagementState ref = run(h / 64.0);
  ConvergenceStudy out;
  out.err_h = err(run(h), ref);
  out.err_h2 = err(run(h / 2.0), ref);
  out.ratio = out.err_h / out.err_h2;
  return out;
}

struct GradientCheck {
  std::string worst_tensor;
  double max_rel_error = 0.0;
  std::vector<std::pair<std::string, double>> per_tensor;
};

// Names and flat offsets of the parameter tensors, following the layout
// documented in network.hpp.
inline std::vector<std::pair<std::string, std::size_t>> tensor_layout(const nn::NetworkShape& s) {
  std::vector<std::pair<std::string, std::size_t>> t;
  std::size_t off = 0;
  auto add = [&](const char* name, std::size_t n) {
    t.emplace_back(name, n);
    off += n;
  };
  add("W1", std::size_t(s.h1) * s.obs_dim);
  add("b1", s.h1);
  add("Wg", std::size_t(3 * s.h2) * s.h1);
  add("Ug", std::size_t(3 * s.h2) * s.h2);
  add("bg", 3 * s.h2);
  add("W3", std::size_t(s.h3) * s.h2);
  add("b3", s.h3);
  add("W4", std::size_t(s.out_dim) * s.h3);
  add("b4", s.out_dim);
  return t;
}

// Loss L = sum_t w_t . out_t over a random episode. Compares backward()
// against central differences with step eps on every parameter. The
// relative error is |a - n| / max(|a| + |n|, floor).
inline GradientCheck finite_difference_check(nn::RecurrentNet net, const Eigen::MatrixXd& obs,
                                             const Eigen::MatrixXd& weights, double eps = 1e-5,
                                             double floor = 1e-6) {
  auto loss = [&](const nn::RecurrentNet& n) {
    const nn::SequenceTrace tr = n.forward_sequence(obs);
    return (tr.out.array() * weights.array()).sum();
  };
  std::vector<double> grad(net.num_params(), 0.0);
  net.backward(net.forward_sequence(obs), weights, grad);

  GradientCheck out;
  std::size_t offset = 0;
  for (const auto& [name, count] : tensor_layout(net.shape())) {
    double worst = 0.0;
    for (std::size_t i = offset; i < offset + count; ++i) {
      const double saved = net.params()[i];
      net.params()[i] = saved + eps;
      const double up = loss(net);
      net.params()[i] = saved - eps;
      const double down = loss(net);
      net.params()[i] = saved;
      const double numeric = (up - down) / (2.0 * eps);
      const double rel = std::abs(grad[i] - numeric) /
                         std::max(std::abs(grad[i]) + std::abs(numeric), floor);
      worst = std::max(worst, rel);
    }
    out.per_tensor.emplace_back(name, worst);
    if (worst >= out.max_rel_error) {
      out.max_rel_error = worst;
      out.worst_tensor = name;
    }
    offset += count;
  }
  return out;
}

}  // namespace homing::oracle
