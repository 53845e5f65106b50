#include "homing/env/engagement.hpp"

#include "homing/common/error.hpp"

#include <algorithm>
#include <cmath>

namespace homing::env {

void EnvConfig::validate() const {
  scenario.validate();
  missile.validate();
  integrator.validate();
  if (!(max_time > 0.0)) throw Error(ErrorCode::kConfig, "episode.max_time must be positive");
  if (!(fov_half > 0.0)) throw Error(ErrorCode::kConfig, "seeker fov must be positive");
  if (!(hit_radius > 0.0)) throw Error(ErrorCode::kConfig, "hit_radius must be positive");
  if (seeker_noise_sigma < 0.0) throw Error(ErrorCode::kConfig, "seeker noise must be >= 0");
}

const char* outcome_name(Outcome outcome) {
  switch (outcome) {
    case Outcome::kRunning: return "running";
    case Outcome::kHit: return "hit";
    case Outcome::kMiss: return "miss";
    case Outcome::kFovExit: return "fov_exit";
    case Outcome::kTimeout: return "timeout";
  }
  return "running";
}

Outcome parse_outcome(const std::string& name) {
  for (Outcome o : {Outcome::kRunning, Outcome::kHit, Outcome::kMiss, Outcome::kFovExit,
                    Outcome::kTimeout})
    if (name == outcome_name(o)) return o;
  throw Error(ErrorCode::kInvalidArgument, "unknown outcome '" + name + "'");
}

namespace {

sim::TargetAccelFn maneuver_fn(const scenario::ManeuverProfile& profile) {
  if (profile.kind == scenario::ManeuverKind::kNone) return {};
  return [profile](double t, const Vec3& v) { return scenario::maneuver_accel(profile, v, t); };
}

}  // namespace

Engagement::Engagement(const EnvConfig& cfg, std::uint64_t episode_seed)
    : Engagement(cfg, [&] {
        Rng rng = episode_rng(episode_seed);
        return std::pair(scenario::sample_scenario(cfg.scenario, cfg.missile, rng, cfg.fov_half),
                         rng);
      }()) {}

Engagement::Engagement(const EnvConfig& cfg, std::pair<scenario::Scenario, Rng> drawn)
    : Engagement(cfg, std::move(drawn.first), drawn.second) {}

Engagement::Engagement(const EnvConfig& cfg, scenario::Scenario sc, Rng noise_rng)
    : cfg_(cfg),
      scenario_(std::move(sc)),
      dynamics_(cfg.missile, cfg.integrator, maneuver_fn(scenario_.maneuver)),
      noise_rng_(noise_rng),
      state_(scenario_.state) {
  cfg_.validate();
  scenario_.frame.noise_sigma = cfg_.seeker_noise_sigma;
  scenario_.frame.fov_half = cfg_.fov_half;
  const auto m = seeker::observe(state_, scenario_.frame, std::nullopt, &noise_rng_);
  obs_ = m.obs;
  angles_ = m.angles;
  miss_ = state_.r_tm().norm();
}

StepResult Engagement::step(const ThrusterAction& action) {
  if (done()) throw Error(ErrorCode::kUsage, "step() called on a finished episode");
  const sim::CycleResult cycle = dynamics_.propagate_guidance_cycle(state_, action);
  state_ = cycle.state;
  miss_ = std::min(miss_, cycle.min_range);
  ++steps_;

  StepResult out;
  out.min_range = cycle.min_range;

  const bool opening = state_.r_tm().dot(state_.v_tm()) >= 0.0;
  std::optional<seeker::Measurement> m;
  try {
    m = seeker::observe(state_, scenario_.frame, angles_, &noise_rng_);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kDegenerateGeometry) throw;
  }
  if (m) {
    obs_ = m->obs;
    angles_ = m->angles;
  } else {
    // Exact zero range at the cycle boundary: keep the last observation.
    obs_.d_theta_u = obs_.d_theta_v = 0.0;
  }

  if (m && seeker::fov_violated(angles_, scenario_.frame.fov_half))
    termination_ = Termination::kFieldOfView;
  else if (opening || !m)
    termination_ = Termination::kFlyby;
  else if (state_.time >= cfg_.max_time - 1e-9)
    termination_ = Termination::kTimeout;

  out.obs = obs_;
  out.done = done();
  return out;
}

Outcome Engagement::outcome() const {
  if (!done()) return Outcome::kRunning;
  if (miss_ < cfg_.hit_radius) return Outcome::kHit;
  const bool closing = state_.r_tm().dot(state_.v_tm()) < 0.0;
  if (termination_ == Termination::kFieldOfView && closing) return Outcome::kFovExit;
  if (termination_ == Termination::kTimeout) return Outcome::kTimeout;
  return Outcome::kMiss;
}

}  // namespace homing::env
