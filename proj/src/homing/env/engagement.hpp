// One terminal-homing episode: scenario draw, guidance-cycle stepping,
// seeker measurement and termination bookkeeping.
#pragma once

#include "homing/common/random.hpp"
#include "homing/scenario/scenario.hpp"
#include "homing/seeker/seeker.hpp"
#include "homing/sim/dynamics.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <utility>

namespace homing::env {

struct EnvConfig {
  scenario::ScenarioConfig scenario;
  sim::MissileConfig missile;
  sim::IntegratorConfig integrator;
  double max_time = 15.0;  // s
  double fov_half = seeker::kDefaultFovHalfAngle;
  double hit_radius = 0.5;  // m
  double seeker_noise_sigma = 0.0;  // rad

  void validate() const;
};

enum class Outcome { kRunning, kHit, kMiss, kFovExit, kTimeout };
enum class Termination { kNone, kFieldOfView, kFlyby, kTimeout };

const char* outcome_name(Outcome outcome);
Outcome parse_outcome(const std::string& name);

struct StepResult {
  seeker::SeekerObservation obs;
  double min_range = 0.0;  // closest approach within this cycle
  bool done = false;
};

class Engagement {
 public:
  // Draws the scenario from episode_rng(episode_seed).
  Engagement(const EnvConfig& cfg, std::uint64_t episode_seed);
  Engagement(const EnvConfig& cfg, scenario::Scenario sc, Rng noise_rng);

  const sim::EngagementState& state() const { return state_; }
  const scenario::Scenario& scenario() const { return scenario_; }
  const seeker::SeekerObservation& observation() const { return obs_; }
  const seeker::SeekerAngles& angles() const { return angles_; }
  const sim::Dynamics& dynamics() const { return dynamics_; }
  const EnvConfig& config() const { return cfg_; }

  // Advances one guidance cycle. Episodes end on a seeker field-of-view
  // violation, on flyby (range rate turns positive), or at max_time.
  StepResult step(const ThrusterAction& action);

  bool done() const { return termination_ != Termination::kNone; }
  Termination termination() const { return termination_; }
  Outcome outcome() const;
  double miss_distance() const { return miss_; }
  double fuel_used() const { return state_.fuel_used; }
  int steps() const { return steps_; }

 private:
  Engagement(const EnvConfig& cfg, std::pair<scenario::Scenario, Rng> drawn);

  EnvConfig cfg_;
  scenario::Scenario scenario_;
  sim::Dynamics dynamics_;
  Rng noise_rng_;
  sim::EngagementState state_;
  seeker::SeekerObservation obs_;
  seeker::SeekerAngles angles_;
  double miss_;
  int steps_ = 0;
  Termination termination_ = Termination::kNone;
};

}  // namespace homing::env
