#pragma once

#include "homing/seeker/seeker.hpp"

namespace homing::ppo {

struct RewardConfig {
  double alpha = 0.1;
  double sigma_e = 0.01;        // rad
  double sigma_dtheta = 0.001;  // rad per cycle
  double terminal_bonus = 10.0;
  double hit_radius = 0.5;      // m
  double gamma1 = 0.90;         // shaping stream
  double gamma2 = 0.995;        // terminal stream

  void validate() const;
};

/// exp(-|e| / sigma_e - |dtheta| / sigma_dtheta), in (0, 1].
double shaping_reward(const seeker::SeekerObservation& obs, const RewardConfig& cfg);

/// Bonus iff miss < hit_radius (strict).
double terminal_reward(double miss, const RewardConfig& cfg);

}  // namespace homing::ppo
