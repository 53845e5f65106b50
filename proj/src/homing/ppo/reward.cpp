#include "homing/ppo/reward.hpp"

#include "homing/common/error.hpp"

#include <cmath>

namespace homing::ppo {

void RewardConfig::validate() const {
  if (!(sigma_e > 0.0) || !(sigma_dtheta > 0.0))
    throw Error(ErrorCode::kConfig, "reward: sigmas must be positive");
  if (!(gamma1 > 0.0 && gamma1 <= 1.0) || !(gamma2 > 0.0 && gamma2 <= 1.0))
    throw Error(ErrorCode::kConfig, "reward: discount factors must lie in (0, 1]");
  if (!(hit_radius > 0.0)) throw Error(ErrorCode::kConfig, "reward: hit_radius must be positive");
  if (!std::isfinite(alpha) || !std::isfinite(terminal_bonus))
    throw Error(ErrorCode::kConfig, "reward: coefficients must be finite");
}

double shaping_reward(const seeker::SeekerObservation& obs, const RewardConfig& cfg) {
  const double e = std::hypot(obs.e_u, obs.e_v);
  const double d = std::hypot(obs.d_theta_u, obs.d_theta_v);
  return std::exp(-e / cfg.sigma_e - d / cfg.sigma_dtheta);
}

double terminal_reward(double miss, const RewardConfig& cfg) {
  return miss < cfg.hit_radius ? cfg.terminal_bonus : 0.0;
}

}  // namespace homing::ppo
