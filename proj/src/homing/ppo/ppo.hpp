// Recurrent PPO for the thruster policy: rollouts over full episodes,
// dual-discount returns, clipped surrogate with KL-steered clip range.
#pragma once

#include "homing/env/engagement.hpp"
#include "homing/nn/checkpoint.hpp"
#include "homing/nn/distribution.hpp"
#include "homing/nn/network.hpp"
#include "homing/ppo/adam.hpp"
#include "homing/ppo/reward.hpp"

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace homing::ppo {

struct StepRecord {
  std::array<double, 4> obs{};
  ThrusterAction action{};
  double log_prob = 0.0;
  double value_estimate = 0.0;
  double shaping_reward = 0.0;  // unscaled; alpha applied when forming returns
  double terminal_reward = 0.0;
  bool done = false;
  std::array<double, nn::MultiCategorical::kLogits> logits{};  // behaviour policy
};

struct EpisodeTrajectory {
  std::vector<StepRecord> steps;
  env::Outcome outcome = env::Outcome::kRunning;
  double miss_distance = 0.0;
  double fuel_used = 0.0;
  std::string error;  // non-empty if the simulation failed mid-episode

  double total_reward(const RewardConfig& cfg) const;
};

struct PpoConfig {
  int episodes_per_batch = 30;
  double kl_target = 0.001;
  double clip_eps_init = 0.2;
  double clip_eps_min = 0.02;
  double clip_eps_max = 0.5;
  int epochs_per_batch = 10;
  // KL guard, checked after every epoch. An epoch that pushes KL above
  // kl_ceiling is undone and ends the update; while KL is below kl_floor
  // after epochs_per_batch, up to max_extra_epochs more are run.
  double kl_floor = 0.0002;
  double kl_ceiling = 0.005;
  int max_extra_epochs = 10;
  int minibatches = 1;           // episode-level split per epoch
  double lr_policy = 2e-4;       // beta_theta
  double lr_value = 1e-3;        // beta_w
  int total_batches = 1000;
  double entropy_coef = 0.0;
  bool normalize_advantages = true;
  // Input pre-scale for both networks: x = scale . obs (identity by default).
  std::array<double, 4> obs_scale{1.0, 1.0, 1.0, 1.0};
  int threads = 1;

  void validate() const;
};

/// Runs one episode with a stochastic policy; hidden states start at zero.
EpisodeTrajectory run_episode(const nn::RecurrentNet& policy, const nn::RecurrentNet& value,
                              env::Engagement& engagement, const RewardConfig& reward,
                              Rng& action_rng);

// Collects n_episodes rollouts. Episode i of batch b draws its scenario and
// actions from streams keyed by (seed, b, i), so the batch is identical for
// any thread count.
std::vector<EpisodeTrajectory> collect_rollouts(const nn::RecurrentNet& policy,
                                                const nn::RecurrentNet& value,
                                                const env::EnvConfig& env_cfg,
                                                const RewardConfig& reward, int n_episodes,
                                                std::uint64_t seed, std::uint64_t batch_index,
                                                int threads = 1);

/// G_k for every step of the trajectory.
std::vector<double> dual_discount_returns(const EpisodeTrajectory& traj, const RewardConfig& cfg);
double dual_discount_return(const EpisodeTrajectory& traj, std::size_t k, const RewardConfig& cfg);

/// A_k = G_k - V(o_k) from the recorded value estimates, per episode.
std::vector<std::vector<double>> advantages(const std::vector<EpisodeTrajectory>& batch,
                                            const std::vector<std::vector<double>>& returns,
                                            bool normalize);

/// min(p A, clip(p, 1 - eps, 1 + eps) A).
double clipped_objective(double ratio, double advantage, double eps);

/// pi_new(u_k | o_k) / pi_old(u_k | o_k) for every step, recomputed with fresh forward passes.
std::vector<std::vector<double>> policy_ratios(const nn::RecurrentNet& policy,
                                               const std::vector<EpisodeTrajectory>& batch);

/// Mean KL(pi_old || pi_new) over all recorded states of the batch.
double mean_kl(const nn::RecurrentNet& policy, const std::vector<EpisodeTrajectory>& batch);

/// Next clip range given the KL measured after an update.
double adapt_clip(double eps, double kl, const PpoConfig& cfg);

struct UpdateStats {
  double kl = 0.0;
  double clip_eps = 0.0;  // after adaptation
  double policy_loss = 0.0;  // negated surrogate, first epoch
  double value_loss = 0.0;   // first epoch
  double final_value_loss = 0.0;
  int epochs = 0;             // epochs whose policy step was kept
  bool ceiling_hit = false;   // last epoch undone by the KL ceiling
  bool aborted = false;
  std::string abort_reason;
};

// Holds both networks plus optimizer state across updates.
class PpoLearner {
 public:
  PpoLearner(nn::RecurrentNet policy, nn::RecurrentNet value, PpoConfig cfg, RewardConfig reward);

  const nn::RecurrentNet& policy() const { return policy_; }
  const nn::RecurrentNet& value() const { return value_; }
  nn::RecurrentNet& policy() { return policy_; }
  nn::RecurrentNet& value() { return value_; }
  double clip_eps() const { return clip_eps_; }
  void set_clip_eps(double eps) { clip_eps_ = eps; }

  // Clipped-surrogate ascent on the policy and squared-error descent on the
  // value net for epochs_per_batch epochs, then measures KL and adapts the
  // clip range. Restores the previous parameters if a loss goes non-finite.
  UpdateStats update(const std::vector<EpisodeTrajectory>& batch, Rng& rng);

 private:
  nn::RecurrentNet policy_;
  nn::RecurrentNet value_;
  PpoConfig cfg_;
  RewardConfig reward_;
  Adam policy_opt_;
  Adam value_opt_;
  double clip_eps_;
};

struct LearningCurveRow {
  int batch = 0;
  double mean_reward = 0.0;
  double sd_reward = 0.0;  // mean reward minus one standard deviation
  double min_reward = 0.0;
  double max_reward = 0.0;
  double mean_steps = 0.0;
  double hit_rate = 0.0;   // fraction of episodes with miss < hit radius
  double mean_miss = 0.0;
  double sd_miss = 0.0;
  UpdateStats update;
};

LearningCurveRow batch_statistics(const std::vector<EpisodeTrajectory>& batch,
                                  const RewardConfig& reward);

struct TrainConfig {
  env::EnvConfig env;
  PpoConfig ppo;
  RewardConfig reward;
  std::uint64_t seed = 1;
};

struct TrainResult {
  std::vector<LearningCurveRow> curve;
  nn::Checkpoint best;   // highest batch hit rate (latest wins ties)
  nn::Checkpoint last;
  int best_batch = -1;
};

using BatchCallback = std::function<void(const LearningCurveRow&)>;

/// Fresh policy/value networks initialized from `seed`, with the configured input scale.
std::pair<nn::RecurrentNet, nn::RecurrentNet> make_networks(const PpoConfig& cfg,
                                                            std::uint64_t seed);

TrainResult train(const TrainConfig& cfg, const BatchCallback& on_batch = {});

void write_learning_curve_csv(const std::string& path, const std::vector<LearningCurveRow>& rows);
void write_update_stats_csv(const std::string& path, const std::vector<LearningCurveRow>& rows);

}  // namespace homing::ppo
