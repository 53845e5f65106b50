#include "homing/ppo/ppo.hpp"

#include "homing/common/error.hpp"
#include "homing/common/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>

namespace homing::ppo {

namespace {

constexpr std::uint64_t kActionStreamSalt = 0xA5A5F00DULL;
constexpr std::uint64_t kInitStreamKey = 0x1717ULL;
constexpr std::uint64_t kUpdateStreamKey = 0x2929ULL;

Eigen::MatrixXd observation_matrix(const EpisodeTrajectory& traj) {
  Eigen::MatrixXd m(4, static_cast<Eigen::Index>(traj.steps.size()));
  for (std::size_t k = 0; k < traj.steps.size(); ++k)
    for (int j = 0; j < 4; ++j) m(j, static_cast<Eigen::Index>(k)) = traj.steps[k].obs[j];
  return m;
}

bool all_finite(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

double mean_of(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  return std::accumulate(v.begin(), v.end(), 0.0) / double(v.size());
}

double stddev_of(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean_of(v);
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return std::sqrt(ss / double(v.size()));
}

}  // namespace

void PpoConfig::validate() const {
  if (episodes_per_batch < 1 || epochs_per_batch < 1 || total_batches < 1 || minibatches < 1)
    throw Error(ErrorCode::kConfig, "ppo: batch, epoch and minibatch counts must be positive");
  if (!(kl_target > 0.0)) throw Error(ErrorCode::kConfig, "ppo.kl_target must be positive");
  if (!(kl_floor >= 0.0) || !(kl_floor < kl_target) || !(kl_ceiling > kl_target))
    throw Error(ErrorCode::kConfig, "ppo: require 0 <= kl_floor < kl_target < kl_ceiling");
  if (max_extra_epochs < 0) throw Error(ErrorCode::kConfig, "ppo.max_extra_epochs must be >= 0");
  if (!(clip_eps_min > 0.0) || !(clip_eps_min <= clip_eps_init) || !(clip_eps_init <= clip_eps_max))
    throw Error(ErrorCode::kConfig, "ppo: require 0 < clip_eps_min <= clip_eps_init <= clip_eps_max");
  if (lr_policy < 0.0 || lr_value < 0.0)
    throw Error(ErrorCode::kConfig, "ppo: learning rates must be non-negative");
  if (entropy_coef < 0.0) throw Error(ErrorCode::kConfig, "ppo.entropy_coef must be >= 0");
  for (double s : obs_scale)
    if (!std::isfinite(s) || s == 0.0) throw Error(ErrorCode::kConfig, "ppo.obs_scale must be finite and non-zero");
  if (threads < 1) throw Error(ErrorCode::kConfig, "ppo.threads must be >= 1");
}

double EpisodeTrajectory::total_reward(const RewardConfig& cfg) const {
  double r = 0.0;
  for (const auto& s : steps) r += cfg.alpha * s.shaping_reward + s.terminal_reward;
  return r;
}

EpisodeTrajectory run_episode(const nn::RecurrentNet& policy, const nn::RecurrentNet& value,
                              env::Engagement& engagement, const RewardConfig& reward,
                              Rng& action_rng) {
  EpisodeTrajectory traj;
  Eigen::VectorXd hp = policy.initial_hidden();
  Eigen::VectorXd hv = value.initial_hidden();
  while (!engagement.done()) {
    StepRecord rec;
    rec.obs = engagement.observation().as_array();
    const Eigen::VectorXd logits = policy.step(rec.obs, hp);
    rec.value_estimate = value.step(rec.obs, hv)(0);
    const nn::MultiCategorical dist({logits.data(), static_cast<std::size_t>(logits.size())});
    rec.action = dist.sample(action_rng);
    rec.log_prob = dist.log_prob(rec.action);
    std::copy(logits.data(), logits.data() + logits.size(), rec.logits.begin());
    env::StepResult res;
    try {
      res = engagement.step(rec.action);
    } catch (const Error& e) {
      traj.error = e.what();
      if (!traj.steps.empty()) traj.steps.back().done = true;
      break;
    }
    rec.shaping_reward = shaping_reward(res.obs, reward);
    rec.done = res.done;
    if (res.done) rec.terminal_reward = terminal_reward(engagement.miss_distance(), reward);
    traj.steps.push_back(rec);
  }
  traj.outcome = engagement.done() ? engagement.outcome() : env::Outcome::kMiss;
  traj.miss_distance = engagement.miss_distance();
  traj.fuel_used = engagement.fuel_used();
  return traj;
}

std::vector<EpisodeTrajectory> collect_rollouts(const nn::RecurrentNet& policy,
                                                const nn::RecurrentNet& value,
                                                const env::EnvConfig& env_cfg,
                                                const RewardConfig& reward, int n_episodes,
                                                std::uint64_t seed, std::uint64_t batch_index,
                                                int threads) {
  std::vector<EpisodeTrajectory> out(static_cast<std::size_t>(n_episodes));
  parallel_for(out.size(), threads, [&](std::size_t i) {
    Rng scenario_rng = keyed_rng(seed, batch_index, i);
    Rng action_rng = keyed_rng(seed ^ kActionStreamSalt, batch_index, i);
    try {
      scenario::Scenario sc =
          scenario::sample_scenario(env_cfg.scenario, env_cfg.missile, scenario_rng, env_cfg.fov_half);
      env::Engagement eng(env_cfg, std::move(sc), scenario_rng);
      out[i] = run_episode(policy, value, eng, reward, action_rng);
    } catch (const Error& e) {
      out[i] = EpisodeTrajectory{};
      out[i].error = e.what();
    }
  });
  return out;
}

std::vector<double> dual_discount_returns(const EpisodeTrajectory& traj, const RewardConfig& cfg) {
  std::vector<double> g(traj.steps.size());
  double shaping = 0.0;
  double terminal = 0.0;
  for (std::size_t i = traj.steps.size(); i-- > 0;) {
    shaping = cfg.alpha * traj.steps[i].shaping_reward + cfg.gamma1 * shaping;
    terminal = traj.steps[i].terminal_reward + cfg.gamma2 * terminal;
    g[i] = shaping + terminal;
  }
  return g;
}

double dual_discount_return(const EpisodeTrajectory& traj, std::size_t k, const RewardConfig& cfg) {
  if (k >= traj.steps.size())
    throw Error(ErrorCode::kInvalidArgument, "dual_discount_return: step index out of range");
  return dual_discount_returns(traj, cfg)[k];
}

std::vector<std::vector<double>> advantages(const std::vector<EpisodeTrajectory>& batch,
                                            const std::vector<std::vector<double>>& returns,
                                            bool normalize) {
  std::vector<std::vector<double>> adv(batch.size());
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t e = 0; e < batch.size(); ++e) {
    adv[e].resize(batch[e].steps.size());
    for (std::size_t k = 0; k < adv[e].size(); ++k) {
      adv[e][k] = returns[e][k] - batch[e].steps[k].value_estimate;
      sum += adv[e][k];
      ++count;
    }
  }
  if (!normalize || count == 0) return adv;
  const double mean = sum / double(count);
  double ss = 0.0;
  for (const auto& a : adv)
    for (double x : a) ss += (x - mean) * (x - mean);
  const double sd = std::sqrt(ss / double(count));
  const double inv = sd > 1e-12 ? 1.0 / sd : 1.0;
  for (auto& a : adv)
    for (double& x : a) x = (x - mean) * inv;
  return adv;
}

double clipped_objective(double ratio, double advantage, double eps) {
  const double clipped = std::clamp(ratio, 1.0 - eps, 1.0 + eps);
  return std::min(ratio * advantage, clipped * advantage);
}

std::vector<std::vector<double>> policy_ratios(const nn::RecurrentNet& policy,
                                               const std::vector<EpisodeTrajectory>& batch) {
  std::vector<std::vector<double>> out(batch.size());
  for (std::size_t e = 0; e < batch.size(); ++e) {
    if (batch[e].steps.empty()) continue;
    const auto tr = policy.forward_sequence(observation_matrix(batch[e]));
    for (std::size_t k = 0; k < batch[e].steps.size(); ++k) {
      const auto col = tr.out.col(static_cast<Eigen::Index>(k));
      const nn::MultiCategorical dist({col.data(), static_cast<std::size_t>(col.size())});
      out[e].push_back(std::exp(dist.log_prob(batch[e].steps[k].action) - batch[e].steps[k].log_prob));
    }
  }
  return out;
}

double mean_kl(const nn::RecurrentNet& policy, const std::vector<EpisodeTrajectory>& batch) {
  double total = 0.0;
  std::size_t count = 0;
  for (const auto& traj : batch) {
    if (traj.steps.empty()) continue;
    const auto tr = policy.forward_sequence(observation_matrix(traj));
    for (std::size_t k = 0; k < traj.steps.size(); ++k) {
      const auto col = tr.out.col(static_cast<Eigen::Index>(k));
      const nn::MultiCategorical now({col.data(), static_cast<std::size_t>(col.size())});
      const nn::MultiCategorical old(traj.steps[k].logits);
      total += nn::kl_divergence(old, now);
      ++count;
    }
  }
  return count ? total / double(count) : 0.0;
}

double adapt_clip(double eps, double kl, const PpoConfig& cfg) {
  if (kl > 1.5 * cfg.kl_target)
    eps /= 1.5;
  else if (kl < cfg.kl_target / 1.5)
    eps *= 1.1;
  return std::clamp(eps, cfg.clip_eps_min, cfg.clip_eps_max);
}

PpoLearner::PpoLearner(nn::RecurrentNet policy, nn::RecurrentNet value, PpoConfig cfg,
                       RewardConfig reward)
    : policy_(std::move(policy)),
      value_(std::move(value)),
      cfg_(cfg),
      reward_(reward),
      policy_opt_(policy_.num_params()),
      value_opt_(value_.num_params()),
      clip_eps_(cfg.clip_eps_init) {
  cfg_.validate();
  reward_.validate();
  if (policy_.shape().out_dim != nn::MultiCategorical::kLogits || value_.shape().out_dim != 1)
    throw Error(ErrorCode::kConfig, "ppo: network output sizes do not match the action space");
}

UpdateStats PpoLearner::update(const std::vector<EpisodeTrajectory>& batch_in, Rng& rng) {
  UpdateStats stats;
  stats.clip_eps = clip_eps_;

  std::vector<EpisodeTrajectory> batch;
  for (const auto& t : batch_in)
    if (!t.steps.empty()) batch.push_back(t);
  if (batch.empty()) {
    stats.aborted = true;
    stats.abort_reason = "batch has no usable trajectories";
    return stats;
  }

  std::vector<std::vector<double>> returns;
  std::vector<Eigen::MatrixXd> obs;
  for (const auto& t : batch) {
    returns.push_back(dual_discount_returns(t, reward_));
    obs.push_back(observation_matrix(t));
  }
  const auto adv = advantages(batch, returns, cfg_.normalize_advantages);

  const std::vector<double> policy_backup(policy_.params().begin(), policy_.params().end());
  const std::vector<double> value_backup(value_.params().begin(), value_.params().end());
  auto restore = [&](const std::string& why) {
    std::copy(policy_backup.begin(), policy_backup.end(), policy_.params().begin());
    std::copy(value_backup.begin(), value_backup.end(), value_.params().begin());
    stats.aborted = true;
    stats.abort_reason = why;
    stats.kl = 0.0;
    stats.clip_eps = clip_eps_;
    return stats;
  };

  std::vector<std::size_t> order(batch.size());
  std::iota(order.begin(), order.end(), 0);
  const std::size_t n_mb = std::min<std::size_t>(cfg_.minibatches, batch.size());
  std::vector<double> gp(policy_.num_params());
  std::vector<double> gv(value_.num_params());
  std::array<double, nn::MultiCategorical::kLogits> glp{};

  std::vector<double> policy_prev(policy_.num_params());
  double kl = 0.0;
  const int max_epochs = cfg_.epochs_per_batch + cfg_.max_extra_epochs;
  for (int epoch = 0; epoch < max_epochs; ++epoch) {
    if (epoch >= cfg_.epochs_per_batch && kl >= cfg_.kl_floor) break;
    std::copy(policy_.params().begin(), policy_.params().end(), policy_prev.begin());
    if (n_mb > 1) std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t mb = 0; mb < n_mb; ++mb) {
      const std::size_t lo = mb * order.size() / n_mb;
      const std::size_t hi = (mb + 1) * order.size() / n_mb;
      std::size_t steps = 0;
      for (std::size_t j = lo; j < hi; ++j) steps += batch[order[j]].steps.size();
      const double inv_n = 1.0 / double(steps);

      std::fill(gp.begin(), gp.end(), 0.0);
      std::fill(gv.begin(), gv.end(), 0.0);
      double policy_loss = 0.0;
      double value_loss = 0.0;
      for (std::size_t j = lo; j < hi; ++j) {
        const std::size_t e = order[j];
        const auto& traj = batch[e];
        const auto T = static_cast<Eigen::Index>(traj.steps.size());

        const nn::SequenceTrace tp = policy_.forward_sequence(obs[e]);
        Eigen::MatrixXd d_logits = Eigen::MatrixXd::Zero(nn::MultiCategorical::kLogits, T);
        for (Eigen::Index k = 0; k < T; ++k) {
          const auto& rec = traj.steps[static_cast<std::size_t>(k)];
          const auto col = tp.out.col(k);
          const nn::MultiCategorical dist({col.data(), static_cast<std::size_t>(col.size())});
          const double a = adv[e][static_cast<std::size_t>(k)];
          const double ratio = std::exp(dist.log_prob(rec.action) - rec.log_prob);
          const double objective = clipped_objective(ratio, a, clip_eps_);
          policy_loss -= objective * inv_n;
          // The surrogate only carries gradient where the unclipped term is the minimum.
          if (ratio * a <= objective) {
            dist.grad_log_prob(rec.action, glp);
            d_logits.col(k) -= (ratio * a * inv_n) *
                               Eigen::Map<const Eigen::VectorXd>(glp.data(), glp.size());
          }
          if (cfg_.entropy_coef > 0.0) {
            policy_loss -= cfg_.entropy_coef * dist.entropy() * inv_n;
            for (int i = 0; i < kNumThrusters; ++i) {
              double h_i = 0.0;
              for (int c = 0; c < 2; ++c) h_i -= dist.prob(i, c) * dist.log_prob(i, c);
              for (int c = 0; c < 2; ++c) {
                const double dh = -dist.prob(i, c) * (dist.log_prob(i, c) + h_i);
                d_logits(2 * i + c, k) -= cfg_.entropy_coef * dh * inv_n;
              }
            }
          }
        }
        policy_.backward(tp, d_logits, gp);

        const nn::SequenceTrace tv = value_.forward_sequence(obs[e]);
        Eigen::MatrixXd d_value(1, T);
        for (Eigen::Index k = 0; k < T; ++k) {
          const double diff = tv.out(0, k) - returns[e][static_cast<std::size_t>(k)];
          value_loss += diff * diff * inv_n;
          d_value(0, k) = 2.0 * diff * inv_n;
        }
        value_.backward(tv, d_value, gv);
      }

      if (!std::isfinite(policy_loss) || !std::isfinite(value_loss) || !all_finite(gp) ||
          !all_finite(gv))
        return restore("non-finite loss or gradient at epoch " + std::to_string(epoch));
      if (epoch == 0 && mb == 0) {
        stats.policy_loss = policy_loss;
        stats.value_loss = value_loss;
      }
      stats.final_value_loss = value_loss;
      policy_opt_.step(policy_.params(), gp, cfg_.lr_policy);
      value_opt_.step(value_.params(), gv, cfg_.lr_value);
    }
    if (!all_finite(policy_.params()) || !all_finite(value_.params()))
      return restore("non-finite parameters at epoch " + std::to_string(epoch));
    const double epoch_kl = mean_kl(policy_, batch);
    if (!std::isfinite(epoch_kl)) return restore("non-finite KL at epoch " + std::to_string(epoch));
    if (epoch_kl > cfg_.kl_ceiling) {
      std::copy(policy_prev.begin(), policy_prev.end(), policy_.params().begin());
      stats.ceiling_hit = true;
      break;
    }
    kl = epoch_kl;
    stats.epochs = epoch + 1;
  }

  stats.kl = kl;
  clip_eps_ = adapt_clip(clip_eps_, stats.kl, cfg_);
  stats.clip_eps = clip_eps_;
  return stats;
}

LearningCurveRow batch_statistics(const std::vector<EpisodeTrajectory>& batch,
                                  const RewardConfig& reward) {
  LearningCurveRow row;
  std::vector<double> rewards, misses, steps;
  int hits = 0;
  for (const auto& t : batch) {
    rewards.push_back(t.total_reward(reward));
    misses.push_back(t.miss_distance);
    steps.push_back(double(t.steps.size()));
    if (!t.steps.empty() && t.miss_distance < reward.hit_radius) ++hits;
  }
  if (batch.empty()) return row;
  row.mean_reward = mean_of(rewards);
  row.sd_reward = row.mean_reward - stddev_of(rewards);
  row.min_reward = *std::min_element(rewards.begin(), rewards.end());
  row.max_reward = *std::max_element(rewards.begin(), rewards.end());
  row.mean_steps = mean_of(steps);
  row.hit_rate = double(hits) / double(batch.size());
  row.mean_miss = mean_of(misses);
  row.sd_miss = stddev_of(misses);
  return row;
}

std::pair<nn::RecurrentNet, nn::RecurrentNet> make_networks(const PpoConfig& cfg,
                                                            std::uint64_t seed) {
  nn::RecurrentNet policy(nn::policy_shape());
  nn::RecurrentNet value(nn::value_shape());
  Rng rng = keyed_rng(seed, kInitStreamKey, 0);
  policy.initialize(rng);
  value.initialize(rng);
  for (int i = 0; i < 4; ++i) {
    policy.input_scale()[i] = cfg.obs_scale[i];
    value.input_scale()[i] = cfg.obs_scale[i];
  }
  return {std::move(policy), std::move(value)};
}

TrainResult train(const TrainConfig& cfg, const BatchCallback& on_batch) {
  cfg.env.validate();
  cfg.ppo.validate();
  cfg.reward.validate();
  auto [policy, value] = make_networks(cfg.ppo, cfg.seed);
  PpoLearner learner(std::move(policy), std::move(value), cfg.ppo, cfg.reward);
  Rng update_rng = keyed_rng(cfg.seed, kUpdateStreamKey, 0);

  auto snapshot = [&](std::uint64_t batches_done) {
    nn::Checkpoint ck{learner.policy(), learner.value(), nn::rng_to_string(update_rng),
                      learner.clip_eps(), batches_done, {}};
    ck.metadata = "{\"seed\":" + std::to_string(cfg.seed) +
                  ",\"batches_done\":" + std::to_string(batches_done) + "}";
    return ck;
  };

  TrainResult result;
  double best_rate = -1.0;
  for (int b = 0; b < cfg.ppo.total_batches; ++b) {
    const auto batch = collect_rollouts(learner.policy(), learner.value(), cfg.env, cfg.reward,
                                        cfg.ppo.episodes_per_batch, cfg.seed,
                                        static_cast<std::uint64_t>(b), cfg.ppo.threads);
    LearningCurveRow row = batch_statistics(batch, cfg.reward);
    row.batch = b;
    // The row describes the policy that produced the batch, so the best
    // checkpoint is taken before the update.
    if (row.hit_rate >= best_rate) {
      best_rate = row.hit_rate;
      result.best = snapshot(static_cast<std::uint64_t>(b));
      result.best_batch = b;
    }
    row.update = learner.update(batch, update_rng);
    result.curve.push_back(row);
    if (on_batch) on_batch(row);
  }
  result.last = snapshot(static_cast<std::uint64_t>(cfg.ppo.total_batches));
  return result;
}

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

void write_learning_curve_csv(const std::string& path, const std::vector<LearningCurveRow>& rows) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw Error(ErrorCode::kIo, "cannot write " + path);
  os << "batch,mean_reward,sd_reward,min_reward,max_reward,mean_steps,hit_rate,mean_miss,sd_miss\n";
  for (const auto& r : rows)
    os << r.batch << ',' << fmt(r.mean_reward) << ',' << fmt(r.sd_reward) << ','
       << fmt(r.min_reward) << ',' << fmt(r.max_reward) << ',' << fmt(r.mean_steps) << ','
       << fmt(r.hit_rate) << ',' << fmt(r.mean_miss) << ',' << fmt(r.sd_miss) << '\n';
  if (!os) throw Error(ErrorCode::kIo, "failed writing " + path);
}

void write_update_stats_csv(const std::string& path, const std::vector<LearningCurveRow>& rows) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw Error(ErrorCode::kIo, "cannot write " + path);
  os << "batch,kl,clip_eps,policy_loss,value_loss,final_value_loss,epochs,ceiling_hit,aborted\n";
  for (const auto& r : rows)
    os << r.batch << ',' << fmt(r.update.kl) << ',' << fmt(r.update.clip_eps) << ','
       << fmt(r.update.policy_loss) << ',' << fmt(r.update.value_loss) << ','
       << fmt(r.update.final_value_loss) << ',' << r.update.epochs << ','
       << (r.update.ceiling_hit ? 1 : 0) << ',' << (r.update.aborted ? 1 : 0) << '\n';
  if (!os) throw Error(ErrorCode::kIo, "failed writing " + path);
}

}  // namespace homing::ppo
