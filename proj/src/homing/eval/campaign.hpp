// Monte Carlo campaigns over randomized engagements for any guidance law,
// report persistence, cross-report comparison and per-cycle trajectory dumps.
#pragma once

#include "homing/env/engagement.hpp"
#include "homing/guidance/guidance.hpp"
#include "homing/nn/network.hpp"

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace homing::eval {

enum class GuidanceKind { kRl, kZem, kPn };

const char* guidance_name(GuidanceKind kind);
GuidanceKind parse_guidance(const std::string& name);

// Closed-loop controller for one episode.
class Agent {
 public:
  virtual ~Agent() = default;
  virtual void reset() = 0;
  virtual ThrusterAction act(const env::Engagement& engagement) = 0;
};

// Full-state ZEM or PN, pulsed.
class GroundTruthAgent final : public Agent {
 public:
  explicit GroundTruthAgent(guidance::Law law) : law_(law) {}
  void reset() override {}
  ThrusterAction act(const env::Engagement& engagement) override;

 private:
  guidance::Law law_;
};

// Greedy recurrent policy acting on seeker observations only.
class PolicyAgent final : public Agent {
 public:
  explicit PolicyAgent(const nn::RecurrentNet& policy);
  void reset() override;
  ThrusterAction act(const env::Engagement& engagement) override;

 private:
  const nn::RecurrentNet& policy_;
  Eigen::VectorXd hidden_;
};

/// `policy` is required for kRl and ignored otherwise.
std::unique_ptr<Agent> make_agent(GuidanceKind kind, const nn::RecurrentNet* policy);

struct CampaignConfig {
  int n_episodes = 5000;
  GuidanceKind guidance = GuidanceKind::kZem;
  std::string checkpoint_path;  // rl only
  env::EnvConfig env;
  bool fixed_worst_case = false;
  std::string preset = "custom";
  std::uint64_t seed = 1;  // episode i uses seed + i
  int threads = 1;

  void validate() const;
};

struct EpisodeRecord {
  int index = 0;
  std::uint64_t seed = 0;
  env::Outcome outcome = env::Outcome::kMiss;
  double miss = 0.0;  // m; NaN when the episode could not be simulated
  double fuel = 0.0;  // kg
  int steps = 0;
  double time = 0.0;  // s
  std::string error;
};

struct RateInterval {
  double lo = 0.0;  // %
  double hi = 0.0;  // %
};

/// Wilson score interval (z = 1.96) for k successes in n trials, in percent.
RateInterval wilson_interval(int k, int n, double z = 1.96);

struct MissHistogram {
  std::vector<double> edges_cm;  // bin i covers [edges[i], edges[i+1]); last bin open
  std::vector<int> counts;       // edges_cm.size() bins
};

MissHistogram miss_histogram(const std::vector<EpisodeRecord>& records);

struct CampaignReport {
  std::string guidance;
  std::string preset;
  std::uint64_t seed = 0;
  int n_episodes = 0;
  double pct_miss_lt_100cm = 0.0;
  double pct_miss_lt_50cm = 0.0;
  RateInterval ci_100cm;
  RateInterval ci_50cm;
  double fuel_mean = 0.0;  // kg
  double fuel_sd = 0.0;    // kg, sample standard deviation; 0 for one episode
  double miss_mean = 0.0;  // m, over simulated episodes
  double miss_median = 0.0;
  int failed_episodes = 0;
  std::vector<std::pair<std::string, int>> outcome_counts;
  MissHistogram histogram;
  std::string version;
  std::vector<EpisodeRecord> records;
};

/// Aggregates per-episode records; independent of record order.
CampaignReport summarize(const std::vector<EpisodeRecord>& records);

/// Runs one episode to termination with `agent`.
EpisodeRecord run_episode(const env::EnvConfig& env_cfg, std::uint64_t episode_seed, Agent& agent);

// Runs cfg.n_episodes independent episodes. For rl, `policy` overrides the
// checkpoint; otherwise the checkpoint is loaded and a missing file is a
// configuration error.
CampaignReport run_campaign(const CampaignConfig& cfg, const nn::RecurrentNet* policy = nullptr);

void write_report_json(const std::string& path, const CampaignReport& report);
void write_report_csv(const std::string& path, const CampaignReport& report);
/// Throws kConfig naming the file when it is not a valid report.
CampaignReport read_report_json(const std::string& path);

/// report_<guidance>_<preset>_s<seed>
std::string report_stem(const std::string& guidance, const std::string& preset, std::uint64_t seed);

struct ComparisonRow {
  std::string guidance;
  std::string preset;
  int n_episodes = 0;
  double pct_miss_lt_100cm = 0.0;
  double pct_miss_lt_50cm = 0.0;
  double fuel_mean = 0.0;
  double fuel_sd = 0.0;
};

struct Comparison {
  std::vector<ComparisonRow> rows;
  std::vector<std::string> warnings;
};

/// Requires at least two reports. Warns when presets differ.
Comparison compare(const std::vector<CampaignReport>& reports);
std::string comparison_table_text(const Comparison& cmp);
std::string comparison_table_csv(const Comparison& cmp);

struct TrajectoryRow {
  int step = 0;
  double time = 0.0;
  Vec3 position = Vec3::Zero();  // missile relative to target
  double theta_u = 0.0, theta_v = 0.0;
  double d_theta_u = 0.0, d_theta_v = 0.0;
  ThrusterAction action{};
  double mass = 0.0;
  double theta_cv = 0.0;  // rad, missile velocity vs body x-axis
  double range = 0.0;
};

inline constexpr const char* kTrajectoryHeader =
    "step,time,x,y,z,theta_u,theta_v,d_theta_u,d_theta_v,thr1,thr2,thr3,thr4,mass,theta_cv,range";

struct Trajectory {
  std::vector<TrajectoryRow> rows;
  env::Outcome outcome = env::Outcome::kRunning;
  double miss = 0.0;
  double fuel = 0.0;
};

// One row per guidance cycle, recorded before the action of that cycle is
// applied. The seeker is evaluated for every law.
Trajectory trajectory_dump(const env::EnvConfig& env_cfg, std::uint64_t episode_seed, Agent& agent);

void write_trajectory_csv(const std::string& path, const Trajectory& traj);
std::vector<TrajectoryRow> read_trajectory_csv(const std::string& path);

}  // namespace homing::eval
