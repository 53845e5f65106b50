// Declarative run configuration: JSON document -> validated module configs.
//
// Precedence, lowest first: built-in defaults, scenario preset, config file,
// environment (HOMING_OUTPUT_DIR, HOMING_THREADS), command-line overrides.
#pragma once

#include "homing/env/engagement.hpp"
#include "homing/eval/campaign.hpp"
#include "homing/ppo/ppo.hpp"

#include <cstdint>
#include <optional>
#include <string>

namespace homing::config {

struct CampaignSection {
  int n_episodes = 5000;
  std::string guidance = "zem";
  std::string checkpoint;
  bool fixed_worst_case = false;
};

struct RunConfig {
  std::string preset = "table5";
  env::EnvConfig env;
  ppo::RewardConfig reward;
  ppo::PpoConfig ppo;
  CampaignSection campaign;
  std::uint64_t seed = 1;
  std::string output_dir = "out";
  int threads = 1;

  void validate() const;
  ppo::TrainConfig train_config() const;
  eval::CampaignConfig campaign_config() const;
};

struct Overrides {
  std::optional<std::string> preset;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  std::optional<std::string> output_dir;
  std::optional<int> episodes;
  std::optional<std::string> guidance;
  std::optional<std::string> checkpoint;
  std::optional<int> total_batches;
  bool use_environment = true;
};

// Parses and validates a config document. Syntax and schema errors throw
// kConfig with "<source>:<line>: ..." diagnostics; unknown keys are rejected.
RunConfig parse_run_config(const std::string& text, const std::string& source,
                           const Overrides& overrides = {});

/// Reads `path`; a missing file throws kIo naming the path. An empty path means defaults only.
RunConfig load_run_config(const std::string& path, const Overrides& overrides = {});

/// Fully resolved document (every field, defaults included); parses back to the same config.
std::string resolved_json(const RunConfig& cfg);

/// Writes <output_dir>/<name> with the resolved config; returns the path.
std::string write_provenance(const RunConfig& cfg, const std::string& name = "resolved_config.json");

}  // namespace homing::config
