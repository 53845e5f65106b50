#include "homing/homing.h"

#include "homing/common/error.hpp"
#include "homing/config/run_config.hpp"
#include "homing/eval/campaign.hpp"
#include "homing/nn/checkpoint.hpp"
#include "homing/ppo/ppo.hpp"

#include <cstdlib>
#include <cstring>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <memory>
#include <new>
#include <optional>
#include <string>
#include <vector>

using namespace homing;

struct hg_config {
  std::string text;
  std::string source;
  config::Overrides overrides;
  config::RunConfig resolved;
};

struct hg_policy {
  nn::Checkpoint checkpoint;
};

struct hg_report {
  eval::CampaignReport report;
};

struct hg_engagement {
  std::unique_ptr<env::Engagement> engagement;
};

namespace {

thread_local std::string g_last_error;

hg_status to_status(ErrorCode code) { return static_cast<hg_status>(static_cast<int>(code)); }

template <typename F>
hg_status guarded(F&& f) {
  try {
    f();
    return HG_OK;
  } catch (const Error& e) {
    g_last_error = e.what();
    return to_status(e.code());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return HG_ERR_INTERNAL;
  } catch (const std::filesystem::filesystem_error& e) {
    g_last_error = e.what();
    return HG_ERR_IO;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return HG_ERR_INTERNAL;
  } catch (...) {
    g_last_error = "unknown error";
    return HG_ERR_INTERNAL;
  }
}

void require(bool ok, const char* what) {
  if (!ok) throw Error(ErrorCode::kInvalidArgument, what);
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

void resolve(hg_config& cfg) {
  cfg.resolved = config::parse_run_config(cfg.text, cfg.source, cfg.overrides);
}

// Applies an override, restoring the previous one if the result is invalid.
template <typename Field, typename Value>
void set_override(hg_config* cfg, Field config::Overrides::*field, Value value) {
  require(cfg != nullptr, "config is null");
  const auto saved = cfg->overrides;
  cfg->overrides.*field = value;
  try {
    resolve(*cfg);
  } catch (...) {
    cfg->overrides = saved;
    throw;
  }
}

const nn::RecurrentNet* policy_net(const hg_policy* p) { return p ? &p->checkpoint.policy : nullptr; }

}  // namespace

extern "C" {

const char* hg_version(void) { return HOMING_VERSION; }

const char* hg_status_name(hg_status status) {
  switch (status) {
    case HG_OK: return "ok";
    case HG_ERR_INVALID_ARGUMENT: return "invalid_argument";
    case HG_ERR_CONFIG: return "config";
    case HG_ERR_IO: return "io";
    case HG_ERR_INVALID_ATTITUDE: return "invalid_attitude";
    case HG_ERR_DEGENERATE_GEOMETRY: return "degenerate_geometry";
    case HG_ERR_NO_COLLISION_SOLUTION: return "no_collision_solution";
    case HG_ERR_TARGET_OPENING: return "target_opening";
    case HG_ERR_NUMERIC: return "numeric";
    case HG_ERR_USAGE: return "usage";
    case HG_ERR_INTERNAL: return "internal";
  }
  return "unknown";
}

const char* hg_last_error_message(void) { return g_last_error.c_str(); }

void hg_string_free(char* s) { std::free(s); }

hg_status hg_config_load(const char* path, hg_config** out) {
  return guarded([&] {
    require(out != nullptr, "out is null");
    *out = nullptr;
    auto cfg = std::make_unique<hg_config>();
    if (path && *path) {
      std::ifstream is(path, std::ios::binary);
      if (!is) throw Error(ErrorCode::kIo, std::string("cannot open config file '") + path + "'");
      cfg->text.assign(std::istreambuf_iterator<char>(is), std::istreambuf_iterator<char>());
      cfg->source = path;
    } else {
      cfg->text = "{}";
      cfg->source = "<defaults>";
    }
    resolve(*cfg);
    *out = cfg.release();
  });
}

hg_status hg_config_parse(const char* json_text, hg_config** out) {
  return guarded([&] {
    require(out != nullptr && json_text != nullptr, "null argument");
    *out = nullptr;
    auto cfg = std::make_unique<hg_config>();
    cfg->text = json_text;
    cfg->source = "<string>";
    resolve(*cfg);
    *out = cfg.release();
  });
}

void hg_config_free(hg_config* cfg) { delete cfg; }

hg_status hg_config_set_preset(hg_config* cfg, const char* preset) {
  return guarded([&] {
    require(preset != nullptr, "preset is null");
    set_override(cfg, &config::Overrides::preset, std::string(preset));
  });
}

hg_status hg_config_set_seed(hg_config* cfg, uint64_t seed) {
  return guarded([&] { set_override(cfg, &config::Overrides::seed, std::uint64_t{seed}); });
}

hg_status hg_config_set_threads(hg_config* cfg, int threads) {
  return guarded([&] {
    require(threads >= 1, "threads must be >= 1");
    set_override(cfg, &config::Overrides::threads, threads);
  });
}

hg_status hg_config_set_output_dir(hg_config* cfg, const char* dir) {
  return guarded([&] {
    require(dir != nullptr && *dir, "output dir is empty");
    set_override(cfg, &config::Overrides::output_dir, std::string(dir));
  });
}

hg_status hg_config_set_episodes(hg_config* cfg, int n) {
  return guarded([&] {
    require(n >= 1, "episode count must be >= 1");
    set_override(cfg, &config::Overrides::episodes, n);
  });
}

hg_status hg_config_set_guidance(hg_config* cfg, const char* guidance) {
  return guarded([&] {
    require(guidance != nullptr, "guidance is null");
    eval::parse_guidance(guidance);
    set_override(cfg, &config::Overrides::guidance, std::string(guidance));
  });
}

hg_status hg_config_set_checkpoint(hg_config* cfg, const char* path) {
  return guarded([&] {
    require(path != nullptr, "checkpoint path is null");
    set_override(cfg, &config::Overrides::checkpoint, std::string(path));
  });
}

hg_status hg_config_set_total_batches(hg_config* cfg, int batches) {
  return guarded([&] {
    require(batches >= 1, "total_batches must be >= 1");
    set_override(cfg, &config::Overrides::total_batches, batches);
  });
}

hg_status hg_config_get_seed(const hg_config* cfg, uint64_t* seed) {
  return guarded([&] {
    require(cfg && seed, "null argument");
    *seed = cfg->resolved.seed;
  });
}

hg_status hg_config_get_output_dir(const hg_config* cfg, const char** dir) {
  return guarded([&] {
    require(cfg && dir, "null argument");
    *dir = cfg->resolved.output_dir.c_str();
  });
}

hg_status hg_config_get_guidance(const hg_config* cfg, const char** guidance) {
  return guarded([&] {
    require(cfg && guidance, "null argument");
    *guidance = cfg->resolved.campaign.guidance.c_str();
  });
}

hg_status hg_config_get_preset(const hg_config* cfg, const char** preset) {
  return guarded([&] {
    require(cfg && preset, "null argument");
    *preset = cfg->resolved.preset.c_str();
  });
}

hg_status hg_config_get_checkpoint(const hg_config* cfg, const char** path) {
  return guarded([&] {
    require(cfg && path, "null argument");
    *path = cfg->resolved.campaign.checkpoint.c_str();
  });
}

hg_status hg_config_resolved_json(const hg_config* cfg, char** json_out) {
  return guarded([&] {
    require(cfg && json_out, "null argument");
    *json_out = dup_string(config::resolved_json(cfg->resolved));
  });
}

hg_status hg_config_write_provenance(const hg_config* cfg, const char* name, char** path_out) {
  return guarded([&] {
    require(cfg != nullptr, "config is null");
    const std::string path = config::write_provenance(
        cfg->resolved, name && *name ? name : "resolved_config.json");
    if (path_out) *path_out = dup_string(path);
  });
}

hg_status hg_train(const hg_config* cfg, hg_batch_callback callback, void* user) {
  return guarded([&] {
    require(cfg != nullptr, "config is null");
    const auto& rc = cfg->resolved;
    std::filesystem::create_directories(rc.output_dir);
    const std::filesystem::path dir(rc.output_dir);
    ppo::BatchCallback cb;
    if (callback)
      cb = [&](const ppo::LearningCurveRow& r) {
        hg_batch_stats s{r.batch,         r.mean_reward,       r.sd_reward,        r.min_reward,
                         r.max_reward,    r.mean_steps,        r.hit_rate,         r.mean_miss,
                         r.sd_miss,       r.update.kl,         r.update.clip_eps,  r.update.policy_loss,
                         r.update.value_loss, r.update.aborted ? 1 : 0};
        callback(&s, user);
      };
    const ppo::TrainResult res = ppo::train(rc.train_config(), cb);
    ppo::write_learning_curve_csv((dir / "learning_curve.csv").string(), res.curve);
    ppo::write_update_stats_csv((dir / "update_stats.csv").string(), res.curve);
    nn::save_checkpoint((dir / "policy_best.ckpt").string(), res.best);
    nn::save_checkpoint((dir / "policy_last.ckpt").string(), res.last);
  });
}

hg_status hg_policy_load(const char* path, hg_policy** out) {
  return guarded([&] {
    require(path != nullptr && out != nullptr, "null argument");
    *out = nullptr;
    auto p = std::make_unique<hg_policy>();
    p->checkpoint = nn::load_checkpoint(path);
    *out = p.release();
  });
}

void hg_policy_free(hg_policy* policy) { delete policy; }

hg_status hg_run_campaign(const hg_config* cfg, const hg_policy* policy, hg_report** out) {
  return guarded([&] {
    require(cfg != nullptr && out != nullptr, "null argument");
    *out = nullptr;
    auto r = std::make_unique<hg_report>();
    r->report = eval::run_campaign(cfg->resolved.campaign_config(), policy_net(policy));
    *out = r.release();
  });
}

hg_status hg_report_load(const char* path, hg_report** out) {
  return guarded([&] {
    require(path != nullptr && out != nullptr, "null argument");
    *out = nullptr;
    auto r = std::make_unique<hg_report>();
    r->report = eval::read_report_json(path);
    *out = r.release();
  });
}

void hg_report_free(hg_report* report) { delete report; }

hg_status hg_report_summary_get(const hg_report* report, hg_report_summary* out) {
  return guarded([&] {
    require(report && out, "null argument");
    const auto& r = report->report;
    *out = hg_report_summary{r.n_episodes,      r.failed_episodes, r.pct_miss_lt_100cm,
                             r.pct_miss_lt_50cm, r.ci_100cm.lo,     r.ci_100cm.hi,
                             r.ci_50cm.lo,       r.ci_50cm.hi,      r.fuel_mean,
                             r.fuel_sd,          r.miss_mean,       r.miss_median,
                             r.seed};
  });
}

hg_status hg_report_labels(const hg_report* report, const char** guidance, const char** preset) {
  return guarded([&] {
    require(report != nullptr, "report is null");
    if (guidance) *guidance = report->report.guidance.c_str();
    if (preset) *preset = report->report.preset.c_str();
  });
}

hg_status hg_report_write(const hg_report* report, const char* dir, char** stem_out) {
  return guarded([&] {
    require(report != nullptr && dir != nullptr, "null argument");
    const auto& r = report->report;
    std::filesystem::create_directories(dir);
    const std::string stem =
        (std::filesystem::path(dir) / eval::report_stem(r.guidance, r.preset, r.seed)).string();
    eval::write_report_json(stem + ".json", r);
    eval::write_report_csv(stem + ".csv", r);
    if (stem_out) *stem_out = dup_string(stem);
  });
}

hg_status hg_compare(const hg_report* const* reports, size_t n, char** text_out, char** csv_out,
                     char** warnings_out) {
  return guarded([&] {
    require(reports != nullptr, "reports is null");
    std::vector<eval::CampaignReport> list;
    for (size_t i = 0; i < n; ++i) {
      require(reports[i] != nullptr, "report is null");
      list.push_back(reports[i]->report);
    }
    const eval::Comparison cmp = eval::compare(list);
    std::string warnings;
    for (const auto& w : cmp.warnings) warnings += w + "\n";
    // Allocate everything before handing out ownership.
    std::unique_ptr<char, decltype(&std::free)> text(dup_string(eval::comparison_table_text(cmp)),
                                                     &std::free);
    std::unique_ptr<char, decltype(&std::free)> csv(dup_string(eval::comparison_table_csv(cmp)),
                                                    &std::free);
    std::unique_ptr<char, decltype(&std::free)> warn(dup_string(warnings), &std::free);
    if (text_out) *text_out = text.release();
    if (csv_out) *csv_out = csv.release();
    if (warnings_out) *warnings_out = warn.release();
  });
}

hg_status hg_dump_trajectory(const hg_config* cfg, uint64_t episode_seed, const hg_policy* policy,
                             const char* csv_path, int* rows_out) {
  return guarded([&] {
    require(cfg != nullptr && csv_path != nullptr, "null argument");
    const eval::CampaignConfig cc = cfg->resolved.campaign_config();
    std::optional<nn::Checkpoint> loaded;
    const nn::RecurrentNet* net = policy_net(policy);
    if (cc.guidance == eval::GuidanceKind::kRl && !net) {
      if (cc.checkpoint_path.empty() || !std::filesystem::exists(cc.checkpoint_path))
        throw Error(ErrorCode::kConfig, "checkpoint not found: '" + cc.checkpoint_path + "'");
      loaded = nn::load_checkpoint(cc.checkpoint_path);
      net = &loaded->policy;
    }
    auto agent = eval::make_agent(cc.guidance, net);
    env::EnvConfig env = cc.env;
    if (cc.fixed_worst_case) env.scenario = scenario::worst_case(env.scenario);
    const eval::Trajectory traj = eval::trajectory_dump(env, episode_seed, *agent);
    eval::write_trajectory_csv(csv_path, traj);
    if (rows_out) *rows_out = static_cast<int>(traj.rows.size());
  });
}

hg_status hg_engagement_create(const hg_config* cfg, uint64_t episode_seed, hg_engagement** out) {
  return guarded([&] {
    require(cfg != nullptr && out != nullptr, "null argument");
    *out = nullptr;
    auto e = std::make_unique<hg_engagement>();
    e->engagement = std::make_unique<env::Engagement>(cfg->resolved.env, episode_seed);
    *out = e.release();
  });
}

void hg_engagement_free(hg_engagement* eng) { delete eng; }

hg_status hg_engagement_observe(const hg_engagement* eng, double obs[4]) {
  return guarded([&] {
    require(eng != nullptr && obs != nullptr, "null argument");
    const auto a = eng->engagement->observation().as_array();
    for (int i = 0; i < 4; ++i) obs[i] = a[i];
  });
}

hg_status hg_engagement_zem_action(const hg_engagement* eng, uint8_t action[4]) {
  return guarded([&] {
    require(eng != nullptr && action != nullptr, "null argument");
    const auto& e = *eng->engagement;
    const auto a = guidance::ground_truth_action(guidance::Law::kZem, e.state(), e.config().missile);
    for (int i = 0; i < 4; ++i) action[i] = a[i];
  });
}

hg_status hg_engagement_step(hg_engagement* eng, const uint8_t action[4], int* done) {
  return guarded([&] {
    require(eng != nullptr && action != nullptr, "null argument");
    ThrusterAction a{};
    for (int i = 0; i < 4; ++i) {
      require(action[i] <= 1, "thruster commands must be 0 or 1");
      a[i] = action[i];
    }
    const auto r = eng->engagement->step(a);
    if (done) *done = r.done ? 1 : 0;
  });
}

hg_status hg_engagement_result(const hg_engagement* eng, double* miss_m, double* fuel_kg,
                               int* steps, const char** outcome) {
  return guarded([&] {
    require(eng != nullptr, "engagement is null");
    const auto& e = *eng->engagement;
    if (miss_m) *miss_m = e.miss_distance();
    if (fuel_kg) *fuel_kg = e.fuel_used();
    if (steps) *steps = e.steps();
    if (outcome) *outcome = env::outcome_name(e.outcome());
  });
}

}  // extern "C"
