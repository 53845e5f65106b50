// homing_cli: train, evaluate, compare and dump trajectories through libhoming.
#include "homing/homing.h"

#include <CLI11.hpp>

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace {

struct CommonOptions {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  std::optional<std::string> out;
  std::optional<std::string> preset;
};

struct ConfigDeleter {
  void operator()(hg_config* c) const { hg_config_free(c); }
};
struct ReportDeleter {
  void operator()(hg_report* r) const { hg_report_free(r); }
};
struct StringDeleter {
  void operator()(char* s) const { hg_string_free(s); }
};
using ConfigPtr = std::unique_ptr<hg_config, ConfigDeleter>;
using ReportPtr = std::unique_ptr<hg_report, ReportDeleter>;
using StringPtr = std::unique_ptr<char, StringDeleter>;

// Thrown after the message has been printed; carries the exit status.
struct Failure {
  int status;
};

void check(hg_status st, const char* what) {
  if (st == HG_OK) return;
  std::fprintf(stderr, "error: %s: %s (%s)\n", what, hg_last_error_message(), hg_status_name(st));
  throw Failure{static_cast<int>(st)};
}

void add_common(CLI::App* cmd, CommonOptions& o) {
  cmd->add_option("--config", o.config, "JSON run config (defaults if omitted)");
  cmd->add_option("--seed", o.seed, "master seed");
  cmd->add_option("--threads", o.threads, "worker threads (1 is bitwise reproducible)")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--out", o.out, "output directory");
  cmd->add_option("--preset", o.preset, "scenario preset")
      ->check(CLI::IsMember({"table5", "table6", "table7", "table8", "zero-error", "extended-ic"}));
}

ConfigPtr load_config(const CommonOptions& o) {
  hg_config* raw = nullptr;
  check(hg_config_load(o.config.empty() ? nullptr : o.config.c_str(), &raw), "loading config");
  ConfigPtr cfg(raw);
  if (o.preset) check(hg_config_set_preset(cfg.get(), o.preset->c_str()), "--preset");
  if (o.seed) check(hg_config_set_seed(cfg.get(), *o.seed), "--seed");
  if (o.threads) check(hg_config_set_threads(cfg.get(), *o.threads), "--threads");
  if (o.out) check(hg_config_set_output_dir(cfg.get(), o.out->c_str()), "--out");
  return cfg;
}

std::string write_provenance(const hg_config* cfg, const std::string& name) {
  char* path = nullptr;
  check(hg_config_write_provenance(cfg, name.c_str(), &path), "writing provenance");
  StringPtr owned(path);
  return path;
}

void print_progress(const hg_batch_stats* s, void*) {
  std::printf("batch %5d  reward %9.4f  hit %.3f  miss %9.3f  steps %6.1f  kl %.5f  eps %.4f%s\n",
              s->batch, s->mean_reward, s->hit_rate, s->mean_miss, s->mean_steps, s->kl,
              s->clip_eps, s->aborted ? "  (update aborted)" : "");
  std::fflush(stdout);
}

int cmd_train(const CommonOptions& o, std::optional<int> batches, bool quiet) {
  ConfigPtr cfg = load_config(o);
  if (batches) check(hg_config_set_total_batches(cfg.get(), *batches), "--batches");
  const std::string prov = write_provenance(cfg.get(), "resolved_config.json");
  std::printf("resolved config: %s\n", prov.c_str());
  check(hg_train(cfg.get(), quiet ? nullptr : print_progress, nullptr), "training");
  const char* dir = nullptr;
  check(hg_config_get_output_dir(cfg.get(), &dir), "output dir");
  std::printf("wrote %s/learning_curve.csv, update_stats.csv, policy_best.ckpt, policy_last.ckpt\n",
              dir);
  return 0;
}

int cmd_eval(const CommonOptions& o, std::optional<int> episodes,
             std::optional<std::string> guidance, std::optional<std::string> checkpoint) {
  ConfigPtr cfg = load_config(o);
  if (episodes) check(hg_config_set_episodes(cfg.get(), *episodes), "--episodes");
  if (guidance) check(hg_config_set_guidance(cfg.get(), guidance->c_str()), "--guidance");
  if (checkpoint) check(hg_config_set_checkpoint(cfg.get(), checkpoint->c_str()), "--checkpoint");

  hg_report* raw = nullptr;
  check(hg_run_campaign(cfg.get(), nullptr, &raw), "campaign");
  ReportPtr report(raw);

  const char* dir = nullptr;
  check(hg_config_get_output_dir(cfg.get(), &dir), "output dir");
  char* stem_raw = nullptr;
  check(hg_report_write(report.get(), dir, &stem_raw), "writing report");
  StringPtr stem(stem_raw);
  const std::string stem_path = stem.get();
  const std::string base = stem_path.substr(stem_path.find_last_of('/') + 1);
  write_provenance(cfg.get(), "provenance/" + base + ".json");

  hg_report_summary s{};
  check(hg_report_summary_get(report.get(), &s), "summary");
  const char* g = nullptr;
  const char* p = nullptr;
  check(hg_report_labels(report.get(), &g, &p), "labels");
  std::printf("%-8s %-12s %8s %12s %12s %10s %10s\n", "guidance", "preset", "episodes",
              "<100cm(%)", "<50cm(%)", "fuel_mu", "fuel_sd");
  std::printf("%-8s %-12s %8d %12.1f %12.1f %10.2f %10.2f\n", g, p, s.n_episodes,
              s.pct_miss_lt_100cm, s.pct_miss_lt_50cm, s.fuel_mean, s.fuel_sd);
  std::printf("95%% CI <100cm [%.1f, %.1f]  <50cm [%.1f, %.1f]  failed episodes %d\n",
              s.ci95_lt_100cm_lo, s.ci95_lt_100cm_hi, s.ci95_lt_50cm_lo, s.ci95_lt_50cm_hi,
              s.failed_episodes);
  std::printf("wrote %s.json, %s.csv\n", stem_path.c_str(), stem_path.c_str());
  return 0;
}

int cmd_compare(const std::vector<std::string>& paths, const std::optional<std::string>& out) {
  if (paths.size() < 2) {
    std::fprintf(stderr, "error: compare needs at least two report files\n");
    return HG_ERR_USAGE;
  }
  std::vector<ReportPtr> owned;
  std::vector<const hg_report*> reports;
  for (const auto& path : paths) {
    hg_report* raw = nullptr;
    check(hg_report_load(path.c_str(), &raw), "loading report");
    owned.emplace_back(raw);
    reports.push_back(raw);
  }
  char *text = nullptr, *csv = nullptr, *warnings = nullptr;
  check(hg_compare(reports.data(), reports.size(), &text, &csv, &warnings), "compare");
  StringPtr t(text), c(csv), w(warnings);
  if (*warnings) std::fprintf(stderr, "warning: %s", warnings);
  std::printf("%s", text);
  if (out) {
    std::ofstream os(*out, std::ios::binary);
    os << csv;
    if (!os.flush()) {
      std::fprintf(stderr, "error: cannot write '%s'\n", out->c_str());
      return HG_ERR_IO;
    }
    std::printf("wrote %s\n", out->c_str());
  }
  return 0;
}

int cmd_dump(const CommonOptions& o, std::optional<std::string> guidance,
             std::optional<std::string> checkpoint, std::uint64_t episode) {
  ConfigPtr cfg = load_config(o);
  if (guidance) check(hg_config_set_guidance(cfg.get(), guidance->c_str()), "--guidance");
  if (checkpoint) check(hg_config_set_checkpoint(cfg.get(), checkpoint->c_str()), "--checkpoint");
  std::uint64_t seed = 0;
  check(hg_config_get_seed(cfg.get(), &seed), "seed");
  const char *dir = nullptr, *g = nullptr, *p = nullptr;
  check(hg_config_get_output_dir(cfg.get(), &dir), "output dir");
  check(hg_config_get_guidance(cfg.get(), &g), "guidance");
  check(hg_config_get_preset(cfg.get(), &p), "preset");

  // Episode k of a campaign with this seed uses stream seed + k.
  const std::uint64_t episode_seed = seed + episode;
  const std::string base = std::string("trajectory_") + g + "_" + p + "_s" + std::to_string(seed) +
                           "_e" + std::to_string(episode);
  write_provenance(cfg.get(), "provenance/" + base + ".json");
  const std::string path = std::string(dir) + "/" + base + ".csv";
  int rows = 0;
  check(hg_dump_trajectory(cfg.get(), episode_seed, nullptr, path.c_str(), &rows), "trajectory");
  std::printf("wrote %s (%d rows)\n", path.c_str(), rows);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Angle-only terminal homing: train, evaluate, compare, dump"};
  app.set_version_flag("--version", std::string(hg_version()));
  app.require_subcommand(1);

  CommonOptions train_o, eval_o, dump_o;
  std::optional<int> batches, episodes;
  std::optional<std::string> eval_guidance, eval_ckpt, dump_guidance, dump_ckpt, compare_out;
  std::vector<std::string> report_paths;
  std::uint64_t dump_episode = 0;
  bool quiet = false;

  CLI::App* train = app.add_subcommand("train", "train a policy with recurrent PPO");
  add_common(train, train_o);
  train->add_option("--batches", batches, "override ppo.total_batches")->check(CLI::PositiveNumber);
  train->add_flag("--quiet", quiet, "suppress per-batch progress");

  const auto guidance_check = CLI::IsMember({"rl", "zem", "pn"});
  CLI::App* eval = app.add_subcommand("eval", "run a Monte Carlo campaign");
  add_common(eval, eval_o);
  eval->add_option("--episodes", episodes, "number of episodes")->check(CLI::PositiveNumber);
  eval->add_option("--guidance", eval_guidance, "guidance law")->check(guidance_check);
  eval->add_option("--checkpoint", eval_ckpt, "policy checkpoint for rl");

  CLI::App* compare = app.add_subcommand("compare", "tabulate campaign reports");
  compare->add_option("reports", report_paths, "report JSON files")->required();
  compare->add_option("--out", compare_out, "write the table as CSV to this file");

  CLI::App* dump = app.add_subcommand("dump", "write one episode's trajectory CSV");
  add_common(dump, dump_o);
  dump->add_option("--guidance", dump_guidance, "guidance law")->check(guidance_check);
  dump->add_option("--checkpoint", dump_ckpt, "policy checkpoint for rl");
  dump->add_option("--episode", dump_episode, "episode index within the seeded campaign");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : HG_ERR_USAGE;
  }

  try {
    if (*train) return cmd_train(train_o, batches, quiet);
    if (*eval) return cmd_eval(eval_o, episodes, eval_guidance, eval_ckpt);
    if (*compare) return cmd_compare(report_paths, compare_out);
    if (*dump) return cmd_dump(dump_o, dump_guidance, dump_ckpt, dump_episode);
  } catch (const Failure& f) {
    return f.status;
  }
  return HG_ERR_USAGE;
}
