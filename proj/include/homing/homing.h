/*
 * homing: C interface to the terminal-homing simulation, training and
 * evaluation library.
 *
 * Every function returns an hg_status. On failure a human-readable message
 * is available from hg_last_error_message() on the calling thread until the
 * next failing call. Objects are opaque and released with their *_free
 * function; strings returned through char** are released with
 * hg_string_free. Passing NULL to a *_free function is a no-op.
 */
#ifndef HOMING_HOMING_H
#define HOMING_HOMING_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define HG_API __declspec(dllexport)
#else
#define HG_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum hg_status {
  HG_OK = 0,
  HG_ERR_INVALID_ARGUMENT = 1,
  HG_ERR_CONFIG = 2,
  HG_ERR_IO = 3,
  HG_ERR_INVALID_ATTITUDE = 4,
  HG_ERR_DEGENERATE_GEOMETRY = 5,
  HG_ERR_NO_COLLISION_SOLUTION = 6,
  HG_ERR_TARGET_OPENING = 7,
  HG_ERR_NUMERIC = 8,
  HG_ERR_USAGE = 9,
  HG_ERR_INTERNAL = 10
} hg_status;

typedef struct hg_config hg_config;
typedef struct hg_policy hg_policy;
typedef struct hg_report hg_report;
typedef struct hg_engagement hg_engagement;

HG_API const char* hg_version(void);
HG_API const char* hg_status_name(hg_status status);
HG_API const char* hg_last_error_message(void);
HG_API void hg_string_free(char* s);

/* ---- configuration ---------------------------------------------------- */

/* Loads a JSON run config. NULL or "" yields the built-in defaults. The
 * HOMING_OUTPUT_DIR and HOMING_THREADS environment variables are applied. */
HG_API hg_status hg_config_load(const char* path, hg_config** out);
HG_API hg_status hg_config_parse(const char* json_text, hg_config** out);
HG_API void hg_config_free(hg_config* cfg);

/* Command-line style overrides; each re-resolves and re-validates the config. */
HG_API hg_status hg_config_set_preset(hg_config* cfg, const char* preset);
HG_API hg_status hg_config_set_seed(hg_config* cfg, uint64_t seed);
HG_API hg_status hg_config_set_threads(hg_config* cfg, int threads);
HG_API hg_status hg_config_set_output_dir(hg_config* cfg, const char* dir);
HG_API hg_status hg_config_set_episodes(hg_config* cfg, int n_episodes);
HG_API hg_status hg_config_set_guidance(hg_config* cfg, const char* guidance);
HG_API hg_status hg_config_set_checkpoint(hg_config* cfg, const char* path);
HG_API hg_status hg_config_set_total_batches(hg_config* cfg, int batches);

HG_API hg_status hg_config_get_seed(const hg_config* cfg, uint64_t* seed);
/* Borrowed pointer, valid until the config is modified or freed. */
HG_API hg_status hg_config_get_output_dir(const hg_config* cfg, const char** dir);
HG_API hg_status hg_config_get_guidance(const hg_config* cfg, const char** guidance);
HG_API hg_status hg_config_get_preset(const hg_config* cfg, const char** preset);
HG_API hg_status hg_config_get_checkpoint(const hg_config* cfg, const char** path);

/* Fully resolved config document (defaults included). */
HG_API hg_status hg_config_resolved_json(const hg_config* cfg, char** json_out);
/* Writes <output_dir>/<name> with the resolved config; path_out may be NULL. */
HG_API hg_status hg_config_write_provenance(const hg_config* cfg, const char* name,
                                            char** path_out);

/* ---- training --------------------------------------------------------- */

typedef struct hg_batch_stats {
  int batch;
  double mean_reward;
  double sd_reward; /* mean minus one standard deviation */
  double min_reward;
  double max_reward;
  double mean_steps;
  double hit_rate;
  double mean_miss;
  double sd_miss;
  double kl;
  double clip_eps;
  double policy_loss;
  double value_loss;
  int aborted;
} hg_batch_stats;

typedef void (*hg_batch_callback)(const hg_batch_stats* stats, void* user);

/* Trains with the config's ppo/reward/scenario sections and writes into
 * output_dir: learning_curve.csv, update_stats.csv, policy_best.ckpt,
 * policy_last.ckpt. callback may be NULL. */
HG_API hg_status hg_train(const hg_config* cfg, hg_batch_callback callback, void* user);

/* ---- policies --------------------------------------------------------- */

HG_API hg_status hg_policy_load(const char* checkpoint_path, hg_policy** out);
HG_API void hg_policy_free(hg_policy* policy);

/* ---- campaigns and reports -------------------------------------------- */

typedef struct hg_report_summary {
  int n_episodes;
  int failed_episodes;
  double pct_miss_lt_100cm;
  double pct_miss_lt_50cm;
  double ci95_lt_100cm_lo, ci95_lt_100cm_hi;
  double ci95_lt_50cm_lo, ci95_lt_50cm_hi;
  double fuel_mean;
  double fuel_sd;
  double miss_mean;
  double miss_median;
  uint64_t seed;
} hg_report_summary;

/* Runs the campaign described by the config. For rl guidance `policy`, if
 * non-NULL, replaces the configured checkpoint. */
HG_API hg_status hg_run_campaign(const hg_config* cfg, const hg_policy* policy, hg_report** out);
HG_API hg_status hg_report_load(const char* json_path, hg_report** out);
HG_API void hg_report_free(hg_report* report);
HG_API hg_status hg_report_summary_get(const hg_report* report, hg_report_summary* out);
/* Borrowed strings, valid for the lifetime of the report. */
HG_API hg_status hg_report_labels(const hg_report* report, const char** guidance,
                                  const char** preset);
/* Writes <dir>/report_<guidance>_<preset>_s<seed>.json and .csv; stem_out
 * (may be NULL) receives the path without extension. */
HG_API hg_status hg_report_write(const hg_report* report, const char* dir, char** stem_out);

/* Comparison table over n >= 2 reports. Any output pointer may be NULL.
 * warnings_out receives newline-separated warnings ("" if none). */
HG_API hg_status hg_compare(const hg_report* const* reports, size_t n, char** text_out,
                            char** csv_out, char** warnings_out);

/* ---- trajectories ----------------------------------------------------- */

/* Simulates one episode with the config's campaign guidance and writes a
 * per-cycle CSV. rows_out may be NULL. */
HG_API hg_status hg_dump_trajectory(const hg_config* cfg, uint64_t episode_seed,
                                    const hg_policy* policy, const char* csv_path,
                                    int* rows_out);

/* ---- single engagements ----------------------------------------------- */

HG_API hg_status hg_engagement_create(const hg_config* cfg, uint64_t episode_seed,
                                      hg_engagement** out);
HG_API void hg_engagement_free(hg_engagement* eng);
/* obs = {e_u, e_v, dtheta_u, dtheta_v} */
HG_API hg_status hg_engagement_observe(const hg_engagement* eng, double obs[4]);
/* Ground-truth augmented ZEM action for the current state. */
HG_API hg_status hg_engagement_zem_action(const hg_engagement* eng, uint8_t action[4]);
HG_API hg_status hg_engagement_step(hg_engagement* eng, const uint8_t action[4], int* done);
/* outcome: "running", "hit", "miss", "fov_exit" or "timeout" (borrowed). */
HG_API hg_status hg_engagement_result(const hg_engagement* eng, double* miss_m, double* fuel_kg,
                                      int* steps, const char** outcome);

#ifdef __cplusplus
}
#endif

#endif /* HOMING_HOMING_H */
