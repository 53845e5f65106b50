// Exercises the shared library through its C header only.
#include "homing/homing.h"

#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>

namespace {

std::string scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / "homing_capi_test" / name;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir.string();
}

hg_config* zem_config(const char* preset, int episodes) {
  hg_config* cfg = nullptr;
  EXPECT_EQ(hg_config_parse("{}", &cfg), HG_OK);
  EXPECT_EQ(hg_config_set_preset(cfg, preset), HG_OK);
  EXPECT_EQ(hg_config_set_episodes(cfg, episodes), HG_OK);
  EXPECT_EQ(hg_config_set_seed(cfg, 17), HG_OK);
  return cfg;
}

}  // namespace

TEST(CApi, VersionAndStatusNames) {
  EXPECT_STRNE(hg_version(), "");
  EXPECT_STREQ(hg_status_name(HG_OK), "ok");
  EXPECT_STRNE(hg_status_name(HG_ERR_CONFIG), hg_status_name(HG_ERR_IO));
}

TEST(CApi, NullArgumentsRejected) {
  EXPECT_EQ(hg_config_parse(nullptr, nullptr), HG_ERR_INVALID_ARGUMENT);
  EXPECT_EQ(hg_config_set_seed(nullptr, 1), HG_ERR_INVALID_ARGUMENT);
  EXPECT_STRNE(hg_last_error_message(), "");
}

TEST(CApi, ConfigErrorsCarryMessages) {
  hg_config* cfg = nullptr;
  EXPECT_EQ(hg_config_parse("{\"bogus\": 1}", &cfg), HG_ERR_CONFIG);
  EXPECT_EQ(cfg, nullptr);
  EXPECT_NE(std::string(hg_last_error_message()).find("bogus"), std::string::npos);
  EXPECT_EQ(hg_config_load("/no/such/file.json", &cfg), HG_ERR_IO);
  EXPECT_NE(std::string(hg_last_error_message()).find("/no/such/file.json"), std::string::npos);
}

TEST(CApi, FailedSetterLeavesConfigIntact) {
  hg_config* cfg = zem_config("table5", 3);
  EXPECT_EQ(hg_config_set_preset(cfg, "nope"), HG_ERR_CONFIG);
  const char* preset = nullptr;
  ASSERT_EQ(hg_config_get_preset(cfg, &preset), HG_OK);
  EXPECT_STREQ(preset, "table5");
  EXPECT_EQ(hg_config_set_guidance(cfg, "lqr"), HG_ERR_CONFIG);
  const char* g = nullptr;
  ASSERT_EQ(hg_config_get_guidance(cfg, &g), HG_OK);
  EXPECT_STREQ(g, "zem");
  hg_config_free(cfg);
}

TEST(CApi, ResolvedJsonParsesBack) {
  hg_config* cfg = zem_config("table7", 3);
  char* text = nullptr;
  ASSERT_EQ(hg_config_resolved_json(cfg, &text), HG_OK);
  hg_config* again = nullptr;
  ASSERT_EQ(hg_config_parse(text, &again), HG_OK);
  char* text2 = nullptr;
  ASSERT_EQ(hg_config_resolved_json(again, &text2), HG_OK);
  EXPECT_STREQ(text, text2);
  uint64_t seed = 0;
  hg_config_get_seed(again, &seed);
  EXPECT_EQ(seed, 17u);
  hg_string_free(text);
  hg_string_free(text2);
  hg_config_free(again);
  hg_config_free(cfg);
}

TEST(CApi, CampaignReportWriteLoadCompare) {
  const std::string dir = scratch_dir("campaign");
  hg_config* cfg = zem_config("zero-error", 5);
  hg_report* rep = nullptr;
  ASSERT_EQ(hg_run_campaign(cfg, nullptr, &rep), HG_OK) << hg_last_error_message();
  hg_report_summary s{};
  ASSERT_EQ(hg_report_summary_get(rep, &s), HG_OK);
  EXPECT_EQ(s.n_episodes, 5);
  EXPECT_EQ(s.seed, 17u);
  EXPECT_EQ(s.pct_miss_lt_50cm, 100.0);
  // A collision course needs no correction.
  EXPECT_EQ(s.fuel_mean, 0.0);
  const char* g = nullptr;
  const char* p = nullptr;
  hg_report_labels(rep, &g, &p);
  EXPECT_STREQ(g, "zem");
  EXPECT_STREQ(p, "zero-error");

  char* stem = nullptr;
  ASSERT_EQ(hg_report_write(rep, dir.c_str(), &stem), HG_OK);
  EXPECT_EQ(std::string(stem), dir + "/report_zem_zero-error_s17");
  EXPECT_TRUE(std::filesystem::exists(std::string(stem) + ".csv"));
  hg_report* back = nullptr;
  ASSERT_EQ(hg_report_load((std::string(stem) + ".json").c_str(), &back), HG_OK);
  hg_report_summary s2{};
  hg_report_summary_get(back, &s2);
  EXPECT_EQ(s2.fuel_mean, s.fuel_mean);
  EXPECT_EQ(s2.miss_median, s.miss_median);

  const hg_report* pair[] = {rep, back};
  char *text = nullptr, *csv = nullptr, *warn = nullptr;
  ASSERT_EQ(hg_compare(pair, 2, &text, &csv, &warn), HG_OK);
  EXPECT_STREQ(warn, "");
  EXPECT_NE(std::string(text).find("zero-error"), std::string::npos);
  EXPECT_EQ(hg_compare(pair, 1, &text, nullptr, nullptr), HG_ERR_INVALID_ARGUMENT);
  hg_string_free(text);
  hg_string_free(csv);
  hg_string_free(warn);
  hg_string_free(stem);
  hg_report_free(back);
  hg_report_free(rep);
  hg_config_free(cfg);
}

TEST(CApi, EngagementLoopMatchesCampaign) {
  hg_config* cfg = zem_config("table5", 1);
  hg_engagement* eng = nullptr;
  ASSERT_EQ(hg_engagement_create(cfg, 17, &eng), HG_OK);
  double obs[4];
  ASSERT_EQ(hg_engagement_observe(eng, obs), HG_OK);
  for (double o : obs) EXPECT_TRUE(std::isfinite(o));
  int done = 0;
  while (!done) {
    uint8_t act[4];
    ASSERT_EQ(hg_engagement_zem_action(eng, act), HG_OK);
    ASSERT_EQ(hg_engagement_step(eng, act, &done), HG_OK);
  }
  double miss = 0, fuel = 0;
  int steps = 0;
  const char* outcome = nullptr;
  ASSERT_EQ(hg_engagement_result(eng, &miss, &fuel, &steps, &outcome), HG_OK);
  EXPECT_STRNE(outcome, "running");
  uint8_t act[4] = {0, 0, 0, 0};
  EXPECT_NE(hg_engagement_step(eng, act, &done), HG_OK);

  hg_report* rep = nullptr;
  ASSERT_EQ(hg_run_campaign(cfg, nullptr, &rep), HG_OK);
  hg_report_summary s{};
  hg_report_summary_get(rep, &s);
  EXPECT_EQ(s.miss_mean, miss);
  EXPECT_EQ(s.fuel_mean, fuel);
  hg_report_free(rep);
  hg_engagement_free(eng);
  hg_config_free(cfg);
}

TEST(CApi, TrainWritesArtifactsAndPolicyLoads) {
  const std::string dir = scratch_dir("train");
  hg_config* cfg = nullptr;
  ASSERT_EQ(hg_config_parse("{\"ppo\": {\"episodes_per_batch\": 4}}", &cfg), HG_OK);
  hg_config_set_total_batches(cfg, 2);
  hg_config_set_output_dir(cfg, dir.c_str());
  int calls = 0;
  ASSERT_EQ(hg_train(cfg,
                     [](const hg_batch_stats* s, void* user) {
                       EXPECT_EQ(s->batch, (*static_cast<int*>(user))++);
                     },
                     &calls),
            HG_OK)
      << hg_last_error_message();
  EXPECT_EQ(calls, 2);
  for (const char* f : {"learning_curve.csv", "update_stats.csv", "policy_best.ckpt", "policy_last.ckpt"})
    EXPECT_TRUE(std::filesystem::exists(dir + "/" + f)) << f;

  hg_policy* pol = nullptr;
  ASSERT_EQ(hg_policy_load((dir + "/policy_last.ckpt").c_str(), &pol), HG_OK);
  hg_config_set_guidance(cfg, "rl");
  hg_config_set_episodes(cfg, 2);
  hg_report* rep = nullptr;
  ASSERT_EQ(hg_run_campaign(cfg, pol, &rep), HG_OK) << hg_last_error_message();
  int rows = 0;
  const std::string csv = dir + "/traj.csv";
  ASSERT_EQ(hg_dump_trajectory(cfg, 3, pol, csv.c_str(), &rows), HG_OK);
  EXPECT_GT(rows, 0);
  hg_report_free(rep);
  hg_policy_free(pol);
  EXPECT_EQ(hg_policy_load((dir + "/missing.ckpt").c_str(), &pol), HG_ERR_IO);
  hg_config_free(cfg);
}
