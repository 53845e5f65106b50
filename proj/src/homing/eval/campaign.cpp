#include "homing/eval/campaign.hpp"

#include "homing/common/error.hpp"
#include "homing/common/parallel.hpp"
#include "homing/nn/checkpoint.hpp"
#include "homing/nn/distribution.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

namespace homing::eval {

using nlohmann::json;

namespace {

const std::vector<double> kHistogramEdgesCm = {0, 10, 25, 50, 75, 100, 150, 200, 500, 1000};

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// Sum of sorted values, so the result does not depend on input order.
double sorted_sum(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  double s = 0.0;
  for (double x : v) s += x;
  return s;
}

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

double number_or_nan(const json& j) {
  return j.is_null() ? std::numeric_limits<double>::quiet_NaN() : j.get<double>();
}

}  // namespace

const char* guidance_name(GuidanceKind kind) {
  switch (kind) {
    case GuidanceKind::kRl: return "rl";
    case GuidanceKind::kZem: return "zem";
    case GuidanceKind::kPn: return "pn";
  }
  return "zem";
}

GuidanceKind parse_guidance(const std::string& name) {
  if (name == "rl") return GuidanceKind::kRl;
  if (name == "zem") return GuidanceKind::kZem;
  if (name == "pn") return GuidanceKind::kPn;
  throw Error(ErrorCode::kConfig, "unknown guidance '" + name + "' (expected rl, zem or pn)");
}

ThrusterAction GroundTruthAgent::act(const env::Engagement& engagement) {
  return guidance::ground_truth_action(law_, engagement.state(), engagement.config().missile);
}

PolicyAgent::PolicyAgent(const nn::RecurrentNet& policy)
    : policy_(policy), hidden_(policy.initial_hidden()) {
  if (policy.shape().out_dim != nn::MultiCategorical::kLogits)
    throw Error(ErrorCode::kConfig, "policy output size does not match the thruster count");
}

void PolicyAgent::reset() { hidden_ = policy_.initial_hidden(); }

ThrusterAction PolicyAgent::act(const env::Engagement& engagement) {
  const auto obs = engagement.observation().as_array();
  const Eigen::VectorXd logits = policy_.step(obs, hidden_);
  return nn::MultiCategorical({logits.data(), static_cast<std::size_t>(logits.size())}).greedy();
}

std::unique_ptr<Agent> make_agent(GuidanceKind kind, const nn::RecurrentNet* policy) {
  switch (kind) {
    case GuidanceKind::kZem: return std::make_unique<GroundTruthAgent>(guidance::Law::kZem);
    case GuidanceKind::kPn: return std::make_unique<GroundTruthAgent>(guidance::Law::kPn);
    case GuidanceKind::kRl:
      if (!policy) throw Error(ErrorCode::kConfig, "rl guidance requires a policy checkpoint");
      return std::make_unique<PolicyAgent>(*policy);
  }
  throw Error(ErrorCode::kInternal, "unhandled guidance kind");
}

void CampaignConfig::validate() const {
  if (n_episodes < 1) throw Error(ErrorCode::kConfig, "campaign.n_episodes must be >= 1");
  if (threads < 1) throw Error(ErrorCode::kConfig, "threads must be >= 1");
  env.validate();
}

RateInterval wilson_interval(int k, int n, double z) {
  if (n <= 0) return {0.0, 100.0};
  const double p = double(k) / n;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / n;
  const double center = (p + z2 / (2.0 * n)) / denom;
  const double half = z / denom * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * double(n) * n));
  return {100.0 * std::max(0.0, center - half), 100.0 * std::min(1.0, center + half)};
}

MissHistogram miss_histogram(const std::vector<EpisodeRecord>& records) {
  MissHistogram h;
  h.edges_cm = kHistogramEdgesCm;
  h.counts.assign(h.edges_cm.size(), 0);
  for (const auto& r : records) {
    if (!std::isfinite(r.miss)) continue;
    const double cm = 100.0 * r.miss;
    const auto it = std::upper_bound(h.edges_cm.begin(), h.edges_cm.end(), cm);
    h.counts[static_cast<std::size_t>(std::max<std::ptrdiff_t>(0, it - h.edges_cm.begin() - 1))]++;
  }
  return h;
}

CampaignReport summarize(const std::vector<EpisodeRecord>& records) {
  CampaignReport rep;
  rep.n_episodes = static_cast<int>(records.size());
  rep.version = HOMING_VERSION;
  int lt100 = 0, lt50 = 0;
  std::vector<double> fuel, miss;
  std::map<std::string, int> outcomes;
  for (const auto& r : records) {
    if (!r.error.empty()) {
      ++rep.failed_episodes;
      continue;
    }
    if (r.miss < 1.0) ++lt100;
    if (r.miss < 0.5) ++lt50;
    fuel.push_back(r.fuel);
    miss.push_back(r.miss);
    outcomes[env::outcome_name(r.outcome)]++;
  }
  if (rep.failed_episodes) outcomes["error"] = rep.failed_episodes;
  for (const auto& [k, v] : outcomes) rep.outcome_counts.emplace_back(k, v);
  const int n = rep.n_episodes;
  rep.pct_miss_lt_100cm = n ? 100.0 * lt100 / n : 0.0;
  rep.pct_miss_lt_50cm = n ? 100.0 * lt50 / n : 0.0;
  rep.ci_100cm = wilson_interval(lt100, n);
  rep.ci_50cm = wilson_interval(lt50, n);
  if (!fuel.empty()) {
    rep.fuel_mean = sorted_sum(fuel) / double(fuel.size());
    if (fuel.size() > 1) {
      std::vector<double> sq;
      for (double f : fuel) sq.push_back((f - rep.fuel_mean) * (f - rep.fuel_mean));
      rep.fuel_sd = std::sqrt(sorted_sum(sq) / double(fuel.size() - 1));
    }
    rep.miss_mean = sorted_sum(miss) / double(miss.size());
    std::sort(miss.begin(), miss.end());
    const std::size_t m = miss.size();
    rep.miss_median = m % 2 ? miss[m / 2] : 0.5 * (miss[m / 2 - 1] + miss[m / 2]);
  }
  rep.histogram = miss_histogram(records);
  rep.records = records;
  std::sort(rep.records.begin(), rep.records.end(),
            [](const EpisodeRecord& a, const EpisodeRecord& b) { return a.index < b.index; });
  return rep;
}

EpisodeRecord run_episode(const env::EnvConfig& env_cfg, std::uint64_t episode_seed, Agent& agent) {
  EpisodeRecord rec;
  rec.seed = episode_seed;
  try {
    env::Engagement eng(env_cfg, episode_seed);
    agent.reset();
    try {
      while (!eng.done()) eng.step(agent.act(eng));
      rec.outcome = eng.outcome();
    } catch (const Error& e) {
      rec.error = e.what();
    }
    rec.miss = eng.miss_distance();
    rec.fuel = eng.fuel_used();
    rec.steps = eng.steps();
    rec.time = eng.state().time;
  } catch (const Error& e) {
    rec.error = e.what();
    rec.miss = std::numeric_limits<double>::quiet_NaN();
  }
  return rec;
}

CampaignReport run_campaign(const CampaignConfig& cfg_in, const nn::RecurrentNet* policy) {
  CampaignConfig cfg = cfg_in;
  cfg.validate();
  if (cfg.fixed_worst_case) cfg.env.scenario = scenario::worst_case(cfg.env.scenario);

  std::optional<nn::Checkpoint> ckpt;
  if (cfg.guidance == GuidanceKind::kRl && !policy) {
    if (cfg.checkpoint_path.empty())
      throw Error(ErrorCode::kConfig, "rl guidance requires a checkpoint path");
    if (!std::filesystem::exists(cfg.checkpoint_path))
      throw Error(ErrorCode::kConfig, "checkpoint not found: " + cfg.checkpoint_path);
    ckpt = nn::load_checkpoint(cfg.checkpoint_path);
    policy = &ckpt->policy;
  }

  std::vector<EpisodeRecord> records(static_cast<std::size_t>(cfg.n_episodes));
  parallel_for(records.size(), cfg.threads, [&](std::size_t i) {
    auto agent = make_agent(cfg.guidance, policy);
    records[i] = run_episode(cfg.env, cfg.seed + i, *agent);
    records[i].index = static_cast<int>(i);
  });

  CampaignReport rep = summarize(records);
  rep.guidance = guidance_name(cfg.guidance);
  rep.preset = cfg.preset;
  rep.seed = cfg.seed;
  return rep;
}

std::string report_stem(const std::string& guidance, const std::string& preset,
                        std::uint64_t seed) {
  return "report_" + guidance + "_" + preset + "_s" + std::to_string(seed);
}

void write_report_json(const std::string& path, const CampaignReport& r) {
  json j;
  j["schema"] = "homing.campaign_report/1";
  j["version"] = r.version;
  j["guidance"] = r.guidance;
  j["preset"] = r.preset;
  j["seed"] = r.seed;
  j["n_episodes"] = r.n_episodes;
  j["pct_miss_lt_100cm"] = r.pct_miss_lt_100cm;
  j["pct_miss_lt_50cm"] = r.pct_miss_lt_50cm;
  j["ci95_miss_lt_100cm"] = {r.ci_100cm.lo, r.ci_100cm.hi};
  j["ci95_miss_lt_50cm"] = {r.ci_50cm.lo, r.ci_50cm.hi};
  j["fuel_mean_kg"] = r.fuel_mean;
  j["fuel_sd_kg"] = r.fuel_sd;
  j["miss_mean_m"] = r.miss_mean;
  j["miss_median_m"] = r.miss_median;
  j["failed_episodes"] = r.failed_episodes;
  json oc = json::object();
  for (const auto& [k, v] : r.outcome_counts) oc[k] = v;
  j["outcomes"] = oc;
  j["miss_histogram"] = {{"edges_cm", r.histogram.edges_cm}, {"counts", r.histogram.counts}};
  json eps = json::array();
  for (const auto& e : r.records)
    eps.push_back({{"index", e.index},
                   {"seed", e.seed},
                   {"outcome", e.error.empty() ? env::outcome_name(e.outcome) : "error"},
                   {"miss_m", number_or_null(e.miss)},
                   {"fuel_kg", e.fuel},
                   {"steps", e.steps},
                   {"time_s", e.time},
                   {"error", e.error}});
  j["episodes"] = eps;
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw Error(ErrorCode::kIo, "cannot write " + path);
  os << j.dump(2) << '\n';
  if (!os) throw Error(ErrorCode::kIo, "failed writing " + path);
}

void write_report_csv(const std::string& path, const CampaignReport& r) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw Error(ErrorCode::kIo, "cannot write " + path);
  os << "index,seed,outcome,miss_m,fuel_kg,steps,time_s\n";
  for (const auto& e : r.records)
    os << e.index << ',' << e.seed << ','
       << (e.error.empty() ? env::outcome_name(e.outcome) : "error") << ','
       << (std::isfinite(e.miss) ? fmt(e.miss) : "nan") << ',' << fmt(e.fuel) << ',' << e.steps
       << ',' << fmt(e.time) << '\n';
  if (!os) throw Error(ErrorCode::kIo, "failed writing " + path);
}

CampaignReport read_report_json(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw Error(ErrorCode::kIo, "cannot open report " + path);
  CampaignReport r;
  try {
    const json j = json::parse(is);
    if (j.at("schema").get<std::string>() != "homing.campaign_report/1")
      throw Error(ErrorCode::kConfig, "unsupported report schema");
    r.version = j.at("version").get<std::string>();
    r.guidance = j.at("guidance").get<std::string>();
    r.preset = j.at("preset").get<std::string>();
    r.seed = j.at("seed").get<std::uint64_t>();
    r.n_episodes = j.at("n_episodes").get<int>();
    r.pct_miss_lt_100cm = j.at("pct_miss_lt_100cm").get<double>();
    r.pct_miss_lt_50cm = j.at("pct_miss_lt_50cm").get<double>();
    r.ci_100cm = {j.at("ci95_miss_lt_100cm").at(0).get<double>(),
                  j.at("ci95_miss_lt_100cm").at(1).get<double>()};
    r.ci_50cm = {j.at("ci95_miss_lt_50cm").at(0).get<double>(),
                 j.at("ci95_miss_lt_50cm").at(1).get<double>()};
    r.fuel_mean = j.at("fuel_mean_kg").get<double>();
    r.fuel_sd = j.at("fuel_sd_kg").get<double>();
    r.miss_mean = j.at("miss_mean_m").get<double>();
    r.miss_median = j.at("miss_median_m").get<double>();
    r.failed_episodes = j.at("failed_episodes").get<int>();
    for (const auto& [k, v] : j.at("outcomes").items()) r.outcome_counts.emplace_back(k, v.get<int>());
    r.histogram.edges_cm = j.at("miss_histogram").at("edges_cm").get<std::vector<double>>();
    r.histogram.counts = j.at("miss_histogram").at("counts").get<std::vector<int>>();
    for (const auto& e : j.at("episodes")) {
      EpisodeRecord rec;
      rec.index = e.at("index").get<int>();
      rec.seed = e.at("seed").get<std::uint64_t>();
      const auto outcome = e.at("outcome").get<std::string>();
      if (outcome != "error") rec.outcome = env::parse_outcome(outcome);
      rec.miss = number_or_nan(e.at("miss_m"));
      rec.fuel = e.at("fuel_kg").get<double>();
      rec.steps = e.at("steps").get<int>();
      rec.time = e.at("time_s").get<double>();
      rec.error = e.at("error").get<std::string>();
      r.records.push_back(rec);
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kConfig, "malformed report " + path + ": " + e.what());
  } catch (const Error& e) {
    throw Error(ErrorCode::kConfig, "malformed report " + path + ": " + e.what());
  }
  const double p100 = r.pct_miss_lt_100cm, p50 = r.pct_miss_lt_50cm;
  if (!(p100 >= 0.0 && p100 <= 100.0 && p50 >= 0.0 && p50 <= p100) || r.n_episodes < 1)
    throw Error(ErrorCode::kConfig, "malformed report " + path + ": inconsistent hit rates");
  return r;
}

Comparison compare(const std::vector<CampaignReport>& reports) {
  if (reports.size() < 2)
    throw Error(ErrorCode::kInvalidArgument, "compare needs at least two reports");
  Comparison c;
  for (const auto& r : reports)
    c.rows.push_back({r.guidance, r.preset, r.n_episodes, r.pct_miss_lt_100cm, r.pct_miss_lt_50cm,
                      r.fuel_mean, r.fuel_sd});
  for (const auto& r : reports)
    if (r.preset != reports.front().preset) {
      c.warnings.push_back("reports use different scenario presets (" + reports.front().preset +
                           " vs " + r.preset + "); rows are not directly comparable");
      break;
    }
  return c;
}

std::string comparison_table_text(const Comparison& cmp) {
  std::ostringstream os;
  char line[160];
  std::snprintf(line, sizeof(line), "%-8s %-12s %8s %12s %11s %9s %9s\n", "guidance", "preset",
                "episodes", "<100cm (%)", "<50cm (%)", "fuel mu", "fuel sd");
  os << line;
  for (const auto& r : cmp.rows) {
    std::snprintf(line, sizeof(line), "%-8s %-12s %8d %12.1f %11.1f %9.2f %9.2f\n",
                  r.guidance.c_str(), r.preset.c_str(), r.n_episodes, r.pct_miss_lt_100cm,
                  r.pct_miss_lt_50cm, r.fuel_mean, r.fuel_sd);
    os << line;
  }
  return os.str();
}

std::string comparison_table_csv(const Comparison& cmp) {
  std::ostringstream os;
  os << "guidance,preset,n_episodes,pct_miss_lt_100cm,pct_miss_lt_50cm,fuel_mean_kg,fuel_sd_kg\n";
  for (const auto& r : cmp.rows)
    os << r.guidance << ',' << r.preset << ',' << r.n_episodes << ',' << fmt(r.pct_miss_lt_100cm)
       << ',' << fmt(r.pct_miss_lt_50cm) << ',' << fmt(r.fuel_mean) << ',' << fmt(r.fuel_sd)
       << '\n';
  return os.str();
}

Trajectory trajectory_dump(const env::EnvConfig& env_cfg, std::uint64_t episode_seed,
                           Agent& agent) {
  env::Engagement eng(env_cfg, episode_seed);
  agent.reset();
  Trajectory traj;
  while (!eng.done()) {
    const auto& s = eng.state();
    TrajectoryRow row;
    row.step = eng.steps();
    row.time = s.time;
    row.position = -s.r_tm();
    row.theta_u = eng.angles().u;
    row.theta_v = eng.angles().v;
    row.d_theta_u = eng.observation().d_theta_u;
    row.d_theta_v = eng.observation().d_theta_v;
    row.mass = s.missile.mass;
    const Vec3 body_x = s.missile.attitude * Vec3::UnitX();
    const Vec3 v = s.missile.velocity;
    row.theta_cv = std::atan2(v.cross(body_x).norm(), v.dot(body_x));
    row.range = s.r_tm().norm();
    row.action = agent.act(eng);
    traj.rows.push_back(row);
    eng.step(row.action);
  }
  traj.outcome = eng.outcome();
  traj.miss = eng.miss_distance();
  traj.fuel = eng.fuel_used();
  return traj;
}

void write_trajectory_csv(const std::string& path, const Trajectory& traj) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw Error(ErrorCode::kIo, "cannot write " + path);
  os << kTrajectoryHeader << '\n';
  for (const auto& r : traj.rows) {
    os << r.step << ',' << fmt(r.time) << ',' << fmt(r.position.x()) << ','
       << fmt(r.position.y()) << ',' << fmt(r.position.z()) << ',' << fmt(r.theta_u) << ','
       << fmt(r.theta_v) << ',' << fmt(r.d_theta_u) << ',' << fmt(r.d_theta_v);
    for (auto a : r.action) os << ',' << int(a);
    os << ',' << fmt(r.mass) << ',' << fmt(r.theta_cv) << ',' << fmt(r.range) << '\n';
  }
  if (!os) throw Error(ErrorCode::kIo, "failed writing " + path);
}

std::vector<TrajectoryRow> read_trajectory_csv(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw Error(ErrorCode::kIo, "cannot open trajectory " + path);
  std::string line;
  if (!std::getline(is, line) || line != kTrajectoryHeader)
    throw Error(ErrorCode::kConfig, "trajectory " + path + ": unexpected header");
  std::vector<TrajectoryRow> rows;
  int lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) f.push_back(cell);
    if (f.size() != 16)
      throw Error(ErrorCode::kConfig,
                  "trajectory " + path + ":" + std::to_string(lineno) + ": expected 16 fields");
    try {
      TrajectoryRow r;
      r.step = std::stoi(f[0]);
      r.time = std::stod(f[1]);
      r.position = Vec3(std::stod(f[2]), std::stod(f[3]), std::stod(f[4]));
      r.theta_u = std::stod(f[5]);
      r.theta_v = std::stod(f[6]);
      r.d_theta_u = std::stod(f[7]);
      r.d_theta_v = std::stod(f[8]);
      for (int i = 0; i < 4; ++i) r.action[i] = static_cast<std::uint8_t>(std::stoi(f[9 + i]));
      r.mass = std::stod(f[13]);
      r.theta_cv = std::stod(f[14]);
      r.range = std::stod(f[15]);
      rows.push_back(r);
    } catch (const std::exception&) {
      throw Error(ErrorCode::kConfig,
                  "trajectory " + path + ":" + std::to_string(lineno) + ": bad number");
    }
  }
  return rows;
}

}  // namespace homing::eval
