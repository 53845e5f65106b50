#include "homing/config/run_config.hpp"

#include "homing/common/error.hpp"
#include "homing/eval/presets.hpp"

#include <nlohmann/json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <map>
#include <set>
#include <sstream>
#include <vector>

namespace homing::config {

using nlohmann::json;

namespace {

// Forward iterator over the text that counts the newlines it has stepped over,
// so a SAX pass can tell on which line each key was read.
class LineCountingIterator {
 public:
  using iterator_category = std::forward_iterator_tag;
  using value_type = char;
  using difference_type = std::ptrdiff_t;
  using pointer = const char*;
  using reference = const char&;

  LineCountingIterator() = default;
  LineCountingIterator(const char* p, int* line) : p_(p), line_(line) {}

  reference operator*() const { return *p_; }
  LineCountingIterator& operator++() {
    if (*p_ == '\n') ++*line_;
    ++p_;
    return *this;
  }
  LineCountingIterator operator++(int) {
    auto copy = *this;
    ++*this;
    return copy;
  }
  bool operator==(const LineCountingIterator& o) const { return p_ == o.p_; }
  bool operator!=(const LineCountingIterator& o) const { return p_ != o.p_; }

 private:
  const char* p_ = nullptr;
  int* line_ = nullptr;
};

// Records "a.b.c" -> line for every object key in the document.
class KeyLineRecorder : public nlohmann::json_sax<json> {
 public:
  explicit KeyLineRecorder(const int* line) : line_(line) {}
  std::map<std::string, int> lines;

  bool null() override { return value(); }
  bool boolean(bool) override { return value(); }
  bool number_integer(number_integer_t) override { return value(); }
  bool number_unsigned(number_unsigned_t) override { return value(); }
  bool number_float(number_float_t, const string_t&) override { return value(); }
  bool string(string_t&) override { return value(); }
  bool binary(binary_t&) override { return value(); }
  bool start_object(std::size_t) override {
    stack_.push_back({true, ""});
    return true;
  }
  bool key(string_t& k) override {
    stack_.back().key = k;
    lines.emplace(path(), *line_);
    return true;
  }
  bool end_object() override { return pop(); }
  bool start_array(std::size_t) override {
    stack_.push_back({false, ""});
    return true;
  }
  bool end_array() override { return pop(); }
  bool parse_error(std::size_t, const std::string&, const nlohmann::detail::exception&) override {
    return false;
  }

 private:
  struct Frame {
    bool object;
    std::string key;
  };
  bool value() { return true; }
  bool pop() {
    stack_.pop_back();
    return true;
  }
  std::string path() const {
    std::string p;
    for (const auto& f : stack_) {
      if (!f.object) break;
      if (!p.empty()) p += '.';
      p += f.key;
    }
    return p;
  }
  const int* line_;
  std::vector<Frame> stack_;
};

std::pair<int, int> line_col(const std::string& text, std::size_t byte) {
  int line = 1, col = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

class Reader {
 public:
  Reader(std::string source, std::map<std::string, int> lines)
      : source_(std::move(source)), lines_(std::move(lines)) {}

  [[noreturn]] void fail(const std::string& path, const std::string& msg) const {
    std::string where = source_;
    const auto it = lines_.find(path);
    if (it != lines_.end()) where += ":" + std::to_string(it->second);
    throw Error(ErrorCode::kConfig, where + ": " + (path.empty() ? "" : "'" + path + "' ") + msg);
  }

  void require_object(const json& j, const std::string& path) const {
    if (!j.is_object()) fail(path, "must be an object");
  }

  void allow_keys(const json& obj, const std::string& path,
                  std::initializer_list<const char*> allowed) const {
    const std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto& [k, v] : obj.items())
      if (!ok.count(k)) {
        std::string list;
        for (const char* a : allowed) list += std::string(list.empty() ? "" : ", ") + a;
        fail(join(path, k), "unknown key (allowed: " + list + ")");
      }
  }

  static std::string join(const std::string& path, const std::string& key) {
    return path.empty() ? key : path + "." + key;
  }

  void number(const json& obj, const std::string& path, const char* key, double& out) const {
    if (!obj.contains(key)) return;
    const auto& v = obj.at(key);
    if (!v.is_number()) fail(join(path, key), "must be a number");
    out = v.get<double>();
  }

  void integer(const json& obj, const std::string& path, const char* key, int& out) const {
    if (!obj.contains(key)) return;
    const auto& v = obj.at(key);
    if (!v.is_number_integer()) fail(join(path, key), "must be an integer");
    const auto x = v.get<std::int64_t>();
    if (x < std::numeric_limits<int>::min() || x > std::numeric_limits<int>::max())
      fail(join(path, key), "is out of range");
    out = static_cast<int>(x);
  }

  void unsigned_integer(const json& obj, const std::string& path, const char* key,
                        std::uint64_t& out) const {
    if (!obj.contains(key)) return;
    const auto& v = obj.at(key);
    if (!v.is_number_unsigned()) fail(join(path, key), "must be a non-negative integer");
    out = v.get<std::uint64_t>();
  }

  void boolean(const json& obj, const std::string& path, const char* key, bool& out) const {
    if (!obj.contains(key)) return;
    const auto& v = obj.at(key);
    if (!v.is_boolean()) fail(join(path, key), "must be true or false");
    out = v.get<bool>();
  }

  void string(const json& obj, const std::string& path, const char* key, std::string& out) const {
    if (!obj.contains(key)) return;
    const auto& v = obj.at(key);
    if (!v.is_string()) fail(join(path, key), "must be a string");
    out = v.get<std::string>();
  }

  // [min, max] or a single number meaning [x, x].
  void interval(const json& obj, const std::string& path, const char* key,
                scenario::Interval& out) const {
    if (!obj.contains(key)) return;
    const auto& v = obj.at(key);
    if (v.is_number()) {
      out = {v.get<double>(), v.get<double>()};
      return;
    }
    if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number())
      fail(join(path, key), "must be a number or a [min, max] pair");
    out = {v[0].get<double>(), v[1].get<double>()};
    if (!(out.min <= out.max)) fail(join(path, key), "min must not exceed max");
  }

  void array4(const json& obj, const std::string& path, const char* key,
              std::array<double, 4>& out) const {
    if (!obj.contains(key)) return;
    const auto& v = obj.at(key);
    if (!v.is_array() || v.size() != 4) fail(join(path, key), "must be an array of 4 numbers");
    for (std::size_t i = 0; i < 4; ++i) {
      if (!v[i].is_number()) fail(join(path, key), "must be an array of 4 numbers");
      out[i] = v[i].get<double>();
    }
  }

 private:
  std::string source_;
  std::map<std::string, int> lines_;
};

const char* const kIntervalKeys[] = {"range_km",          "missile_speed",
                                     "target_speed",      "theta_deg",
                                     "phi_deg",           "beta_deg",
                                     "alpha_deg",         "heading_error_deg",
                                     "attitude_error_deg", "target_accel",
                                     "maneuver_start",    "maneuver_switch_offset",
                                     "maneuver_duration", "weave_period"};

template <typename Config>
auto& interval_field(Config& s, const std::string& key) {
  if (key == "range_km") return s.range_km;
  if (key == "missile_speed") return s.missile_speed;
  if (key == "target_speed") return s.target_speed;
  if (key == "theta_deg") return s.theta_deg;
  if (key == "phi_deg") return s.phi_deg;
  if (key == "beta_deg") return s.beta_deg;
  if (key == "alpha_deg") return s.alpha_deg;
  if (key == "heading_error_deg") return s.heading_error_deg;
  if (key == "attitude_error_deg") return s.attitude_error_deg;
  if (key == "target_accel") return s.target_accel;
  if (key == "maneuver_start") return s.maneuver_start;
  if (key == "maneuver_switch_offset") return s.maneuver_switch_offset;
  if (key == "maneuver_duration") return s.maneuver_duration;
  return s.weave_period;
}

void read_document(const json& doc, const Reader& rd, RunConfig& cfg, const Overrides& ov) {
  rd.require_object(doc, "");
  rd.allow_keys(doc, "", {"version", "seed", "output_dir", "threads", "scenario", "missile",
                          "integrator", "episode", "reward", "ppo", "campaign"});
  if (doc.contains("version") && !doc.at("version").is_string())
    rd.fail("version", "must be a string");
  rd.unsigned_integer(doc, "", "seed", cfg.seed);
  rd.string(doc, "", "output_dir", cfg.output_dir);
  rd.integer(doc, "", "threads", cfg.threads);

  // Scenario: preset first, then explicit fields on top of it.
  const json empty = json::object();
  const json& sc = doc.contains("scenario") ? doc.at("scenario") : empty;
  rd.require_object(sc, "scenario");
  rd.allow_keys(sc, "scenario",
                {"preset", "range_km", "missile_speed", "target_speed", "theta_deg", "phi_deg",
                 "beta_deg", "alpha_deg", "heading_error_deg", "attitude_error_deg",
                 "target_accel", "target_accel_max", "maneuver", "maneuver_start",
                 "maneuver_switch_offset", "maneuver_duration", "weave_period"});
  rd.string(sc, "scenario", "preset", cfg.preset);
  if (ov.preset) cfg.preset = *ov.preset;
  try {
    cfg.env.scenario = eval::scenario_preset(cfg.preset);
  } catch (const Error& e) {
    rd.fail("scenario.preset", e.what());
  }
  auto& s = cfg.env.scenario;
  for (const char* key : kIntervalKeys) rd.interval(sc, "scenario", key, interval_field(s, key));
  rd.number(sc, "scenario", "target_accel_max", s.target_accel_max);
  if (sc.contains("maneuver")) {
    std::string kind;
    rd.string(sc, "scenario", "maneuver", kind);
    try {
      s.maneuver_kind = scenario::parse_maneuver_kind(kind);
    } catch (const Error& e) {
      rd.fail("scenario.maneuver", e.what());
    }
  }

  const json& mi = doc.contains("missile") ? doc.at("missile") : empty;
  rd.require_object(mi, "missile");
  rd.allow_keys(mi, "missile", {"wet_mass", "dry_mass", "isp", "g_ref", "max_thrust"});
  auto& m = cfg.env.missile;
  rd.number(mi, "missile", "wet_mass", m.wet_mass);
  rd.number(mi, "missile", "dry_mass", m.dry_mass);
  rd.number(mi, "missile", "isp", m.isp);
  rd.number(mi, "missile", "g_ref", m.g_ref);
  rd.number(mi, "missile", "max_thrust", m.max_thrust);
  m.thrusters = sim::default_thrusters(m.max_thrust);

  const json& in = doc.contains("integrator") ? doc.at("integrator") : empty;
  rd.require_object(in, "integrator");
  rd.allow_keys(in, "integrator", {"guidance_period", "coarse_dt", "fine_dt", "fine_range"});
  auto& ig = cfg.env.integrator;
  rd.number(in, "integrator", "guidance_period", ig.guidance_period);
  rd.number(in, "integrator", "coarse_dt", ig.coarse_dt);
  rd.number(in, "integrator", "fine_dt", ig.fine_dt);
  rd.number(in, "integrator", "fine_range", ig.fine_range);

  const json& ep = doc.contains("episode") ? doc.at("episode") : empty;
  rd.require_object(ep, "episode");
  rd.allow_keys(ep, "episode", {"max_time", "fov_half_deg", "hit_radius", "seeker_noise_sigma"});
  rd.number(ep, "episode", "max_time", cfg.env.max_time);
  double fov_deg = rad2deg(cfg.env.fov_half);
  rd.number(ep, "episode", "fov_half_deg", fov_deg);
  cfg.env.fov_half = deg2rad(fov_deg);
  rd.number(ep, "episode", "hit_radius", cfg.env.hit_radius);
  rd.number(ep, "episode", "seeker_noise_sigma", cfg.env.seeker_noise_sigma);
  cfg.reward.hit_radius = cfg.env.hit_radius;

  const json& rw = doc.contains("reward") ? doc.at("reward") : empty;
  rd.require_object(rw, "reward");
  rd.allow_keys(rw, "reward",
                {"alpha", "sigma_e", "sigma_dtheta", "terminal_bonus", "gamma1", "gamma2"});
  rd.number(rw, "reward", "alpha", cfg.reward.alpha);
  rd.number(rw, "reward", "sigma_e", cfg.reward.sigma_e);
  rd.number(rw, "reward", "sigma_dtheta", cfg.reward.sigma_dtheta);
  rd.number(rw, "reward", "terminal_bonus", cfg.reward.terminal_bonus);
  rd.number(rw, "reward", "gamma1", cfg.reward.gamma1);
  rd.number(rw, "reward", "gamma2", cfg.reward.gamma2);

  const json& pp = doc.contains("ppo") ? doc.at("ppo") : empty;
  rd.require_object(pp, "ppo");
  rd.allow_keys(pp, "ppo",
                {"episodes_per_batch", "total_batches", "epochs_per_batch", "minibatches",
                 "kl_target", "kl_floor", "kl_ceiling", "max_extra_epochs", "clip_eps_init", "clip_eps_min", "clip_eps_max", "lr_policy",
                 "lr_value", "entropy_coef", "normalize_advantages", "obs_scale"});
  auto& p = cfg.ppo;
  rd.integer(pp, "ppo", "episodes_per_batch", p.episodes_per_batch);
  rd.integer(pp, "ppo", "total_batches", p.total_batches);
  rd.integer(pp, "ppo", "epochs_per_batch", p.epochs_per_batch);
  rd.integer(pp, "ppo", "minibatches", p.minibatches);
  rd.number(pp, "ppo", "kl_target", p.kl_target);
  rd.number(pp, "ppo", "kl_floor", p.kl_floor);
  rd.number(pp, "ppo", "kl_ceiling", p.kl_ceiling);
  rd.integer(pp, "ppo", "max_extra_epochs", p.max_extra_epochs);
  rd.number(pp, "ppo", "clip_eps_init", p.clip_eps_init);
  rd.number(pp, "ppo", "clip_eps_min", p.clip_eps_min);
  rd.number(pp, "ppo", "clip_eps_max", p.clip_eps_max);
  rd.number(pp, "ppo", "lr_policy", p.lr_policy);
  rd.number(pp, "ppo", "lr_value", p.lr_value);
  rd.number(pp, "ppo", "entropy_coef", p.entropy_coef);
  rd.boolean(pp, "ppo", "normalize_advantages", p.normalize_advantages);
  rd.array4(pp, "ppo", "obs_scale", p.obs_scale);

  const json& cp = doc.contains("campaign") ? doc.at("campaign") : empty;
  rd.require_object(cp, "campaign");
  rd.allow_keys(cp, "campaign", {"n_episodes", "guidance", "checkpoint", "fixed_worst_case"});
  rd.integer(cp, "campaign", "n_episodes", cfg.campaign.n_episodes);
  rd.string(cp, "campaign", "guidance", cfg.campaign.guidance);
  rd.string(cp, "campaign", "checkpoint", cfg.campaign.checkpoint);
  rd.boolean(cp, "campaign", "fixed_worst_case", cfg.campaign.fixed_worst_case);
}

void apply_environment(RunConfig& cfg) {
  if (const char* dir = std::getenv("HOMING_OUTPUT_DIR"); dir && *dir) cfg.output_dir = dir;
  if (const char* t = std::getenv("HOMING_THREADS"); t && *t) {
    char* end = nullptr;
    const long n = std::strtol(t, &end, 10);
    if (*end != '\0' || n < 1 || n > 4096)
      throw Error(ErrorCode::kConfig, std::string("HOMING_THREADS must be a positive integer, got '") +
                                          t + "'");
    cfg.threads = static_cast<int>(n);
  }
}

json interval_json(const scenario::Interval& iv) { return json::array({iv.min, iv.max}); }

}  // namespace

void RunConfig::validate() const {
  env.validate();
  reward.validate();
  ppo.validate();
  if (threads < 1) throw Error(ErrorCode::kConfig, "threads must be >= 1");
  if (output_dir.empty()) throw Error(ErrorCode::kConfig, "output_dir must not be empty");
  if (campaign.n_episodes < 1) throw Error(ErrorCode::kConfig, "campaign.n_episodes must be >= 1");
  eval::parse_guidance(campaign.guidance);
}

ppo::TrainConfig RunConfig::train_config() const {
  ppo::TrainConfig t;
  t.env = env;
  t.ppo = ppo;
  t.ppo.threads = threads;
  t.reward = reward;
  t.seed = seed;
  return t;
}

eval::CampaignConfig RunConfig::campaign_config() const {
  eval::CampaignConfig c;
  c.n_episodes = campaign.n_episodes;
  c.guidance = eval::parse_guidance(campaign.guidance);
  c.checkpoint_path = campaign.checkpoint;
  c.env = env;
  c.fixed_worst_case = campaign.fixed_worst_case;
  c.preset = preset;
  c.seed = seed;
  c.threads = threads;
  return c;
}

RunConfig parse_run_config(const std::string& text, const std::string& source,
                           const Overrides& ov) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    const auto [line, col] = line_col(text, e.byte > 0 ? e.byte - 1 : 0);
    std::string msg = e.what();
    if (const auto pos = msg.find("parse error"); pos != std::string::npos) msg = msg.substr(pos);
    throw Error(ErrorCode::kConfig, source + ":" + std::to_string(line) + ":" +
                                        std::to_string(col) + ": " + msg);
  }

  int line = 1;
  KeyLineRecorder recorder(&line);
  json::sax_parse(LineCountingIterator(text.data(), &line),
                  LineCountingIterator(text.data() + text.size(), &line), &recorder);
  const Reader rd(source, std::move(recorder.lines));

  RunConfig cfg;
  read_document(doc, rd, cfg, ov);
  if (ov.use_environment) apply_environment(cfg);
  if (ov.seed) cfg.seed = *ov.seed;
  if (ov.threads) cfg.threads = *ov.threads;
  if (ov.output_dir) cfg.output_dir = *ov.output_dir;
  if (ov.episodes) cfg.campaign.n_episodes = *ov.episodes;
  if (ov.guidance) cfg.campaign.guidance = *ov.guidance;
  if (ov.checkpoint) cfg.campaign.checkpoint = *ov.checkpoint;
  if (ov.total_batches) cfg.ppo.total_batches = *ov.total_batches;
  try {
    cfg.validate();
  } catch (const Error& e) {
    throw Error(ErrorCode::kConfig, source + ": " + e.what());
  }
  return cfg;
}

RunConfig load_run_config(const std::string& path, const Overrides& ov) {
  if (path.empty()) return parse_run_config("{}", "<defaults>", ov);
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error(ErrorCode::kIo, "cannot open config file '" + path + "'");
  std::ostringstream ss;
  ss << is.rdbuf();
  return parse_run_config(ss.str(), path, ov);
}

std::string resolved_json(const RunConfig& cfg) {
  const auto& s = cfg.env.scenario;
  json sc;
  sc["preset"] = cfg.preset;
  for (const char* key : kIntervalKeys)
    sc[key] = interval_json(interval_field(s, key));
  sc["target_accel_max"] = s.target_accel_max;
  sc["maneuver"] = scenario::maneuver_kind_name(s.maneuver_kind);

  const auto& m = cfg.env.missile;
  const auto& ig = cfg.env.integrator;
  const auto& r = cfg.reward;
  const auto& p = cfg.ppo;
  json doc;
  doc["version"] = HOMING_VERSION;
  doc["seed"] = cfg.seed;
  doc["output_dir"] = cfg.output_dir;
  doc["threads"] = cfg.threads;
  doc["scenario"] = sc;
  doc["missile"] = {{"wet_mass", m.wet_mass}, {"dry_mass", m.dry_mass}, {"isp", m.isp},
                    {"g_ref", m.g_ref},       {"max_thrust", m.max_thrust}};
  doc["integrator"] = {{"guidance_period", ig.guidance_period},
                       {"coarse_dt", ig.coarse_dt},
                       {"fine_dt", ig.fine_dt},
                       {"fine_range", ig.fine_range}};
  doc["episode"] = {{"max_time", cfg.env.max_time},
                    {"fov_half_deg", rad2deg(cfg.env.fov_half)},
                    {"hit_radius", cfg.env.hit_radius},
                    {"seeker_noise_sigma", cfg.env.seeker_noise_sigma}};
  doc["reward"] = {{"alpha", r.alpha},
                   {"sigma_e", r.sigma_e},
                   {"sigma_dtheta", r.sigma_dtheta},
                   {"terminal_bonus", r.terminal_bonus},
                   {"gamma1", r.gamma1},
                   {"gamma2", r.gamma2}};
  doc["ppo"] = {{"episodes_per_batch", p.episodes_per_batch},
                {"total_batches", p.total_batches},
                {"epochs_per_batch", p.epochs_per_batch},
                {"minibatches", p.minibatches},
                {"kl_target", p.kl_target},
                {"kl_floor", p.kl_floor},
                {"kl_ceiling", p.kl_ceiling},
                {"max_extra_epochs", p.max_extra_epochs},
                {"clip_eps_init", p.clip_eps_init},
                {"clip_eps_min", p.clip_eps_min},
                {"clip_eps_max", p.clip_eps_max},
                {"lr_policy", p.lr_policy},
                {"lr_value", p.lr_value},
                {"entropy_coef", p.entropy_coef},
                {"normalize_advantages", p.normalize_advantages},
                {"obs_scale", p.obs_scale}};
  doc["campaign"] = {{"n_episodes", cfg.campaign.n_episodes},
                     {"guidance", cfg.campaign.guidance},
                     {"checkpoint", cfg.campaign.checkpoint},
                     {"fixed_worst_case", cfg.campaign.fixed_worst_case}};
  return doc.dump(2) + "\n";
}

std::string write_provenance(const RunConfig& cfg, const std::string& name) {
  const std::filesystem::path full = std::filesystem::path(cfg.output_dir) / name;
  std::filesystem::create_directories(full.parent_path());
  const std::string path = full.string();
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw Error(ErrorCode::kIo, "cannot write " + path);
  os << resolved_json(cfg);
  if (!os) throw Error(ErrorCode::kIo, "failed writing " + path);
  return path;
}

}  // namespace homing::config
