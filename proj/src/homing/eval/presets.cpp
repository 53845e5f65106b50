#include "homing/eval/presets.hpp"

#include "homing/common/error.hpp"

namespace homing::eval {

const std::vector<std::string>& preset_names() {
  static const std::vector<std::string> names = {"table5", "table6",     "table7",
                                                 "table8", "zero-error", "extended-ic"};
  return names;
}

scenario::ScenarioConfig scenario_preset(const std::string& name) {
  using scenario::Interval;
  using scenario::ManeuverKind;
  scenario::ScenarioConfig cfg;  // defaults are the randomized table5 set
  if (name == "table5") return cfg;
  if (name == "table6") return scenario::worst_case(cfg);
  if (name == "table7") {
    cfg.maneuver_kind = ManeuverKind::kBarrelRoll;
    cfg.target_accel = {cfg.target_accel_max, cfg.target_accel_max};
    return cfg;
  }
  if (name == "table8") {
    cfg.heading_error_deg = {6.0, 6.0};
    cfg.target_accel = {cfg.target_accel_max, cfg.target_accel_max};
    return cfg;
  }
  if (name == "zero-error") {
    cfg.heading_error_deg = {0.0, 0.0};
    cfg.attitude_error_deg = {0.0, 0.0};
    cfg.maneuver_kind = ManeuverKind::kNone;
    cfg.target_accel = {0.0, 0.0};
    return cfg;
  }
  if (name == "extended-ic") {
    cfg.range_km = {50.0, 75.0};
    cfg.missile_speed = {3000.0, 3500.0};
    cfg.target_speed = {3000.0, 4000.0};
    cfg.theta_deg = {-20.0, 20.0};
    cfg.phi_deg = {-20.0, 20.0};
    cfg.beta_deg = {-15.0, 15.0};
    cfg.alpha_deg = {-15.0, 15.0};
    return cfg;
  }
  throw Error(ErrorCode::kConfig, "unknown preset '" + name +
                                      "' (expected table5, table6, table7, table8, zero-error or "
                                      "extended-ic)");
}

}  // namespace homing::eval
