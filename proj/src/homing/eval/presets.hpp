#pragma once

#include "homing/scenario/scenario.hpp"

#include <string>
#include <vector>

namespace homing::eval {

// Named engagement presets:
//   table5       randomized initial conditions, bang-bang target
//   table6       as table5 with heading error, attitude error and target accel pinned at max
//   table7       barrel-roll target at max acceleration, randomized otherwise
//   table8       6 deg heading error and max target accel pinned, attitude error randomized
//   zero-error   no heading or attitude error, non-maneuvering target
//   extended-ic  wider range, angle and speed intervals, bang-bang target
const std::vector<std::string>& preset_names();

/// Throws kConfig for an unknown name.
scenario::ScenarioConfig scenario_preset(const std::string& name);

}  // namespace homing::eval
