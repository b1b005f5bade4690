#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "csicalib/autocontrol.hpp"
#include "csicalib/chipsim.hpp"
#include "csicalib/quality.hpp"

namespace csicalib {

/// Everything a `simulate`, `sweep` or `control` run reads from its JSON config.
/// Every key is optional; unknown keys are rejected.
struct RunConfig {
  SimConfig sim;
  PhaseDistortion distortion;
  Thresholds thresholds;
  ControlThresholds control;
  int max_iters = 5;
  /// Explicit sweep rows, or empty when `sweep_preset` names a built-in table.
  /// With neither set the sweep is the equal-attenuation table.
  std::vector<std::array<double, 3>> sweep_rows;
  std::string sweep_preset;  // "", "group_one", "group_two"

  std::vector<SimConfig> sweep() const;
};

/// Throws ConfigError on malformed JSON, wrong types or unknown keys.
RunConfig parse_run_config(std::string_view json_text);
std::string run_config_to_json(const RunConfig& config);

std::string sim_config_to_json(const SimConfig& config);

}  // namespace csicalib
