#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "qkdsim/engine.hpp"

namespace qkdsim {

/// Parse or validation failure, carrying the dotted path of the offending
/// key (e.g. "attack.blinding_slots" or "detectors.2.efficiency").
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string key_path, const std::string& message)
      : std::runtime_error(key_path.empty() ? message : key_path + ": " + message),
        key_path_(std::move(key_path)) {}
  const std::string& key_path() const { return key_path_; }

 private:
  std::string key_path_;
};

/// Scenario JSON. Every field is optional and defaults to ScenarioConfig's
/// value; unknown keys are rejected.
ScenarioConfig scenario_from_json(std::string_view text, const ScenarioConfig& base = {});

/// Fully resolved config; the output parses back to an identical config.
std::string scenario_to_json(const ScenarioConfig& cfg);

/// `key.path=value`. `*` in an array position applies to every element, so
/// `detectors.*.dark_prob_per_slot=0` zeroes all four dark rates. The value is
/// read as JSON when possible, otherwise as a bare string (enum names).
void apply_override(ScenarioConfig& cfg, std::string_view assignment);

/// Sets a numeric field by path; throws ConfigError for unknown or
/// non-numeric paths.
void set_numeric(ScenarioConfig& cfg, std::string_view path, double value);

std::vector<std::string> preset_names();

/// "normal", "full-attack" or "partial-attack".
ScenarioConfig preset(std::string_view name);

/// Flat JSON object with the RunMetrics field names; no-data values are null.
std::string metrics_to_json(const RunMetrics& m);

}  // namespace qkdsim
