#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>

#include "galoc/scenario.hpp"

namespace galoc {

/// Invalid configuration: unreadable file, bad JSON, unknown key, wrong type
/// or a value that fails validation.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Parses a JSON scenario config. The optional "preset" key (default
/// s1_clear) selects the base; every other key overrides it.
ScenarioConfig config_from_json(std::string_view text);
ScenarioConfig load_config(const std::filesystem::path& path);

/// Preset by name, ConfigError when unknown.
ScenarioConfig preset_config(std::string_view name);

/// Full config as JSON, loadable with config_from_json.
std::string config_to_json(const ScenarioConfig& cfg);

}  // namespace galoc
