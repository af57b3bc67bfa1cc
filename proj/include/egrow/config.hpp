#pragma once

#include <string>

#include "egrow/scenarios.hpp"

namespace egrow {

/// Parse TOML-style configuration text. The `scenario` key selects a preset;
/// every other key overrides one preset field. Keys may be written inside
/// their section (`[time]` then `dt = 0.005`) or bare at the top level
/// (`dt = 0.005`). Unknown keys, bad syntax and invalid values throw
/// ConfigError with the key path and line number.
ScenarioConfig parse_config_text(const std::string& text, const std::string& origin = "<text>");

/// Read and parse a file; throws ConfigError if it cannot be read.
ScenarioConfig parse_config_file(const std::string& path);

/// Canonical sectioned text that parses back to the same configuration.
/// Floating-point values are printed with 17 significant digits.
std::string config_echo(const ScenarioConfig& config);

}  // namespace egrow
