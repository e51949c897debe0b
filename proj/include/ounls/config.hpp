#pragma once

#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "ounls/experiments.hpp"

namespace ounls {

/// Parses key-value text with sections [model], [grid], [initial] and [run],
/// then applies `overrides` ("section.key=value", or "key=value" when the key
/// name is unique across sections). Unknown keys, malformed values and failed
/// validation raise ConfigError. Lines starting with '#' or ';' are comments.
ScenarioConfig parse_config(std::string_view text, const std::vector<std::string>& overrides = {});

/// Reads `path` (ConfigError when missing) and forwards to parse_config.
ScenarioConfig parse_config_file(const std::string& path,
                                 const std::vector<std::string>& overrides = {});

/// Every accepted key as "section.key", in documentation order.
std::vector<std::string> config_keys();

/// The fully resolved configuration (defaults applied, L resolved).
nlohmann::ordered_json config_to_json(const ScenarioConfig& cfg);

}  // namespace ounls
