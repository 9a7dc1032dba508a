#pragma once

#include <string>

#include "timebin/config.hpp"

namespace timebin {

/// Parses a scenario from JSON text.  `origin` names the source (a file
/// path, or "<inline>") and prefixes parse errors.  Every recognized key
/// is optional and falls back to the struct default; unknown keys and type
/// mismatches raise ConfigError carrying the dotted key path (for
/// example "run.mzi.insertion_loss_db").  The parsed scenario is validated
/// before it is returned.
Scenario scenario_from_json(const std::string& text,
                            const std::string& origin = "<inline>");

/// Reads and parses a scenario file (see scenario_from_json).
Scenario load_scenario_file(const std::string& path);

/// Serializes the fully resolved scenario (every field, defaults
/// included) as pretty-printed JSON in schema order.  The output parses
/// back to an identical scenario, which makes manifests self-contained.
std::string scenario_to_json(const Scenario& scenario);

}  // namespace timebin
