#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "patchslide/sim.hpp"

namespace patchslide {

/// A fully parsed scenario file: the scene, the simulation setup and an
/// optional controller block. All file units are SI with suffixed keys.
struct Scenario {
  SimConfig config;
  std::optional<ControllerConfig> controller;
};

/// Parse a scenario document. Throws SchemaError with the offending key path
/// (or parser line info) in the message.
Scenario parse_scenario(const std::string& text, const std::string& name);

Scenario load_scenario(const std::filesystem::path& path);

/// Serialize a scene back into scenario JSON (used by the fit command to
/// emit the identified parameters). Deterministic key order and formatting.
std::string scenario_to_json(const Scenario& scenario);

}  // namespace patchslide
