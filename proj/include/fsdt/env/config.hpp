#pragma once
// Structured-text (JSON) environment configuration. All Table-style defaults
// are embedded; any key may be overridden.

#include <cstdint>
#include <string>

#include <nlohmann/json.hpp>

#include "fsdt/env/environment.hpp"

namespace fsdt::env {

nlohmann::ordered_json env_config_to_json(const EnvConfig& cfg);

// Applies overrides on top of defaults (or on top of `base`). Unknown keys
// are rejected.
EnvConfig env_config_from_json(const nlohmann::json& j,
                               const EnvConfig& base = EnvConfig{});

EnvConfig load_env_config(const std::string& path);

// FNV-1a over the canonical JSON dump; ties offline datasets to the exact
// environment configuration they were collected from.
std::uint64_t env_config_hash(const EnvConfig& cfg);

}  // namespace fsdt::env
