#pragma once

#include <stdexcept>
#include <string>

#include <nlohmann/json_fwd.hpp>

#include "sgalm/scenario.hpp"
#include "sgalm/solver.hpp"

namespace sgalm {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ParsedConfig {
  ScenarioConfig scenario;
  SolverOptions solver;
};

/// Flat key = value format, one pair per line, '#' comments. Keys are the
/// ScenarioConfig/SolverOptions field names; power-valued keys accept a
/// _dbm suffix (converted on load). Throws ConfigError naming the key on
/// missing/unknown/malformed entries.
ParsedConfig parse_config(const std::string& text);
ParsedConfig load_config(const std::string& path);

/// Fully resolved configuration (linear and dBm views) for echoing into
/// summaries and provenance blocks.
nlohmann::json config_to_json(const ParsedConfig& cfg);

}  // namespace sgalm
