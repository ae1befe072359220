#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "mcdist/harness.hpp"

// Plain-text experiment configs: "key = value" lines under [section] headers,
// one level deep. Sections: environment, simulation, sweep, protocols.
// File units are um, ms, mm/s and 1/s; values are converted to SI on load.

namespace mcdist {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ConfigEntry {
  std::string section;
  std::string key;
  std::string value;
  int line = 0;
};

struct ParsedConfig {
  std::vector<ConfigEntry> entries;

  // FNV-1a over the canonical form (sections and keys sorted, repeated keys
  // kept in file order), so reordering lines does not change the digest.
  std::string digest() const;
};

ParsedConfig parse_config_text(const std::string& text);
ParsedConfig load_config_file(const std::string& path);

// Builds the experiment description, validating types, units and ranges.
// Throws ConfigError with a line reference on any problem.
ExperimentConfig make_experiment_config(const ParsedConfig& raw);

}  // namespace mcdist
