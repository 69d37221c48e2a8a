#pragma once

#include <stdexcept>
#include <string>

#include "driftsync/simulator.hpp"

namespace driftsync {

// malformed config file; the message carries file:line context
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/**
 * Flat `key = value` text, one pair per line, `#` comments, dotted
 * section keys (stream.kind, strategy.delta, ...). Unknown keys,
 * duplicates, unparseable values and missing required keys (m, rounds,
 * stream.kind, strategy.kind) all raise ConfigError naming the line.
 * The full key list is documented in the README.
 */
ExperimentConfig parse_config_text(const std::string& text, const std::string& origin);
ExperimentConfig parse_config_file(const std::string& path);

}  // namespace driftsync
