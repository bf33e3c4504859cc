#pragma once

#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "safemap/episode.hpp"

namespace safemap {

struct ExperimentConfig {
  std::optional<std::string> preset;  // field preset name, if the field came from one
  EpisodeConfig episode;
  std::string output = "out";

  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

/// Parses an experiment config. Unknown keys and type errors raise ConfigError
/// naming the offending field path; the result is fully validated.
ExperimentConfig parse_config(const nlohmann::json& doc);
ExperimentConfig load_config(const std::string& path);

/// Inverse of parse_config: parse_config(to_json(c)) == c.
nlohmann::json to_json(const ExperimentConfig& config);

}  // namespace safemap
