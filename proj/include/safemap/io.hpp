#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "safemap/analysis.hpp"
#include "safemap/config.hpp"
#include "safemap/episode.hpp"

namespace safemap {

namespace fs = std::filesystem;

/// Lowercase hex SHA-256 of a byte string / of a file's contents.
std::string sha256_hex(const std::string& bytes);
std::string sha256_file(const fs::path& path);

std::string plan_csv(const MeasurementPlan& plan, int dimension);
std::string measurements_csv(const Dataset& data, int dimension);
std::string trajectory_csv(const std::vector<Path>& legs, int dimension);
std::string snapshots_csv(const std::vector<Snapshot>& snapshots);
/// Binary P5 image, 0 = safe, 255 = unsafe, top row = max y. 3D maps stack
/// their z-slices vertically, lowest z first.
std::string map_pgm(const BinarySafetyMap& map);
nlohmann::json map_sidecar(const BinarySafetyMap& map);
nlohmann::json regions_json(const DetectedRegionSet& regions, int dimension);
nlohmann::json step_json(const StepLog& log, int dimension);

/// Writes every run output under `dir` plus manifest.json listing each file's
/// hash. Returns the manifest.
nlohmann::json write_run(const fs::path& dir, const ExperimentConfig& config,
                         const EpisodeResult& result);

/// Writes plan.csv and geometry.json for the offline plan.
void write_plan(const fs::path& dir, const ExperimentConfig& config);

/// Reads a run directory back (manifest hashes verified) and writes reports
/// under dir/analysis. Throws ConfigError on a missing or corrupted run.
void analyze_run(const fs::path& dir, double eta);

std::vector<Snapshot> parse_snapshots_csv(const std::string& text);
Dataset parse_measurements_csv(const std::string& text, int dimension);
PointList parse_plan_points(const std::string& text, int dimension);

std::string read_file(const fs::path& path);
void write_file(const fs::path& path, const std::string& bytes);

}  // namespace safemap
