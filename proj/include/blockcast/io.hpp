#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "blockcast/baselines.hpp"
#include "blockcast/config.hpp"
#include "blockcast/lidar_prep.hpp"
#include "blockcast/simulator.hpp"
#include "blockcast/windowing.hpp"

namespace blockcast {

namespace fs = std::filesystem;

// Trajectory directory: scans.csv, powers.csv, link.csv, objects.json, config.json.
void write_trajectory(const fs::path& dir, const Trajectory& trajectory,
                      const ScenarioConfig& config);

struct LoadedTrajectory {
  ScenarioConfig config;
  Trajectory trajectory;
};
LoadedTrajectory read_trajectory(const fs::path& dir);

// dict.csv: header "q,q_d", rows ascending lexicographically.
void write_dictionary(const fs::path& path, const StaticDictionary& dict);
StaticDictionary read_dictionary(const fs::path& path, const ScrConfig& cfg);

// t,q,q_d,angle_rad,distance_m
void write_preprocessed(const fs::path& path, const std::vector<QuantizedScan>& scans);
std::vector<QuantizedScan> read_preprocessed(const fs::path& path, std::int64_t instances,
                                             const ScrConfig& cfg);

Json window_to_json(const ObservationWindow& w);
ObservationWindow observation_window_from_json(const Json& j);
void write_windows(const fs::path& path, const std::vector<ObservationWindow>& windows);
std::vector<ObservationWindow> read_windows(const fs::path& path);

Json make_manifest(const std::vector<ObservationWindow>& windows, const RunConfig& config,
                   bool scr);

void write_params(const fs::path& path, const BaselineParams& params);
BaselineParams read_params(const fs::path& path);

struct PredictionRow {
  std::size_t window_id = 0;
  int problem = 1;
  std::optional<double> value;  // unset: the baseline found no crossing
};
void write_preds(const fs::path& path, const std::vector<PredictionRow>& rows);
std::vector<PredictionRow> read_preds(const fs::path& path);

void write_text(const fs::path& path, const std::string& content);
std::string read_text(const fs::path& path);

}  // namespace blockcast
