#pragma once

#include <cstdint>
#include <json.hpp>
#include <optional>
#include <string>

#include "blockcast/baselines.hpp"
#include "blockcast/lidar_prep.hpp"
#include "blockcast/simulator.hpp"
#include "blockcast/windowing.hpp"

namespace blockcast {

using Json = nlohmann::ordered_json;

struct BaselineOptions {
  bool direction_uses_target = true;
  TrackPoint track_point = TrackPoint::Nearest;
};

// Everything one pipeline run needs. Unknown keys are rejected at every level.
struct RunConfig {
  std::uint64_t seed = 0;
  ScenarioConfig scenario = street_a();
  ScrConfig scr;
  WindowConfig window;
  DbscanParams dbscan;
  BaselineOptions baseline;
  std::string output_dir = "out";

  void validate() const;
};

RunConfig run_config_from_json(const Json& j);
RunConfig load_run_config(const std::string& path);
Json to_json(const RunConfig& c);

ScenarioConfig scenario_from_json(const Json& j);
Json to_json(const ScenarioConfig& c);
ScrConfig scr_from_json(const Json& j);
Json to_json(const ScrConfig& c);
WindowConfig window_from_json(const Json& j);
Json to_json(const WindowConfig& c);

Json to_json(const MovingObject& o);
MovingObject object_from_json(const Json& j);

}  // namespace blockcast
