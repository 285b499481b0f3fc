#include "blockcast/config.hpp"

#include <algorithm>
#include <fstream>
#include <initializer_list>

#include "blockcast/error.hpp"
#include "blockcast/format.hpp"

namespace blockcast {

namespace {

void check_object(const Json& j, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where, "expected an object");
}

void check_keys(const Json& j, std::initializer_list<const char*> allowed,
                const std::string& where) {
  check_object(j, where);
  for (const auto& [key, _] : j.items()) {
    const bool ok = std::any_of(allowed.begin(), allowed.end(),
                                [&](const char* a) { return key == a; });
    if (!ok) throw ConfigError(where.empty() ? key : where + "." + key, "unknown key");
  }
}

template <typename T>
void read(const Json& j, const char* key, T& out, const std::string& where) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(where.empty() ? key : where + "." + key, "wrong type");
  }
}

Json pair(double a, double b) { return Json::array({round9(a), round9(b)}); }

std::array<double, 2> read_pair(const Json& j, const std::string& field) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) {
    throw ConfigError(field, "expected [number, number]");
  }
  return {j[0].get<double>(), j[1].get<double>()};
}

Json class_to_json(const ObjectClass& c) {
  Json j;
  j["name"] = c.name;
  j["width_m"] = round9(c.width_m);
  j["length_m"] = round9(c.length_m);
  j["speed_range_mps"] = pair(c.speed_min_mps, c.speed_max_mps);
  j["severity_level"] = c.severity_level;
  j["mean_block_duration_ms"] = round9(c.mean_block_duration_ms);
  j["weight"] = round9(c.weight);
  return j;
}

ObjectClass class_from_json(const Json& j, const std::string& where) {
  check_keys(j,
             {"name", "width_m", "length_m", "speed_range_mps", "severity_level",
              "mean_block_duration_ms", "weight"},
             where);
  ObjectClass c;
  read(j, "name", c.name, where);
  read(j, "width_m", c.width_m, where);
  read(j, "length_m", c.length_m, where);
  if (j.contains("speed_range_mps")) {
    const auto r = read_pair(j["speed_range_mps"], where + ".speed_range_mps");
    c.speed_min_mps = r[0];
    c.speed_max_mps = r[1];
  }
  read(j, "severity_level", c.severity_level, where);
  read(j, "mean_block_duration_ms", c.mean_block_duration_ms, where);
  read(j, "weight", c.weight, where);
  return c;
}

int direction_from_json(const Json& j, const std::string& field) {
  if (!j.is_number_integer() || (j.get<int>() != 0 && j.get<int>() != 1)) {
    throw ConfigError(field, "must be 0 or 1");
  }
  return j.get<int>();
}

}  // namespace

Json to_json(const ScenarioConfig& c) {
  Json j;
  j["seed"] = c.seed;
  j["duration_instances"] = c.duration_instances;
  j["instance_dt_s"] = round9(c.instance_dt_s);
  j["lidar_points_per_rev"] = c.lidar_points_per_rev;
  j["lidar_max_range_m"] = round9(c.lidar_max_range_m);
  j["lidar_jitter_std_m"] = round9(c.lidar_jitter_std_m);
  j["phantom_rate"] = round9(c.phantom_rate);
  j["num_beams"] = c.num_beams;
  j["beam_fov"] = pair(c.beam_fov[0], c.beam_fov[1]);
  j["array_elements"] = c.array_elements;
  j["noise_std"] = round9(c.noise_std);
  j["blockage_attenuation_db"] = round9(c.blockage_attenuation_db);
  j["reflection_coeff"] = round9(c.reflection_coeff);
  j["tx_position"] = pair(c.tx_position.x(), c.tx_position.y());
  j["static_objects"] = Json::array();
  for (const auto& s : c.static_objects) {
    j["static_objects"].push_back(
        Json::array({round9(s.a.x()), round9(s.a.y()), round9(s.b.x()), round9(s.b.y())}));
  }
  j["arrival_rate"] = round9(c.arrival_rate);
  j["lane_offsets_m"] = pair(c.lane_offsets_m[0], c.lane_offsets_m[1]);
  j["spawn_distance_m"] = round9(c.spawn_distance_m);
  j["min_gap_instances"] = c.min_gap_instances;
  j["object_catalog"] = Json::array();
  for (const auto& cls : c.object_catalog) j["object_catalog"].push_back(class_to_json(cls));
  j["scripted_objects"] = Json::array();
  for (const auto& s : c.scripted_objects) {
    Json o;
    o["class"] = s.class_name;
    o["direction"] = static_cast<int>(s.direction);
    o["speed_mps"] = round9(s.speed_mps);
    o["spawn_instance"] = s.spawn_instance;
    if (s.lane_offset_m) o["lane_offset_m"] = round9(*s.lane_offset_m);
    j["scripted_objects"].push_back(o);
  }
  return j;
}

ScenarioConfig scenario_from_json(const Json& j) {
  const std::string w = "scenario";
  check_keys(j,
             {"preset", "seed", "duration_instances", "instance_dt_s", "lidar_points_per_rev",
              "lidar_max_range_m", "lidar_jitter_std_m", "phantom_rate", "num_beams", "beam_fov",
              "array_elements", "noise_std", "blockage_attenuation_db", "reflection_coeff",
              "tx_position", "static_objects", "arrival_rate", "lane_offsets_m",
              "spawn_distance_m", "min_gap_instances", "object_catalog", "scripted_objects"},
             w);
  ScenarioConfig c = street_a();
  if (j.contains("preset")) {
    const auto preset = j["preset"].is_string() ? j["preset"].get<std::string>() : "";
    if (preset == "empty") {
      c.static_objects.clear();
      c.arrival_rate = 0.0;
      c.phantom_rate = 0.0;
    } else if (preset != "street-a") {
      throw ConfigError("scenario.preset", "expected \"street-a\" or \"empty\"");
    }
  }
  read(j, "seed", c.seed, w);
  read(j, "duration_instances", c.duration_instances, w);
  read(j, "instance_dt_s", c.instance_dt_s, w);
  read(j, "lidar_points_per_rev", c.lidar_points_per_rev, w);
  read(j, "lidar_max_range_m", c.lidar_max_range_m, w);
  read(j, "lidar_jitter_std_m", c.lidar_jitter_std_m, w);
  read(j, "phantom_rate", c.phantom_rate, w);
  read(j, "num_beams", c.num_beams, w);
  if (j.contains("beam_fov")) c.beam_fov = read_pair(j["beam_fov"], "scenario.beam_fov");
  read(j, "array_elements", c.array_elements, w);
  read(j, "noise_std", c.noise_std, w);
  read(j, "blockage_attenuation_db", c.blockage_attenuation_db, w);
  read(j, "reflection_coeff", c.reflection_coeff, w);
  if (j.contains("tx_position")) {
    const auto p = read_pair(j["tx_position"], "scenario.tx_position");
    c.tx_position = {p[0], p[1]};
  }
  if (j.contains("static_objects")) {
    const auto& arr = j["static_objects"];
    if (!arr.is_array()) throw ConfigError("scenario.static_objects", "expected an array");
    c.static_objects.clear();
    for (const auto& s : arr) {
      if (!s.is_array() || s.size() != 4) {
        throw ConfigError("scenario.static_objects", "expected [x1, y1, x2, y2] entries");
      }
      for (const auto& v : s) {
        if (!v.is_number()) throw ConfigError("scenario.static_objects", "expected numbers");
      }
      c.static_objects.push_back({{s[0].get<double>(), s[1].get<double>()},
                                  {s[2].get<double>(), s[3].get<double>()}});
    }
  }
  read(j, "arrival_rate", c.arrival_rate, w);
  if (j.contains("lane_offsets_m")) {
    c.lane_offsets_m = read_pair(j["lane_offsets_m"], "scenario.lane_offsets_m");
  }
  read(j, "spawn_distance_m", c.spawn_distance_m, w);
  read(j, "min_gap_instances", c.min_gap_instances, w);
  if (j.contains("object_catalog")) {
    if (!j["object_catalog"].is_array()) {
      throw ConfigError("scenario.object_catalog", "expected an array");
    }
    c.object_catalog.clear();
    for (const auto& e : j["object_catalog"]) {
      c.object_catalog.push_back(class_from_json(e, "scenario.object_catalog"));
    }
  }
  if (j.contains("scripted_objects")) {
    if (!j["scripted_objects"].is_array()) {
      throw ConfigError("scenario.scripted_objects", "expected an array");
    }
    const std::string sw = "scenario.scripted_objects";
    for (const auto& e : j["scripted_objects"]) {
      check_keys(e, {"class", "direction", "speed_mps", "spawn_instance", "lane_offset_m"}, sw);
      ScriptedObject s;
      read(e, "class", s.class_name, sw);
      if (e.contains("direction")) {
        s.direction = static_cast<Direction>(direction_from_json(e["direction"], sw + ".direction"));
      }
      read(e, "speed_mps", s.speed_mps, sw);
      read(e, "spawn_instance", s.spawn_instance, sw);
      if (e.contains("lane_offset_m")) {
        double lane = 0;
        read(e, "lane_offset_m", lane, sw);
        s.lane_offset_m = lane;
      }
      c.scripted_objects.push_back(s);
    }
  }
  return c;
}

Json to_json(const ScrConfig& c) {
  Json j;
  j["phi1"] = round9(c.phi1);
  j["phi2"] = round9(c.phi2);
  j["angle_levels"] = c.angle_levels;
  j["distance_levels"] = c.distance_levels;
  j["distance_step_m"] = round9(c.distance_step_m);
  j["dictionary_frames"] = c.dictionary_frames;
  return j;
}

ScrConfig scr_from_json(const Json& j) {
  const std::string w = "scr";
  check_keys(j,
             {"phi1", "phi2", "angle_levels", "distance_levels", "distance_step_m",
              "dictionary_frames"},
             w);
  ScrConfig c;
  read(j, "phi1", c.phi1, w);
  read(j, "phi2", c.phi2, w);
  read(j, "angle_levels", c.angle_levels, w);
  read(j, "distance_levels", c.distance_levels, w);
  read(j, "distance_step_m", c.distance_step_m, w);
  read(j, "dictionary_frames", c.dictionary_frames, w);
  return c;
}

Json to_json(const WindowConfig& c) {
  Json j;
  j["observation"] = c.observation;
  j["horizon"] = c.horizon;
  j["stride"] = c.stride;
  j["balance"] = c.balance;
  j["severity_edges_ms"] = Json::array();
  for (const double e : c.severity.edges_ms) j["severity_edges_ms"].push_back(round9(e));
  if (c.severity.upper_ms) j["severity_upper_ms"] = round9(*c.severity.upper_ms);
  return j;
}

WindowConfig window_from_json(const Json& j) {
  const std::string w = "window";
  check_keys(j,
             {"observation", "horizon", "stride", "balance", "severity_edges_ms",
              "severity_upper_ms"},
             w);
  WindowConfig c;
  read(j, "observation", c.observation, w);
  read(j, "horizon", c.horizon, w);
  read(j, "stride", c.stride, w);
  read(j, "balance", c.balance, w);
  read(j, "severity_edges_ms", c.severity.edges_ms, w);
  if (j.contains("severity_upper_ms")) {
    double upper = 0;
    read(j, "severity_upper_ms", upper, w);
    c.severity.upper_ms = upper;
  }
  return c;
}

void RunConfig::validate() const {
  scenario.validate();
  scr.validate();
  window.validate();
  dbscan.validate();
}

RunConfig run_config_from_json(const Json& j) {
  check_keys(j, {"seed", "scenario", "scr", "window", "dbscan", "baseline", "output_dir"}, "");
  RunConfig c;
  read(j, "seed", c.seed, "");
  if (j.contains("scenario")) c.scenario = scenario_from_json(j["scenario"]);
  // The top-level seed drives every random stream unless the scenario pins one.
  if (!j.contains("scenario") || !j["scenario"].contains("seed")) c.scenario.seed = c.seed;
  if (j.contains("scr")) c.scr = scr_from_json(j["scr"]);
  if (j.contains("window")) c.window = window_from_json(j["window"]);
  c.window.balance_seed = c.seed;
  if (j.contains("dbscan")) {
    check_keys(j["dbscan"], {"eps", "min_pts"}, "dbscan");
    read(j["dbscan"], "eps", c.dbscan.eps, "dbscan");
    read(j["dbscan"], "min_pts", c.dbscan.min_pts, "dbscan");
  }
  if (j.contains("baseline")) {
    check_keys(j["baseline"], {"direction_uses_target", "track_point"}, "baseline");
    read(j["baseline"], "direction_uses_target", c.baseline.direction_uses_target, "baseline");
    if (j["baseline"].contains("track_point")) {
      std::string track;
      read(j["baseline"], "track_point", track, "baseline");
      if (track == "mean") {
        c.baseline.track_point = TrackPoint::Mean;
      } else if (track == "nearest") {
        c.baseline.track_point = TrackPoint::Nearest;
      } else {
        throw ConfigError("baseline.track_point", "must be \"mean\" or \"nearest\"");
      }
    }
  }
  read(j, "output_dir", c.output_dir, "");
  c.validate();
  return c;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open config " + path);
  Json j;
  try {
    j = Json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw InputError("config " + path + " is not valid JSON");
  }
  return run_config_from_json(j);
}

Json to_json(const RunConfig& c) {
  Json j;
  j["seed"] = c.seed;
  j["scenario"] = to_json(c.scenario);
  j["scr"] = to_json(c.scr);
  j["window"] = to_json(c.window);
  j["dbscan"] = {{"eps", round9(c.dbscan.eps)}, {"min_pts", c.dbscan.min_pts}};
  j["baseline"] = {
      {"direction_uses_target", c.baseline.direction_uses_target},
      {"track_point", c.baseline.track_point == TrackPoint::Mean ? "mean" : "nearest"}};
  j["output_dir"] = c.output_dir;
  return j;
}

Json to_json(const MovingObject& o) {
  Json j;
  j["id"] = o.id;
  j["class"] = class_to_json(o.object_class);
  j["direction"] = static_cast<int>(o.direction);
  j["speed_mps"] = round9(o.speed_mps);
  j["lane_offset_m"] = round9(o.lane_offset_m);
  j["spawn_instance"] = o.spawn_instance;
  j["spawn_x_m"] = round9(o.spawn_x_m);
  j["despawn_instance"] = o.despawn_instance;
  return j;
}

MovingObject object_from_json(const Json& j) {
  const std::string w = "objects";
  check_keys(j,
             {"id", "class", "direction", "speed_mps", "lane_offset_m", "spawn_instance",
              "spawn_x_m", "despawn_instance"},
             w);
  MovingObject o;
  read(j, "id", o.id, w);
  if (!j.contains("class")) throw InputError("objects.class missing");
  o.object_class = class_from_json(j["class"], "objects.class");
  if (j.contains("direction")) {
    o.direction = static_cast<Direction>(direction_from_json(j["direction"], "objects.direction"));
  }
  read(j, "speed_mps", o.speed_mps, w);
  read(j, "lane_offset_m", o.lane_offset_m, w);
  read(j, "spawn_instance", o.spawn_instance, w);
  read(j, "spawn_x_m", o.spawn_x_m, w);
  read(j, "despawn_instance", o.despawn_instance, w);
  return o;
}

}  // namespace blockcast
