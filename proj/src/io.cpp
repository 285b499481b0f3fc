#include "blockcast/io.hpp"

#include <charconv>
#include <fstream>
#include <map>
#include <sstream>

#include "blockcast/error.hpp"
#include "blockcast/format.hpp"

namespace blockcast {

namespace {

std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path.string());
  return out;
}

std::ifstream open_in(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot read " + path.string());
  return in;
}

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    out.push_back(line.substr(start, comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

double parse_double(std::string_view s, const fs::path& path) {
  const std::string buf(s);
  char* end = nullptr;
  const double v = std::strtod(buf.c_str(), &end);
  if (buf.empty() || end != buf.c_str() + buf.size()) {
    throw InputError(path.string() + ": bad number '" + buf + "'");
  }
  return v;
}

long long parse_int(std::string_view s, const fs::path& path) {
  long long v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw InputError(path.string() + ": bad integer '" + std::string(s) + "'");
  }
  return v;
}

// Reads a CSV with the expected header; returns the data rows.
std::vector<std::vector<std::string_view>> read_csv(const fs::path& path, std::string& storage,
                                                    const std::string& header_prefix) {
  storage = read_text(path);
  std::vector<std::vector<std::string_view>> rows;
  std::string_view all(storage);
  bool header = true;
  while (!all.empty()) {
    const auto nl = all.find('\n');
    std::string_view line = all.substr(0, nl);
    all = nl == std::string_view::npos ? std::string_view() : all.substr(nl + 1);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (header) {
      if (line.substr(0, header_prefix.size()) != header_prefix) {
        throw InputError(path.string() + ": expected header starting '" + header_prefix + "'");
      }
      header = false;
      continue;
    }
    if (line.empty()) continue;
    rows.push_back(split(line));
  }
  if (header) throw InputError(path.string() + ": empty file");
  return rows;
}

Json read_json(const fs::path& path) {
  try {
    return Json::parse(read_text(path));
  } catch (const nlohmann::json::parse_error&) {
    throw InputError(path.string() + ": invalid JSON");
  }
}

}  // namespace

void write_text(const fs::path& path, const std::string& content) {
  auto out = open_out(path);
  out << content;
}

std::string read_text(const fs::path& path) {
  auto in = open_in(path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_trajectory(const fs::path& dir, const Trajectory& trajectory,
                      const ScenarioConfig& config) {
  fs::create_directories(dir);
  {
    auto out = open_out(dir / "scans.csv");
    out << "t,angle_rad,distance_m\n";
    for (const auto& scan : trajectory.scans) {
      for (const auto& p : scan.points) {
        out << scan.t << ',' << fmt9(p.angle_rad) << ',' << fmt9(p.distance_m) << '\n';
      }
    }
  }
  {
    auto out = open_out(dir / "powers.csv");
    out << 't';
    const auto m = trajectory.powers.empty() ? 0 : trajectory.powers.front().size();
    for (Eigen::Index k = 0; k < m; ++k) out << ",p_" << k;
    out << '\n';
    for (std::size_t t = 0; t < trajectory.powers.size(); ++t) {
      out << t;
      for (Eigen::Index k = 0; k < m; ++k) out << ',' << fmt9(trajectory.powers[t][k]);
      out << '\n';
    }
  }
  {
    auto out = open_out(dir / "link.csv");
    out << "t,x\n";
    for (std::size_t t = 0; t < trajectory.link_status.size(); ++t) {
      out << t << ',' << static_cast<int>(trajectory.link_status[t]) << '\n';
    }
  }
  Json objects = Json::array();
  for (const auto& o : trajectory.objects) objects.push_back(to_json(o));
  write_text(dir / "objects.json", objects.dump(2) + "\n");
  write_text(dir / "config.json", to_json(config).dump(2) + "\n");
}

LoadedTrajectory read_trajectory(const fs::path& dir) {
  LoadedTrajectory out;
  out.config = scenario_from_json(read_json(dir / "config.json"));
  Trajectory& traj = out.trajectory;
  std::string storage;

  for (const auto& row : read_csv(dir / "link.csv", storage, "t,x")) {
    if (row.size() != 2) throw InputError("link.csv: expected 2 columns");
    const auto t = parse_int(row[0], dir / "link.csv");
    if (t != static_cast<long long>(traj.link_status.size())) {
      throw InputError("link.csv: instances out of order");
    }
    const auto x = parse_int(row[1], dir / "link.csv");
    if (x != 0 && x != 1) throw InputError("link.csv: link status must be 0 or 1");
    traj.link_status.push_back(static_cast<std::uint8_t>(x));
  }
  const auto n = static_cast<std::int64_t>(traj.link_status.size());

  traj.scans.resize(n);
  for (std::int64_t t = 0; t < n; ++t) traj.scans[t].t = t;
  for (const auto& row : read_csv(dir / "scans.csv", storage, "t,angle_rad,distance_m")) {
    if (row.size() != 3) throw InputError("scans.csv: expected 3 columns");
    const auto t = parse_int(row[0], dir / "scans.csv");
    if (t < 0 || t >= n) throw InputError("scans.csv: instance outside link.csv range");
    traj.scans[t].points.push_back(
        {parse_double(row[1], dir / "scans.csv"), parse_double(row[2], dir / "scans.csv")});
  }

  for (const auto& row : read_csv(dir / "powers.csv", storage, "t")) {
    const auto t = parse_int(row[0], dir / "powers.csv");
    if (t != static_cast<long long>(traj.powers.size())) {
      throw InputError("powers.csv: instances out of order");
    }
    Eigen::VectorXd p(static_cast<Eigen::Index>(row.size() - 1));
    for (std::size_t k = 1; k < row.size(); ++k) p[k - 1] = parse_double(row[k], dir / "powers.csv");
    traj.powers.push_back(std::move(p));
  }
  if (static_cast<std::int64_t>(traj.powers.size()) != n) {
    throw InputError("powers.csv and link.csv disagree on length");
  }

  const Json objects = read_json(dir / "objects.json");
  if (!objects.is_array()) throw InputError("objects.json: expected an array");
  for (const auto& o : objects) traj.objects.push_back(object_from_json(o));
  return out;
}

void write_dictionary(const fs::path& path, const StaticDictionary& dict) {
  auto out = open_out(path);
  out << "q,q_d\n";
  for (const auto& [q, qd] : dict.sorted_entries()) out << q << ',' << qd << '\n';
}

StaticDictionary read_dictionary(const fs::path& path, const ScrConfig& cfg) {
  StaticDictionary dict(cfg.angle_levels, cfg.distance_levels);
  std::string storage;
  for (const auto& row : read_csv(path, storage, "q,q_d")) {
    if (row.size() != 2) throw InputError(path.string() + ": expected 2 columns");
    try {
      dict.insert(static_cast<int>(parse_int(row[0], path)), static_cast<int>(parse_int(row[1], path)));
    } catch (const DomainError&) {
      throw InputError(path.string() + ": entry outside the configured quantization");
    }
  }
  return dict;
}

void write_preprocessed(const fs::path& path, const std::vector<QuantizedScan>& scans) {
  auto out = open_out(path);
  out << "t,q,q_d,angle_rad,distance_m\n";
  for (const auto& s : scans) {
    for (const auto& e : s.entries) {
      out << s.t << ',' << e.q << ',' << e.qd << ',' << fmt9(e.angle_rad) << ','
          << fmt9(e.distance_m) << '\n';
    }
  }
}

std::vector<QuantizedScan> read_preprocessed(const fs::path& path, std::int64_t instances,
                                             const ScrConfig& cfg) {
  std::vector<QuantizedScan> scans(instances);
  for (std::int64_t t = 0; t < instances; ++t) {
    scans[t].t = t;
    scans[t].angle_levels = cfg.angle_levels;
    scans[t].distance_levels = cfg.distance_levels;
  }
  std::string storage;
  for (const auto& row : read_csv(path, storage, "t,q,q_d,angle_rad,distance_m")) {
    if (row.size() != 5) throw InputError(path.string() + ": expected 5 columns");
    const auto t = parse_int(row[0], path);
    if (t < 0 || t >= instances) throw InputError(path.string() + ": instance out of range");
    QuantizedPoint e{static_cast<int>(parse_int(row[1], path)),
                     static_cast<int>(parse_int(row[2], path)), parse_double(row[3], path),
                     parse_double(row[4], path)};
    if (e.q < 0 || e.q >= cfg.angle_levels || e.qd < 0 || e.qd >= cfg.distance_levels) {
      throw InputError(path.string() + ": level outside the configured quantization");
    }
    auto& entries = scans[t].entries;
    if (!entries.empty() && entries.back().q >= e.q) {
      throw InputError(path.string() + ": angle levels must ascend within an instance");
    }
    entries.push_back(e);
  }
  return scans;
}

Json window_to_json(const ObservationWindow& w) {
  Json j;
  j["source"] = {{"trajectory", w.trajectory_id}, {"start", w.start}};
  j["horizon"] = w.horizon;
  Json labels;
  labels["b"] = w.labels.occurrence;
  if (w.labels.instance) labels["n_p"] = *w.labels.instance;
  if (w.labels.severity) labels["severity"] = *w.labels.severity;
  if (w.labels.direction) labels["direction"] = *w.labels.direction;
  j["labels"] = labels;
  Json lidar = Json::array();
  for (Eigen::Index i = 0; i < w.lidar_distance.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index k = 0; k < w.lidar_distance.cols(); ++k) {
      row.push_back(Json::array({round9(w.lidar_angle(i, k)), round9(w.lidar_distance(i, k))}));
    }
    lidar.push_back(std::move(row));
  }
  j["lidar"] = std::move(lidar);
  Json power = Json::array();
  for (Eigen::Index i = 0; i < w.power.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index k = 0; k < w.power.cols(); ++k) row.push_back(round9(w.power(i, k)));
    power.push_back(std::move(row));
  }
  j["power"] = std::move(power);
  return j;
}

ObservationWindow observation_window_from_json(const Json& j) {
  try {
    ObservationWindow w;
    w.trajectory_id = j.at("source").at("trajectory").get<std::int64_t>();
    w.start = j.at("source").at("start").get<std::int64_t>();
    w.horizon = j.at("horizon").get<int>();
    const auto& labels = j.at("labels");
    w.labels.occurrence = labels.at("b").get<int>();
    if (labels.contains("n_p")) w.labels.instance = labels["n_p"].get<int>();
    if (labels.contains("severity")) w.labels.severity = labels["severity"].get<int>();
    if (labels.contains("direction")) w.labels.direction = labels["direction"].get<int>();
    const bool positive = w.labels.occurrence == 1;
    if (positive != w.labels.instance.has_value() || positive != w.labels.severity.has_value() ||
        positive != w.labels.direction.has_value()) {
      throw InputError("window labels inconsistent with occurrence label");
    }

    const auto& lidar = j.at("lidar");
    const auto rows = static_cast<Eigen::Index>(lidar.size());
    const auto width = rows ? static_cast<Eigen::Index>(lidar[0].size()) : 0;
    w.lidar_angle.resize(rows, width);
    w.lidar_distance.resize(rows, width);
    for (Eigen::Index i = 0; i < rows; ++i) {
      if (static_cast<Eigen::Index>(lidar[i].size()) != width) {
        throw InputError("window LiDAR rows differ in width");
      }
      for (Eigen::Index k = 0; k < width; ++k) {
        w.lidar_angle(i, k) = lidar[i][k].at(0).get<double>();
        w.lidar_distance(i, k) = lidar[i][k].at(1).get<double>();
      }
    }
    const auto& power = j.at("power");
    if (static_cast<Eigen::Index>(power.size()) != rows) {
      throw InputError("window power rows differ from LiDAR rows");
    }
    const auto beams = rows ? static_cast<Eigen::Index>(power[0].size()) : 0;
    w.power.resize(rows, beams);
    for (Eigen::Index i = 0; i < rows; ++i) {
      if (static_cast<Eigen::Index>(power[i].size()) != beams) {
        throw InputError("window power rows differ in width");
      }
      for (Eigen::Index k = 0; k < beams; ++k) w.power(i, k) = power[i][k].get<double>();
    }
    return w;
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("malformed window: ") + e.what());
  }
}

void write_windows(const fs::path& path, const std::vector<ObservationWindow>& windows) {
  auto out = open_out(path);
  for (const auto& w : windows) out << window_to_json(w).dump() << '\n';
}

std::vector<ObservationWindow> read_windows(const fs::path& path) {
  auto in = open_in(path);
  std::vector<ObservationWindow> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    try {
      out.push_back(observation_window_from_json(Json::parse(line)));
    } catch (const nlohmann::json::parse_error&) {
      throw InputError(path.string() + ": line " + std::to_string(out.size() + 1) +
                       " is not valid JSON");
    }
  }
  return out;
}

Json make_manifest(const std::vector<ObservationWindow>& windows, const RunConfig& config,
                   bool scr) {
  std::map<int, std::size_t> occurrence, instance, severity, direction;
  for (const auto& w : windows) {
    occurrence[w.labels.occurrence] += 1;
    if (w.labels.instance) instance[*w.labels.instance] += 1;
    if (w.labels.severity) severity[*w.labels.severity] += 1;
    if (w.labels.direction) direction[*w.labels.direction] += 1;
  }
  auto counts = [](const std::map<int, std::size_t>& m) {
    Json j = Json::object();
    for (const auto& [k, v] : m) j[std::to_string(k)] = v;
    return j;
  };
  Json j;
  j["windows"] = windows.size();
  j["scr"] = scr;
  j["lidar_width"] = windows.empty() ? 0 : windows.front().lidar_distance.cols();
  j["beams"] = windows.empty() ? 0 : windows.front().power.cols();
  j["label_counts"] = {{"b", counts(occurrence)},
                       {"n_p", counts(instance)},
                       {"severity", counts(severity)},
                       {"direction", counts(direction)}};
  j["window"] = to_json(config.window);
  j["scr_config"] = to_json(config.scr);
  j["seed"] = config.seed;
  return j;
}

void write_params(const fs::path& path, const BaselineParams& params) {
  Json j;
  Json occ = Json::object();
  for (const auto& [h, theta] : params.occurrence_thresholds) occ[std::to_string(h)] = theta;
  j["occurrence_thresholds"] = occ;
  Json sev = Json::object();
  for (const auto& [h, m] : params.severity) {
    sev[std::to_string(h)] = {{"classes", m.classes}, {"thresholds", m.thresholds}};
  }
  j["severity"] = sev;
  j["dbscan"] = {{"eps", round9(params.dbscan.eps)}, {"min_pts", params.dbscan.min_pts}};
  write_text(path, j.dump(2) + "\n");
}

BaselineParams read_params(const fs::path& path) {
  const Json j = read_json(path);
  BaselineParams p;
  try {
    for (const auto& [h, theta] : j.at("occurrence_thresholds").items()) {
      p.occurrence_thresholds[std::stoi(h)] = theta.get<int>();
    }
    for (const auto& [h, m] : j.at("severity").items()) {
      SeverityModel model;
      model.classes = m.at("classes").get<std::vector<int>>();
      model.thresholds = m.at("thresholds").get<std::vector<int>>();
      if (model.classes.empty() || model.thresholds.size() + 1 != model.classes.size()) {
        throw InputError(path.string() + ": severity thresholds do not match classes");
      }
      p.severity[std::stoi(h)] = model;
    }
    p.dbscan.eps = j.at("dbscan").at("eps").get<double>();
    p.dbscan.min_pts = j.at("dbscan").at("min_pts").get<int>();
  } catch (const nlohmann::json::exception& e) {
    throw InputError(path.string() + ": " + e.what());
  } catch (const std::invalid_argument&) {
    throw InputError(path.string() + ": horizon keys must be integers");
  }
  return p;
}

void write_preds(const fs::path& path, const std::vector<PredictionRow>& rows) {
  auto out = open_out(path);
  out << "window_id,problem,prediction\n";
  for (const auto& r : rows) {
    out << r.window_id << ',' << r.problem << ',' << (r.value ? fmt9(*r.value) : "nan") << '\n';
  }
}

std::vector<PredictionRow> read_preds(const fs::path& path) {
  std::vector<PredictionRow> out;
  std::string storage;
  for (const auto& row : read_csv(path, storage, "window_id,problem,prediction")) {
    if (row.size() != 3) throw InputError(path.string() + ": expected 3 columns");
    PredictionRow r;
    r.window_id = static_cast<std::size_t>(parse_int(row[0], path));
    r.problem = static_cast<int>(parse_int(row[1], path));
    if (r.problem < 1 || r.problem > 4) throw InputError(path.string() + ": problem must be 1-4");
    if (row[2] != "nan") r.value = parse_double(row[2], path);
    out.push_back(r);
  }
  return out;
}

}  // namespace blockcast
