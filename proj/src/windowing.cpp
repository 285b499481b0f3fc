#include "blockcast/windowing.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

#include "blockcast/error.hpp"

namespace blockcast {

void SeverityPartition::validate() const {
  if (edges_ms.empty() || edges_ms.front() != 0.0) {
    throw ConfigError("severity_edges_ms", "must start at 0");
  }
  for (std::size_t i = 1; i < edges_ms.size(); ++i) {
    if (!(edges_ms[i] > edges_ms[i - 1])) {
      throw ConfigError("severity_edges_ms", "must be strictly increasing");
    }
  }
  if (upper_ms && !(*upper_ms > edges_ms.back())) {
    throw ConfigError("severity_upper_ms", "must exceed the last edge");
  }
}

int SeverityPartition::level_of(double duration_ms) const {
  if (!(duration_ms >= edges_ms.front()) || (upper_ms && duration_ms >= *upper_ms)) {
    throw DomainError("blocked duration outside every severity interval");
  }
  const auto it = std::upper_bound(edges_ms.begin(), edges_ms.end(), duration_ms);
  return static_cast<int>(it - edges_ms.begin());
}

void WindowConfig::validate() const {
  if (observation < 1) throw ConfigError("observation", "must be >= 1");
  if (horizon < 1) throw ConfigError("horizon", "must be >= 1");
  if (stride < 1) throw ConfigError("stride", "must be >= 1");
  severity.validate();
}

namespace {

void check_horizon(std::span<const std::uint8_t> link, std::int64_t t, int horizon) {
  if (horizon < 1 || t < 0 || t + horizon >= static_cast<std::int64_t>(link.size())) {
    throw DomainError("prediction horizon runs past the end of the link trace");
  }
}

}  // namespace

int make_occurrence_label(std::span<const std::uint8_t> link, std::int64_t t, int horizon) {
  check_horizon(link, t, horizon);
  for (int n = 1; n <= horizon; ++n) {
    if (link[t + n] == 1) return 1;
  }
  return 0;
}

int make_instance_label(std::span<const std::uint8_t> link, std::int64_t t, int horizon) {
  check_horizon(link, t, horizon);
  for (int n = 1; n <= horizon; ++n) {
    if (link[t + n] == 1) return n;
  }
  throw DomainError("no blockage within the prediction horizon");
}

int make_severity_label(const MovingObject& object, const SeverityPartition& partition) {
  return partition.level_of(object.object_class.mean_block_duration_ms);
}

int make_direction_label(const MovingObject& object) {
  const double vx = object.velocity_x();
  if (vx == 0.0) throw DomainError("object has no motion along the street");
  return vx > 0 ? 0 : 1;
}

DenseRow densify(const QuantizedScan& scan, int width, const ScrConfig& cfg) {
  if (width < cfg.angle_levels) throw DomainError("densify: width below the angle level count");
  DenseRow row{Eigen::RowVectorXd::Zero(width), Eigen::RowVectorXd::Zero(width)};
  for (int q = 0; q < cfg.angle_levels; ++q) row.angle[q] = cfg.angle_center(q);
  for (const auto& e : scan.entries) row.distance[e.q] = e.distance_m;
  return row;
}

QuantizedScan sparsify(const DenseRow& row, const ScrConfig& cfg, std::int64_t t) {
  QuantizedScan out;
  out.t = t;
  out.angle_levels = cfg.angle_levels;
  out.distance_levels = cfg.distance_levels;
  for (int q = 0; q < cfg.angle_levels && q < row.distance.size(); ++q) {
    const double d = row.distance[q];
    if (d == 0.0) continue;
    out.entries.push_back({q, quantize_distance(d, cfg), row.angle[q], d});
  }
  return out;
}

DenseRow densify_raw(const LidarScan& scan) {
  const LidarScan sorted = sort_scan(scan);
  const auto n = static_cast<Eigen::Index>(sorted.points.size());
  DenseRow row{Eigen::RowVectorXd(n), Eigen::RowVectorXd(n)};
  for (Eigen::Index i = 0; i < n; ++i) {
    row.angle[i] = sorted.points[i].angle_rad;
    row.distance[i] = sorted.points[i].distance_m;
  }
  return row;
}

std::vector<ObservationWindow> slide_windows(const Trajectory& trajectory,
                                             const ScenarioConfig& scenario,
                                             const std::vector<QuantizedScan>* preprocessed,
                                             const ScrConfig& scr, const WindowConfig& cfg,
                                             std::int64_t trajectory_id) {
  cfg.validate();
  const std::int64_t n = trajectory.size();
  if (preprocessed && static_cast<std::int64_t>(preprocessed->size()) != n) {
    throw InputError("preprocessed scan count differs from trajectory length");
  }
  const std::span<const std::uint8_t> link(trajectory.link_status);

  // Labels first so that balancing can drop windows before any row is built.
  std::vector<ObservationWindow> out;
  for (std::int64_t s = 0; s + cfg.observation - 1 + cfg.horizon < n; s += cfg.stride) {
    const std::int64_t t = s + cfg.observation - 1;
    if (link[t] == 1) continue;

    ObservationWindow w;
    w.trajectory_id = trajectory_id;
    w.start = s;
    w.horizon = cfg.horizon;
    w.labels.occurrence = make_occurrence_label(link, t, cfg.horizon);
    if (w.labels.occurrence == 1) {
      const int np = make_instance_label(link, t, cfg.horizon);
      const auto blocker = blocker_at(trajectory, scenario, t + np);
      if (!blocker) throw DomainError("blocked instance without a ground-truth blocker");
      const auto& obj = trajectory.objects[*blocker];
      w.labels.instance = np;
      w.labels.severity = make_severity_label(obj, cfg.severity);
      w.labels.direction = make_direction_label(obj);
    }
    out.push_back(std::move(w));
  }
  if (cfg.balance) out = balance_windows(std::move(out), cfg.balance_seed);

  // Rows are shared by overlapping windows; build each once.
  std::vector<std::optional<DenseRow>> rows(n);
  const auto row_at = [&](std::int64_t t) -> const DenseRow& {
    if (!rows[t]) {
      rows[t] = preprocessed ? densify((*preprocessed)[t], scr.angle_levels, scr)
                             : densify_raw(trajectory.scans[t]);
    }
    return *rows[t];
  };
  for (auto& w : out) {
    const std::int64_t s = w.start;
    const auto width = row_at(s).distance.size();
    const auto beams = trajectory.powers[s].size();
    w.lidar_angle.resize(cfg.observation, width);
    w.lidar_distance.resize(cfg.observation, width);
    w.power.resize(cfg.observation, beams);
    for (int i = 0; i < cfg.observation; ++i) {
      const auto& row = row_at(s + i);
      if (row.distance.size() != width) throw InputError("LiDAR rows differ in width");
      w.lidar_angle.row(i) = row.angle;
      w.lidar_distance.row(i) = row.distance;
      w.power.row(i) = trajectory.powers[s + i].transpose();
    }
  }
  return out;
}

std::vector<ObservationWindow> balance_windows(std::vector<ObservationWindow> windows,
                                               std::uint64_t seed) {
  std::vector<std::size_t> pos, neg;
  for (std::size_t i = 0; i < windows.size(); ++i) {
    (windows[i].labels.occurrence == 1 ? pos : neg).push_back(i);
  }
  auto& major = pos.size() > neg.size() ? pos : neg;
  const std::size_t keep = std::min(pos.size(), neg.size());
  Rng rng(mix_seed(seed, 7));
  for (std::size_t k = 0; k < keep; ++k) {
    std::swap(major[k], major[k + rng.index(major.size() - k)]);
  }
  major.resize(keep);
  std::vector<std::size_t> kept = pos;
  kept.insert(kept.end(), neg.begin(), neg.end());
  std::sort(kept.begin(), kept.end());

  std::vector<ObservationWindow> out;
  out.reserve(kept.size());
  for (auto i : kept) out.push_back(std::move(windows[i]));
  return out;
}

}  // namespace blockcast
