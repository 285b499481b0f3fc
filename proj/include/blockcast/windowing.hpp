#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "blockcast/lidar_prep.hpp"
#include "blockcast/simulator.hpp"

namespace blockcast {

// Consecutive blocked-duration intervals [edges[i-1], edges[i]) in ms map to
// severity level i. The last interval is unbounded unless `upper_ms` is set.
struct SeverityPartition {
  std::vector<double> edges_ms{0.0, 300.0, 600.0};
  std::optional<double> upper_ms;

  void validate() const;
  int level_of(double duration_ms) const;
  int levels() const { return static_cast<int>(edges_ms.size()); }
};

struct WindowConfig {
  int observation = 16;  // T_ob
  int horizon = 1;       // T_p
  int stride = 1;
  bool balance = false;
  std::uint64_t balance_seed = 0;
  SeverityPartition severity;

  void validate() const;
};

struct Labels {
  int occurrence = 0;
  std::optional<int> instance;   // first blocked instance after the window, in [1, T_p]
  std::optional<int> severity;
  std::optional<int> direction;

  friend bool operator==(const Labels&, const Labels&) = default;
};

struct ObservationWindow {
  std::int64_t trajectory_id = 0;
  std::int64_t start = 0;  // first observed instance
  int horizon = 1;
  // T_ob x W slots; distance 0 marks an empty slot.
  Eigen::MatrixXd lidar_angle;
  Eigen::MatrixXd lidar_distance;
  // T_ob x M
  Eigen::MatrixXd power;
  Labels labels;

  int observation() const { return static_cast<int>(lidar_distance.rows()); }
  std::int64_t current() const { return start + observation() - 1; }
};

int make_occurrence_label(std::span<const std::uint8_t> link, std::int64_t t, int horizon);
int make_instance_label(std::span<const std::uint8_t> link, std::int64_t t, int horizon);
int make_severity_label(const MovingObject& object, const SeverityPartition& partition);
int make_direction_label(const MovingObject& object);

struct DenseRow {
  Eigen::RowVectorXd angle;
  Eigen::RowVectorXd distance;
};

// One slot per angle level; absent levels hold (angle center, 0).
DenseRow densify(const QuantizedScan& scan, int width, const ScrConfig& cfg);
QuantizedScan sparsify(const DenseRow& row, const ScrConfig& cfg, std::int64_t t);
// Raw scan rows keep all P samples in sort_scan order.
DenseRow densify_raw(const LidarScan& scan);

// With `preprocessed` the LiDAR rows are densified SCR scans (W = Q), without
// it they are raw scans (W = P). Windows whose current instance is blocked are
// skipped; ordering is by start instance.
std::vector<ObservationWindow> slide_windows(const Trajectory& trajectory,
                                             const ScenarioConfig& scenario,
                                             const std::vector<QuantizedScan>* preprocessed,
                                             const ScrConfig& scr, const WindowConfig& cfg,
                                             std::int64_t trajectory_id = 0);

// Subsamples the majority occurrence class down to the minority count,
// preserving relative order.
std::vector<ObservationWindow> balance_windows(std::vector<ObservationWindow> windows,
                                               std::uint64_t seed);

}  // namespace blockcast
