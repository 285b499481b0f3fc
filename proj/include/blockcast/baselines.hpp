#pragma once

#include <map>
#include <optional>
#include <span>
#include <vector>

#include "blockcast/dbscan.hpp"
#include "blockcast/least_squares.hpp"
#include "blockcast/windowing.hpp"

namespace blockcast {

// A LiDAR return inside an observation window, in scene coordinates.
struct WindowPoint {
  int instance = 0;  // 0-based row within the window
  Point2d position;
};

std::vector<WindowPoint> window_points(const ObservationWindow& window);

// Sum over the window of non-zero-distance returns.
int count_points(const ObservationWindow& window);

// 1 iff count > threshold.
int predict_occurrence(int count, int threshold);

// Sweeps threshold 1..max(count) and keeps the most accurate; ties go to the
// smallest threshold. Needs both classes present.
int fit_threshold(std::span<const int> counts, std::span<const int> labels);

// Level index i in [1, thresholds.size() + 1] with t[i-1] < count <= t[i].
int predict_severity_threshold(int count, std::span<const int> thresholds);

struct SeverityModel {
  std::vector<int> classes;     // ascending severity labels, e.g. {2, 3}
  std::vector<int> thresholds;  // classes.size() - 1, strictly increasing

  int predict(int count) const;
};

// Exhaustive search over strictly increasing integer thresholds in
// [0, max(count)], maximising accuracy; ties go to the lexicographically
// smallest threshold vector.
SeverityModel fit_severity_thresholds(std::span<const int> counts, std::span<const int> labels);

// Per-instance mean x of the selected points; empty instances stay unset.
std::vector<std::optional<double>> mean_x_per_instance(std::span<const WindowPoint> points,
                                                       std::span<const int> labels, int cluster,
                                                       int observation);

// Per-instance x of the selected point closest to x = 0, i.e. the leading
// edge of an object that has not yet reached the link.
std::vector<std::optional<double>> nearest_x_per_instance(std::span<const WindowPoint> points,
                                                          std::span<const int> labels,
                                                          int cluster, int observation);

// Cluster whose latest position and direction put it on course to cross
// x = 0 but not yet across; nearest to the link wins.
std::optional<int> select_target(std::span<const WindowPoint> points, std::span<const int> labels,
                                 int observation);

struct MotionEstimate {
  double velocity = 0.0;  // m per instance, signed along x
  double offset = 0.0;    // x at t = 0
  double predicted_instance = 0.0;
};

// Fits over the populated instances, t = 1..T_ob.
LineFit<double> ls_fit(std::span<const std::optional<double>> mean_x);

// |y_last| / |v| instances; throws when the object does not approach x = 0.
double predict_blockage_time(const LineFit<double>& fit, double y_last);

// 0 when the last populated mean x exceeds the first, else 1.
int predict_direction(std::span<const std::optional<double>> mean_x);

// Which per-instance position of the target the motion fit tracks.
enum class TrackPoint { Mean, Nearest };

// Full pipelines over one window.
std::optional<MotionEstimate> estimate_blockage_time(const ObservationWindow& window,
                                                     const DbscanParams& params,
                                                     TrackPoint track = TrackPoint::Mean);
// Falls back to all points when no target cluster is found or `use_target` is
// off, and to 0 (left to right) for a window without returns.
int predict_window_direction(const ObservationWindow& window, const DbscanParams& params,
                             bool use_target = true);

struct BaselineParams {
  std::map<int, int> occurrence_thresholds;  // horizon -> threshold
  std::map<int, SeverityModel> severity;      // horizon -> model
  DbscanParams dbscan;
};

}  // namespace blockcast
