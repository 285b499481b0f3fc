#pragma once

#include <cstdint>
#include <span>
#include <unordered_set>
#include <utility>
#include <vector>

#include "blockcast/simulator.hpp"

namespace blockcast {

struct ScrConfig {
  double phi1 = -M_PI / 6;
  double phi2 = M_PI;
  int angle_levels = 216;      // Q
  int distance_levels = 500;   // Q_d
  double distance_step_m = 0.034;
  int dictionary_frames = 5000;  // N_d

  void validate() const;
  double angle_step() const { return (phi2 - phi1) / angle_levels; }
  double angle_center(int level) const { return phi1 + (level + 0.5) * angle_step(); }
};

struct QuantizedPoint {
  int q = 0;   // angle level
  int qd = 0;  // distance level
  double angle_rad = 0.0;
  double distance_m = 0.0;

  friend bool operator==(const QuantizedPoint&, const QuantizedPoint&) = default;
};

// At most one entry per angle level, levels strictly ascending.
struct QuantizedScan {
  std::int64_t t = 0;
  int angle_levels = 0;
  int distance_levels = 0;
  std::vector<QuantizedPoint> entries;

  friend bool operator==(const QuantizedScan&, const QuantizedScan&) = default;
};

class StaticDictionary {
 public:
  StaticDictionary(int angle_levels, int distance_levels)
      : angle_levels_(angle_levels), distance_levels_(distance_levels) {}

  void insert(int q, int qd);
  bool contains(int q, int qd) const { return entries_.count(key(q, qd)) != 0; }
  std::size_t size() const { return entries_.size(); }
  int angle_levels() const { return angle_levels_; }
  int distance_levels() const { return distance_levels_; }

  std::size_t source_frame_count = 0;

  // Lexicographically ascending (q, qd) pairs.
  std::vector<std::pair<int, int>> sorted_entries() const;

 private:
  std::int64_t key(int q, int qd) const {
    return static_cast<std::int64_t>(q) * distance_levels_ + qd;
  }

  int angle_levels_;
  int distance_levels_;
  std::unordered_set<std::int64_t> entries_;
};

// Keeps points with phi1 <= angle <= phi2, order preserved.
LidarScan fov_filter(const LidarScan& scan, double phi1, double phi2);

// Returns sorted by ascending angle, zero-distance points appended in their
// original relative order.
LidarScan sort_scan(const LidarScan& scan);

int quantize_distance(double distance_m, const ScrConfig& cfg);
int angle_level(double angle_rad, const ScrConfig& cfg);

// Input must come from sort_scan. Among points sharing an angle level the one
// at the lower-median index survives; zero-distance points are dropped.
QuantizedScan quantize_angles(const LidarScan& sorted, const ScrConfig& cfg);

// fov_filter -> sort_scan -> quantize_angles
QuantizedScan quantize(const LidarScan& scan, const ScrConfig& cfg);

StaticDictionary build_dictionary(std::span<const LidarScan> frames, const ScrConfig& cfg);

QuantizedScan remove_static(const QuantizedScan& scan, const StaticDictionary& dict);

double scr_rate(std::int64_t before_total, std::int64_t after_total);

// Back to a polar scan (original angles and distances of surviving entries).
LidarScan to_scan(const QuantizedScan& scan);

struct PreprocessResult {
  std::vector<QuantizedScan> scans;
  std::vector<double> seconds_per_instance;
};

PreprocessResult preprocess_trajectory(std::span<const LidarScan> scans,
                                       const StaticDictionary& dict, const ScrConfig& cfg);

// Number of returns with non-zero distance.
std::int64_t count_returns(std::span<const LidarScan> scans);

}  // namespace blockcast
