#include "blockcast/lidar_prep.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "blockcast/error.hpp"

namespace blockcast {

void ScrConfig::validate() const {
  if (!(phi1 < phi2)) throw ConfigError("phi1", "must be below phi2");
  if (angle_levels < 1) throw ConfigError("angle_levels", "must be >= 1");
  if (distance_levels < 1) throw ConfigError("distance_levels", "must be >= 1");
  if (!(distance_step_m > 0)) throw ConfigError("distance_step_m", "must be > 0");
  if (dictionary_frames < 1) throw ConfigError("dictionary_frames", "must be >= 1");
}

void StaticDictionary::insert(int q, int qd) {
  if (q < 0 || q >= angle_levels_ || qd < 0 || qd >= distance_levels_) {
    throw DomainError("dictionary entry out of range");
  }
  entries_.insert(key(q, qd));
}

std::vector<std::pair<int, int>> StaticDictionary::sorted_entries() const {
  std::vector<std::pair<int, int>> out;
  out.reserve(entries_.size());
  for (const auto k : entries_) {
    out.emplace_back(static_cast<int>(k / distance_levels_), static_cast<int>(k % distance_levels_));
  }
  std::sort(out.begin(), out.end());
  return out;
}

LidarScan fov_filter(const LidarScan& scan, double phi1, double phi2) {
  LidarScan out;
  out.t = scan.t;
  for (const auto& p : scan.points) {
    if (p.angle_rad >= phi1 && p.angle_rad <= phi2) out.points.push_back(p);
  }
  return out;
}

LidarScan sort_scan(const LidarScan& scan) {
  LidarScan out;
  out.t = scan.t;
  out.points = scan.points;
  const auto zeros = std::stable_partition(out.points.begin(), out.points.end(),
                                           [](const LidarPoint& p) { return p.distance_m != 0.0; });
  std::stable_sort(out.points.begin(), zeros, [](const LidarPoint& a, const LidarPoint& b) {
    return a.angle_rad < b.angle_rad;
  });
  return out;
}

int quantize_distance(double distance_m, const ScrConfig& cfg) {
  const auto level = static_cast<long long>(std::floor(distance_m / cfg.distance_step_m));
  return static_cast<int>(std::clamp<long long>(level, 0, cfg.distance_levels - 1));
}

int angle_level(double angle_rad, const ScrConfig& cfg) {
  const auto level = static_cast<long long>(std::floor((angle_rad - cfg.phi1) / cfg.angle_step()));
  return static_cast<int>(std::clamp<long long>(level, 0, cfg.angle_levels - 1));
}

QuantizedScan quantize_angles(const LidarScan& sorted, const ScrConfig& cfg) {
  QuantizedScan out;
  out.t = sorted.t;
  out.angle_levels = cfg.angle_levels;
  out.distance_levels = cfg.distance_levels;

  std::vector<const LidarPoint*> group;
  int group_level = -1;
  auto flush = [&] {
    if (group.empty()) return;
    const LidarPoint& keep = *group[(group.size() - 1) / 2];
    out.entries.push_back(
        {group_level, quantize_distance(keep.distance_m, cfg), keep.angle_rad, keep.distance_m});
    group.clear();
  };
  for (const auto& p : sorted.points) {
    if (p.distance_m == 0.0) continue;
    if (p.angle_rad < cfg.phi1 || p.angle_rad > cfg.phi2) continue;
    const int level = angle_level(p.angle_rad, cfg);
    if (level != group_level) {
      flush();
      group_level = level;
    }
    group.push_back(&p);
  }
  flush();
  return out;
}

QuantizedScan quantize(const LidarScan& scan, const ScrConfig& cfg) {
  return quantize_angles(sort_scan(fov_filter(scan, cfg.phi1, cfg.phi2)), cfg);
}

StaticDictionary build_dictionary(std::span<const LidarScan> frames, const ScrConfig& cfg) {
  cfg.validate();
  if (frames.empty()) throw InputError("build_dictionary: no frames");
  StaticDictionary dict(cfg.angle_levels, cfg.distance_levels);
  for (const auto& frame : frames) {
    for (const auto& e : quantize(frame, cfg).entries) dict.insert(e.q, e.qd);
  }
  dict.source_frame_count = frames.size();
  return dict;
}

QuantizedScan remove_static(const QuantizedScan& scan, const StaticDictionary& dict) {
  if (scan.angle_levels != dict.angle_levels() ||
      scan.distance_levels != dict.distance_levels()) {
    throw DomainError("remove_static: scan and dictionary use different quantization");
  }
  QuantizedScan out = scan;
  out.entries.clear();
  for (const auto& e : scan.entries) {
    if (!dict.contains(e.q, e.qd)) out.entries.push_back(e);
  }
  return out;
}

double scr_rate(std::int64_t before_total, std::int64_t after_total) {
  if (before_total <= 0) throw DomainError("scr_rate: no points before removal");
  if (after_total < 0 || after_total > before_total) {
    throw DomainError("scr_rate: after_total must lie in [0, before_total]");
  }
  return static_cast<double>(before_total - after_total) / static_cast<double>(before_total);
}

LidarScan to_scan(const QuantizedScan& scan) {
  LidarScan out;
  out.t = scan.t;
  out.points.reserve(scan.entries.size());
  for (const auto& e : scan.entries) out.points.push_back({e.angle_rad, e.distance_m});
  return out;
}

PreprocessResult preprocess_trajectory(std::span<const LidarScan> scans,
                                       const StaticDictionary& dict, const ScrConfig& cfg) {
  cfg.validate();
  PreprocessResult result;
  result.scans.reserve(scans.size());
  result.seconds_per_instance.reserve(scans.size());
  for (const auto& scan : scans) {
    const auto start = std::chrono::steady_clock::now();
    result.scans.push_back(remove_static(quantize(scan, cfg), dict));
    const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;
    result.seconds_per_instance.push_back(elapsed.count());
  }
  return result;
}

std::int64_t count_returns(std::span<const LidarScan> scans) {
  std::int64_t n = 0;
  for (const auto& s : scans) {
    n += std::count_if(s.points.begin(), s.points.end(),
                       [](const LidarPoint& p) { return p.distance_m != 0.0; });
  }
  return n;
}

}  // namespace blockcast
