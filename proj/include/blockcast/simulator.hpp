#pragma once

#include <Eigen/Core>
#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "blockcast/geometry.hpp"
#include "blockcast/random.hpp"

namespace blockcast {

using Point2d = Point2<double>;
using Segment2d = Segment2<double>;
using Rect2d = Rect<double>;

struct ObjectClass {
  std::string name;
  double width_m = 1.0;   // y extent
  double length_m = 1.0;  // x extent, along the direction of travel
  double speed_min_mps = 1.0;
  double speed_max_mps = 1.0;
  int severity_level = 2;
  double mean_block_duration_ms = 0.0;
  double weight = 1.0;  // relative arrival frequency
};

enum class Direction : int { LeftToRight = 0, RightToLeft = 1 };

struct MovingObject {
  int id = 0;
  ObjectClass object_class;
  Direction direction = Direction::LeftToRight;
  double speed_mps = 0.0;
  double lane_offset_m = 0.0;
  std::int64_t spawn_instance = 0;
  double spawn_x_m = 0.0;
  std::int64_t despawn_instance = 0;  // last instance the object is in the scene

  double velocity_x() const {
    return direction == Direction::LeftToRight ? speed_mps : -speed_mps;
  }
  // Center x at (possibly fractional) instance t.
  double center_x(double t, double dt) const {
    return spawn_x_m + velocity_x() * dt * (t - static_cast<double>(spawn_instance));
  }
  bool alive(std::int64_t t) const { return t >= spawn_instance && t <= despawn_instance; }
  Rect2d footprint(double t, double dt) const {
    return {Point2d(center_x(t, dt), lane_offset_m), object_class.length_m, object_class.width_m};
  }
};

// An object placed by hand rather than drawn from the arrival process.
struct ScriptedObject {
  std::string class_name;
  Direction direction = Direction::LeftToRight;
  double speed_mps = 10.0;
  std::int64_t spawn_instance = 0;
  std::optional<double> lane_offset_m;  // defaults to the direction's lane
};

struct ScenarioConfig {
  std::uint64_t seed = 0;
  std::int64_t duration_instances = 600;
  double instance_dt_s = 0.1;

  int lidar_points_per_rev = 460;
  double lidar_max_range_m = 16.0;
  double lidar_jitter_std_m = 0.01;
  double phantom_rate = 1.0;  // expected phantom returns per scan

  int num_beams = 64;
  std::array<double, 2> beam_fov{-M_PI / 4, M_PI / 4};
  int array_elements = 16;
  double noise_std = 0.0;
  double blockage_attenuation_db = 20.0;
  double reflection_coeff = 0.3;

  Point2d tx_position{0.0, 10.0};
  std::vector<Segment2d> static_objects;

  double arrival_rate = 0.1;  // objects per second
  std::array<double, 2> lane_offsets_m{4.0, 7.0};  // indexed by Direction
  double spawn_distance_m = 20.0;
  int min_gap_instances = 1;
  std::vector<ObjectClass> object_catalog;
  std::vector<ScriptedObject> scripted_objects;

  // Throws ConfigError naming the first offending field.
  void validate() const;

  const ObjectClass& find_class(const std::string& name) const;
  Segment2d link() const { return {Point2d::Zero(), tx_position}; }
};

// Catalog tuned so that E[length / speed] matches each class's mean blocked
// duration: human 237 ms, sedan 347 ms, SUV 396 ms, bus ~1.2 s.
std::vector<ObjectClass> default_catalog();
std::vector<Segment2d> street_a_clutter();
ScenarioConfig street_a(std::uint64_t seed = 0);

enum class PointSource : std::uint8_t { NoReturn, Static, Object, Phantom };

struct Provenance {
  PointSource source = PointSource::NoReturn;
  int object_id = -1;
};

struct LidarPoint {
  double angle_rad = 0.0;
  double distance_m = 0.0;  // 0 encodes no return
};

struct LidarScan {
  std::int64_t t = 0;
  std::vector<LidarPoint> points;
};

struct SceneState {
  std::int64_t t = 0;
  Segment2d link;
  std::vector<Rect2d> footprints;
  std::vector<int> object_ids;
};

struct Trajectory {
  std::vector<LidarScan> scans;
  std::vector<Eigen::VectorXd> powers;
  std::vector<std::uint8_t> link_status;
  std::vector<MovingObject> objects;
  // Per-scan, per-point source of each return. Not serialised.
  std::vector<std::vector<Provenance>> provenance;

  std::int64_t size() const { return static_cast<std::int64_t>(link_status.size()); }
};

Trajectory simulate(const ScenarioConfig& config);

SceneState scene_at(const ScenarioConfig& config, std::span<const MovingObject> objects,
                    std::int64_t t);

// P rays uniformly spaced over [-pi, pi). The revolution starts at a random
// ray, so the returned points are not sorted by angle.
LidarScan render_lidar_scan(const SceneState& scene, const ScenarioConfig& config, Rng& rng,
                            std::vector<Provenance>* provenance = nullptr);

Eigen::VectorXd render_power_vector(const SceneState& scene, const ScenarioConfig& config,
                                    Rng& rng);

// 1 iff any footprint touches the closed TX-RX segment.
int link_status(const SceneState& scene);

double beam_angle(int beam, const ScenarioConfig& config);
// Normalised array gain of `beam` towards `theta` for a half-wavelength ULA.
double beam_gain(int beam, double theta, const ScenarioConfig& config);
int los_beam(const ScenarioConfig& config);

// Instances in [0, duration) at which `object` alone blocks the link.
std::vector<std::int64_t> blocked_instances(const MovingObject& object,
                                            const ScenarioConfig& config);

// Instances with no moving object in the scene, in ascending order.
std::vector<std::int64_t> object_free_instances(const Trajectory& trajectory);

// Index into trajectory.objects of the object blocking the link at t.
std::optional<std::size_t> blocker_at(const Trajectory& trajectory, const ScenarioConfig& config,
                                      std::int64_t t);

}  // namespace blockcast
