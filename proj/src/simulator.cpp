#include "blockcast/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numeric>

#include "blockcast/error.hpp"

namespace blockcast {

namespace {

constexpr double kMinReturn = 1e-3;

void require(bool ok, const char* field, const char* what) {
  if (!ok) throw ConfigError(field, what);
}

MovingObject make_object(int id, const ObjectClass& cls, Direction dir, double speed,
                         double lane, std::int64_t spawn, const ScenarioConfig& config) {
  MovingObject o;
  o.id = id;
  o.object_class = cls;
  o.direction = dir;
  o.speed_mps = speed;
  o.lane_offset_m = lane;
  o.spawn_instance = spawn;
  o.spawn_x_m = dir == Direction::LeftToRight ? -config.spawn_distance_m : config.spawn_distance_m;
  const double step = speed * config.instance_dt_s;
  const auto travel = static_cast<std::int64_t>(std::floor(2.0 * config.spawn_distance_m / step));
  o.despawn_instance = spawn + travel;
  return o;
}

bool runs_conflict(const std::vector<std::int64_t>& a, const std::vector<std::int64_t>& b,
                   int gap) {
  if (a.empty() || b.empty()) return false;
  return a.front() <= b.back() + gap && b.front() <= a.back() + gap;
}

const ObjectClass& draw_class(const std::vector<ObjectClass>& catalog, Rng& rng) {
  double total = 0.0;
  for (const auto& c : catalog) total += c.weight;
  double u = rng.uniform() * total;
  for (const auto& c : catalog) {
    if (u < c.weight) return c;
    u -= c.weight;
  }
  return catalog.back();
}

}  // namespace

void ScenarioConfig::validate() const {
  require(duration_instances >= 1, "duration_instances", "must be >= 1");
  require(instance_dt_s > 0, "instance_dt_s", "must be > 0");
  require(lidar_points_per_rev >= 1, "lidar_points_per_rev", "must be >= 1");
  require(lidar_max_range_m > 0, "lidar_max_range_m", "must be > 0");
  require(lidar_jitter_std_m >= 0, "lidar_jitter_std_m", "must be >= 0");
  require(phantom_rate >= 0, "phantom_rate", "must be >= 0");
  require(num_beams >= 1, "num_beams", "must be >= 1");
  require(beam_fov[0] < beam_fov[1], "beam_fov", "lower bound must be below upper bound");
  require(array_elements >= 1, "array_elements", "must be >= 1");
  require(noise_std >= 0, "noise_std", "must be >= 0");
  require(blockage_attenuation_db >= 0, "blockage_attenuation_db", "must be >= 0");
  require(reflection_coeff >= 0, "reflection_coeff", "must be >= 0");
  require(tx_position.norm() > 0, "tx_position", "must differ from the receiver position");
  require(arrival_rate >= 0, "arrival_rate", "must be >= 0");
  require(spawn_distance_m > 0, "spawn_distance_m", "must be > 0");
  require(min_gap_instances >= 0, "min_gap_instances", "must be >= 0");
  require(arrival_rate == 0 || !object_catalog.empty(), "object_catalog",
          "must be non-empty when arrival_rate > 0");
  double total_weight = 0.0;
  for (const auto& c : object_catalog) {
    require(!c.name.empty(), "object_catalog.name", "must be non-empty");
    require(c.width_m > 0, "object_catalog.width_m", "must be > 0");
    require(c.length_m > 0, "object_catalog.length_m", "must be > 0");
    require(c.speed_min_mps > 0, "object_catalog.speed_range_mps", "lower bound must be > 0");
    require(c.speed_max_mps >= c.speed_min_mps, "object_catalog.speed_range_mps",
            "upper bound must be >= lower bound");
    require(c.severity_level >= 1 && c.severity_level <= 4, "object_catalog.severity_level",
            "must be in [1, 4]");
    require(c.mean_block_duration_ms >= 0, "object_catalog.mean_block_duration_ms",
            "must be >= 0");
    require(c.weight >= 0, "object_catalog.weight", "must be >= 0");
    total_weight += c.weight;
  }
  require(arrival_rate == 0 || total_weight > 0, "object_catalog.weight",
          "at least one class needs a positive weight");
  for (const auto& s : scripted_objects) {
    require(s.speed_mps > 0, "scripted_objects.speed_mps", "must be > 0");
    bool known = false;
    for (const auto& c : object_catalog) known = known || c.name == s.class_name;
    require(known, "scripted_objects.class_name", "not in object_catalog");
  }
}

const ObjectClass& ScenarioConfig::find_class(const std::string& name) const {
  for (const auto& c : object_catalog) {
    if (c.name == name) return c;
  }
  throw ConfigError("object_catalog", "unknown class '" + name + "'");
}

std::vector<ObjectClass> default_catalog() {
  return {
      {"human", 0.5, 0.4, 1.2, 2.2, 1, 237.0, 0.0},
      {"sedan", 1.8, 4.5, 11.0, 15.0, 2, 347.0, 0.5},
      {"suv", 1.9, 4.9, 11.0, 14.0, 2, 396.0, 0.3},
      {"bus", 2.5, 12.0, 8.0, 12.0, 3, 1216.0, 0.2},
  };
}

std::vector<Segment2d> street_a_clutter() {
  return {
      {{-20.0, 13.0}, {20.0, 13.0}},   // building facade behind the transmitter
      {{-20.0, -1.5}, {20.0, -1.5}},   // wall behind the receiver
      {{3.0, 11.0}, {3.3, 11.0}},      // lamp post
      {{-6.0, 11.5}, {-4.5, 11.5}},    // hedge
      {{9.0, 8.6}, {13.5, 8.6}},       // parked car, street side
      {{9.0, 8.6}, {9.0, 10.4}},       // parked car, rear
  };
}

ScenarioConfig street_a(std::uint64_t seed) {
  ScenarioConfig c;
  c.seed = seed;
  c.static_objects = street_a_clutter();
  c.object_catalog = default_catalog();
  return c;
}

double beam_angle(int beam, const ScenarioConfig& config) {
  const double span = config.beam_fov[1] - config.beam_fov[0];
  return config.beam_fov[0] + span * static_cast<double>(beam) / config.num_beams;
}

double beam_gain(int beam, double theta, const ScenarioConfig& config) {
  // |sum_n exp(j n psi)|^2 / N^2 in closed form.
  const double psi = M_PI * (std::sin(theta) - std::sin(beam_angle(beam, config)));
  const double n = config.array_elements;
  const double den = std::sin(psi / 2);
  if (std::abs(den) < 1e-12) return 1.0;
  const double num = std::sin(n * psi / 2);
  return (num * num) / (n * n * den * den);
}

int los_beam(const ScenarioConfig& config) {
  const double tx = bearing(config.tx_position);
  int best = 0;
  for (int m = 1; m < config.num_beams; ++m) {
    if (std::abs(beam_angle(m, config) - tx) < std::abs(beam_angle(best, config) - tx)) best = m;
  }
  return best;
}

SceneState scene_at(const ScenarioConfig& config, std::span<const MovingObject> objects,
                    std::int64_t t) {
  SceneState s;
  s.t = t;
  s.link = config.link();
  for (const auto& o : objects) {
    if (!o.alive(t)) continue;
    s.footprints.push_back(o.footprint(static_cast<double>(t), config.instance_dt_s));
    s.object_ids.push_back(o.id);
  }
  return s;
}

int link_status(const SceneState& scene) {
  for (const auto& f : scene.footprints) {
    if (intersects(f, scene.link)) return 1;
  }
  return 0;
}

namespace {

// Ray directions and static-scene hits, fixed for a whole simulation.
struct RayTable {
  std::vector<double> angle;
  std::vector<Point2d> dir;
  std::vector<double> static_hit;  // +inf when the ray misses every segment
};

RayTable make_ray_table(const ScenarioConfig& config) {
  const int p = config.lidar_points_per_rev;
  RayTable table;
  table.angle.resize(p);
  table.dir.resize(p);
  table.static_hit.assign(p, std::numeric_limits<double>::infinity());
  const Point2d origin = Point2d::Zero();
  for (int i = 0; i < p; ++i) {
    table.angle[i] = -M_PI + 2.0 * M_PI * i / p;
    table.dir[i] = ray_direction(table.angle[i]);
    for (const auto& seg : config.static_objects) {
      if (auto d = ray_hit(origin, table.dir[i], seg); d && *d < table.static_hit[i]) {
        table.static_hit[i] = *d;
      }
    }
  }
  return table;
}

LidarScan render_scan(const RayTable& table, const SceneState& scene,
                      const ScenarioConfig& config, Rng& rng,
                      std::vector<Provenance>* provenance) {
  const int p = config.lidar_points_per_rev;
  std::vector<LidarPoint> rays(p);
  std::vector<Provenance> sources(p);
  const Point2d origin = Point2d::Zero();

  for (int i = 0; i < p; ++i) {
    const Point2d& dir = table.dir[i];
    double best = table.static_hit[i];
    Provenance src;
    if (std::isfinite(best)) src = {PointSource::Static, -1};
    for (std::size_t k = 0; k < scene.footprints.size(); ++k) {
      for (const auto& edge : scene.footprints[k].edges()) {
        if (auto d = ray_hit(origin, dir, edge); d && *d < best) {
          best = *d;
          src = {PointSource::Object, scene.object_ids[k]};
        }
      }
    }
    rays[i].angle_rad = table.angle[i];
    if (best <= config.lidar_max_range_m) {
      double d = best;
      if (config.lidar_jitter_std_m > 0) d += config.lidar_jitter_std_m * rng.normal();
      rays[i].distance_m = std::clamp(d, kMinReturn, config.lidar_max_range_m);
      sources[i] = src;
    }
  }

  // Phantom returns replace distinct rays (partial Fisher-Yates).
  const auto phantoms = std::min<std::uint32_t>(rng.poisson(config.phantom_rate), p);
  std::vector<int> order(p);
  std::iota(order.begin(), order.end(), 0);
  for (std::uint32_t k = 0; k < phantoms; ++k) {
    const auto j = k + rng.index(p - k);
    std::swap(order[k], order[j]);
    const int ray = order[k];
    rays[ray].distance_m = rng.uniform(kMinReturn, config.lidar_max_range_m);
    sources[ray] = {PointSource::Phantom, -1};
  }

  const auto start = static_cast<int>(rng.index(p));
  LidarScan scan;
  scan.t = scene.t;
  scan.points.reserve(p);
  if (provenance) {
    provenance->clear();
    provenance->reserve(p);
  }
  for (int j = 0; j < p; ++j) {
    const int ray = (start + j) % p;
    scan.points.push_back(rays[ray]);
    if (provenance) provenance->push_back(sources[ray]);
  }
  return scan;
}

}  // namespace

LidarScan render_lidar_scan(const SceneState& scene, const ScenarioConfig& config, Rng& rng,
                            std::vector<Provenance>* provenance) {
  return render_scan(make_ray_table(config), scene, config, rng, provenance);
}

Eigen::VectorXd render_power_vector(const SceneState& scene, const ScenarioConfig& config,
                                    Rng& rng) {
  const int m_count = config.num_beams;
  const bool blocked = link_status(scene) == 1;
  const double los_scale = blocked ? std::pow(10.0, -config.blockage_attenuation_db / 10.0) : 1.0;
  const double tx_bearing = bearing(config.tx_position);
  const double link_length = config.tx_position.norm();

  // Reflected paths from objects that are near but not on the link.
  std::vector<std::pair<double, double>> reflections;  // (bearing, power)
  for (const auto& f : scene.footprints) {
    if (intersects(f, scene.link)) continue;
    const double theta = bearing(f.center);
    if (theta < config.beam_fov[0] || theta > config.beam_fov[1]) continue;
    const double path = f.center.norm() + (f.center - config.tx_position).norm();
    const double ratio = link_length / path;
    reflections.emplace_back(theta, config.reflection_coeff * ratio * ratio);
  }

  Eigen::VectorXd powers(m_count);
  for (int m = 0; m < m_count; ++m) {
    double signal = los_scale * beam_gain(m, tx_bearing, config);
    for (const auto& [theta, power] : reflections) signal += power * beam_gain(m, theta, config);
    if (config.noise_std > 0) {
      const double s = config.noise_std / std::sqrt(2.0);
      const std::complex<double> r(std::sqrt(signal) + s * rng.normal(), s * rng.normal());
      powers[m] = std::norm(r);
    } else {
      powers[m] = signal;
    }
  }
  return powers.cwiseMax(0.0);
}

std::vector<std::int64_t> blocked_instances(const MovingObject& object,
                                            const ScenarioConfig& config) {
  std::vector<std::int64_t> out;
  const Segment2d link = config.link();
  const std::int64_t lo = std::max<std::int64_t>(object.spawn_instance, 0);
  const std::int64_t hi = std::min(object.despawn_instance, config.duration_instances - 1);
  for (std::int64_t t = lo; t <= hi; ++t) {
    if (intersects(object.footprint(static_cast<double>(t), config.instance_dt_s), link)) {
      out.push_back(t);
    }
  }
  return out;
}

Trajectory simulate(const ScenarioConfig& config) {
  config.validate();
  const std::int64_t n = config.duration_instances;

  std::vector<MovingObject> objects;
  std::vector<std::vector<std::int64_t>> runs;
  int next_id = 0;
  for (const auto& s : config.scripted_objects) {
    const double lane =
        s.lane_offset_m.value_or(config.lane_offsets_m[static_cast<int>(s.direction)]);
    objects.push_back(make_object(next_id++, config.find_class(s.class_name), s.direction,
                                  s.speed_mps, lane, s.spawn_instance, config));
    runs.push_back(blocked_instances(objects.back(), config));
  }

  Rng arrivals(mix_seed(config.seed, 1));
  const double per_instance = config.arrival_rate * config.instance_dt_s;
  for (std::int64_t t = 0; t < n && per_instance > 0; ++t) {
    const auto count = arrivals.poisson(per_instance);
    for (std::uint32_t k = 0; k < count; ++k) {
      const ObjectClass& cls = draw_class(config.object_catalog, arrivals);
      const auto dir = arrivals.uniform() < 0.5 ? Direction::LeftToRight : Direction::RightToLeft;
      const double speed = arrivals.uniform(cls.speed_min_mps, cls.speed_max_mps);
      auto candidate = make_object(next_id, cls, dir, speed,
                                   config.lane_offsets_m[static_cast<int>(dir)], t, config);
      auto run = blocked_instances(candidate, config);
      const bool clash = std::any_of(runs.begin(), runs.end(), [&](const auto& other) {
        return runs_conflict(run, other, config.min_gap_instances);
      });
      if (clash) continue;
      ++next_id;
      objects.push_back(std::move(candidate));
      runs.push_back(std::move(run));
    }
  }

  Trajectory traj;
  traj.objects = std::move(objects);
  traj.scans.reserve(n);
  traj.powers.reserve(n);
  traj.link_status.reserve(n);
  traj.provenance.resize(n);
  Rng lidar_rng(mix_seed(config.seed, 2));
  Rng power_rng(mix_seed(config.seed, 3));
  const RayTable rays = make_ray_table(config);
  for (std::int64_t t = 0; t < n; ++t) {
    const SceneState scene = scene_at(config, traj.objects, t);
    traj.scans.push_back(render_scan(rays, scene, config, lidar_rng, &traj.provenance[t]));
    traj.powers.push_back(render_power_vector(scene, config, power_rng));
    traj.link_status.push_back(static_cast<std::uint8_t>(link_status(scene)));
  }
  return traj;
}

std::vector<std::int64_t> object_free_instances(const Trajectory& trajectory) {
  std::vector<std::int64_t> out;
  for (std::int64_t t = 0; t < trajectory.size(); ++t) {
    const bool any = std::any_of(trajectory.objects.begin(), trajectory.objects.end(),
                                 [t](const MovingObject& o) { return o.alive(t); });
    if (!any) out.push_back(t);
  }
  return out;
}

namespace {

double point_segment_distance(const Point2d& p, const Segment2d& s) {
  const Point2d e = s.b - s.a;
  const double len2 = e.squaredNorm();
  const double u = len2 > 0 ? std::clamp((p - s.a).dot(e) / len2, 0.0, 1.0) : 0.0;
  return (s.a + u * e - p).norm();
}

double gap_to_link(const Rect2d& r, const Segment2d& link) {
  if (intersects(r, link)) return 0.0;
  double best = std::numeric_limits<double>::infinity();
  for (const auto& edge : r.edges()) {
    best = std::min({best, point_segment_distance(edge.a, link), point_segment_distance(link.a, edge),
                     point_segment_distance(link.b, edge)});
  }
  return best;
}

}  // namespace

std::optional<std::size_t> blocker_at(const Trajectory& trajectory, const ScenarioConfig& config,
                                      std::int64_t t) {
  // Nearest object to the link rather than an exact hit: trajectories read
  // back from disk carry 9-digit kinematics, which can move a footprint off
  // the link by a rounding error at the first or last blocked instance.
  const Segment2d link = config.link();
  std::optional<std::size_t> best;
  double best_gap = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < trajectory.objects.size(); ++k) {
    const auto& o = trajectory.objects[k];
    if (!o.alive(t)) continue;
    const double gap = gap_to_link(o.footprint(static_cast<double>(t), config.instance_dt_s), link);
    if (gap < best_gap) {
      best_gap = gap;
      best = k;
    }
  }
  return best;
}

}  // namespace blockcast
