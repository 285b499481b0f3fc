#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>

#include "blockcast/error.hpp"
#include "blockcast/lidar_prep.hpp"

using namespace blockcast;

namespace {

LidarScan scan_of(std::vector<LidarPoint> pts, std::int64_t t = 0) {
  LidarScan s;
  s.t = t;
  s.points = std::move(pts);
  return s;
}

ScenarioConfig car_scene(std::uint64_t seed) {
  ScenarioConfig c = street_a(seed);
  c.duration_instances = 80;
  c.arrival_rate = 0.0;
  c.phantom_rate = 0.0;
  c.lidar_jitter_std_m = 0.0;
  ScriptedObject s;
  s.class_name = "sedan";
  s.speed_mps = 10.0;
  s.spawn_instance = 20;
  c.scripted_objects.push_back(s);
  return c;
}

std::vector<LidarScan> pick(const Trajectory& t, const std::vector<std::int64_t>& idx) {
  std::vector<LidarScan> out;
  for (const auto i : idx) out.push_back(t.scans[i]);
  return out;
}

}  // namespace

TEST_CASE("fov_filter") {
  const ScrConfig cfg;
  const LidarScan s = scan_of({{-M_PI / 4, 1}, {0.0, 1}, {M_PI / 2, 1}, {-3 * M_PI / 4, 1}});
  const LidarScan f = fov_filter(s, cfg.phi1, cfg.phi2);
  REQUIRE(f.points.size() == 2);
  CHECK(f.points[0].angle_rad == 0.0);
  CHECK(f.points[1].angle_rad == M_PI / 2);
  CHECK(fov_filter(scan_of({}), cfg.phi1, cfg.phi2).points.empty());
  const LidarScan edge = scan_of({{cfg.phi1, 1}, {cfg.phi1, 2}, {cfg.phi2, 3}});
  CHECK(fov_filter(edge, cfg.phi1, cfg.phi2).points.size() == 3);
}

TEST_CASE("sort_scan") {
  const LidarScan s = sort_scan(scan_of({{0.5, 2}, {0.1, 3}, {0.3, 0}}));
  REQUIRE(s.points.size() == 3);
  CHECK(s.points[0].angle_rad == 0.1);
  CHECK(s.points[1].angle_rad == 0.5);
  CHECK(s.points[2].angle_rad == 0.3);
  CHECK(s.points[2].distance_m == 0.0);

  const LidarScan sorted = scan_of({{0.1, 1}, {0.2, 1}, {0.3, 1}});
  const LidarScan again = sort_scan(sorted);
  for (std::size_t i = 0; i < 3; ++i) CHECK(again.points[i].angle_rad == sorted.points[i].angle_rad);

  const LidarScan zeros = sort_scan(scan_of({{0.9, 0}, {0.1, 0}, {0.5, 0}}));
  CHECK(zeros.points[0].angle_rad == 0.9);
  CHECK(zeros.points[1].angle_rad == 0.1);
  CHECK(zeros.points[2].angle_rad == 0.5);
}

TEST_CASE("quantize_distance and angle levels") {
  const ScrConfig cfg;
  CHECK(quantize_distance(0.0, cfg) == 0);
  CHECK(quantize_distance(0.034, cfg) == 1);
  CHECK(quantize_distance(1.0, cfg) == static_cast<int>(std::floor(1.0 / 0.034)));
  CHECK(quantize_distance(1.0, cfg) == 29);
  CHECK(quantize_distance(1e6, cfg) == cfg.distance_levels - 1);
  CHECK(angle_level(cfg.phi1, cfg) == 0);
  CHECK(angle_level(cfg.phi2, cfg) == cfg.angle_levels - 1);
  const QuantizedScan q1 = quantize(scan_of({{cfg.phi1, 1.0}}), cfg);
  REQUIRE(q1.entries.size() == 1);
  CHECK(q1.entries[0].q == 0);
  const QuantizedScan q2 = quantize(scan_of({{cfg.phi2, 1.0}}), cfg);
  REQUIRE(q2.entries.size() == 1);
  CHECK(q2.entries[0].q == cfg.angle_levels - 1);
}

TEST_CASE("quantize_angles keeps the lower-median point of a level") {
  const ScrConfig cfg;
  const double c = cfg.angle_center(10), h = cfg.angle_step() / 8;
  const QuantizedScan q = quantize(scan_of({{c + h, 2.0}, {c - h, 4.0}, {c, 7.0}}), cfg);
  REQUIRE(q.entries.size() == 1);
  CHECK(q.entries[0].distance_m == 7.0);
  CHECK(q.entries[0].q == 10);
  // even count: lower median
  const QuantizedScan e = quantize(scan_of({{c - h, 4.0}, {c + h, 9.0}}), cfg);
  CHECK(e.entries[0].distance_m == 4.0);
  // zero-distance points are dropped
  CHECK(quantize(scan_of({{c, 0.0}}), cfg).entries.empty());
}

TEST_CASE("quantized scans: one entry per level, levels ascending") {
  ScenarioConfig c = street_a(8);
  c.duration_instances = 100;
  c.arrival_rate = 0.5;
  c.phantom_rate = 3.0;
  const Trajectory t = simulate(c);
  const ScrConfig cfg;
  for (const auto& scan : t.scans) {
    const QuantizedScan q = quantize(scan, cfg);
    for (std::size_t i = 1; i < q.entries.size(); ++i) CHECK(q.entries[i - 1].q < q.entries[i].q);
    for (const auto& e : q.entries) {
      CHECK(e.angle_rad >= cfg.phi1);
      CHECK(e.angle_rad <= cfg.phi2);
      CHECK(e.qd == quantize_distance(e.distance_m, cfg));
      CHECK(e.q == angle_level(e.angle_rad, cfg));
    }
    // idempotent through to_scan
    CHECK(quantize(to_scan(q), cfg) == q);
  }
}

TEST_CASE("dictionary is a set union") {
  const ScrConfig cfg;
  const LidarScan a = scan_of({{0.0, 1.0}, {0.5, 2.0}, {1.0, 3.0}});
  const std::vector<LidarScan> five(5, a);
  const auto one = build_dictionary(std::span(&a, 1), cfg);
  CHECK(build_dictionary(five, cfg).size() == one.size());
  CHECK(one.size() == 3);
  const LidarScan b = scan_of({{2.0, 5.0}, {2.5, 6.0}});
  const std::vector<LidarScan> ab{a, b};
  CHECK(build_dictionary(ab, cfg).size() == 5);
  CHECK_THROWS_AS(build_dictionary(std::vector<LidarScan>{}, cfg), InputError);
  const auto entries = build_dictionary(ab, cfg).sorted_entries();
  CHECK(std::is_sorted(entries.begin(), entries.end()));
}

TEST_CASE("remove_static") {
  const ScrConfig cfg;
  const LidarScan a = scan_of({{0.0, 1.0}, {0.5, 2.0}, {1.0, 3.0}});
  const QuantizedScan q = quantize(a, cfg);
  const auto dict = build_dictionary(std::span(&a, 1), cfg);
  CHECK(remove_static(q, dict).entries.empty());
  const StaticDictionary empty(cfg.angle_levels, cfg.distance_levels);
  CHECK(remove_static(q, empty) == q);
  const StaticDictionary other(cfg.angle_levels + 1, cfg.distance_levels);
  CHECK_THROWS_AS(remove_static(q, other), DomainError);
}

TEST_CASE("scr_rate") {
  CHECK(scr_rate(100, 0) == 1.0);
  CHECK(scr_rate(100, 100) == 0.0);
  CHECK(scr_rate(460, 216) == doctest::Approx(244.0 / 460.0));
  CHECK(scr_rate(460, 216) == doctest::Approx(0.5304).epsilon(1e-4));
  CHECK_THROWS_AS(scr_rate(0, 0), DomainError);
  CHECK_THROWS_AS(scr_rate(10, 11), DomainError);
}

TEST_CASE("static wall plus one car: SCR leaves only car points") {
  const ScenarioConfig c = car_scene(2);
  const Trajectory t = simulate(c);
  const ScrConfig cfg;
  const auto free = object_free_instances(t);
  REQUIRE(!free.empty());
  const auto dict = build_dictionary(pick(t, free), cfg);
  const auto out = preprocess_trajectory(t.scans, dict, cfg);
  REQUIRE(out.scans.size() == t.scans.size());
  std::size_t car_points = 0;
  for (std::int64_t i = 0; i < t.size(); ++i) {
    std::map<double, PointSource> source;
    for (std::size_t k = 0; k < t.scans[i].points.size(); ++k) {
      source[t.scans[i].points[k].angle_rad] = t.provenance[i][k].source;
    }
    for (const auto& e : out.scans[i].entries) {
      CHECK(source.at(e.angle_rad) == PointSource::Object);
      ++car_points;
    }
  }
  CHECK(car_points > 0);
}

TEST_CASE("preprocess: object-free trajectory empties, car trace peaks in its lifetime") {
  ScenarioConfig c = car_scene(4);
  c.scripted_objects.clear();
  const Trajectory t = simulate(c);
  const ScrConfig cfg;
  const auto dict = build_dictionary(t.scans, cfg);
  for (const auto& q : preprocess_trajectory(t.scans, dict, cfg).scans) CHECK(q.entries.empty());

  const ScenarioConfig cc = car_scene(4);
  const Trajectory tc = simulate(cc);
  const auto free = object_free_instances(tc);
  const auto out = preprocess_trajectory(tc.scans, build_dictionary(pick(tc, free), cfg), cfg);
  std::size_t peak = 0;
  std::int64_t at = -1;
  for (std::int64_t i = 0; i < tc.size(); ++i) {
    if (out.scans[i].entries.size() > peak) {
      peak = out.scans[i].entries.size();
      at = i;
    }
  }
  REQUIRE(peak > 0);
  CHECK(tc.objects[0].alive(at));
  CHECK(out.seconds_per_instance.size() == tc.scans.size());
}

TEST_CASE("dictionary grows monotonically with frames") {
  ScenarioConfig c = street_a(12);
  c.duration_instances = 300;
  c.arrival_rate = 0.0;
  c.phantom_rate = 1.0;
  const Trajectory t = simulate(c);
  const ScrConfig cfg;
  std::size_t prev = 0;
  for (std::size_t n : {1u, 2u, 10u, 50u, 300u}) {
    const auto d = build_dictionary(std::span(t.scans.data(), n), cfg);
    CHECK(d.size() >= prev);
    prev = d.size();
  }
}
