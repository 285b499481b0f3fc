#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <functional>
#include <numeric>

#include "blockcast/baselines.hpp"
#include "blockcast/error.hpp"
#include "oracles.hpp"

using namespace blockcast;

namespace {

ObservationWindow window_with(int t_ob, const std::vector<std::vector<double>>& xs_per_instance,
                              double y = 4.0) {
  // One return per listed x, placed on the line y = const.
  std::size_t width = 1;
  for (const auto& row : xs_per_instance) width = std::max(width, row.size());
  ObservationWindow w;
  w.lidar_angle = Eigen::MatrixXd::Zero(t_ob, static_cast<Eigen::Index>(width));
  w.lidar_distance = Eigen::MatrixXd::Zero(t_ob, static_cast<Eigen::Index>(width));
  w.power = Eigen::MatrixXd::Zero(t_ob, 1);
  for (int i = 0; i < t_ob && i < static_cast<int>(xs_per_instance.size()); ++i) {
    for (std::size_t j = 0; j < xs_per_instance[i].size(); ++j) {
      const double x = xs_per_instance[i][j];
      w.lidar_angle(i, j) = std::atan2(y, x);
      w.lidar_distance(i, j) = std::hypot(x, y);
    }
  }
  return w;
}

std::vector<std::optional<double>> opt(std::initializer_list<double> xs) {
  std::vector<std::optional<double>> out;
  for (double x : xs) out.emplace_back(x);
  return out;
}

int brute_threshold(const std::vector<int>& counts, const std::vector<int>& labels) {
  const int hi = std::max(1, *std::max_element(counts.begin(), counts.end()));
  int best = -1, arg = 1;
  for (int theta = 1; theta <= hi; ++theta) {
    int ok = 0;
    for (std::size_t i = 0; i < counts.size(); ++i) ok += (counts[i] > theta ? 1 : 0) == labels[i];
    if (ok > best) {
      best = ok;
      arg = theta;
    }
  }
  return arg;
}

// All strictly increasing threshold vectors in [0, hi], lexicographic order.
void each_vector(int k, int lo, int hi, std::vector<int>& cur,
                 const std::function<void(const std::vector<int>&)>& fn) {
  if (static_cast<int>(cur.size()) == k) {
    fn(cur);
    return;
  }
  for (int v = lo; v <= hi; ++v) {
    cur.push_back(v);
    each_vector(k, v + 1, hi, cur, fn);
    cur.pop_back();
  }
}

}  // namespace

TEST_CASE("count_points") {
  CHECK(count_points(window_with(4, {})) == 0);
  CHECK(count_points(window_with(3, {{1, 2, 3}, {4, 5}, {6, 7}})) == 7);
}

TEST_CASE("occurrence threshold rule") {
  CHECK(predict_occurrence(15, 14) == 1);
  CHECK(predict_occurrence(0, 1) == 0);
  CHECK(predict_occurrence(14, 14) == 0);
}

TEST_CASE("fit_threshold") {
  const std::vector<int> counts{0, 2, 5, 3, 9, 12, 10};
  const std::vector<int> labels{0, 0, 0, 0, 1, 1, 1};
  CHECK(fit_threshold(counts, labels) == 5);
  CHECK_THROWS_AS(fit_threshold(counts, std::vector<int>(7, 0)), DomainError);

  Rng rng(4);
  for (int trial = 0; trial < 3000; ++trial) {
    const int n = 2 + static_cast<int>(rng.index(40));
    std::vector<int> c(n), l(n);
    for (int i = 0; i < n; ++i) {
      l[i] = static_cast<int>(rng.index(2));
      c[i] = static_cast<int>(rng.index(30)) + (l[i] ? static_cast<int>(rng.index(10)) : 0);
    }
    l[0] = 0;
    l[1] = 1;
    REQUIRE(fit_threshold(c, l) == brute_threshold(c, l));
  }
}

TEST_CASE("severity threshold rule") {
  const std::vector<int> one{50};
  CHECK(predict_severity_threshold(10, one) == 1);
  CHECK(predict_severity_threshold(50, one) == 1);
  CHECK(predict_severity_threshold(51, one) == 2);
  const std::vector<int> bad{5, 5};
  CHECK_THROWS_AS(predict_severity_threshold(3, bad), DomainError);
  // every count maps to exactly one level
  const std::vector<int> th{3, 8, 20};
  for (int c = 0; c < 40; ++c) {
    const int level = predict_severity_threshold(c, th);
    const int expect = c <= 3 ? 1 : c <= 8 ? 2 : c <= 20 ? 3 : 4;
    CHECK(level == expect);
  }
}

TEST_CASE("fit_severity_thresholds matches exhaustive search") {
  Rng rng(8);
  for (int trial = 0; trial < 400; ++trial) {
    const int n = 1 + static_cast<int>(rng.index(25));
    const int n_class = 2 + static_cast<int>(rng.index(2));
    std::vector<int> c(n), l(n);
    for (int i = 0; i < n; ++i) {
      l[i] = 1 + static_cast<int>(rng.index(n_class));
      c[i] = static_cast<int>(rng.index(12)) + 3 * l[i];
    }
    const SeverityModel m = fit_severity_thresholds(c, l);
    std::vector<int> classes(l.begin(), l.end());
    std::sort(classes.begin(), classes.end());
    classes.erase(std::unique(classes.begin(), classes.end()), classes.end());
    REQUIRE(m.classes == classes);
    if (classes.size() == 1) {
      CHECK(m.thresholds.empty());
      continue;
    }
    const int hi = std::max(*std::max_element(c.begin(), c.end()), static_cast<int>(classes.size()) - 2);
    auto score = [&](const std::vector<int>& th) {
      int ok = 0;
      for (int i = 0; i < n; ++i) {
        ok += classes[predict_severity_threshold(c[i], th) - 1] == l[i];
      }
      return ok;
    };
    int best = -1;
    std::vector<int> arg, cur;
    each_vector(static_cast<int>(classes.size()) - 1, 0, hi, cur, [&](const std::vector<int>& th) {
      const int s = score(th);
      if (s > best) {
        best = s;
        arg = th;
      }
    });
    REQUIRE(m.thresholds == arg);
  }
}

TEST_CASE("dbscan: basic cases") {
  std::vector<Point2d> blob;
  for (int i = 0; i < 12; ++i) blob.emplace_back(0.1 * i, 0.05 * i);
  const auto l = dbscan<double>(blob, DbscanParams{});
  CHECK(std::all_of(l.begin(), l.end(), [](int v) { return v == 0; }));

  std::vector<Point2d> sparse;
  for (int i = 0; i < 5; ++i) sparse.emplace_back(10.0 * i, 0.0);
  const auto s = dbscan<double>(sparse, DbscanParams{});
  CHECK(std::all_of(s.begin(), s.end(), [](int v) { return v == kNoise; }));

  CHECK(dbscan<double>(std::vector<Point2d>{}, DbscanParams{}).empty());
  DbscanParams bad;
  bad.eps = 0;
  CHECK_THROWS_AS(dbscan<double>(blob, bad), ConfigError);
}

TEST_CASE("dbscan: reachability oracle and permutation invariance") {
  Rng rng(99);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = static_cast<int>(rng.index(201));
    std::vector<Point2d> pts;
    const int blobs = 1 + static_cast<int>(rng.index(5));
    std::vector<Point2d> centers;
    for (int b = 0; b < blobs; ++b) centers.emplace_back(rng.uniform(-15, 15), rng.uniform(-15, 15));
    for (int i = 0; i < n; ++i) {
      if (rng.uniform() < 0.3) {
        pts.emplace_back(rng.uniform(-20, 20), rng.uniform(-20, 20));
      } else {
        const auto& c = centers[rng.index(blobs)];
        pts.emplace_back(c.x() + 2.5 * rng.normal(), c.y() + 2.5 * rng.normal());
      }
    }
    const DbscanParams p{2.1, 10};
    const auto got = dbscan<double>(pts, p);
    REQUIRE(oracle::same_partition(got, oracle::dbscan(pts, 2.1, 10)));
    // labels follow first appearance
    int next = 0;
    for (int v : got) {
      if (v == kNoise) continue;
      CHECK(v <= next);
      if (v == next) ++next;
    }
    std::vector<std::size_t> perm(pts.size());
    std::iota(perm.begin(), perm.end(), 0);
    for (std::size_t k = perm.size(); k > 1; --k) std::swap(perm[k - 1], perm[rng.index(k)]);
    std::vector<Point2d> shuffled;
    for (auto i : perm) shuffled.push_back(pts[i]);
    const auto sl = dbscan<double>(shuffled, p);
    std::vector<int> back(pts.size());
    for (std::size_t k = 0; k < perm.size(); ++k) back[perm[k]] = sl[k];
    REQUIRE(oracle::same_partition(got, back));
  }
}

TEST_CASE("select_target") {
  // A is left of the link and moving left (crossed already),
  // B is left of the link and moving right.
  std::vector<WindowPoint> pts;
  std::vector<int> labels;
  for (int k = 0; k < 3; ++k) {
    pts.push_back({k, Point2d(-2.0 - k, 4.0)});
    labels.push_back(0);
    pts.push_back({k, Point2d(-8.0 + k, 7.0)});
    labels.push_back(1);
  }
  CHECK(select_target(pts, labels, 3) == 1);

  std::vector<WindowPoint> single{{0, {5.0, 7.0}}, {1, {4.0, 7.0}}, {2, {3.0, 7.0}}};
  CHECK(select_target(single, std::vector<int>{0, 0, 0}, 3) == 0);

  std::vector<WindowPoint> away{{0, {1.0, 7.0}}, {2, {3.0, 7.0}}, {0, {-1.0, 4.0}}, {2, {-3.0, 4.0}}};
  CHECK_FALSE(select_target(away, std::vector<int>{0, 0, 1, 1}, 3).has_value());

  // two approaching clusters: nearest to x = 0 wins
  std::vector<WindowPoint> two{{0, {-9.0, 4.0}}, {2, {-7.0, 4.0}}, {0, {6.0, 7.0}}, {2, {3.0, 7.0}}};
  CHECK(select_target(two, std::vector<int>{0, 0, 1, 1}, 3) == 1);
}

TEST_CASE("least squares") {
  const auto f = ls_fit(opt({-5, -4, -3}));
  CHECK(f.velocity == doctest::Approx(1.0));
  CHECK(f.offset == doctest::Approx(-6.0));
  const auto c = ls_fit(opt({2.5, 2.5, 2.5, 2.5}));
  CHECK(c.velocity == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(c.offset == doctest::Approx(2.5));

  std::vector<std::optional<double>> gaps(6);
  gaps[1] = 3.0;
  CHECK_THROWS_AS(ls_fit(gaps), DomainError);
  gaps[4] = 0.0;
  const auto g = ls_fit(gaps);  // t = 2 and 5
  CHECK(g.velocity == doctest::Approx(-1.0));

  Rng rng(14);
  for (int trial = 0; trial < 2000; ++trial) {
    const int n = 2 + static_cast<int>(rng.index(30));
    const double v = rng.uniform(-3, 3), b = rng.uniform(-20, 20);
    std::vector<std::optional<double>> ys(n);
    std::vector<double> t, y;
    for (int k = 0; k < n; ++k) {
      if (k > 1 && rng.uniform() < 0.2) continue;
      ys[k] = v * (k + 1) + b + 0.3 * rng.normal();
      t.push_back(k + 1);
      y.push_back(*ys[k]);
    }
    const auto fit = ls_fit(ys);
    const auto [ov, ob] = oracle::line_pinv(t, y);
    REQUIRE(std::abs(fit.velocity - ov) < 1e-9);
    REQUIRE(std::abs(fit.offset - ob) < 1e-9);
  }

  // exact lines: parameters and crossing time
  for (int trial = 0; trial < 500; ++trial) {
    const double v = rng.uniform(0.2, 2.0), x0 = -rng.uniform(5, 20);
    std::vector<std::optional<double>> ys(10);
    for (int k = 0; k < 10; ++k) ys[k] = x0 + v * (k + 1);
    const auto fit = ls_fit(ys);
    CHECK(std::abs(fit.velocity - v) < 1e-9);
    CHECK(std::abs(fit.offset - x0) < 1e-9);
    const double y_last = *ys.back();
    if (y_last < 0) CHECK(std::abs(predict_blockage_time(fit, y_last) - (-y_last / v)) < 1e-9);
  }
}

TEST_CASE("predict_blockage_time") {
  CHECK(predict_blockage_time({1.0, 0.0}, -3.0) == doctest::Approx(3.0));
  CHECK(predict_blockage_time({-2.0, 0.0}, 4.0) == doctest::Approx(2.0));
  CHECK_THROWS_AS(predict_blockage_time({1.0, 0.0}, 3.0), DomainError);
  CHECK_THROWS_AS(predict_blockage_time({1e-12, 0.0}, -3.0), DomainError);
}

TEST_CASE("direction rule") {
  CHECK(predict_direction(opt({-5, -2, 0})) == 0);
  CHECK(predict_direction(opt({4, 1, 1})) == 1);
  CHECK(predict_direction(opt({2, 3, 2})) == 1);
  CHECK_THROWS_AS(predict_direction(std::vector<std::optional<double>>(3)), DomainError);
  Rng rng(6);
  for (int trial = 0; trial < 1000; ++trial) {
    const double a = rng.uniform(-10, 10), b = rng.uniform(-10, 10);
    if (a == b) continue;
    CHECK(predict_direction(opt({a, 0.0, b})) != predict_direction(opt({-a, 0.0, -b})));
  }
}

TEST_CASE("window pipelines") {
  // a compact object approaching from the left, 12 returns per instance
  std::vector<std::vector<double>> rows;
  for (int k = 0; k < 8; ++k) {
    std::vector<double> row;
    for (int j = 0; j < 12; ++j) row.push_back(-10.0 + k + 0.1 * j);
    rows.push_back(row);
  }
  const ObservationWindow w = window_with(8, rows);
  const auto est = estimate_blockage_time(w, DbscanParams{}, TrackPoint::Nearest);
  REQUIRE(est);
  CHECK(est->velocity == doctest::Approx(1.0));
  // nearest edge at -10 + 7 + 1.1 = -1.9 in the last row
  CHECK(est->predicted_instance == doctest::Approx(1.9));
  const auto mean = estimate_blockage_time(w, DbscanParams{}, TrackPoint::Mean);
  REQUIRE(mean);
  CHECK(mean->predicted_instance == doctest::Approx(2.45));
  CHECK(predict_window_direction(w, DbscanParams{}) == 0);
  CHECK(predict_window_direction(w, DbscanParams{}, false) == 0);

  const ObservationWindow none = window_with(8, {});
  CHECK_FALSE(estimate_blockage_time(none, DbscanParams{}).has_value());
  CHECK(predict_window_direction(none, DbscanParams{}) == 0);
}

TEST_CASE("severity thresholds separate sedans from buses") {
  const ScrConfig scr;
  std::vector<int> train_c, train_l, test_p, test_l;
  for (int k = 0; k < 40; ++k) {
    ScenarioConfig c = street_a(700 + k);
    c.duration_instances = 2000;
    c.arrival_rate = 0.03;
    c.min_gap_instances = 40;
    auto catalog = default_catalog();
    c.object_catalog = {catalog[1], catalog[3]};
    const Trajectory t = simulate(c);
    std::vector<LidarScan> frames;
    for (auto i : object_free_instances(t)) frames.push_back(t.scans[i]);
    const auto prep = preprocess_trajectory(t.scans, build_dictionary(frames, scr), scr).scans;
    WindowConfig w;
    w.observation = 16;
    w.horizon = 2;
    for (const auto& win : slide_windows(t, c, &prep, scr, w, k)) {
      if (win.labels.occurrence != 1) continue;
      (k % 2 == 0 ? train_c : test_p).push_back(count_points(win));
      (k % 2 == 0 ? train_l : test_l).push_back(*win.labels.severity);
    }
  }
  const SeverityModel m = fit_severity_thresholds(train_c, train_l);
  REQUIRE(m.classes == std::vector<int>{2, 3});
  int level2 = 0, hit = 0;
  for (std::size_t i = 0; i < test_p.size(); ++i) {
    if (test_l[i] != 2) continue;
    ++level2;
    hit += m.predict(test_p[i]) == 2;
  }
  REQUIRE(level2 > 50);
  const double recall = static_cast<double>(hit) / level2;
  MESSAGE("level-2 recall " << recall << " on " << level2 << " windows");
  CHECK(recall >= 0.95);
}
