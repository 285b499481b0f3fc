#include "blockcast/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "blockcast/error.hpp"

namespace blockcast {

std::vector<WindowPoint> window_points(const ObservationWindow& window) {
  std::vector<WindowPoint> out;
  for (Eigen::Index i = 0; i < window.lidar_distance.rows(); ++i) {
    for (Eigen::Index j = 0; j < window.lidar_distance.cols(); ++j) {
      const double d = window.lidar_distance(i, j);
      if (d == 0.0) continue;
      out.push_back({static_cast<int>(i), polar_to_cartesian(window.lidar_angle(i, j), d)});
    }
  }
  return out;
}

int count_points(const ObservationWindow& window) {
  return static_cast<int>((window.lidar_distance.array() != 0.0).count());
}

int predict_occurrence(int count, int threshold) { return count > threshold ? 1 : 0; }

int fit_threshold(std::span<const int> counts, std::span<const int> labels) {
  if (counts.size() != labels.size()) throw DomainError("fit_threshold: length mismatch");
  const auto positives = std::count(labels.begin(), labels.end(), 1);
  if (positives == 0 || positives == static_cast<std::ptrdiff_t>(labels.size())) {
    throw DomainError("fit_threshold: training windows hold a single class");
  }
  const int max_count = std::max(1, *std::max_element(counts.begin(), counts.end()));

  // hist[c][v]: windows of class c with count v
  std::vector<std::int64_t> neg(max_count + 1, 0), pos(max_count + 1, 0);
  for (std::size_t i = 0; i < counts.size(); ++i) {
    if (counts[i] < 0) throw DomainError("fit_threshold: negative count");
    (labels[i] == 1 ? pos : neg)[counts[i]] += 1;
  }
  // correct(theta) = #neg with count <= theta + #pos with count > theta
  std::int64_t neg_le = neg[0], pos_le = pos[0];
  int best_theta = 1;
  std::int64_t best = -1;
  for (int theta = 1; theta <= max_count; ++theta) {
    neg_le += neg[theta];
    pos_le += pos[theta];
    const std::int64_t correct = neg_le + (positives - pos_le);
    if (correct > best) {
      best = correct;
      best_theta = theta;
    }
  }
  return best_theta;
}

int predict_severity_threshold(int count, std::span<const int> thresholds) {
  for (std::size_t i = 1; i < thresholds.size(); ++i) {
    if (!(thresholds[i] > thresholds[i - 1])) {
      throw DomainError("severity thresholds must be strictly increasing");
    }
  }
  const auto it = std::lower_bound(thresholds.begin(), thresholds.end(), count);
  return static_cast<int>(it - thresholds.begin()) + 1;
}

int SeverityModel::predict(int count) const {
  return classes.at(predict_severity_threshold(count, thresholds) - 1);
}

SeverityModel fit_severity_thresholds(std::span<const int> counts, std::span<const int> labels) {
  if (counts.size() != labels.size() || counts.empty()) {
    throw DomainError("fit_severity_thresholds: need equal, non-empty inputs");
  }
  const std::set<int> distinct(labels.begin(), labels.end());
  SeverityModel model;
  model.classes.assign(distinct.begin(), distinct.end());
  const int n_class = static_cast<int>(model.classes.size());
  if (n_class == 1) return model;

  const int max_count = std::max(*std::max_element(counts.begin(), counts.end()), n_class - 2);
  const int values = max_count + 1;
  // cum[k][v]: samples of class k with count <= v
  std::vector<std::vector<std::int64_t>> cum(n_class, std::vector<std::int64_t>(values, 0));
  for (std::size_t i = 0; i < counts.size(); ++i) {
    const auto k = std::lower_bound(model.classes.begin(), model.classes.end(), labels[i]) -
                   model.classes.begin();
    cum[k][counts[i]] += 1;
  }
  for (auto& c : cum) {
    for (int v = 1; v < values; ++v) c[v] += c[v - 1];
  }

  // best[k][v]: max correct for classes 0..k with threshold k at v;
  // from[k][v]: the previous threshold achieving it (smallest on ties).
  constexpr std::int64_t kUnset = std::numeric_limits<std::int64_t>::min() / 4;
  std::vector<std::vector<std::int64_t>> best(n_class - 1, std::vector<std::int64_t>(values, kUnset));
  std::vector<std::vector<int>> from(n_class - 1, std::vector<int>(values, -1));
  best[0] = cum[0];
  for (int k = 1; k < n_class - 1; ++k) {
    std::int64_t run = kUnset;
    int arg = -1;
    for (int v = 1; v < values; ++v) {
      const std::int64_t cand = best[k - 1][v - 1] - cum[k][v - 1];
      if (best[k - 1][v - 1] != kUnset && cand > run) {
        run = cand;
        arg = v - 1;
      }
      if (arg >= 0) {
        best[k][v] = run + cum[k][v];
        from[k][v] = arg;
      }
    }
  }
  const auto& last_cum = cum[n_class - 1];
  const std::int64_t last_total = last_cum[values - 1];
  std::int64_t top = kUnset;
  int arg = -1;
  for (int v = 0; v < values; ++v) {
    if (best[n_class - 2][v] == kUnset) continue;
    const std::int64_t cand = best[n_class - 2][v] + last_total - last_cum[v];
    if (cand > top) {
      top = cand;
      arg = v;
    }
  }
  model.thresholds.assign(n_class - 1, 0);
  for (int k = n_class - 2; k >= 0; --k) {
    model.thresholds[k] = arg;
    arg = from[k][arg];
  }
  return model;
}

std::vector<std::optional<double>> mean_x_per_instance(std::span<const WindowPoint> points,
                                                       std::span<const int> labels, int cluster,
                                                       int observation) {
  std::vector<double> sum(observation, 0.0);
  std::vector<int> n(observation, 0);
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (!labels.empty() && labels[i] != cluster) continue;
    const int k = points[i].instance;
    if (k < 0 || k >= observation) throw DomainError("window point outside the observation");
    sum[k] += points[i].position.x();
    n[k] += 1;
  }
  std::vector<std::optional<double>> out(observation);
  for (int k = 0; k < observation; ++k) {
    if (n[k] > 0) out[k] = sum[k] / n[k];
  }
  return out;
}

std::vector<std::optional<double>> nearest_x_per_instance(std::span<const WindowPoint> points,
                                                          std::span<const int> labels,
                                                          int cluster, int observation) {
  std::vector<std::optional<double>> out(observation);
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (!labels.empty() && labels[i] != cluster) continue;
    const int k = points[i].instance;
    if (k < 0 || k >= observation) throw DomainError("window point outside the observation");
    const double x = points[i].position.x();
    if (!out[k] || std::abs(x) < std::abs(*out[k])) out[k] = x;
  }
  return out;
}

namespace {

struct Endpoints {
  double first;
  double last;
  int first_index;
  int last_index;
};

std::optional<Endpoints> endpoints(std::span<const std::optional<double>> xs) {
  int first = -1, last = -1;
  for (int k = 0; k < static_cast<int>(xs.size()); ++k) {
    if (!xs[k]) continue;
    if (first < 0) first = k;
    last = k;
  }
  if (first < 0) return std::nullopt;
  return Endpoints{*xs[first], *xs[last], first, last};
}

}  // namespace

std::optional<int> select_target(std::span<const WindowPoint> points, std::span<const int> labels,
                                 int observation) {
  const int clusters = labels.empty() ? 0 : *std::max_element(labels.begin(), labels.end()) + 1;
  std::optional<int> target;
  double nearest = std::numeric_limits<double>::infinity();
  for (int c = 0; c < clusters; ++c) {
    const auto xs = mean_x_per_instance(points, labels, c, observation);
    const auto ends = endpoints(xs);
    if (!ends || ends->first_index == ends->last_index) continue;
    const bool moving_right = ends->last > ends->first;
    const bool moving_left = ends->last < ends->first;
    const bool approaching = (ends->last < 0 && moving_right) || (ends->last > 0 && moving_left);
    if (approaching && std::abs(ends->last) < nearest) {
      nearest = std::abs(ends->last);
      target = c;
    }
  }
  return target;
}

LineFit<double> ls_fit(std::span<const std::optional<double>> mean_x) {
  std::vector<double> t, y;
  for (std::size_t k = 0; k < mean_x.size(); ++k) {
    if (!mean_x[k]) continue;
    t.push_back(static_cast<double>(k + 1));
    y.push_back(*mean_x[k]);
  }
  return fit_constant_velocity<double>(t, y);
}

double predict_blockage_time(const LineFit<double>& fit, double y_last) {
  constexpr double kStill = 1e-9;
  if (std::abs(fit.velocity) < kStill) throw DomainError("object is not moving: no crossing");
  if (y_last * fit.velocity >= 0 && y_last != 0.0) {
    throw DomainError("object is receding from the link: no crossing");
  }
  return std::abs(y_last) / std::abs(fit.velocity);
}

int predict_direction(std::span<const std::optional<double>> mean_x) {
  const auto ends = endpoints(mean_x);
  if (!ends) throw DomainError("predict_direction: window has no points");
  return ends->last > ends->first ? 0 : 1;
}

namespace {

struct Clustered {
  std::vector<WindowPoint> points;
  std::vector<int> labels;
  std::optional<int> target;
};

Clustered cluster_window(const ObservationWindow& window, const DbscanParams& params) {
  Clustered c;
  c.points = window_points(window);
  std::vector<Point2d> xy;
  xy.reserve(c.points.size());
  for (const auto& p : c.points) xy.push_back(p.position);
  c.labels = dbscan<double>(xy, params);
  c.target = select_target(c.points, c.labels, window.observation());
  return c;
}

}  // namespace

std::optional<MotionEstimate> estimate_blockage_time(const ObservationWindow& window,
                                                     const DbscanParams& params,
                                                     TrackPoint track) {
  const Clustered c = cluster_window(window, params);
  if (!c.target) return std::nullopt;
  const int t_ob = window.observation();
  const auto xs = track == TrackPoint::Mean
                      ? mean_x_per_instance(c.points, c.labels, *c.target, t_ob)
                      : nearest_x_per_instance(c.points, c.labels, *c.target, t_ob);
  try {
    const auto fit = ls_fit(xs);
    const double y_last = xs.back() ? *xs.back() : fit.velocity * t_ob + fit.offset;
    return MotionEstimate{fit.velocity, fit.offset, predict_blockage_time(fit, y_last)};
  } catch (const DomainError&) {
    return std::nullopt;
  }
}

int predict_window_direction(const ObservationWindow& window, const DbscanParams& params,
                             bool use_target) {
  const int t_ob = window.observation();
  // Nothing visible: the only blind sector lies at x < 0, so a blocker hidden
  // there is moving left to right.
  if (count_points(window) == 0) return 0;
  if (!use_target) return predict_direction(mean_x_per_instance(window_points(window), {}, 0, t_ob));
  const Clustered c = cluster_window(window, params);
  if (c.target) {
    return predict_direction(mean_x_per_instance(c.points, c.labels, *c.target, t_ob));
  }
  return predict_direction(mean_x_per_instance(c.points, {}, 0, t_ob));
}

}  // namespace blockcast
