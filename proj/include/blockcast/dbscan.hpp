#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <unordered_map>
#include <utility>
#include <vector>

#include "blockcast/error.hpp"
#include "blockcast/geometry.hpp"

namespace blockcast {

struct DbscanParams {
  double eps = 2.1;
  int min_pts = 10;

  void validate() const {
    if (!(eps > 0)) throw ConfigError("eps", "must be > 0");
    if (min_pts < 1) throw ConfigError("min_pts", "must be >= 1");
  }
};

inline constexpr int kNoise = -1;

namespace detail {

// Uniform grid with cell size eps; neighbours live in the 3x3 block.
template <typename Scalar>
class EpsGrid {
 public:
  EpsGrid(std::span<const Point2<Scalar>> pts, Scalar eps) : pts_(pts), eps_(eps) {
    for (std::size_t i = 0; i < pts.size(); ++i) cells_[cell_of(pts[i])].push_back(i);
  }

  template <typename Fn>
  void for_each_neighbor(std::size_t i, Fn&& fn) const {
    const auto c = cell_of(pts_[i]);
    const Scalar eps2 = eps_ * eps_;
    for (std::int64_t dx = -1; dx <= 1; ++dx) {
      for (std::int64_t dy = -1; dy <= 1; ++dy) {
        const auto it = cells_.find({c.first + dx, c.second + dy});
        if (it == cells_.end()) continue;
        for (const auto j : it->second) {
          if ((pts_[j] - pts_[i]).squaredNorm() <= eps2) fn(j);
        }
      }
    }
  }

 private:
  using Cell = std::pair<std::int64_t, std::int64_t>;

  Cell cell_of(const Point2<Scalar>& p) const {
    using std::floor;
    return {static_cast<std::int64_t>(floor(p.x() / eps_)),
            static_cast<std::int64_t>(floor(p.y() / eps_))};
  }
  struct CellHash {
    std::size_t operator()(const Cell& c) const {
      return static_cast<std::size_t>((static_cast<std::uint64_t>(c.first) * 0x9e3779b97f4a7c15ULL) ^
                                      static_cast<std::uint64_t>(c.second));
    }
  };

  std::span<const Point2<Scalar>> pts_;
  Scalar eps_;
  std::unordered_map<Cell, std::vector<std::size_t>, CellHash> cells_;
};

}  // namespace detail

// Density clustering. A point is core when at least min_pts points (itself
// included) lie within eps. Clusters are the connected components of core
// points; a border point joins the cluster of its nearest core neighbour, so
// the partition does not depend on input order. Cluster ids follow first
// appearance in input order; noise is kNoise.
template <typename Scalar>
std::vector<int> dbscan(std::span<const Point2<Scalar>> pts, const DbscanParams& params) {
  params.validate();
  const std::size_t n = pts.size();
  for (const auto& p : pts) {
    if (!p.allFinite()) throw DomainError("dbscan: non-finite coordinate");
  }
  const detail::EpsGrid<Scalar> grid(pts, static_cast<Scalar>(params.eps));

  std::vector<std::vector<std::size_t>> neighbors(n);
  std::vector<char> core(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    grid.for_each_neighbor(i, [&](std::size_t j) { neighbors[i].push_back(j); });
    core[i] = neighbors[i].size() >= static_cast<std::size_t>(params.min_pts);
  }

  // Components over the core graph, by BFS.
  std::vector<std::int64_t> component(n, -1);
  std::int64_t components = 0;
  std::vector<std::size_t> queue;
  for (std::size_t i = 0; i < n; ++i) {
    if (!core[i] || component[i] >= 0) continue;
    component[i] = components;
    queue.assign(1, i);
    while (!queue.empty()) {
      const auto k = queue.back();
      queue.pop_back();
      for (const auto j : neighbors[k]) {
        if (core[j] && component[j] < 0) {
          component[j] = components;
          queue.push_back(j);
        }
      }
    }
    ++components;
  }

  for (std::size_t i = 0; i < n; ++i) {
    if (core[i]) continue;
    Scalar best = std::numeric_limits<Scalar>::infinity();
    for (const auto j : neighbors[i]) {
      if (!core[j]) continue;
      const Scalar d = (pts[j] - pts[i]).squaredNorm();
      if (d < best) {
        best = d;
        component[i] = component[j];
      }
    }
  }

  std::vector<int> relabel(components, kNoise);
  std::vector<int> labels(n, kNoise);
  int next = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (component[i] < 0) continue;
    if (relabel[component[i]] == kNoise) relabel[component[i]] = next++;
    labels[i] = relabel[component[i]];
  }
  return labels;
}

}  // namespace blockcast
