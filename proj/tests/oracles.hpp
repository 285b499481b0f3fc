// Brute-force reference implementations. Deliberately naive and written
// without reference to the library code they check.
#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <utility>
#include <vector>

namespace oracle {

inline double top1(const std::vector<int>& p, const std::vector<int>& t) {
  long hits = 0;
  for (std::size_t i = 0; i < p.size(); ++i) hits += p[i] == t[i] ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(p.size());
}

// Two-pass population statistics in long double.
inline std::pair<double, double> mae_std(const std::vector<double>& p,
                                         const std::vector<double>& t) {
  long double sum = 0;
  for (std::size_t i = 0; i < p.size(); ++i) sum += std::fabs(static_cast<long double>(p[i]) - t[i]);
  const long double mean = sum / p.size();
  long double sq = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const long double d = std::fabs(static_cast<long double>(p[i]) - t[i]) - mean;
    sq += d * d;
  }
  return {static_cast<double>(mean), static_cast<double>(std::sqrt(sq / p.size()))};
}

// counts[truth][pred] by direct tally.
inline std::vector<std::vector<long>> tally(const std::vector<int>& p, const std::vector<int>& t,
                                            const std::vector<int>& classes) {
  std::vector<std::vector<long>> m(classes.size(), std::vector<long>(classes.size(), 0));
  for (std::size_t a = 0; a < classes.size(); ++a) {
    for (std::size_t b = 0; b < classes.size(); ++b) {
      for (std::size_t i = 0; i < p.size(); ++i) {
        if (t[i] == classes[a] && p[i] == classes[b]) ++m[a][b];
      }
    }
  }
  return m;
}

inline int occurrence(const std::vector<std::uint8_t>& x, std::int64_t t, int tp) {
  int best = 0;
  for (int n = 1; n <= tp; ++n) best = std::max<int>(best, x[t + n]);
  return best;
}

inline std::optional<int> first_blocked(const std::vector<std::uint8_t>& x, std::int64_t t,
                                        int tp) {
  std::vector<int> hits;
  for (int n = tp; n >= 1; --n) {
    if (x[t + n] == 1) hits.push_back(n);
  }
  if (hits.empty()) return std::nullopt;
  return *std::min_element(hits.begin(), hits.end());
}

// Pseudo-inverse least squares for y = v t + b.
inline std::pair<double, double> line_pinv(const std::vector<double>& t,
                                           const std::vector<double>& y) {
  Eigen::MatrixXd a(t.size(), 2);
  Eigen::VectorXd rhs(y.size());
  for (std::size_t i = 0; i < t.size(); ++i) {
    a(i, 0) = t[i];
    a(i, 1) = 1.0;
    rhs(i) = y[i];
  }
  const Eigen::VectorXd x = a.completeOrthogonalDecomposition().pseudoInverse() * rhs;
  return {x(0), x(1)};
}

// Density clustering by reachability closure over an explicit O(n^2)
// neighbourhood matrix. Border points take the cluster of their nearest core
// point (lowest index on exact ties). Returns -1 for noise; ids are arbitrary.
inline std::vector<int> dbscan(const std::vector<Eigen::Vector2d>& pts, double eps, int min_pts) {
  const std::size_t n = pts.size();
  std::vector<std::vector<char>> near(n, std::vector<char>(n, 0));
  std::vector<char> core(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    int count = 0;
    for (std::size_t j = 0; j < n; ++j) {
      near[i][j] = (pts[i] - pts[j]).norm() <= eps + 0.0 && (pts[i] - pts[j]).squaredNorm() <= eps * eps;
      count += near[i][j];
    }
    core[i] = count >= min_pts;
  }
  // Label propagation to a fixed point: each core point takes the smallest
  // index reachable through a chain of core neighbours.
  std::vector<std::size_t> root(n);
  for (std::size_t i = 0; i < n; ++i) root[i] = i;
  for (bool changed = true; changed;) {
    changed = false;
    for (std::size_t i = 0; i < n; ++i) {
      if (!core[i]) continue;
      for (std::size_t j = 0; j < n; ++j) {
        if (core[j] && near[i][j] && root[j] < root[i]) {
          root[i] = root[j];
          changed = true;
        }
      }
    }
  }
  std::vector<int> label(n, -1);
  for (std::size_t i = 0; i < n; ++i) {
    if (core[i]) label[i] = static_cast<int>(root[i]);
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (core[i]) continue;
    double best = INFINITY;
    for (std::size_t j = 0; j < n; ++j) {
      if (!core[j] || !near[i][j]) continue;
      const double d = (pts[i] - pts[j]).squaredNorm();
      if (d < best) {
        best = d;
        label[i] = static_cast<int>(root[j]);
      }
    }
  }
  return label;
}

// True when a and b induce the same partition, with noise fixed.
inline bool same_partition(const std::vector<int>& a, const std::vector<int>& b) {
  if (a.size() != b.size()) return false;
  std::map<int, int> ab, ba;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if ((a[i] < 0) != (b[i] < 0)) return false;
    if (a[i] < 0) continue;
    const auto [it1, new1] = ab.emplace(a[i], b[i]);
    const auto [it2, new2] = ba.emplace(b[i], a[i]);
    if (it1->second != b[i] || it2->second != a[i]) return false;
  }
  return true;
}

// 64-bit FNV-1a, for fingerprinting large golden files.
inline std::uint64_t fnv1a(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace oracle
