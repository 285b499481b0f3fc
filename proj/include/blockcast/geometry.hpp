#pragma once

#include <Eigen/Core>
#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <optional>

namespace blockcast {

// Scene frame: the LiDAR sits at the origin, the LoS link runs along +y, and
// the street runs along x. LiDAR angles are counter-clockwise from +x, so the
// transmitter lies at phi = pi/2 and the region behind the receiver at phi < 0.

template <typename Scalar>
using Point2 = Eigen::Matrix<Scalar, 2, 1>;

template <typename Scalar>
struct Segment2 {
  Point2<Scalar> a;
  Point2<Scalar> b;
};

// Axis-aligned rectangle: `length` is the x extent, `width` the y extent.
template <typename Scalar>
struct Rect {
  Point2<Scalar> center;
  Scalar length;
  Scalar width;

  Scalar min_x() const { return center.x() - length / 2; }
  Scalar max_x() const { return center.x() + length / 2; }
  Scalar min_y() const { return center.y() - width / 2; }
  Scalar max_y() const { return center.y() + width / 2; }

  std::array<Segment2<Scalar>, 4> edges() const {
    const Point2<Scalar> p00(min_x(), min_y()), p10(max_x(), min_y());
    const Point2<Scalar> p11(max_x(), max_y()), p01(min_x(), max_y());
    return {{{p00, p10}, {p10, p11}, {p11, p01}, {p01, p00}}};
  }
};

template <typename Scalar>
Point2<Scalar> polar_to_cartesian(Scalar angle, Scalar distance) {
  using std::cos;
  using std::sin;
  return {distance * cos(angle), distance * sin(angle)};
}

// Angle off the +y (array broadside) axis, positive towards +x.
template <typename Scalar>
Scalar bearing(const Point2<Scalar>& p) {
  using std::atan2;
  return atan2(p.x(), p.y());
}

template <typename Scalar>
Point2<Scalar> ray_direction(Scalar angle) {
  return polar_to_cartesian(angle, Scalar(1));
}

template <typename Scalar>
Scalar cross2(const Point2<Scalar>& u, const Point2<Scalar>& v) {
  return u.x() * v.y() - u.y() * v.x();
}

// Distance along a unit ray from `origin` to the closed segment, if hit.
template <typename Scalar>
std::optional<Scalar> ray_hit(const Point2<Scalar>& origin, const Point2<Scalar>& dir,
                              const Segment2<Scalar>& seg) {
  const Point2<Scalar> e = seg.b - seg.a;
  const Point2<Scalar> w = seg.a - origin;
  const Scalar denom = cross2(dir, e);
  if (denom == Scalar(0)) {
    // Parallel. A collinear segment is hit at its nearest endpoint ahead.
    if (cross2(w, dir) != Scalar(0)) return std::nullopt;
    const Scalar ta = w.dot(dir);
    const Scalar tb = (seg.b - origin).dot(dir);
    const Scalar t = std::min(ta, tb) >= 0 ? std::min(ta, tb) : std::max(ta, tb);
    if (t < 0) return std::nullopt;
    return t;
  }
  const Scalar t = cross2(w, e) / denom;
  const Scalar u = cross2(w, dir) / denom;
  if (t < 0 || u < 0 || u > 1) return std::nullopt;
  return t;
}

// Closed-set test: touching the boundary counts as intersecting.
// Liang-Barsky clipping of the segment against the rectangle.
template <typename Scalar>
bool intersects(const Rect<Scalar>& r, const Segment2<Scalar>& s) {
  const Point2<Scalar> d = s.b - s.a;
  const std::array<Scalar, 4> p{-d.x(), d.x(), -d.y(), d.y()};
  const std::array<Scalar, 4> q{s.a.x() - r.min_x(), r.max_x() - s.a.x(),
                                s.a.y() - r.min_y(), r.max_y() - s.a.y()};
  Scalar t0 = 0, t1 = 1;
  for (int i = 0; i < 4; ++i) {
    if (p[i] == Scalar(0)) {
      if (q[i] < 0) return false;
      continue;
    }
    const Scalar t = q[i] / p[i];
    if (p[i] < 0) {
      t0 = std::max(t0, t);
    } else {
      t1 = std::min(t1, t);
    }
    if (t0 > t1) return false;
  }
  return true;
}

}  // namespace blockcast
