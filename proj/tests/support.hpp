#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "bspplan/geometry.hpp"
#include "bspplan/common.hpp"

namespace testsupport {

using namespace bspplan;

inline ConvexPolygon rect(double x0, double y0, double x1, double y1) {
  return ConvexPolygon::from_box({x0, y0, x1, y1});
}

inline Workspace world(std::vector<ConvexPolygon> obstacles, Box bounds = {0.0, 0.0, 1.0, 1.0}) {
  Workspace w{bounds, std::move(obstacles)};
  w.validate();
  return w;
}

inline double uniform(Rng& rng, double a, double b) { return a + (b - a) * uniform01(rng); }

inline Point2 random_point(Rng& rng, const Box& b) { return {uniform(rng, b.xmin, b.xmax), uniform(rng, b.ymin, b.ymax)}; }

/// Convex polygon from sorted random angles on an ellipse.
inline ConvexPolygon random_convex(Rng& rng, Point2 c, double r) {
  const int n = 3 + static_cast<int>(uniform01(rng) * 5);
  std::vector<double> angles;
  for (int i = 0; i < n; ++i) angles.push_back(uniform(rng, 0.0, 2.0 * M_PI));
  std::sort(angles.begin(), angles.end());
  std::vector<Point2> v;
  for (double a : angles) v.push_back({c.x + r * std::cos(a), c.y + r * std::sin(a)});
  auto p = ConvexPolygon::try_from_vertices(v);
  return p ? *p : rect(c.x - r / 2, c.y - r / 2, c.x + r / 2, c.y + r / 2);
}

/// Up to n disjoint random convex obstacles in the unit square.
inline Workspace random_world(Rng& rng, int n) {
  std::vector<ConvexPolygon> obs;
  for (int tries = 0; tries < 200 && static_cast<int>(obs.size()) < n; ++tries) {
    const double r = uniform(rng, 0.04, 0.15);
    const Point2 c{uniform(rng, r, 1.0 - r), uniform(rng, r, 1.0 - r)};
    ConvexPolygon p = random_convex(rng, c, r);
    bool clash = false;
    for (const auto& o : obs) clash = clash || convex_sets_touch(o.vertices(), p.vertices());
    if (!clash) obs.push_back(p);
  }
  return world(std::move(obs));
}

/// Even-odd ray cast; boundary points are not handled.
inline bool raycast_inside(const std::vector<Point2>& v, Point2 p) {
  bool inside = false;
  for (std::size_t i = 0, j = v.size() - 1; i < v.size(); j = i++) {
    if ((v[i].y > p.y) != (v[j].y > p.y)) {
      const double x = v[j].x + (p.y - v[j].y) * (v[i].x - v[j].x) / (v[i].y - v[j].y);
      if (p.x < x) inside = !inside;
    }
  }
  return inside;
}

inline double point_segment_distance(Point2 p, const Segment& s) {
  const Point2 d = s.b - s.a;
  const double len2 = dot(d, d);
  const double t = len2 > 0 ? std::clamp(dot(p - s.a, d) / len2, 0.0, 1.0) : 0.0;
  return distance(p, s.at(t));
}

/// Proper crossing of two segments (shared endpoints and touching excluded up to tol).
inline bool segments_cross(const Segment& a, const Segment& b, double tol) {
  const double d1 = cross(a.b - a.a, b.a - a.a);
  const double d2 = cross(a.b - a.a, b.b - a.a);
  const double d3 = cross(b.b - b.a, a.a - b.a);
  const double d4 = cross(b.b - b.a, a.b - b.a);
  const double la = a.length(), lb = b.length();
  return ((d1 > tol * la && d2 < -tol * la) || (d1 < -tol * la && d2 > tol * la)) &&
         ((d3 > tol * lb && d4 < -tol * lb) || (d3 < -tol * lb && d4 > tol * lb));
}

}  // namespace testsupport
