#include "bspplan/geometry.hpp"

#include <algorithm>
#include <limits>
#include <string>

#include "bspplan/common.hpp"

namespace bspplan {

Halfplane Halfplane::left_of(Point2 a, Point2 b) {
  // Interior of a CCW edge is on the left, so the outward normal points right.
  const Point2 d = b - a;
  return make({d.y, -d.x}, dot(Point2{d.y, -d.x}, a));
}

Halfplane Halfplane::make(Point2 normal, double offset) {
  const double n = norm(normal);
  if (!(n > kDegeneracyTol) || !std::isfinite(n)) {
    throw Error(ErrorKind::InvalidGeometry, "halfplane normal has zero length");
  }
  return {normal * (1.0 / n), offset / n};
}

double signed_area(std::span<const Point2> v) {
  double twice = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    twice += cross(v[i], v[(i + 1) % v.size()]);
  }
  return 0.5 * twice;
}

namespace {

// Removes duplicate and collinear vertices until stable.
void clean_loop(std::vector<Point2>& v) {
  bool changed = true;
  while (changed && v.size() >= 3) {
    changed = false;
    for (std::size_t i = 0; i < v.size() && v.size() >= 3; ++i) {
      const Point2 prev = v[(i + v.size() - 1) % v.size()];
      const Point2 cur = v[i];
      const Point2 next = v[(i + 1) % v.size()];
      const Point2 e1 = cur - prev;
      const Point2 e2 = next - cur;
      const double l1 = norm(e1);
      const double l2 = norm(e2);
      const bool duplicate = l1 <= kDegeneracyTol;
      const bool collinear = std::abs(cross(e1, e2)) <= kDegeneracyTol * std::max(l1, l2) &&
                             dot(e1, e2) >= 0.0;
      if (duplicate || collinear) {
        v.erase(v.begin() + static_cast<std::ptrdiff_t>(i));
        changed = true;
        break;
      }
    }
  }
}

enum class LoopCheck { Ok, Degenerate, NotConvex };

LoopCheck normalize_loop(std::vector<Point2>& v) {
  for (const auto& p : v) {
    if (!is_finite(p)) return LoopCheck::NotConvex;
  }
  clean_loop(v);
  if (v.size() < 3) return LoopCheck::Degenerate;
  if (signed_area(v) < 0.0) std::reverse(v.begin(), v.end());
  clean_loop(v);
  if (v.size() < 3) return LoopCheck::Degenerate;
  if (!(signed_area(v) > 0.0)) return LoopCheck::Degenerate;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const Point2 e1 = v[(i + 1) % v.size()] - v[i];
    const Point2 e2 = v[(i + 2) % v.size()] - v[(i + 1) % v.size()];
    if (cross(e1, e2) <= 0.0) return LoopCheck::NotConvex;
  }
  return LoopCheck::Ok;
}

struct Interval {
  double lo;
  double hi;
};

Interval project(std::span<const Point2> pts, Point2 axis) {
  Interval iv{std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
  for (const auto& p : pts) {
    const double d = dot(p, axis);
    iv.lo = std::min(iv.lo, d);
    iv.hi = std::max(iv.hi, d);
  }
  return iv;
}

// Calls f(axis) for each unit edge normal of the loop; stops when f returns true.
template <typename F>
bool any_axis(std::span<const Point2> pts, F&& f) {
  if (pts.size() < 2) return false;
  const std::size_t edges = pts.size() == 2 ? 1 : pts.size();
  for (std::size_t i = 0; i < edges; ++i) {
    const Point2 d = pts[(i + 1) % pts.size()] - pts[i];
    const double len = norm(d);
    if (len <= kDegeneracyTol) continue;
    if (f(Point2{d.y / len, -d.x / len})) return true;
  }
  return false;
}

bool boxes_touch(const Box& a, const Box& b) {
  return a.xmin <= b.xmax + kDegeneracyTol && b.xmin <= a.xmax + kDegeneracyTol &&
         a.ymin <= b.ymax + kDegeneracyTol && b.ymin <= a.ymax + kDegeneracyTol;
}

}  // namespace

ConvexPolygon::ConvexPolygon(std::vector<Point2> v) : vertices_(std::move(v)) {
  bbox_ = {std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(),
           -std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
  for (const auto& p : vertices_) {
    bbox_.xmin = std::min(bbox_.xmin, p.x);
    bbox_.ymin = std::min(bbox_.ymin, p.y);
    bbox_.xmax = std::max(bbox_.xmax, p.x);
    bbox_.ymax = std::max(bbox_.ymax, p.y);
  }
}

ConvexPolygon ConvexPolygon::from_vertices(std::vector<Point2> vertices) {
  switch (normalize_loop(vertices)) {
    case LoopCheck::Ok: return ConvexPolygon(std::move(vertices));
    case LoopCheck::Degenerate:
      throw Error(ErrorKind::InvalidGeometry, "polygon is degenerate (fewer than 3 distinct vertices)");
    case LoopCheck::NotConvex: break;
  }
  throw Error(ErrorKind::InvalidGeometry, "polygon is not convex or has non-finite vertices");
}

std::optional<ConvexPolygon> ConvexPolygon::try_from_vertices(std::vector<Point2> vertices) {
  if (normalize_loop(vertices) != LoopCheck::Ok) return std::nullopt;
  return ConvexPolygon(std::move(vertices));
}

ConvexPolygon ConvexPolygon::from_box(const Box& b) {
  return from_vertices({{b.xmin, b.ymin}, {b.xmax, b.ymin}, {b.xmax, b.ymax}, {b.xmin, b.ymax}});
}

Halfplane ConvexPolygon::edge_halfplane(std::size_t i) const {
  const Segment e = edge(i);
  return Halfplane::left_of(e.a, e.b);
}

double ConvexPolygon::area() const { return signed_area(vertices_); }

Point2 ConvexPolygon::centroid() const {
  double cx = 0.0;
  double cy = 0.0;
  double twice = 0.0;
  for (std::size_t i = 0; i < vertices_.size(); ++i) {
    const Point2 a = vertices_[i];
    const Point2 b = vertices_[(i + 1) % vertices_.size()];
    const double c = cross(a, b);
    twice += c;
    cx += (a.x + b.x) * c;
    cy += (a.y + b.y) * c;
  }
  return {cx / (3.0 * twice), cy / (3.0 * twice)};
}

bool ConvexPolygon::contains(Point2 p) const {
  if (p.x < bbox_.xmin - kDegeneracyTol || p.x > bbox_.xmax + kDegeneracyTol ||
      p.y < bbox_.ymin - kDegeneracyTol || p.y > bbox_.ymax + kDegeneracyTol) {
    return false;
  }
  for (std::size_t i = 0; i < vertices_.size(); ++i) {
    const Point2 a = vertices_[i];
    const Point2 d = vertices_[(i + 1) % vertices_.size()] - a;
    if (cross(d, p - a) < -kDegeneracyTol * norm(d)) return false;
  }
  return true;
}

void Workspace::validate() const {
  if (!(bounds.width() > kDegeneracyTol) || !(bounds.height() > kDegeneracyTol) ||
      !std::isfinite(bounds.area())) {
    throw Error(ErrorKind::DegenerateWorkspace, "bounds have zero area");
  }
  for (std::size_t i = 0; i < obstacles.size(); ++i) {
    for (const auto& v : obstacles[i].vertices()) {
      if (!bounds.contains(v)) {
        throw Error(ErrorKind::InvalidGeometry, "obstacle " + std::to_string(i) + " leaves the bounds");
      }
    }
    for (std::size_t j = 0; j < i; ++j) {
      if (interiors_overlap(obstacles[i], obstacles[j])) {
        throw Error(ErrorKind::InvalidGeometry,
                    "obstacles " + std::to_string(j) + " and " + std::to_string(i) + " overlap");
      }
    }
  }
}

bool convex_sets_touch(std::span<const Point2> a, std::span<const Point2> b) {
  auto separated = [&](Point2 axis) {
    const Interval ia = project(a, axis);
    const Interval ib = project(b, axis);
    return ia.hi < ib.lo - kDegeneracyTol || ib.hi < ia.lo - kDegeneracyTol;
  };
  if (any_axis(a, separated) || any_axis(b, separated)) return false;
  // Two single points have no axes: compare directly.
  if (a.size() < 2 && b.size() < 2 && !a.empty() && !b.empty()) {
    return distance(a[0], b[0]) <= kDegeneracyTol;
  }
  return true;
}

bool interiors_overlap(const ConvexPolygon& a, const ConvexPolygon& b) {
  auto separated = [&](Point2 axis) {
    const Interval ia = project(a.vertices(), axis);
    const Interval ib = project(b.vertices(), axis);
    return ia.hi <= ib.lo + kDegeneracyTol || ib.hi <= ia.lo + kDegeneracyTol;
  };
  return !(any_axis(a.vertices(), separated) || any_axis(b.vertices(), separated));
}

bool point_in_free_space(Point2 p, const Workspace& w) {
  if (!w.bounds.contains(p)) return false;
  for (const auto& obs : w.obstacles) {
    if (obs.contains(p)) return false;
  }
  return true;
}

bool segment_collides(const Segment& s, const Workspace& w) {
  if (!w.bounds.contains(s.a) || !w.bounds.contains(s.b)) return true;
  const Box sbox{std::min(s.a.x, s.b.x), std::min(s.a.y, s.b.y), std::max(s.a.x, s.b.x),
                 std::max(s.a.y, s.b.y)};
  const Point2 pts[2] = {s.a, s.b};
  for (const auto& obs : w.obstacles) {
    if (!boxes_touch(sbox, obs.bounding_box())) continue;
    if (convex_sets_touch(pts, obs.vertices())) return true;
  }
  return false;
}

std::optional<std::pair<double, double>> segment_polygon_interval(const Segment& s,
                                                                  const ConvexPolygon& poly) {
  double t0 = 0.0;
  double t1 = 1.0;
  const Point2 d = s.b - s.a;
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const Halfplane h = poly.edge_halfplane(i);
    const double num = h.offset + kDegeneracyTol - dot(h.normal, s.a);
    const double den = dot(h.normal, d);
    if (std::abs(den) <= std::numeric_limits<double>::min()) {
      if (num < 0.0) return std::nullopt;
      continue;
    }
    const double t = num / den;
    if (den > 0.0) {
      t1 = std::min(t1, t);
    } else {
      t0 = std::max(t0, t);
    }
    if (t0 > t1) return std::nullopt;
  }
  return std::make_pair(t0, t1);
}

std::optional<Segment> clip_halfplane_to_cell(const Halfplane& h, const ConvexPolygon& cell) {
  const auto& v = cell.vertices();
  std::vector<double> s(v.size());
  bool any_in = false;
  bool any_out = false;
  for (std::size_t i = 0; i < v.size(); ++i) {
    s[i] = h.signed_distance(v[i]);
    any_in = any_in || s[i] < -kDegeneracyTol;
    any_out = any_out || s[i] > kDegeneracyTol;
  }
  if (!any_in || !any_out) return std::nullopt;

  const Point2 dir{-h.normal.y, h.normal.x};
  double tmin = std::numeric_limits<double>::infinity();
  double tmax = -std::numeric_limits<double>::infinity();
  Point2 pmin;
  Point2 pmax;
  auto take = [&](Point2 p) {
    const double t = dot(p, dir);
    if (t < tmin) {
      tmin = t;
      pmin = p;
    }
    if (t > tmax) {
      tmax = t;
      pmax = p;
    }
  };
  for (std::size_t i = 0; i < v.size(); ++i) {
    const std::size_t j = (i + 1) % v.size();
    if (std::abs(s[i]) <= kDegeneracyTol) take(v[i]);
    if ((s[i] < -kDegeneracyTol && s[j] > kDegeneracyTol) ||
        (s[i] > kDegeneracyTol && s[j] < -kDegeneracyTol)) {
      take(v[i] + (v[j] - v[i]) * (s[i] / (s[i] - s[j])));
    }
  }
  if (!(tmax - tmin > kDegeneracyTol)) return std::nullopt;
  return Segment{pmin, pmax};
}

SplitResult split_polygon(const ConvexPolygon& cell, const Halfplane& h) {
  const auto& v = cell.vertices();
  std::vector<double> s(v.size());
  bool any_in = false;
  bool any_out = false;
  for (std::size_t i = 0; i < v.size(); ++i) {
    s[i] = h.signed_distance(v[i]);
    any_in = any_in || s[i] < -kDegeneracyTol;
    any_out = any_out || s[i] > kDegeneracyTol;
  }
  if (!any_out) return {cell, std::nullopt};
  if (!any_in) return {std::nullopt, cell};

  std::vector<Point2> in;
  std::vector<Point2> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const std::size_t j = (i + 1) % v.size();
    if (s[i] <= kDegeneracyTol) in.push_back(v[i]);
    if (s[i] >= -kDegeneracyTol) out.push_back(v[i]);
    if ((s[i] < -kDegeneracyTol && s[j] > kDegeneracyTol) ||
        (s[i] > kDegeneracyTol && s[j] < -kDegeneracyTol)) {
      // Same formula for both halves keeps the shared chord bit-identical.
      const Point2 p = v[i] + (v[j] - v[i]) * (s[i] / (s[i] - s[j]));
      in.push_back(p);
      out.push_back(p);
    }
  }
  return {ConvexPolygon::try_from_vertices(std::move(in)), ConvexPolygon::try_from_vertices(std::move(out))};
}

}  // namespace bspplan
