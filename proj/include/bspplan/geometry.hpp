#pragma once

#include <cmath>
#include <optional>
#include <span>
#include <utility>
#include <vector>

namespace bspplan {

/// Absolute tolerance for geometric degeneracy (zero length, on-line tests).
inline constexpr double kDegeneracyTol = 1e-12;
/// Relative tolerance for areas and normalization.
inline constexpr double kRelativeTol = 1e-9;

struct Point2 {
  double x = 0.0;
  double y = 0.0;

  friend Point2 operator+(Point2 a, Point2 b) { return {a.x + b.x, a.y + b.y}; }
  friend Point2 operator-(Point2 a, Point2 b) { return {a.x - b.x, a.y - b.y}; }
  friend Point2 operator*(Point2 a, double s) { return {a.x * s, a.y * s}; }
  friend Point2 operator*(double s, Point2 a) { return {a.x * s, a.y * s}; }
  friend bool operator==(Point2 a, Point2 b) = default;
};

inline double dot(Point2 a, Point2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Point2 a, Point2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Point2 a) { return std::hypot(a.x, a.y); }
inline double distance(Point2 a, Point2 b) { return norm(a - b); }
inline Point2 midpoint(Point2 a, Point2 b) { return (a + b) * 0.5; }
inline bool is_finite(Point2 p) { return std::isfinite(p.x) && std::isfinite(p.y); }

/// Axis-aligned rectangle; closed.
struct Box {
  double xmin = 0.0;
  double ymin = 0.0;
  double xmax = 1.0;
  double ymax = 1.0;

  double width() const { return xmax - xmin; }
  double height() const { return ymax - ymin; }
  double area() const { return width() * height(); }
  double diagonal() const { return std::hypot(width(), height()); }
  Point2 center() const { return {0.5 * (xmin + xmax), 0.5 * (ymin + ymax)}; }
  bool contains(Point2 p) const {
    return p.x >= xmin - kDegeneracyTol && p.x <= xmax + kDegeneracyTol &&
           p.y >= ymin - kDegeneracyTol && p.y <= ymax + kDegeneracyTol;
  }
  friend bool operator==(const Box&, const Box&) = default;
};

/// The closed set {p : normal . p <= offset}.
struct Halfplane {
  Point2 normal;
  double offset = 0.0;

  /// Supporting line of the directed edge a->b with the left side (the
  /// interior of a counter-clockwise polygon) inside.
  static Halfplane left_of(Point2 a, Point2 b);
  /// Normalizes `normal`; throws InvalidGeometry for a zero normal.
  static Halfplane make(Point2 normal, double offset);

  double signed_distance(Point2 p) const { return dot(normal, p) - offset; }
  bool contains(Point2 p) const { return signed_distance(p) <= kDegeneracyTol; }
  friend bool operator==(const Halfplane&, const Halfplane&) = default;
};

struct Segment {
  Point2 a;
  Point2 b;

  double length() const { return distance(a, b); }
  Point2 at(double t) const { return a + (b - a) * t; }
  Point2 mid() const { return midpoint(a, b); }
  friend bool operator==(const Segment&, const Segment&) = default;
};

/// Convex polygon with counter-clockwise vertices and non-zero area.
class ConvexPolygon {
 public:
  /// Validates and normalizes: drops duplicate and collinear vertices, flips
  /// clockwise input to counter-clockwise. Throws InvalidGeometry when the
  /// result is not a strictly convex polygon with at least three vertices.
  static ConvexPolygon from_vertices(std::vector<Point2> vertices);
  /// Like from_vertices but returns nullopt instead of throwing on a
  /// degenerate (sliver or point) result.
  static std::optional<ConvexPolygon> try_from_vertices(std::vector<Point2> vertices);
  static ConvexPolygon from_box(const Box& box);

  const std::vector<Point2>& vertices() const { return vertices_; }
  std::size_t size() const { return vertices_.size(); }
  Segment edge(std::size_t i) const { return {vertices_[i], vertices_[(i + 1) % vertices_.size()]}; }
  /// Supporting halfplane of edge i; contains the polygon.
  Halfplane edge_halfplane(std::size_t i) const;

  double area() const;
  Point2 centroid() const;
  Box bounding_box() const { return bbox_; }
  /// Closed containment: boundary points are inside.
  bool contains(Point2 p) const;

  friend bool operator==(const ConvexPolygon& a, const ConvexPolygon& b) {
    return a.vertices_ == b.vertices_;
  }

 private:
  explicit ConvexPolygon(std::vector<Point2> v);
  std::vector<Point2> vertices_;
  Box bbox_;
};

struct Workspace {
  Box bounds;
  std::vector<ConvexPolygon> obstacles;

  /// Throws InvalidGeometry when an obstacle leaves the bounds or two obstacle
  /// interiors overlap, DegenerateWorkspace when the bounds have no area.
  void validate() const;
  friend bool operator==(const Workspace&, const Workspace&) = default;
};

/// Signed area (positive for counter-clockwise order).
double signed_area(std::span<const Point2> vertices);

/// Closed-set overlap test between two convex vertex loops (either may be a
/// segment given as two points). Touching counts as overlap.
bool convex_sets_touch(std::span<const Point2> a, std::span<const Point2> b);

/// True when the interiors of two convex polygons overlap with positive area.
bool interiors_overlap(const ConvexPolygon& a, const ConvexPolygon& b);

bool point_in_free_space(Point2 p, const Workspace& w);

bool segment_collides(const Segment& s, const Workspace& w);

/// Parameter interval [t0, t1] of s (t in [0, 1]) inside the closed polygon.
std::optional<std::pair<double, double>> segment_polygon_interval(const Segment& s,
                                                                  const ConvexPolygon& poly);

/// Chord of the halfplane's boundary line through the cell, or nullopt if the
/// line misses the cell interior.
std::optional<Segment> clip_halfplane_to_cell(const Halfplane& h, const ConvexPolygon& cell);

struct SplitResult {
  std::optional<ConvexPolygon> inside;
  std::optional<ConvexPolygon> outside;
};

SplitResult split_polygon(const ConvexPolygon& cell, const Halfplane& h);

}  // namespace bspplan
