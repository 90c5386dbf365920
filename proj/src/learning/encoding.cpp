#include "bspplan/learning/encoding.hpp"

#include <algorithm>
#include <cmath>

#include "bspplan/common.hpp"

namespace bspplan::learning {

namespace {

std::pair<int, int> containing_cell(const Box& b, int g, Point2 p) {
  const int col = std::clamp(static_cast<int>(std::floor((p.x - b.xmin) / b.width() * g)), 0, g - 1);
  const int row = std::clamp(static_cast<int>(std::floor((p.y - b.ymin) / b.height() * g)), 0, g - 1);
  return {row, col};
}

std::vector<double> bump(const Box& b, int g, Point2 p) {
  if (!b.contains(p)) throw Error(ErrorKind::PointOutOfBounds, "point outside workspace bounds");
  const auto [r0, c0] = containing_cell(b, g, p);
  std::vector<double> out(static_cast<std::size_t>(g * g));
  for (int r = 0; r < g; ++r) {
    for (int c = 0; c < g; ++c) {
      const double d2 = (r - r0) * (r - r0) + (c - c0) * (c - c0);
      out[static_cast<std::size_t>(r * g + c)] = std::exp(-0.5 * d2);
    }
  }
  return out;
}

std::vector<double> occupancy(const Workspace& w, int g) {
  std::vector<double> out(static_cast<std::size_t>(g * g));
  const Box& b = w.bounds;
  for (int r = 0; r < g; ++r) {
    for (int c = 0; c < g; ++c) {
      const Point2 center{b.xmin + (c + 0.5) * b.width() / g, b.ymin + (r + 0.5) * b.height() / g};
      bool hit = false;
      for (const auto& obs : w.obstacles) hit = hit || obs.contains(center);
      out[static_cast<std::size_t>(r * g + c)] = hit ? 1.0 : 0.0;
    }
  }
  return out;
}

void check_grid(int g) {
  if (g < 4) throw Error(ErrorKind::InvalidParams, "encoding grid must be at least 4");
}

}  // namespace

Vector EnvEncoding::flatten() const {
  Vector v(static_cast<Eigen::Index>(occupancy.size() + start.size() + goal.size()));
  Eigen::Index i = 0;
  for (double x : occupancy) v[i++] = x;
  for (double x : start) v[i++] = x;
  for (double x : goal) v[i++] = x;
  return v;
}

EnvEncoding encode_environment(const Workspace& w, Point2 start, Point2 goal, int grid) {
  check_grid(grid);
  EnvEncoding e;
  e.grid = grid;
  e.start = bump(w.bounds, grid, start);
  e.goal = bump(w.bounds, grid, goal);
  e.occupancy = occupancy(w, grid);
  return e;
}

Point2 to_unit(const Box& b, Point2 p) {
  return {2.0 * (p.x - b.xmin) / b.width() - 1.0, 2.0 * (p.y - b.ymin) / b.height() - 1.0};
}

Point2 from_unit(const Box& b, Point2 u) {
  return {b.xmin + 0.5 * (u.x + 1.0) * b.width(), b.ymin + 0.5 * (u.y + 1.0) * b.height()};
}

Conditioner::Conditioner(const Workspace& w, int grid) : bounds_(w.bounds), grid_(grid) {
  check_grid(grid);
  occupancy_ = occupancy(w, grid);
}

Vector Conditioner::condition(Point2 from, Point2 to) const {
  const auto a = bump(bounds_, grid_, from);
  const auto b = bump(bounds_, grid_, to);
  Vector v(dimension());
  Eigen::Index i = 0;
  for (double x : occupancy_) v[i++] = x;
  for (double x : a) v[i++] = x;
  for (double x : b) v[i++] = x;
  const Point2 ua = to_unit(bounds_, from);
  const Point2 ub = to_unit(bounds_, to);
  v[i++] = ua.x;
  v[i++] = ua.y;
  v[i++] = ub.x;
  v[i++] = ub.y;
  return v;
}

}  // namespace bspplan::learning
