#pragma once

#include <vector>

#include "bspplan/geometry.hpp"
#include "bspplan/learning/mlp.hpp"

namespace bspplan::learning {

/// Three G x G grids over the bounds, row-major with row 0 at ymin:
/// occupancy (1 iff the cell center lies in an obstacle), then Gaussian
/// bumps (sigma = 1 cell, peak 1) around the start and goal cells.
struct EnvEncoding {
  int grid = 0;
  std::vector<double> occupancy;
  std::vector<double> start;
  std::vector<double> goal;

  /// occupancy, start, goal concatenated.
  Vector flatten() const;
  friend bool operator==(const EnvEncoding&, const EnvEncoding&) = default;
};

/// Throws InvalidParams for G < 4, PointOutOfBounds for start/goal outside bounds.
EnvEncoding encode_environment(const Workspace& w, Point2 start, Point2 goal, int grid);

/// Caches the occupancy grid of one workspace and produces conditioning
/// vectors for (from, to) workspace pairs:
///   [occupancy | from bump | to bump | from (unit coords) | to (unit coords)]
/// Unit coordinates map the bounds onto [-1, 1]^2.
class Conditioner {
 public:
  Conditioner(const Workspace& w, int grid);

  static int dimension(int grid) { return 3 * grid * grid + 4; }
  int dimension() const { return dimension(grid_); }
  Vector condition(Point2 from, Point2 to) const;

 private:
  Box bounds_;
  int grid_;
  std::vector<double> occupancy_;
};

/// Maps a workspace point into [-1, 1]^2 over the bounds and back.
Point2 to_unit(const Box& b, Point2 p);
Point2 from_unit(const Box& b, Point2 u);

}  // namespace bspplan::learning
