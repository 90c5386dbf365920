#pragma once

#include <cstdint>

#include "bspplan/geometry.hpp"
#include "bspplan/robots.hpp"

namespace bspplan {

/// Horizontal walls across the unit square, one gap each.
struct MazeConfig {
  int min_walls = 2;
  int max_walls = 3;
  double min_gap = 0.08;
  double max_gap = 0.12;
  /// Fraction of the height covered by wall thickness.
  double min_fill = 0.55;
  double max_fill = 0.65;
  int max_retries = 50;

  void validate() const;
};

struct MazeInstance {
  Workspace workspace;
  Point2 start;
  Point2 goal;
};

/// Start lies below the lowest wall, goal above the highest. Deterministic per
/// seed. Throws GenerationFailed when no instance passes validation.
MazeInstance generate_maze(std::uint64_t seed, const MazeConfig& config = {});

struct ArmWorldConfig {
  std::vector<double> link_lengths{0.22, 0.3, 0.28};
  double link_width = 0.02;
  Point2 base{0.5, 0.35};
  double wall_bottom = 0.6;
  double wall_top = 0.66;
  double min_gap = 0.13;
  double max_gap = 0.17;
  int max_retries = 20000;
};

struct ArmInstance {
  Workspace workspace;
  PlanarArm arm;
  Configuration start;
  Configuration goal;
};

/// One horizontal wall with two gaps above the arm base. The start keeps the
/// whole arm below the wall; the goal puts the tip above it with only the
/// last link crossing the wall.
ArmInstance generate_arm_world(std::uint64_t seed, const ArmWorldConfig& config = {});

}  // namespace bspplan
