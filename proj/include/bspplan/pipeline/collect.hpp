#pragma once

#include <cstdint>
#include <vector>

#include "bspplan/keypoint_graph.hpp"
#include "bspplan/planner.hpp"

namespace bspplan {

struct CollectConfig {
  int resolution = 3;
  /// eps_merge as a fraction of the bounds diagonal.
  double merge_fraction = 0.05;
  int rrt_iters = 3000;
  double rrt_goal_bias = 0.2;
  /// Planner runs per sub-goal configuration; the shortest accepted path wins.
  int attempts = 2;
  int max_repairs = 400;
  /// Cap on sub-problems attempted per keypoint sequence, backtracking included.
  int max_subproblem_solves = 24;
  std::uint64_t seed = 11;

  double eps_merge(const Workspace& w) const { return merge_fraction * w.bounds.diagonal(); }
  void validate() const;
};

struct DatasetRecord {
  std::uint64_t env_seed = 0;
  std::uint64_t collect_seed = 0;
  Robot robot;
  Workspace workspace;
  Configuration start;
  Configuration target;
  /// Merged keypoints, starting at the start position and ending at the goal position.
  std::vector<Point2> keypoints;
  /// One path per consecutive keypoint pair; together they form a valid start-target path.
  std::vector<Path> paths;

  friend bool operator==(const DatasetRecord& a, const DatasetRecord& b);
};

struct CollectStats {
  int subproblems_solved = 0;
  int repairs = 0;
  int rejected_paths = 0;
};

/// Decomposes the problem by the BSP keypoint graph and solves the
/// subproblems in order with RRT, repairing the graph when a sub-goal cannot
/// be reached and rejecting paths that re-enter earlier cells. Throws
/// Infeasible when the graph runs out of sequences.
DatasetRecord collect_training_example(const PlanningProblem& problem, const CollectConfig& config,
                                       CollectStats* stats = nullptr);

/// Re-checks every stored path against the record's workspace.
bool record_is_valid(const DatasetRecord& r, double resolution);

/// Splits a densified path at the configurations whose workspace points are
/// nearest each interior keypoint, in order.
std::vector<Path> split_path_at_keypoints(const Robot& robot, const Path& dense, const std::vector<Point2>& keypoints);

}  // namespace bspplan
