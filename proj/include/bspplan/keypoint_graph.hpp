#pragma once

#include <set>
#include <span>
#include <vector>

#include "bspplan/bsp.hpp"
#include "bspplan/geometry.hpp"

namespace bspplan {

struct KeypointCandidate {
  int id = -1;
  Point2 position;
  int boundary_index = -1;
  /// Free-leaf indices on either side of the boundary (-1 when unresolved).
  int cell_a = -1;
  int cell_b = -1;
};

struct GraphEdge {
  int u = -1;
  int v = -1;
  double weight = 0.0;
};

/// Node 0 is the virtual start, node 1 the virtual goal, candidates follow.
struct ConnectivityGraph {
  static constexpr int kStart = 0;
  static constexpr int kGoal = 1;

  std::vector<Point2> positions;
  std::vector<KeypointCandidate> candidates;
  std::vector<GraphEdge> edges;
  std::set<int> removed_edges;

  std::size_t node_count() const { return positions.size(); }
  bool is_removed(int edge) const { return removed_edges.contains(edge); }
};

struct KeypointSequence {
  std::vector<Point2> points;
  /// Graph node of each point; empty once merged.
  std::vector<int> nodes;
  double cost = 0.0;
};

/// `resolution` candidates per boundary at fractions i/(resolution+1);
/// candidates that are not free are dropped. Throws EvenResolution.
std::vector<KeypointCandidate> keypoint_candidates(const BspTree& tree, int resolution);

/// Same placement rule on bare segments; adjacency is left unresolved.
std::vector<KeypointCandidate> keypoint_candidates(std::span<const Segment> boundaries, int resolution,
                                                   const Workspace& w);

/// Connects, within each free cell, every pair of candidates on its boundary
/// (and start/goal when they lie in that cell) by a collision-free segment.
/// Throws StartOrGoalInCollision.
ConnectivityGraph build_connectivity_graph(const BspTree& tree, std::vector<KeypointCandidate> candidates,
                                           Point2 start, Point2 goal);

/// Dijkstra from start to goal ignoring removed edges; ties pop the smaller
/// node id first. Throws NoPath.
KeypointSequence shortest_keypoint_sequence(const ConnectivityGraph& g);

/// Left-to-right pass replacing a close interior pair by its midpoint,
/// repeated until no pair is closer than eps_merge. Interior points closer
/// than eps_merge to the start or goal are absorbed by the endpoint.
KeypointSequence merge_keypoints(const KeypointSequence& seq, double eps_merge);

/// Moves the edges of `used` incident to `failed_node` into removed_edges.
/// Returns the number of edges newly removed.
std::size_t repair_graph(ConnectivityGraph& g, const KeypointSequence& used, int failed_node);

enum class PathVerdict { Accept, Reject };

/// Rejects a workspace trace that, after leaving the cell it starts in,
/// enters any cell of `visited_cells`.
PathVerdict examine_path(std::span<const Point2> trace, const BspTree& tree, const std::set<int>& visited_cells);

/// Free-leaf indices touched by a trace, in order of first visit.
std::vector<int> cells_on_trace(std::span<const Point2> trace, const BspTree& tree);

}  // namespace bspplan
