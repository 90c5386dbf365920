#pragma once

#include <optional>
#include <vector>

#include "bspplan/geometry.hpp"

namespace bspplan {

/// Displacement used when testing partition boundaries against closed obstacles.
inline constexpr double kBoundaryNudge = 1e-6;
/// Free boundary portions shorter than this are discarded.
inline constexpr double kMinBoundaryLength = 10.0 * kBoundaryNudge;

enum class LeafStatus { Free, Occupied };

/// Flat node storage. Internal nodes carry a plane and two children, leaves a
/// status. Every node keeps its convex cell.
struct BspNode {
  ConvexPolygon cell;
  std::optional<Halfplane> plane;
  int inside = -1;
  int outside = -1;
  LeafStatus status = LeafStatus::Free;
  /// Position in the free-leaf sequence for Free leaves, -1 otherwise.
  int free_index = -1;
  /// Obstacle/facet that supplied the plane of an internal node.
  int obstacle = -1;
  int facet = -1;

  bool is_leaf() const { return !plane.has_value(); }
};

/// A collision-free portion of a partition boundary.
struct FreeBoundary {
  Segment segment;
  /// Internal node whose plane carries this boundary.
  int node = -1;
};

class BspTree {
 public:
  const Workspace& workspace() const { return workspace_; }
  const std::vector<BspNode>& nodes() const { return nodes_; }
  const BspNode& root() const { return nodes_.front(); }
  const std::vector<FreeBoundary>& free_boundaries() const { return free_boundaries_; }
  /// Node indices of the Free leaves, depth-first inside-first.
  const std::vector<int>& free_leaves() const { return free_leaves_; }

  /// Index of the leaf node containing p (points on a plane go inside).
  int locate_node(Point2 p) const;
  /// Free-leaf index of the cell containing p, or -1 for occupied/out of bounds.
  int locate_free_cell(Point2 p) const;

  friend BspTree build_bsp(const Workspace& w);

 private:
  Workspace workspace_;
  std::vector<BspNode> nodes_;
  std::vector<int> free_leaves_;
  std::vector<FreeBoundary> free_boundaries_;
};

/// Autopartition of the workspace by obstacle facet lines. At each cell the
/// facet line that splits the fewest remaining facet fragments is chosen (ties
/// by lowest obstacle then facet index); a cell without fragments becomes a
/// leaf labelled by its centroid.
BspTree build_bsp(const Workspace& w);

/// Free leaf cells in depth-first, inside-first order.
std::vector<ConvexPolygon> leaf_cells(const BspTree& t);

/// Portions of every internal node's boundary chord that separate two free
/// regions, excluding obstacle contact and slivers.
std::vector<Segment> free_boundary_segments(const BspTree& t);

}  // namespace bspplan
