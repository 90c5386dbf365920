#include "bspplan/keypoint_graph.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <queue>
#include <tuple>
#include <utility>

#include "bspplan/common.hpp"

namespace bspplan {

namespace {

void check_resolution(int resolution) {
  if (resolution < 1) throw Error(ErrorKind::InvalidParams, "resolution must be >= 1");
  if (resolution % 2 == 0) throw Error(ErrorKind::EvenResolution, "resolution must be odd");
}

}  // namespace

std::vector<KeypointCandidate> keypoint_candidates(std::span<const Segment> boundaries, int resolution,
                                                   const Workspace& w) {
  check_resolution(resolution);
  std::vector<KeypointCandidate> out;
  for (std::size_t b = 0; b < boundaries.size(); ++b) {
    for (int i = 1; i <= resolution; ++i) {
      const Point2 p = boundaries[b].at(static_cast<double>(i) / (resolution + 1));
      if (!point_in_free_space(p, w)) continue;
      KeypointCandidate c;
      c.id = static_cast<int>(out.size()) + 2;
      c.position = p;
      c.boundary_index = static_cast<int>(b);
      out.push_back(c);
    }
  }
  return out;
}

std::vector<KeypointCandidate> keypoint_candidates(const BspTree& tree, int resolution) {
  const auto segments = free_boundary_segments(tree);
  auto out = keypoint_candidates(segments, resolution, tree.workspace());
  for (auto& c : out) {
    const auto& fb = tree.free_boundaries()[static_cast<std::size_t>(c.boundary_index)];
    const Point2 n = tree.nodes()[static_cast<std::size_t>(fb.node)].plane->normal;
    c.cell_a = tree.locate_free_cell(c.position - n * kBoundaryNudge);
    c.cell_b = tree.locate_free_cell(c.position + n * kBoundaryNudge);
  }
  return out;
}

ConnectivityGraph build_connectivity_graph(const BspTree& tree, std::vector<KeypointCandidate> candidates,
                                           Point2 start, Point2 goal) {
  const Workspace& w = tree.workspace();
  if (!point_in_free_space(start, w) || !point_in_free_space(goal, w)) {
    throw Error(ErrorKind::StartOrGoalInCollision, "start or goal is not in free space");
  }
  ConnectivityGraph g;
  g.positions = {start, goal};
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    candidates[i].id = static_cast<int>(i) + 2;
    g.positions.push_back(candidates[i].position);
  }
  g.candidates = std::move(candidates);

  // Members of each free cell, ascending node id.
  std::vector<std::vector<int>> members(tree.free_leaves().size());
  auto add_member = [&](int cell, int node) {
    if (cell < 0) return;
    auto& m = members[static_cast<std::size_t>(cell)];
    if (std::find(m.begin(), m.end(), node) == m.end()) m.push_back(node);
  };
  add_member(tree.locate_free_cell(start), ConnectivityGraph::kStart);
  add_member(tree.locate_free_cell(goal), ConnectivityGraph::kGoal);
  for (const auto& c : g.candidates) {
    add_member(c.cell_a, c.id);
    add_member(c.cell_b, c.id);
  }

  std::set<std::pair<int, int>> seen;
  for (auto& m : members) {
    std::sort(m.begin(), m.end());
    for (std::size_t i = 0; i < m.size(); ++i) {
      for (std::size_t j = i + 1; j < m.size(); ++j) {
        if (!seen.insert({m[i], m[j]}).second) continue;
        const Segment s{g.positions[static_cast<std::size_t>(m[i])], g.positions[static_cast<std::size_t>(m[j])]};
        if (s.length() <= kDegeneracyTol || segment_collides(s, w)) continue;
        g.edges.push_back({m[i], m[j], s.length()});
      }
    }
  }
  return g;
}

KeypointSequence shortest_keypoint_sequence(const ConnectivityGraph& g) {
  const std::size_t n = g.node_count();
  std::vector<std::vector<std::pair<int, int>>> adj(n);  // (neighbor, edge id)
  for (std::size_t e = 0; e < g.edges.size(); ++e) {
    if (g.is_removed(static_cast<int>(e))) continue;
    const auto& edge = g.edges[e];
    adj[static_cast<std::size_t>(edge.u)].push_back({edge.v, static_cast<int>(e)});
    adj[static_cast<std::size_t>(edge.v)].push_back({edge.u, static_cast<int>(e)});
  }

  constexpr double inf = std::numeric_limits<double>::infinity();
  std::vector<double> dist(n, inf);
  std::vector<int> prev(n, -1);
  std::vector<bool> done(n, false);
  using Entry = std::pair<double, int>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> queue;
  dist[ConnectivityGraph::kStart] = 0.0;
  queue.push({0.0, ConnectivityGraph::kStart});
  while (!queue.empty()) {
    const auto [d, u] = queue.top();
    queue.pop();
    if (done[static_cast<std::size_t>(u)]) continue;
    done[static_cast<std::size_t>(u)] = true;
    if (u == ConnectivityGraph::kGoal) break;
    for (const auto& [v, e] : adj[static_cast<std::size_t>(u)]) {
      const double nd = d + g.edges[static_cast<std::size_t>(e)].weight;
      if (nd < dist[static_cast<std::size_t>(v)]) {
        dist[static_cast<std::size_t>(v)] = nd;
        prev[static_cast<std::size_t>(v)] = u;
        queue.push({nd, v});
      }
    }
  }
  if (!done[ConnectivityGraph::kGoal]) throw Error(ErrorKind::NoPath, "goal unreachable in connectivity graph");

  KeypointSequence seq;
  for (int v = ConnectivityGraph::kGoal; v != -1; v = prev[static_cast<std::size_t>(v)]) seq.nodes.push_back(v);
  std::reverse(seq.nodes.begin(), seq.nodes.end());
  for (int v : seq.nodes) seq.points.push_back(g.positions[static_cast<std::size_t>(v)]);
  seq.cost = dist[ConnectivityGraph::kGoal];
  return seq;
}

KeypointSequence merge_keypoints(const KeypointSequence& seq, double eps_merge) {
  if (!(eps_merge > 0.0)) throw Error(ErrorKind::InvalidParams, "eps_merge must be positive");
  std::vector<Point2> pts = seq.points;
  if (pts.size() <= 2) return {pts, {}, seq.cost};

  bool merged = true;
  while (merged) {
    merged = false;
    std::vector<Point2> out{pts.front()};
    for (std::size_t i = 1; i + 1 < pts.size(); ++i) {
      const Point2 next = pts[i + 1];
      const bool next_is_goal = i + 2 == pts.size();
      if (out.size() > 1 && distance(out.back(), pts[i]) < eps_merge) {
        out.back() = midpoint(out.back(), pts[i]);
        merged = true;
        continue;
      }
      if (out.size() == 1 && distance(out.front(), pts[i]) < eps_merge) {
        merged = true;  // absorbed by the start
        continue;
      }
      if (next_is_goal && distance(pts[i], next) < eps_merge) {
        merged = true;  // absorbed by the goal
        continue;
      }
      out.push_back(pts[i]);
    }
    // The last interior survivor may have drifted toward the goal.
    if (out.size() > 1 && distance(out.back(), pts.back()) < eps_merge) {
      out.pop_back();
      merged = true;
    }
    out.push_back(pts.back());
    pts = std::move(out);
  }

  KeypointSequence result;
  result.points = std::move(pts);
  for (std::size_t i = 1; i < result.points.size(); ++i) result.cost += distance(result.points[i - 1], result.points[i]);
  return result;
}

std::size_t repair_graph(ConnectivityGraph& g, const KeypointSequence& used, int failed_node) {
  std::size_t removed = 0;
  for (std::size_t i = 1; i < used.nodes.size(); ++i) {
    const int a = used.nodes[i - 1];
    const int b = used.nodes[i];
    if (a != failed_node && b != failed_node) continue;
    for (std::size_t e = 0; e < g.edges.size(); ++e) {
      const auto& edge = g.edges[e];
      if ((edge.u == a && edge.v == b) || (edge.u == b && edge.v == a)) {
        if (g.removed_edges.insert(static_cast<int>(e)).second) ++removed;
      }
    }
  }
  return removed;
}

std::vector<int> cells_on_trace(std::span<const Point2> trace, const BspTree& tree) {
  std::vector<int> cells;
  for (const auto& p : trace) {
    const int c = tree.locate_free_cell(p);
    if (c >= 0 && std::find(cells.begin(), cells.end(), c) == cells.end()) cells.push_back(c);
  }
  return cells;
}

PathVerdict examine_path(std::span<const Point2> trace, const BspTree& tree, const std::set<int>& visited_cells) {
  if (trace.empty()) return PathVerdict::Accept;
  const int first = tree.locate_free_cell(trace.front());
  bool left_first = false;
  for (const auto& p : trace) {
    const int c = tree.locate_free_cell(p);
    if (!left_first && c == first) continue;
    left_first = true;
    if (c >= 0 && visited_cells.contains(c)) return PathVerdict::Reject;
  }
  return PathVerdict::Accept;
}

}  // namespace bspplan
