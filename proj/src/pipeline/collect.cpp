#include "bspplan/pipeline/collect.hpp"

#include <algorithm>
#include <functional>
#include <limits>
#include <optional>

namespace bspplan {

namespace {

struct SubResult {
  Path path;
  std::vector<Point2> trace;
};

/// Cells on either side of a graph node's keypoint (or the start cell).
std::set<int> flanking_cells(const ConnectivityGraph& g, const BspTree& tree, int node) {
  std::set<int> out;
  if (node >= 2) {
    const auto& c = g.candidates[static_cast<std::size_t>(node - 2)];
    if (c.cell_a >= 0) out.insert(c.cell_a);
    if (c.cell_b >= 0) out.insert(c.cell_b);
  } else {
    const int cell = tree.locate_free_cell(g.positions[static_cast<std::size_t>(node)]);
    if (cell >= 0) out.insert(cell);
  }
  return out;
}

std::vector<Configuration> subgoal_configurations(const PlanningProblem& p, Point2 keypoint) {
  if (!p.robot.is_arm()) return {Configuration{keypoint.x, keypoint.y}};
  std::vector<Configuration> out;
  try {
    for (auto& q : inverse_kinematics(p.robot.arm(), keypoint)) {
      if (!config_collides(p.robot, q, p.workspace)) out.push_back(std::move(q));
    }
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::Unreachable) throw;
  }
  return out;
}

}  // namespace

void CollectConfig::validate() const {
  if (resolution < 1 || resolution % 2 == 0) throw Error(ErrorKind::EvenResolution, "resolution must be a positive odd number");
  if (!(merge_fraction >= 0.0)) throw Error(ErrorKind::InvalidParams, "merge fraction must be non-negative");
  if (rrt_iters <= 0 || attempts <= 0 || max_repairs < 0 || max_subproblem_solves <= 0) throw Error(ErrorKind::InvalidParams, "bad collection budget");
}

bool operator==(const DatasetRecord& a, const DatasetRecord& b) {
  if (a.env_seed != b.env_seed || a.collect_seed != b.collect_seed || !(a.robot == b.robot) ||
      a.workspace.bounds.xmin != b.workspace.bounds.xmin || a.workspace.bounds.ymin != b.workspace.bounds.ymin ||
      a.workspace.bounds.xmax != b.workspace.bounds.xmax || a.workspace.bounds.ymax != b.workspace.bounds.ymax ||
      a.workspace.obstacles.size() != b.workspace.obstacles.size() || !(a.start == b.start) ||
      !(a.target == b.target) || a.keypoints != b.keypoints || a.paths.size() != b.paths.size()) {
    return false;
  }
  for (std::size_t i = 0; i < a.workspace.obstacles.size(); ++i) {
    if (a.workspace.obstacles[i].vertices() != b.workspace.obstacles[i].vertices()) return false;
  }
  for (std::size_t i = 0; i < a.paths.size(); ++i) {
    if (a.paths[i].configurations != b.paths[i].configurations || a.paths[i].cost != b.paths[i].cost) return false;
  }
  return true;
}

std::vector<Path> split_path_at_keypoints(const Robot& robot, const Path& dense, const std::vector<Point2>& keypoints) {
  const auto& qs = dense.configurations;
  std::vector<Path> out;
  if (qs.empty()) return out;
  std::vector<Point2> tips;
  tips.reserve(qs.size());
  for (const auto& q : qs) tips.push_back(robot.workspace_point(q));

  std::size_t begin = 0;
  for (std::size_t k = 1; k + 1 < keypoints.size(); ++k) {
    // Leave room for at least one configuration in each remaining piece.
    const std::size_t remaining = keypoints.size() - 1 - k;
    const std::size_t last = qs.size() - 1 - std::min(qs.size() - 1, remaining);
    std::size_t best = std::min(begin + 1, last);
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t i = begin + 1; i <= last; ++i) {
      const double d = distance(tips[i], keypoints[k]);
      if (d < best_d) {
        best_d = d;
        best = i;
      }
    }
    out.push_back(make_path(robot, {qs.begin() + static_cast<std::ptrdiff_t>(begin), qs.begin() + static_cast<std::ptrdiff_t>(best) + 1}));
    begin = best;
  }
  out.push_back(make_path(robot, {qs.begin() + static_cast<std::ptrdiff_t>(begin), qs.end()}));
  return out;
}

DatasetRecord collect_training_example(const PlanningProblem& problem, const CollectConfig& config,
                                       CollectStats* stats) {
  config.validate();
  problem.validate();
  const Robot& robot = problem.robot;
  const Workspace& w = problem.workspace;
  const Point2 start_pos = robot.workspace_point(problem.start);
  const Point2 goal_pos = robot.workspace_point(problem.target);

  const BspTree tree = build_bsp(w);
  ConnectivityGraph graph = build_connectivity_graph(tree, keypoint_candidates(tree, config.resolution), start_pos, goal_pos);

  PlannerParams params = PlannerParams::defaults_for(robot, w);
  params.max_iters = config.rrt_iters;
  params.goal_bias = config.rrt_goal_bias;
  UniformSampler uniform(robot, w);
  CollectStats local_stats;
  std::uint64_t run = 0;

  for (int round = 0; round <= config.max_repairs; ++round) {
    KeypointSequence seq;
    try {
      seq = shortest_keypoint_sequence(graph);
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::NoPath) throw Error(ErrorKind::Infeasible, "keypoint graph exhausted by repairs");
      throw;
    }

    // Depth-first over the accepted sub-paths of every sub-goal configuration,
    // cheapest first, so a dead end at one keypoint can back up and continue
    // from another configuration of an earlier keypoint.
    std::vector<Configuration> full{problem.start};
    std::set<int> passed;
    std::size_t deepest_failure = 1;
    int solves = 0;
    std::function<bool(std::size_t)> descend = [&](std::size_t i) -> bool {
      if (i == seq.points.size()) return true;
      if (solves >= config.max_subproblem_solves) return false;
      ++solves;
      const bool last = i + 1 == seq.points.size();
      const std::vector<Configuration> goals =
          last ? std::vector<Configuration>{problem.target} : subgoal_configurations(problem, seq.points[i]);
      std::set<int> visited = passed;
      for (int c : flanking_cells(graph, tree, seq.nodes[i - 1])) visited.erase(c);

      std::vector<SubResult> found;
      for (const auto& goal : goals) {
        PlanningProblem sub{robot, w, full.back(), goal, problem.goal_radius};
        std::optional<SubResult> best;
        for (int a = 0; a < config.attempts; ++a) {
          params.seed = derive_seed(config.seed, run++);
          const PlanResult res = plan_rrt(sub, uniform, params);
          if (res.status != PlanStatus::Success) continue;
          auto trace = workspace_trace(robot, *res.path, w);
          if (examine_path(trace, tree, visited) == PathVerdict::Reject) {
            ++local_stats.rejected_paths;
            continue;
          }
          if (!best || res.path->cost < best->path.cost) best = SubResult{*res.path, std::move(trace)};
        }
        if (best) found.push_back(std::move(*best));
      }
      std::stable_sort(found.begin(), found.end(),
                       [](const SubResult& a, const SubResult& b) { return a.path.cost < b.path.cost; });
      if (found.empty()) {
        deepest_failure = std::max(deepest_failure, i);
        return false;
      }
      const std::size_t mark = full.size();
      const std::set<int> passed_before = passed;
      for (const auto& cand : found) {
        ++local_stats.subproblems_solved;
        for (int c : cells_on_trace(cand.trace, tree)) passed.insert(c);
        full.insert(full.end(), cand.path.configurations.begin() + 1, cand.path.configurations.end());
        if (descend(i + 1)) return true;
        full.resize(mark);
        passed = passed_before;
      }
      return false;
    };
    if (!descend(1)) {
      ++local_stats.repairs;
      if (repair_graph(graph, seq, seq.nodes[deepest_failure]) == 0) {
        throw Error(ErrorKind::Infeasible, "repair removed no edges");
      }
      continue;
    }

    DatasetRecord rec;
    rec.collect_seed = config.seed;
    rec.robot = robot;
    rec.workspace = w;
    rec.start = problem.start;
    rec.target = problem.target;
    rec.keypoints = merge_keypoints(seq, config.eps_merge(w)).points;
    const Path dense = densify_path(make_path(robot, std::move(full)), robot, params.resolution);
    rec.paths = split_path_at_keypoints(robot, dense, rec.keypoints);
    if (!record_is_valid(rec, params.resolution)) {
      throw Error(ErrorKind::Infeasible, "split paths failed re-validation");
    }
    if (stats) *stats = local_stats;
    return rec;
  }
  throw Error(ErrorKind::Infeasible, "repair budget exhausted");
}

bool record_is_valid(const DatasetRecord& r, double resolution) {
  if (r.paths.empty()) return false;
  for (const auto& p : r.paths) {
    if (!validate_path(p, r.robot, r.workspace, resolution)) return false;
  }
  return r.paths.front().configurations.front() == r.start && r.paths.back().configurations.back() == r.target;
}

}  // namespace bspplan
