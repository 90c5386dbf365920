#include "bspplan/planner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numbers>

namespace bspplan {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

class MotionChecker {
 public:
  MotionChecker(const Robot& robot, const Workspace& w, double resolution)
      : robot_(robot), w_(w), resolution_(resolution) {}

  bool valid(const Configuration& q) {
    ++checks;
    return !config_collides(robot_, q, w_);
  }

  /// Checks interior points and the end point of a->b.
  bool motion(const Configuration& a, const Configuration& b) {
    const double d = robot_.distance(a, b);
    const int n = std::max(1, static_cast<int>(std::ceil(d / resolution_)));
    for (int i = 1; i <= n; ++i) {
      if (!valid(robot_.interpolate(a, b, static_cast<double>(i) / n))) return false;
    }
    return true;
  }

  long long checks = 0;

 private:
  const Robot& robot_;
  const Workspace& w_;
  double resolution_;
};

struct Tree {
  std::vector<Configuration> nodes;
  std::vector<int> parent;
  std::vector<double> cost;
  std::vector<std::vector<int>> children;

  int add(Configuration q, int par, double c) {
    nodes.push_back(std::move(q));
    parent.push_back(par);
    cost.push_back(c);
    children.emplace_back();
    const int id = static_cast<int>(nodes.size()) - 1;
    if (par >= 0) children[static_cast<std::size_t>(par)].push_back(id);
    return id;
  }

  int nearest(const Robot& robot, const Configuration& q) const {
    int best = 0;
    double best_d = kInf;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      const double d = robot.distance(nodes[i], q);
      if (d < best_d) {
        best_d = d;
        best = static_cast<int>(i);
      }
    }
    return best;
  }

  std::vector<Configuration> branch(int leaf) const {
    std::vector<Configuration> out;
    for (int v = leaf; v != -1; v = parent[static_cast<std::size_t>(v)]) out.push_back(nodes[static_cast<std::size_t>(v)]);
    std::reverse(out.begin(), out.end());
    return out;
  }

  void reparent(const Robot& robot, int child, int new_parent) {
    auto& old = children[static_cast<std::size_t>(parent[static_cast<std::size_t>(child)])];
    old.erase(std::find(old.begin(), old.end(), child));
    parent[static_cast<std::size_t>(child)] = new_parent;
    children[static_cast<std::size_t>(new_parent)].push_back(child);
    std::vector<int> stack{child};
    while (!stack.empty()) {
      const int v = stack.back();
      stack.pop_back();
      const int p = parent[static_cast<std::size_t>(v)];
      cost[static_cast<std::size_t>(v)] =
          cost[static_cast<std::size_t>(p)] + robot.distance(nodes[static_cast<std::size_t>(p)], nodes[static_cast<std::size_t>(v)]);
      for (int c : children[static_cast<std::size_t>(v)]) stack.push_back(c);
    }
  }
};

Path finish_path(const Robot& robot, const Tree& tree, int node, const Configuration& target) {
  auto qs = tree.branch(node);
  if (robot.distance(qs.back(), target) > 0.0 || qs.size() < 2) qs.push_back(target);
  return make_path(robot, std::move(qs));
}

struct Clock {
  std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  }
};

// Draws one planner sample; goal-bias draws bypass the sampler and the metrics.
Configuration draw_sample(const PlanningProblem& p, SampleSource& s, const PlannerParams& params, Rng& rng,
                          PlanResult& result) {
  if (uniform01(rng) < params.goal_bias) return p.target;
  Configuration x = s.draw(rng);
  p.robot.check_dim(x);
  x = p.robot.canonical(std::move(x));
  ++result.samples_drawn;
  if (!config_collides(p.robot, x, p.workspace)) ++result.valid_samples;
  return x;
}

}  // namespace

void PlanningProblem::validate() const {
  robot.check_dim(start);
  robot.check_dim(target);
  if (config_collides(robot, start, workspace) || config_collides(robot, target, workspace)) {
    throw Error(ErrorKind::StartOrGoalInCollision, "start or target configuration collides");
  }
  if (!(goal_radius >= 0.0)) throw Error(ErrorKind::InvalidParams, "goal radius must be non-negative");
}

UniformSampler::UniformSampler(std::vector<double> lower, std::vector<double> upper)
    : lower_(std::move(lower)), upper_(std::move(upper)) {}

Configuration UniformSampler::draw(Rng& rng) {
  Configuration q{std::vector<double>(lower_.size())};
  for (std::size_t i = 0; i < lower_.size(); ++i) q[i] = lower_[i] + (upper_[i] - lower_[i]) * uniform01(rng);
  return q;
}

PlannerParams PlannerParams::defaults_for(const Robot& robot, const Workspace& w) {
  const auto lo = robot.lower(w);
  const auto hi = robot.upper(w);
  double diag2 = 0.0;
  for (std::size_t i = 0; i < lo.size(); ++i) diag2 += (hi[i] - lo[i]) * (hi[i] - lo[i]);
  PlannerParams p;
  p.step = 0.05 * std::sqrt(diag2);
  p.resolution = p.step / 10.0;
  return p;
}

void PlannerParams::validate() const {
  if (!(step > 0.0)) throw Error(ErrorKind::InvalidParams, "step must be positive");
  if (!(resolution > 0.0)) throw Error(ErrorKind::InvalidParams, "resolution must be positive");
  if (max_iters <= 0) throw Error(ErrorKind::InvalidParams, "max_iters must be positive");
  if (!(goal_bias >= 0.0 && goal_bias <= 1.0)) throw Error(ErrorKind::InvalidParams, "goal_bias must be in [0,1]");
}

double default_goal_radius(const Robot& robot, const Workspace& w) {
  return PlannerParams::defaults_for(robot, w).step;
}

double rrt_star_gamma(const Robot& robot, const Workspace& w) {
  const auto lo = robot.lower(w);
  const auto hi = robot.upper(w);
  const double d = static_cast<double>(lo.size());
  double volume = 1.0;
  for (std::size_t i = 0; i < lo.size(); ++i) volume *= hi[i] - lo[i];
  const double unit_ball = std::pow(std::numbers::pi, d / 2.0) / std::tgamma(d / 2.0 + 1.0);
  return 2.0 * std::pow(1.0 + 1.0 / d, 1.0 / d) * std::pow(volume / unit_ball, 1.0 / d);
}

bool validate_path(const Path& path, const Robot& robot, const Workspace& w, double resolution) {
  const auto& qs = path.configurations;
  if (qs.empty()) return false;
  MotionChecker checker(robot, w, resolution);
  if (!checker.valid(qs.front())) return false;
  for (std::size_t i = 1; i < qs.size(); ++i) {
    if (!checker.motion(qs[i - 1], qs[i])) return false;
  }
  return true;
}

Path densify_path(const Path& path, const Robot& robot, double resolution) {
  if (!(resolution > 0.0)) throw Error(ErrorKind::InvalidParams, "resolution must be positive");
  const auto& qs = path.configurations;
  std::vector<Configuration> out;
  if (qs.empty()) return {};
  out.push_back(qs.front());
  for (std::size_t k = 1; k < qs.size(); ++k) {
    const double d = robot.distance(qs[k - 1], qs[k]);
    const int n = std::max(1, static_cast<int>(std::ceil(d / resolution)));
    for (int i = 1; i < n; ++i) out.push_back(robot.interpolate(qs[k - 1], qs[k], static_cast<double>(i) / n));
    out.push_back(qs[k]);
  }
  return make_path(robot, std::move(out));
}

PlanResult plan_rrt(const PlanningProblem& p, SampleSource& s, const PlannerParams& params) {
  params.validate();
  p.validate();
  const Clock clock;
  Rng rng(params.seed);
  MotionChecker checker(p.robot, p.workspace, params.resolution);
  PlanResult result;

  auto succeed = [&](Path path, int iteration) {
    result.status = PlanStatus::Success;
    result.path = std::move(path);
    result.first_solution_iteration = iteration;
    result.checks_to_first_solution = checker.checks;
    result.collision_checks = checker.checks;
    result.elapsed = clock.seconds();
    return result;
  };

  Tree tree;
  tree.add(p.start, -1, 0.0);
  if (p.robot.distance(p.start, p.target) <= p.goal_radius && checker.motion(p.start, p.target)) {
    return succeed(make_path(p.robot, {p.start, p.target}), 0);
  }

  for (int it = 1; it <= params.max_iters; ++it) {
    result.iterations = it;
    const Configuration x = draw_sample(p, s, params, rng, result);
    const int near = tree.nearest(p.robot, x);
    Configuration q = p.robot.steer(tree.nodes[static_cast<std::size_t>(near)], x, params.step);
    if (!checker.motion(tree.nodes[static_cast<std::size_t>(near)], q)) continue;
    const double c = tree.cost[static_cast<std::size_t>(near)] + p.robot.distance(tree.nodes[static_cast<std::size_t>(near)], q);
    const int id = tree.add(std::move(q), near, c);
    const auto& added = tree.nodes[static_cast<std::size_t>(id)];
    if (p.robot.distance(added, p.target) <= p.goal_radius && checker.motion(added, p.target)) {
      return succeed(finish_path(p.robot, tree, id, p.target), it);
    }
  }
  result.collision_checks = checker.checks;
  result.checks_to_first_solution = checker.checks;
  result.elapsed = clock.seconds();
  return result;
}

PlanResult plan_rrt_star(const PlanningProblem& p, SampleSource& s, const PlannerParams& params) {
  params.validate();
  p.validate();
  const Clock clock;
  Rng rng(params.seed);
  MotionChecker checker(p.robot, p.workspace, params.resolution);
  PlanResult result;
  const double gamma = params.gamma > 0.0 ? params.gamma : rrt_star_gamma(p.robot, p.workspace);
  const double dim = static_cast<double>(p.robot.dim());

  Tree tree;
  tree.add(p.start, -1, 0.0);
  std::vector<int> goal_nodes;
  auto try_goal = [&](int id) {
    const auto& q = tree.nodes[static_cast<std::size_t>(id)];
    if (p.robot.distance(q, p.target) <= p.goal_radius && checker.motion(q, p.target)) goal_nodes.push_back(id);
  };
  auto best_goal = [&]() {
    int best = -1;
    double best_cost = kInf;
    for (int g : goal_nodes) {
      const double c = tree.cost[static_cast<std::size_t>(g)] + p.robot.distance(tree.nodes[static_cast<std::size_t>(g)], p.target);
      if (c < best_cost) {
        best_cost = c;
        best = g;
      }
    }
    return std::make_pair(best, best_cost);
  };
  auto note_first = [&](int it) {
    if (result.first_solution_iteration < 0 && !goal_nodes.empty()) {
      result.first_solution_iteration = it;
      result.checks_to_first_solution = checker.checks;
    }
  };

  try_goal(0);
  note_first(0);
  result.best_cost_trace.reserve(static_cast<std::size_t>(params.max_iters));

  std::vector<int> near_set;
  for (int it = 1; it <= params.max_iters; ++it) {
    result.iterations = it;
    const Configuration x = draw_sample(p, s, params, rng, result);
    const int nearest = tree.nearest(p.robot, x);
    const Configuration& qn = tree.nodes[static_cast<std::size_t>(nearest)];
    Configuration q = p.robot.steer(qn, x, params.step);
    if (checker.motion(qn, q)) {
      const double n = static_cast<double>(tree.nodes.size() + 1);
      const double radius = std::min(gamma * std::pow(std::log(n) / n, 1.0 / dim), params.step);

      near_set.clear();
      for (std::size_t i = 0; i < tree.nodes.size(); ++i) {
        if (p.robot.distance(tree.nodes[i], q) <= radius) near_set.push_back(static_cast<int>(i));
      }

      int parent = nearest;
      double parent_cost = tree.cost[static_cast<std::size_t>(nearest)] + p.robot.distance(qn, q);
      // Cheapest collision-free parent; candidates are checked in cost order.
      std::vector<std::pair<double, int>> options;
      for (int v : near_set) {
        if (v == nearest) continue;
        const double c = tree.cost[static_cast<std::size_t>(v)] + p.robot.distance(tree.nodes[static_cast<std::size_t>(v)], q);
        if (c < parent_cost) options.push_back({c, v});
      }
      std::sort(options.begin(), options.end());
      for (const auto& [c, v] : options) {
        if (checker.motion(tree.nodes[static_cast<std::size_t>(v)], q)) {
          parent = v;
          parent_cost = c;
          break;
        }
      }

      const int id = tree.add(std::move(q), parent, parent_cost);
      const Configuration qnew = tree.nodes[static_cast<std::size_t>(id)];
      for (int v : near_set) {
        if (v == parent) continue;
        const double c = parent_cost + p.robot.distance(qnew, tree.nodes[static_cast<std::size_t>(v)]);
        if (c < tree.cost[static_cast<std::size_t>(v)] && checker.motion(qnew, tree.nodes[static_cast<std::size_t>(v)])) {
          tree.reparent(p.robot, v, id);
        }
      }
      try_goal(id);
      note_first(it);
    }
    result.best_cost_trace.push_back(best_goal().second);
  }

  result.collision_checks = checker.checks;
  if (result.first_solution_iteration < 0) result.checks_to_first_solution = checker.checks;
  const auto [goal, cost] = best_goal();
  if (goal >= 0) {
    result.status = PlanStatus::Success;
    result.path = finish_path(p.robot, tree, goal, p.target);
  }
  result.elapsed = clock.seconds();
  return result;
}

}  // namespace bspplan
