#include "bspplan/pipeline/maze.hpp"

#include <algorithm>
#include <numbers>

namespace bspplan {

namespace {

double uniform(Rng& rng, double lo, double hi) { return lo + (hi - lo) * uniform01(rng); }

ConvexPolygon rect(double x0, double y0, double x1, double y1) { return ConvexPolygon::from_box({x0, y0, x1, y1}); }

void add_wall(Workspace& w, double y0, double y1, double gap_x0, double gap_x1) {
  w.obstacles.push_back(rect(w.bounds.xmin, y0, gap_x0, y1));
  w.obstacles.push_back(rect(gap_x1, y0, w.bounds.xmax, y1));
}

}  // namespace

void MazeConfig::validate() const {
  if (min_walls < 1 || max_walls < min_walls) throw Error(ErrorKind::InvalidParams, "bad wall count range");
  if (!(min_gap > 0.0) || max_gap < min_gap || max_gap > 0.5) throw Error(ErrorKind::InvalidParams, "bad gap width range");
  if (!(min_fill > 0.0) || max_fill < min_fill || max_fill >= 0.9) throw Error(ErrorKind::InvalidParams, "bad fill range");
}

MazeInstance generate_maze(std::uint64_t seed, const MazeConfig& config) {
  config.validate();
  Rng rng(seed);
  for (int attempt = 0; attempt < std::max(1, config.max_retries); ++attempt) {
    MazeInstance m;
    m.workspace.bounds = {0.0, 0.0, 1.0, 1.0};
    const int walls = config.min_walls + static_cast<int>(rng() % static_cast<std::uint64_t>(config.max_walls - config.min_walls + 1));
    const double fill = uniform(rng, config.min_fill, config.max_fill);
    const double thickness = fill / walls;

    std::vector<double> band(static_cast<std::size_t>(walls + 1));
    double total = 0.0;
    for (auto& b : band) total += b = uniform(rng, 0.8, 1.2);
    for (auto& b : band) b *= (1.0 - fill) / total;

    double y = band[0];
    for (int i = 0; i < walls; ++i) {
      const double gap = uniform(rng, config.min_gap, config.max_gap);
      const double gx = uniform(rng, 0.08, 0.92 - gap);
      add_wall(m.workspace, y, y + thickness, gx, gx + gap);
      y += thickness + band[static_cast<std::size_t>(i + 1)];
    }

    const double margin = 0.25 * std::min(band.front(), band.back());
    m.start = {uniform(rng, 0.05, 0.95), uniform(rng, margin, band.front() - margin)};
    m.goal = {uniform(rng, 0.05, 0.95), uniform(rng, 1.0 - band.back() + margin, 1.0 - margin)};
    try {
      m.workspace.validate();
    } catch (const Error&) {
      continue;
    }
    if (point_in_free_space(m.start, m.workspace) && point_in_free_space(m.goal, m.workspace)) return m;
  }
  throw Error(ErrorKind::GenerationFailed, "no valid maze after retries");
}

ArmInstance generate_arm_world(std::uint64_t seed, const ArmWorldConfig& config) {
  Rng rng(seed);
  ArmInstance inst;
  inst.workspace.bounds = {0.0, 0.0, 1.0, 1.0};
  inst.arm = PlanarArm{config.base, config.link_lengths, config.link_width};
  inst.arm.validate();

  const double g1 = uniform(rng, config.min_gap, config.max_gap);
  const double g2 = uniform(rng, config.min_gap, config.max_gap);
  const double x1 = uniform(rng, 0.12, 0.45 - g1);
  const double x2 = uniform(rng, 0.55, 0.88 - g2);
  const double y0 = config.wall_bottom;
  const double y1 = config.wall_top;
  inst.workspace.obstacles.push_back(rect(0.0, y0, x1, y1));
  inst.workspace.obstacles.push_back(rect(x1 + g1, y0, x2, y1));
  inst.workspace.obstacles.push_back(rect(x2 + g2, y0, 1.0, y1));
  inst.workspace.validate();

  const Robot robot(inst.arm);
  const auto lo = robot.lower(inst.workspace);
  const auto hi = robot.upper(inst.workspace);
  auto random_config = [&] {
    std::vector<double> v(lo.size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = uniform(rng, lo[i], hi[i]);
    return Configuration{std::move(v)};
  };
  bool have_start = false;
  bool have_goal = false;
  for (int i = 0; i < config.max_retries && !(have_start && have_goal); ++i) {
    const Configuration q = random_config();
    if (config_collides(robot, q, inst.workspace)) continue;
    const auto joints = forward_kinematics(inst.arm, q);
    const bool below = std::all_of(joints.begin(), joints.end(), [&](Point2 p) { return p.y < y0 - 0.05; });
    if (!have_start && below && joints.back().y < y0 - 0.1) {
      inst.start = q;
      have_start = true;
    } else if (!have_goal && joints.back().y > y1 + 0.1 && joints[joints.size() - 2].y < y0) {
      inst.goal = q;
      have_goal = true;
    }
  }
  if (!have_start || !have_goal) throw Error(ErrorKind::GenerationFailed, "no start/goal configuration for arm world");
  return inst;
}

}  // namespace bspplan
