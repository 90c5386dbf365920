#include "bspplan/robots.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

namespace bspplan {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kIkTolerance = 1e-6;
constexpr double kIkDedup = 1e-3;
constexpr int kIkSeeds = 16;
constexpr std::uint64_t kIkSeedStream = 0x1C0FFEEULL;

bool same_solution(const Configuration& a, const Configuration& b) {
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (std::abs(wrap_angle(a[i] - b[i])) >= kIkDedup) return false;
  }
  return true;
}

void push_unique(std::vector<Configuration>& out, Configuration q) {
  for (const auto& s : out) {
    if (same_solution(s, q)) return;
  }
  out.push_back(std::move(q));
}

Point2 tip_of(const PlanarArm& arm, const Configuration& q) { return forward_kinematics(arm, q).back(); }

}  // namespace

double wrap_angle(double a) {
  double r = std::remainder(a, 2.0 * kPi);
  if (r <= -kPi) r += 2.0 * kPi;
  return r;
}

double PlanarArm::reach() const { return std::accumulate(link_lengths.begin(), link_lengths.end(), 0.0); }

void PlanarArm::validate() const {
  if (link_lengths.size() < 2 || link_lengths.size() > 6) {
    throw Error(ErrorKind::InvalidParams, "arm must have between 2 and 6 links");
  }
  for (double l : link_lengths) {
    if (!(l > 0.0) || !std::isfinite(l)) throw Error(ErrorKind::InvalidParams, "link lengths must be positive");
  }
  if (!(link_width > 0.0)) throw Error(ErrorKind::InvalidParams, "link width must be positive");
  if (!is_finite(base)) throw Error(ErrorKind::InvalidParams, "arm base must be finite");
}

Robot::Robot(PlanarArm a) : model_(std::move(a)) { std::get<PlanarArm>(model_).validate(); }

std::size_t Robot::dim() const { return is_arm() ? arm().dof() : 2; }

std::vector<double> Robot::lower(const Workspace& w) const {
  if (is_arm()) return std::vector<double>(dim(), -kPi);
  return {w.bounds.xmin, w.bounds.ymin};
}

std::vector<double> Robot::upper(const Workspace& w) const {
  if (is_arm()) return std::vector<double>(dim(), kPi);
  return {w.bounds.xmax, w.bounds.ymax};
}

void Robot::check_dim(const Configuration& q) const {
  if (q.size() != dim()) {
    throw Error(ErrorKind::DimensionMismatch,
                "configuration has " + std::to_string(q.size()) + " values, robot needs " + std::to_string(dim()));
  }
}

double Robot::distance(const Configuration& a, const Configuration& b) const {
  double s = 0.0;
  const bool wrap = is_arm();
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = wrap ? wrap_angle(b[i] - a[i]) : b[i] - a[i];
    s += d * d;
  }
  return std::sqrt(s);
}

Configuration Robot::interpolate(const Configuration& a, const Configuration& b, double t) const {
  Configuration out = a;
  if (is_arm()) {
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = wrap_angle(a[i] + t * wrap_angle(b[i] - a[i]));
  } else {
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] + t * (b[i] - a[i]);
  }
  return out;
}

Configuration Robot::steer(const Configuration& from, const Configuration& to, double step) const {
  const double d = distance(from, to);
  if (d <= step) return canonical(to);
  return interpolate(from, to, step / d);
}

Configuration Robot::canonical(Configuration q) const {
  if (is_arm()) {
    for (auto& v : q.values) v = wrap_angle(v);
  }
  return q;
}

Point2 Robot::workspace_point(const Configuration& q) const {
  check_dim(q);
  if (is_arm()) return tip_of(arm(), q);
  return {q[0], q[1]};
}

std::vector<Point2> forward_kinematics(const PlanarArm& arm, const Configuration& q) {
  if (q.size() != arm.dof()) throw Error(ErrorKind::DimensionMismatch, "joint count does not match arm");
  std::vector<Point2> pts{arm.base};
  double angle = 0.0;
  Point2 p = arm.base;
  for (std::size_t i = 0; i < arm.dof(); ++i) {
    angle += q[i];
    p = p + Point2{std::cos(angle), std::sin(angle)} * arm.link_lengths[i];
    pts.push_back(p);
  }
  return pts;
}

std::vector<Configuration> inverse_kinematics(const PlanarArm& arm, Point2 target) {
  const double d = distance(arm.base, target);
  const double total = arm.reach();
  const double longest = *std::max_element(arm.link_lengths.begin(), arm.link_lengths.end());
  const double inner = std::max(0.0, 2.0 * longest - total);
  if (d > total + 1e-9 || d < inner - 1e-9) {
    throw Error(ErrorKind::Unreachable, "target outside the reachable annulus");
  }

  std::vector<Configuration> out;
  const Point2 rel = target - arm.base;
  if (arm.dof() == 2) {
    const double l1 = arm.link_lengths[0];
    const double l2 = arm.link_lengths[1];
    const double c2 = std::clamp((d * d - l1 * l1 - l2 * l2) / (2.0 * l1 * l2), -1.0, 1.0);
    for (double sign : {1.0, -1.0}) {
      const double q2 = sign * std::acos(c2);
      const double q1 = std::atan2(rel.y, rel.x) - std::atan2(l2 * std::sin(q2), l1 + l2 * std::cos(q2));
      Configuration q{wrap_angle(q1), wrap_angle(q2)};
      if (distance(tip_of(arm, q), target) <= kIkTolerance) push_unique(out, std::move(q));
    }
    return out;
  }

  Rng seeds(kIkSeedStream);
  std::uniform_real_distribution<double> angle(-kPi, kPi);
  const std::size_t n = arm.dof();
  for (int s = 0; s < kIkSeeds; ++s) {
    Configuration q{std::vector<double>(n)};
    for (auto& v : q.values) v = angle(seeds);
    double err = 0.0;
    for (int it = 0; it < 400; ++it) {
      const auto joints = forward_kinematics(arm, q);
      const Point2 e = target - joints.back();
      err = norm(e);
      if (err < 1e-11) break;
      // Rows of J: d tip / d q_i = perp(tip - joint_i).
      double a11 = 0.0, a12 = 0.0, a22 = 0.0;
      std::vector<Point2> cols(n);
      for (std::size_t i = 0; i < n; ++i) {
        const Point2 r = joints.back() - joints[i];
        cols[i] = {-r.y, r.x};
        a11 += cols[i].x * cols[i].x;
        a12 += cols[i].x * cols[i].y;
        a22 += cols[i].y * cols[i].y;
      }
      const double lambda = std::min(0.05 * total, err);
      a11 += lambda * lambda;
      a22 += lambda * lambda;
      const double det = a11 * a22 - a12 * a12;
      const Point2 y{(a22 * e.x - a12 * e.y) / det, (a11 * e.y - a12 * e.x) / det};
      for (std::size_t i = 0; i < n; ++i) q[i] = wrap_angle(q[i] + dot(cols[i], y));
    }
    if (distance(tip_of(arm, q), target) <= kIkTolerance) push_unique(out, std::move(q));
  }
  return out;
}

std::vector<std::array<Point2, 4>> link_rectangles(const PlanarArm& arm, const Configuration& q) {
  const auto joints = forward_kinematics(arm, q);
  std::vector<std::array<Point2, 4>> rects;
  rects.reserve(arm.dof());
  for (std::size_t i = 0; i + 1 < joints.size(); ++i) {
    const Point2 a = joints[i];
    const Point2 b = joints[i + 1];
    const Point2 d = (b - a) * (1.0 / norm(b - a));
    const Point2 half = Point2{-d.y, d.x} * (0.5 * arm.link_width);
    rects.push_back({a - half, b - half, b + half, a + half});
  }
  return rects;
}

bool config_collides(const Robot& robot, const Configuration& q, const Workspace& w) {
  robot.check_dim(q);
  if (!robot.is_arm()) return !point_in_free_space({q[0], q[1]}, w);
  for (const auto& rect : link_rectangles(robot.arm(), q)) {
    Box box{rect[0].x, rect[0].y, rect[0].x, rect[0].y};
    for (const auto& p : rect) {
      if (!w.bounds.contains(p)) return true;
      box.xmin = std::min(box.xmin, p.x);
      box.ymin = std::min(box.ymin, p.y);
      box.xmax = std::max(box.xmax, p.x);
      box.ymax = std::max(box.ymax, p.y);
    }
    for (const auto& obs : w.obstacles) {
      const Box ob = obs.bounding_box();
      if (box.xmax < ob.xmin || ob.xmax < box.xmin || box.ymax < ob.ymin || ob.ymax < box.ymin) continue;
      if (convex_sets_touch(rect, obs.vertices())) return true;
    }
  }
  return false;
}

std::vector<Point2> workspace_trace(const Robot& robot, const Path& path, const Workspace& w) {
  std::vector<Point2> trace;
  const auto& qs = path.configurations;
  if (qs.empty()) return trace;
  const double gap = 0.01 * w.bounds.diagonal();

  // Distance from joint i to the tip bounds how far the tip moves per radian of joint i.
  std::vector<double> lever;
  if (robot.is_arm()) {
    const auto& l = robot.arm().link_lengths;
    lever.assign(l.size(), 0.0);
    double acc = 0.0;
    for (std::size_t i = l.size(); i-- > 0;) {
      acc += l[i];
      lever[i] = acc;
    }
  }

  for (std::size_t k = 0; k + 1 < qs.size(); ++k) {
    const auto& a = qs[k];
    const auto& b = qs[k + 1];
    double bound = 0.0;
    if (robot.is_arm()) {
      for (std::size_t i = 0; i < a.size(); ++i) bound += lever[i] * std::abs(wrap_angle(b[i] - a[i]));
    } else {
      bound = robot.distance(a, b);
    }
    const int steps = std::max(1, static_cast<int>(std::ceil(bound / gap)));
    for (int s = 0; s < steps; ++s) {
      trace.push_back(robot.workspace_point(robot.interpolate(a, b, static_cast<double>(s) / steps)));
    }
  }
  trace.push_back(robot.workspace_point(qs.back()));
  return trace;
}

double path_cost(const Robot& robot, std::span<const Configuration> qs) {
  double c = 0.0;
  for (std::size_t i = 1; i < qs.size(); ++i) c += robot.distance(qs[i - 1], qs[i]);
  return c;
}

Path make_path(const Robot& robot, std::vector<Configuration> configurations) {
  Path p;
  p.configurations = std::move(configurations);
  p.cost = path_cost(robot, p.configurations);
  return p;
}

}  // namespace bspplan
