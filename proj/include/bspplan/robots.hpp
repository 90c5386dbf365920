#pragma once

#include <array>
#include <span>
#include <variant>
#include <vector>

#include "bspplan/common.hpp"
#include "bspplan/geometry.hpp"

namespace bspplan {

/// Joint-space or plane coordinates of a robot. Arm angles live in (-pi, pi].
struct Configuration {
  std::vector<double> values;

  Configuration() = default;
  explicit Configuration(std::vector<double> v) : values(std::move(v)) {}
  Configuration(std::initializer_list<double> v) : values(v) {}

  std::size_t size() const { return values.size(); }
  double operator[](std::size_t i) const { return values[i]; }
  double& operator[](std::size_t i) { return values[i]; }
  friend bool operator==(const Configuration&, const Configuration&) = default;
};

/// Wraps an angle into (-pi, pi].
double wrap_angle(double a);

struct PointRobot {
  friend bool operator==(const PointRobot&, const PointRobot&) = default;
};

/// Planar revolute chain with rectangular links; adjacent-link contact is not
/// a collision and non-adjacent self-collision is ignored.
struct PlanarArm {
  Point2 base;
  std::vector<double> link_lengths;
  double link_width = 0.02;

  std::size_t dof() const { return link_lengths.size(); }
  double reach() const;
  /// Throws InvalidParams unless 2 <= n <= 6 and every length/width is positive.
  void validate() const;
  friend bool operator==(const PlanarArm&, const PlanarArm&) = default;
};

struct Path {
  std::vector<Configuration> configurations;
  double cost = 0.0;
};

/// Either robot model behind one interface; the planner only sees this.
class Robot {
 public:
  Robot() = default;
  Robot(PointRobot p) : model_(p) {}
  Robot(PlanarArm a);

  bool is_arm() const { return std::holds_alternative<PlanarArm>(model_); }
  const PlanarArm& arm() const { return std::get<PlanarArm>(model_); }
  std::size_t dim() const;

  /// Sampling box of the configuration space.
  std::vector<double> lower(const Workspace& w) const;
  std::vector<double> upper(const Workspace& w) const;

  /// Euclidean metric, with wrap-around per joint for the arm.
  double distance(const Configuration& a, const Configuration& b) const;
  Configuration interpolate(const Configuration& a, const Configuration& b, double t) const;
  /// Moves from `from` toward `to` by at most `step`.
  Configuration steer(const Configuration& from, const Configuration& to, double step) const;
  /// Brings a configuration into canonical form (wrapped angles for the arm).
  Configuration canonical(Configuration q) const;

  /// Workspace position the keypoints refer to: the point itself or the arm tip.
  Point2 workspace_point(const Configuration& q) const;

  void check_dim(const Configuration& q) const;

  friend bool operator==(const Robot&, const Robot&) = default;

 private:
  std::variant<PointRobot, PlanarArm> model_;
};

/// Base followed by the n joint/tip positions. Throws DimensionMismatch.
std::vector<Point2> forward_kinematics(const PlanarArm& arm, const Configuration& q);

/// All tip-placing solutions found (within 1e-6). Analytic for two links,
/// damped least squares from 16 fixed seeds otherwise; deduplicated at 1e-3
/// rad. Throws Unreachable when the target is outside the annulus of reach.
std::vector<Configuration> inverse_kinematics(const PlanarArm& arm, Point2 target);

/// Link rectangles (counter-clockwise corners) for a configuration.
std::vector<std::array<Point2, 4>> link_rectangles(const PlanarArm& arm, const Configuration& q);

bool config_collides(const Robot& robot, const Configuration& q, const Workspace& w);

/// Workspace trace of a path, densified so consecutive points are at most
/// 0.01 * diag(bounds) apart. The path's own waypoints are included.
std::vector<Point2> workspace_trace(const Robot& robot, const Path& path, const Workspace& w);

double path_cost(const Robot& robot, std::span<const Configuration> configurations);
inline double path_cost(const Robot& robot, const Path& path) { return path_cost(robot, path.configurations); }

/// Builds a Path with its cost filled in.
Path make_path(const Robot& robot, std::vector<Configuration> configurations);

}  // namespace bspplan
