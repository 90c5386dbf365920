#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "bspplan/common.hpp"
#include "bspplan/robots.hpp"

namespace bspplan {

struct PlanningProblem {
  Robot robot;
  Workspace workspace;
  Configuration start;
  Configuration target;
  /// Goal tolerance in configuration units.
  double goal_radius = 0.0;

  /// Throws DimensionMismatch / StartOrGoalInCollision.
  void validate() const;
};

/// Source of candidate configurations. Implementations draw all randomness
/// from the supplied generator so a planner run is reproducible from its seed.
class SampleSource {
 public:
  virtual ~SampleSource() = default;
  virtual Configuration draw(Rng& rng) = 0;
};

class UniformSampler final : public SampleSource {
 public:
  UniformSampler(std::vector<double> lower, std::vector<double> upper);
  UniformSampler(const Robot& robot, const Workspace& w) : UniformSampler(robot.lower(w), robot.upper(w)) {}
  Configuration draw(Rng& rng) override;

 private:
  std::vector<double> lower_;
  std::vector<double> upper_;
};

struct PlannerParams {
  double step = 0.0;        ///< steering distance (eta)
  double resolution = 0.0;  ///< edge-check spacing
  int max_iters = 3000;
  double goal_bias = 0.05;
  double gamma = 0.0;  ///< RRT* rewiring constant; 0 selects the standard value
  std::uint64_t seed = 0;

  /// eta = 0.05 * diagonal of the configuration box, r = eta / 10.
  static PlannerParams defaults_for(const Robot& robot, const Workspace& w);
  void validate() const;
};

/// Goal radius default (rho = eta).
double default_goal_radius(const Robot& robot, const Workspace& w);

enum class PlanStatus { Success, Timeout };

struct PlanResult {
  PlanStatus status = PlanStatus::Timeout;
  std::optional<Path> path;
  int iterations = 0;
  double elapsed = 0.0;  ///< wall-clock seconds; excluded from equality
  int samples_drawn = 0;
  int valid_samples = 0;
  /// Iteration at which a first solution existed; -1 if none.
  int first_solution_iteration = -1;
  /// Collision checks spent until the first solution (or in total on timeout).
  long long checks_to_first_solution = 0;
  long long collision_checks = 0;
  /// Best solution cost after each iteration (RRT* only; +inf before a solution).
  std::vector<double> best_cost_trace;
};

PlanResult plan_rrt(const PlanningProblem& p, SampleSource& s, const PlannerParams& params);
PlanResult plan_rrt_star(const PlanningProblem& p, SampleSource& s, const PlannerParams& params);

/// Every interpolated configuration at spacing `resolution` along each
/// segment is collision-free (endpoints included).
bool validate_path(const Path& path, const Robot& robot, const Workspace& w, double resolution);

/// The path's configurations plus every intermediate configuration the
/// motion checker visits at `resolution`, in order.
Path densify_path(const Path& path, const Robot& robot, double resolution);

/// Standard RRT* constant 2 (1 + 1/d)^(1/d) (mu / zeta_d)^(1/d) with mu the
/// configuration box volume and zeta_d the unit-ball volume.
double rrt_star_gamma(const Robot& robot, const Workspace& w);

}  // namespace bspplan
