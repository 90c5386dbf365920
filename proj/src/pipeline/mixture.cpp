#include "bspplan/pipeline/mixture.hpp"

#include <algorithm>
#include <cmath>

namespace bspplan {

MixtureSampler::MixtureSampler(const learning::CvaeModel& model, const std::vector<LocalSpec>& locals, double lambda,
                               UniformSampler uniform)
    : lambda_(lambda), uniform_(std::move(uniform)) {
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw Error(ErrorKind::InvalidParams, "lambda must be in [0, 1]");
  double sum = 0.0;
  for (const auto& l : locals) {
    if (!(l.weight >= 0.0) || !std::isfinite(l.weight)) throw Error(ErrorKind::BadWeights, "weights must be non-negative");
    sum += l.weight;
  }
  if (!locals.empty() && std::abs(sum - 1.0) > 1e-9) throw Error(ErrorKind::BadWeights, "weights must sum to 1");
  if (locals.empty() && lambda < 1.0) throw Error(ErrorKind::BadWeights, "no local samplers and lambda < 1");
  double acc = 0.0;
  for (const auto& l : locals) {
    locals_.emplace_back(model, l.condition);
    weights_.push_back(l.weight);
    cumulative_.push_back(acc += l.weight);
  }
}

Configuration MixtureSampler::draw(Rng& rng) {
  const double u = uniform01(rng);
  if (u < lambda_ || locals_.empty()) {
    provenance_.push_back(kUniform);
    return uniform_.draw(rng);
  }
  const double v = uniform01(rng) * cumulative_.back();
  const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), v);
  const auto i = std::min<std::size_t>(static_cast<std::size_t>(it - cumulative_.begin()), locals_.size() - 1);
  provenance_.push_back(static_cast<int>(i));
  return locals_[i].draw(rng);
}

MixtureSampler synthesize_samplers(const learning::CvaeModel& model, const std::vector<LocalSpec>& locals,
                                   double lambda, UniformSampler uniform) {
  return MixtureSampler(model, locals, lambda, std::move(uniform));
}

OnlinePlan online_execute(const LearnedModels& models, const PlanningProblem& problem, const OnlineConfig& config) {
  problem.validate();
  const Workspace& w = problem.workspace;
  const Point2 s = problem.robot.workspace_point(problem.start);
  const Point2 g = problem.robot.workspace_point(problem.target);
  std::vector<Point2> keypoints =
      learning::predict_keypoints(models.keypoint, w, s, g, config.delta_fraction * w.bounds.diagonal(), config.max_steps);
  keypoints.back() = g;

  const learning::Conditioner conditioner(w, models.keypoint.grid);
  if (conditioner.dimension() != models.cvae.cond_dim) {
    throw Error(ErrorKind::DimensionMismatch, "CVAE condition size does not match the encoding grid");
  }
  std::vector<LocalSpec> locals;
  const double weight = 1.0 / static_cast<double>(keypoints.size() - 1);
  for (std::size_t i = 0; i + 1 < keypoints.size(); ++i) {
    locals.push_back({conditioner.condition(keypoints[i], keypoints[i + 1]), weight});
  }
  // Equal weights of 1/N need not sum to exactly 1 in floating point.
  double sum = 0.0;
  for (const auto& l : locals) sum += l.weight;
  locals.back().weight += 1.0 - sum;
  return {keypoints, synthesize_samplers(models.cvae, locals, config.lambda, UniformSampler(problem.robot, w))};
}

}  // namespace bspplan
