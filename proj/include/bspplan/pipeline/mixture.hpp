#pragma once

#include <cstdint>
#include <vector>

#include "bspplan/learning/cvae.hpp"
#include "bspplan/learning/keypoint_net.hpp"
#include "bspplan/planner.hpp"

namespace bspplan {

struct LearnedModels {
  learning::KeypointNet keypoint;
  learning::CvaeModel cvae;
};

struct LocalSpec {
  learning::Vector condition;
  double weight = 0.0;
};

/// With probability lambda a uniform draw, otherwise a draw from local i with
/// probability w_i. Records where each draw came from.
class MixtureSampler final : public SampleSource {
 public:
  static constexpr int kUniform = -1;

  MixtureSampler(const learning::CvaeModel& model, const std::vector<LocalSpec>& locals, double lambda,
                 UniformSampler uniform);

  Configuration draw(Rng& rng) override;

  double lambda() const { return lambda_; }
  const std::vector<double>& weights() const { return weights_; }
  std::size_t local_count() const { return locals_.size(); }
  /// Component index of every draw so far, kUniform for uniform draws.
  const std::vector<int>& provenance() const { return provenance_; }
  void clear_provenance() { provenance_.clear(); }

 private:
  std::vector<learning::CvaeLocalSampler> locals_;
  std::vector<double> weights_;
  std::vector<double> cumulative_;
  double lambda_;
  UniformSampler uniform_;
  std::vector<int> provenance_;
};

/// Throws BadWeights unless the weights are non-negative and sum to 1 within
/// 1e-9, and InvalidParams unless lambda is in [0, 1].
MixtureSampler synthesize_samplers(const learning::CvaeModel& model, const std::vector<LocalSpec>& locals,
                                   double lambda, UniformSampler uniform);

struct OnlineConfig {
  double lambda = 0.5;
  /// Termination radius as a fraction of the bounds diagonal.
  double delta_fraction = 0.1;
  int max_steps = 12;
};

struct OnlinePlan {
  std::vector<Point2> keypoints;
  MixtureSampler sampler;
};

/// Predicts keypoints from the start to the target, replaces the final
/// prediction by the exact goal position, and builds one equally weighted
/// local sampler per consecutive pair. Throws NoTermination.
OnlinePlan online_execute(const LearnedModels& models, const PlanningProblem& problem, const OnlineConfig& config);

}  // namespace bspplan
