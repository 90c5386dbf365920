#pragma once

#include <cstdint>
#include <vector>

#include "bspplan/learning/mlp.hpp"
#include "bspplan/planner.hpp"

namespace bspplan {

struct GmmModel {
  std::vector<double> weights;
  std::vector<learning::Vector> means;
  std::vector<learning::Matrix> covariances;
  /// Mean log-likelihood after initialization and after every EM iteration.
  std::vector<double> log_likelihood;
};

/// k-means++ initialization then 50 EM iterations with full covariances
/// (regularized by 1e-6 I). Throws EmptyDataset, InvalidParams for k < 1.
GmmModel fit_gmm(const std::vector<Configuration>& data, int k, std::uint64_t seed, int iterations = 50);

double gmm_log_density(const GmmModel& m, const learning::Vector& x);

/// Draws from a fitted mixture; arm angles are wrapped.
class GmmSampler final : public SampleSource {
 public:
  GmmSampler(GmmModel model, bool angular);
  Configuration draw(Rng& rng) override;
  const GmmModel& model() const { return model_; }

 private:
  GmmModel model_;
  std::vector<learning::Matrix> factors_;
  bool angular_;
};

GmmSampler fit_gmm_baseline(const std::vector<Configuration>& data, int k, std::uint64_t seed, bool angular);

}  // namespace bspplan
