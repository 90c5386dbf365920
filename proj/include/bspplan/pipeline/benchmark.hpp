#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "bspplan/pipeline/maze.hpp"
#include "bspplan/pipeline/mixture.hpp"
#include "bspplan/pipeline/collect.hpp"

namespace bspplan {

/// Sampler names: "uniform", "cvae" (learned locals only), "mixture"
/// (learned locals plus uniform at lambda), "gmm" (mixture of a GMM fitted to
/// the most similar training record and uniform at lambda).
struct BenchmarkConfig {
  std::vector<std::uint64_t> env_seeds;
  MazeConfig maze;
  std::vector<std::string> samplers{"uniform", "mixture"};
  std::vector<int> budgets{500};
  int runs = 20;
  std::uint64_t seed = 7;
  OnlineConfig online;
  int gmm_components = 4;
  unsigned workers = 0;

  void validate() const;
};

struct BenchmarkRow {
  std::uint64_t env_seed = 0;
  std::string sampler;
  int budget = 0;
  int runs = 0;
  int successes = 0;
  double success_rate = 0.0;
  /// Over successful runs; nullopt without successes.
  std::optional<double> mean_cost;
  double ci_cost = 0.0;
  /// Planning time is measured in collision checks until the first solution
  /// (all checks for failed runs), which is machine independent.
  double mean_time = 0.0;
  double ci_time = 0.0;
  double median_of_means_time = 0.0;
  double valid_fraction = 0.0;
  std::string normalization_base;
  std::optional<double> normalized_time;
  std::optional<double> normalized_cost;
  std::optional<double> valid_ratio;
  /// Keypoint prediction failed to terminate and the start-goal pair was used.
  bool keypoint_fallback = false;
  double wall_seconds = 0.0;
};

struct SamplerSummary {
  std::string sampler;
  int budget = 0;
  double success_rate = 0.0;
  double mean_valid_fraction = 0.0;
  std::optional<double> normalized_time;
  double ci_normalized_time = 0.0;
  std::optional<double> normalized_cost;
  double ci_normalized_cost = 0.0;
  int cost_environments = 0;
};

struct BenchmarkReport {
  std::vector<BenchmarkRow> rows;
  std::vector<SamplerSummary> summaries;

  /// Deterministic report; wall-clock times are left out.
  nlohmann::json to_json() const;
  nlohmann::json timing_json() const;
};

/// 95% normal-approximation half-width 1.96 s / sqrt(n); 0 for n < 2.
double ci95(const std::vector<double>& xs);
double mean(const std::vector<double>& xs);
/// Median of the means of consecutive groups of `group` values.
double median_of_means(const std::vector<double>& xs, std::size_t group = 5);

/// Throws MissingModel when a learned sampler is requested without models,
/// or "gmm" without training records.
BenchmarkReport run_benchmark(const BenchmarkConfig& config, const LearnedModels* models,
                              const std::vector<DatasetRecord>* training_records = nullptr);

}  // namespace bspplan
