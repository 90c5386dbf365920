#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "bspplan/pipeline/collect.hpp"
#include "bspplan/pipeline/maze.hpp"
#include "bspplan/pipeline/mixture.hpp"

namespace bspplan {

/// Extra training conditions whose keypoints are perturbed by isotropic
/// Gaussian noise, so the CVAE tolerates imprecise predicted keypoints.
struct ConditionJitter {
  int copies = 2;
  /// Noise standard deviation as a fraction of the bounds diagonal.
  double sigma = 0.02;
  /// Every stride-th path configuration is used for the perturbed copies.
  int stride = 2;
  std::uint64_t seed = 3;
};

struct OfflineConfig {
  MazeConfig maze;
  CollectConfig collect;
  learning::CvaeConfig cvae;
  learning::KeypointNetConfig keypoint;
  /// The CVAE trains on the first this-many records; the keypoint net on all.
  int cvae_envs = 100;
  ConditionJitter jitter;
  int min_records = 10;
  /// Reused when it exists, written after collection otherwise. Empty disables caching.
  std::filesystem::path dataset_path;
  /// Receives cvae.json and keypoint.json when non-empty.
  std::filesystem::path model_dir;
  unsigned workers = 0;
};

/// Point-robot problem for a generated maze, goal radius at its default.
PlanningProblem maze_problem(const MazeInstance& m);

struct CollectionOutcome {
  std::vector<DatasetRecord> records;
  std::vector<std::uint64_t> skipped_seeds;
};

/// Generates one maze per seed and runs collect_training_example on it.
/// Infeasible instances are skipped and reported.
CollectionOutcome collect_mazes(const std::vector<std::uint64_t>& env_seeds, const MazeConfig& maze,
                                const CollectConfig& collect, unsigned workers = 0);

/// The record reflected about the vertical midline of its bounds (keypoints
/// and workspace only; paths are dropped).
DatasetRecord mirror_record(const DatasetRecord& r);


learning::CvaeDataset build_cvae_dataset(const std::vector<DatasetRecord>& records, int grid,
                                         const ConditionJitter& jitter = {});
std::vector<learning::KeypointExample> build_keypoint_dataset(const std::vector<DatasetRecord>& records, int grid,
                                                              bool mirror = false);

struct OfflineResult {
  LearnedModels models;
  std::vector<DatasetRecord> records;
  learning::TrainingHistory cvae_history;
  learning::TrainingHistory keypoint_history;
  bool reused_dataset = false;
  std::vector<std::uint64_t> skipped_seeds;
};

/// Trains both networks from existing records. Throws InsufficientData.
OfflineResult train_models(std::vector<DatasetRecord> records, const OfflineConfig& config);

/// Collection (or cached dataset), training, and persistence.
OfflineResult offline_learning(const std::vector<std::uint64_t>& env_seeds, const OfflineConfig& config);

void save_models(const LearnedModels& models, const std::filesystem::path& dir);
/// Throws MissingModel when either file is absent.
LearnedModels load_models(const std::filesystem::path& dir);

}  // namespace bspplan
