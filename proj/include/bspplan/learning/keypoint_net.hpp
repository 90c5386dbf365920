#pragma once

#include <vector>

#include "bspplan/keypoint_graph.hpp"
#include "bspplan/learning/cvae.hpp"
#include "bspplan/learning/encoding.hpp"

namespace bspplan::learning {

struct KeypointNetConfig {
  std::vector<int> hidden{256, 256};
  int grid = 16;
  int epochs = 30;
  /// Also train on every record reflected about the vertical midline.
  bool mirror = true;
  int batch_size = 32;
  double learning_rate = 1e-3;
  std::uint64_t seed = 2;
};

/// Regresses the next keypoint (unit coordinates of the bounds) from the
/// conditioning vector of (current keypoint, target).
struct KeypointNet {
  Mlp mlp;
  int grid = 16;
  friend bool operator==(const KeypointNet&, const KeypointNet&) = default;
};

struct KeypointExample {
  Vector input;   ///< Conditioner::condition(current, target)
  Point2 label;   ///< next keypoint in unit coordinates
};

/// Unrolls one keypoint sequence [x_init, k1, ..., x_target] into
/// (current -> next) examples.
std::vector<KeypointExample> unroll_sequence(const Conditioner& conditioner, const Box& bounds,
                                             const std::vector<Point2>& sequence);

/// Mean-squared-error regression with Adam. Throws EmptyDataset and
/// TrainingDiverged.
KeypointNet train_keypoint_net(const std::vector<KeypointExample>& data, const KeypointNetConfig& config,
                               TrainingHistory* history = nullptr);

Point2 predict_next(const KeypointNet& net, const Conditioner& conditioner, const Box& bounds, Point2 current,
                    Point2 target);

/// Iterates the net from x_init until a prediction lands within delta of
/// x_target. Returned points start with x_init; the last one is the final
/// prediction. Predictions are clamped into the bounds. Throws NoTermination
/// after max_steps predictions.
std::vector<Point2> predict_keypoints(const KeypointNet& net, const Workspace& w, Point2 x_init, Point2 x_target,
                                      double delta, int max_steps = 12);

}  // namespace bspplan::learning
