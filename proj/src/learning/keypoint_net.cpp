#include "bspplan/learning/keypoint_net.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace bspplan::learning {

std::vector<KeypointExample> unroll_sequence(const Conditioner& conditioner, const Box& bounds,
                                             const std::vector<Point2>& sequence) {
  std::vector<KeypointExample> out;
  if (sequence.size() < 2) return out;
  const Point2 target = sequence.back();
  for (std::size_t i = 0; i + 1 < sequence.size(); ++i) {
    out.push_back({conditioner.condition(sequence[i], target), to_unit(bounds, sequence[i + 1])});
  }
  return out;
}

KeypointNet train_keypoint_net(const std::vector<KeypointExample>& data, const KeypointNetConfig& config,
                               TrainingHistory* history) {
  if (data.empty()) throw Error(ErrorKind::EmptyDataset, "keypoint dataset is empty");
  if (config.epochs <= 0 || config.batch_size <= 0) throw Error(ErrorKind::InvalidParams, "epochs and batch size must be positive");
  const int in = static_cast<int>(data.front().input.size());
  std::vector<int> sizes{in};
  sizes.insert(sizes.end(), config.hidden.begin(), config.hidden.end());
  sizes.push_back(2);
  Rng rng(config.seed);
  KeypointNet net{Mlp(sizes, rng), config.grid};
  Adam opt(net.mlp, {config.learning_rate});

  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double total = 0.0;
    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(config.batch_size)) {
      const std::size_t end = std::min(order.size(), start + static_cast<std::size_t>(config.batch_size));
      const auto b = static_cast<Eigen::Index>(end - start);
      Matrix x(in, b);
      Matrix y(2, b);
      for (Eigen::Index j = 0; j < b; ++j) {
        const KeypointExample& ex = data[order[start + static_cast<std::size_t>(j)]];
        if (ex.input.size() != in) throw Error(ErrorKind::DimensionMismatch, "inconsistent keypoint input sizes");
        x.col(j) = ex.input;
        y(0, j) = ex.label.x;
        y(1, j) = ex.label.y;
      }
      MlpTape tape;
      const Matrix residual = net.mlp.forward(x, &tape) - y;
      const double loss = 0.5 * residual.squaredNorm();
      if (!std::isfinite(loss)) throw Error(ErrorKind::TrainingDiverged, "keypoint loss became non-finite");
      total += loss;
      opt.step(net.mlp, net.mlp.backward(tape, residual / static_cast<double>(b)));
    }
    if (history) history->epoch_loss.push_back(total / static_cast<double>(data.size()));
  }
  if (!net.mlp.all_finite()) throw Error(ErrorKind::TrainingDiverged, "keypoint parameters became non-finite");
  return net;
}

Point2 predict_next(const KeypointNet& net, const Conditioner& conditioner, const Box& bounds, Point2 current,
                    Point2 target) {
  const Vector out = net.mlp.forward(conditioner.condition(current, target));
  const Point2 u{std::clamp(out[0], -1.0, 1.0), std::clamp(out[1], -1.0, 1.0)};
  return from_unit(bounds, u);
}

std::vector<Point2> predict_keypoints(const KeypointNet& net, const Workspace& w, Point2 x_init, Point2 x_target,
                                      double delta, int max_steps) {
  if (!(delta > 0.0) || max_steps < 1) throw Error(ErrorKind::InvalidParams, "delta and max_steps must be positive");
  const Conditioner conditioner(w, net.grid);
  if (net.mlp.input_size() != conditioner.dimension()) {
    throw Error(ErrorKind::DimensionMismatch, "keypoint net input does not match the encoding grid");
  }
  std::vector<Point2> seq{x_init};
  for (int step = 0; step < max_steps; ++step) {
    const Point2 next = predict_next(net, conditioner, w.bounds, seq.back(), x_target);
    seq.push_back(next);
    if (distance(next, x_target) < delta) return seq;
  }
  throw Error(ErrorKind::NoTermination, "keypoint prediction did not reach the target within " +
                                            std::to_string(max_steps) + " steps");
}

}  // namespace bspplan::learning
