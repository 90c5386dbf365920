#pragma once

#include <Eigen/Dense>
#include <vector>

#include "bspplan/common.hpp"

namespace bspplan::learning {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Activations recorded by a forward pass, consumed by backward().
struct MlpTape {
  /// inputs[k] is the input of layer k; inputs.back() the network output.
  std::vector<Matrix> inputs;
  bool empty() const { return inputs.empty(); }
};

struct MlpGradients {
  std::vector<Matrix> weights;
  std::vector<Vector> biases;
  /// Adjoint with respect to the network input (one column per sample).
  Matrix input;

  MlpGradients& operator+=(const MlpGradients& o);
  MlpGradients& operator*=(double s);
};

/// Fully connected network, tanh on hidden layers and identity on the output.
/// Batches are column-major: one sample per column.
class Mlp {
 public:
  Mlp() = default;
  /// Weights ~ N(0, 1/fan_in), zero biases.
  Mlp(std::vector<int> sizes, Rng& rng);
  /// Builds from explicit parameters; throws DimensionMismatch when shapes disagree.
  Mlp(std::vector<int> sizes, std::vector<Matrix> weights, std::vector<Vector> biases);

  const std::vector<int>& sizes() const { return sizes_; }
  int input_size() const { return sizes_.front(); }
  int output_size() const { return sizes_.back(); }
  std::size_t layer_count() const { return weights_.size(); }
  const Matrix& weight(std::size_t k) const { return weights_[k]; }
  const Vector& bias(std::size_t k) const { return biases_[k]; }
  Matrix& weight(std::size_t k) { return weights_[k]; }
  Vector& bias(std::size_t k) { return biases_[k]; }
  std::size_t parameter_count() const;

  Vector forward(const Vector& input) const;
  Matrix forward(const Matrix& batch, MlpTape* tape = nullptr) const;

  /// Reverse-mode gradients of a scalar loss given dLoss/dOutput for the
  /// recorded batch. Throws NoForwardRecorded for an empty tape.
  MlpGradients backward(const MlpTape& tape, const Matrix& output_adjoint) const;

  bool all_finite() const;
  friend bool operator==(const Mlp& a, const Mlp& b);

 private:
  void check_shapes() const;
  std::vector<int> sizes_;
  std::vector<Matrix> weights_;  // out x in
  std::vector<Vector> biases_;
};

/// Adaptive-moment optimizer over one network's parameters.
class Adam {
 public:
  struct Options {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
  };

  Adam() = default;
  Adam(const Mlp& net, Options options);
  void step(Mlp& net, const MlpGradients& grads);

 private:
  Options opt_;
  long long t_ = 0;
  std::vector<Matrix> mw_, vw_;
  std::vector<Vector> mb_, vb_;
};

}  // namespace bspplan::learning
