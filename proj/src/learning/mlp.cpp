#include "bspplan/learning/mlp.hpp"

#include <cmath>

namespace bspplan::learning {

MlpGradients& MlpGradients::operator+=(const MlpGradients& o) {
  for (std::size_t k = 0; k < weights.size(); ++k) {
    weights[k] += o.weights[k];
    biases[k] += o.biases[k];
  }
  return *this;
}

MlpGradients& MlpGradients::operator*=(double s) {
  for (std::size_t k = 0; k < weights.size(); ++k) {
    weights[k] *= s;
    biases[k] *= s;
  }
  input *= s;
  return *this;
}

Mlp::Mlp(std::vector<int> sizes, Rng& rng) : sizes_(std::move(sizes)) {
  if (sizes_.size() < 2) throw Error(ErrorKind::InvalidParams, "an MLP needs at least input and output sizes");
  for (std::size_t k = 0; k + 1 < sizes_.size(); ++k) {
    const int in = sizes_[k];
    const int out = sizes_[k + 1];
    if (in <= 0 || out <= 0) throw Error(ErrorKind::InvalidParams, "layer sizes must be positive");
    Matrix w(out, in);
    const double scale = 1.0 / std::sqrt(static_cast<double>(in));
    for (int j = 0; j < in; ++j) {
      for (int i = 0; i < out; ++i) w(i, j) = scale * standard_normal(rng);
    }
    weights_.push_back(std::move(w));
    biases_.push_back(Vector::Zero(out));
  }
}

Mlp::Mlp(std::vector<int> sizes, std::vector<Matrix> weights, std::vector<Vector> biases)
    : sizes_(std::move(sizes)), weights_(std::move(weights)), biases_(std::move(biases)) {
  check_shapes();
}

void Mlp::check_shapes() const {
  if (sizes_.size() < 2 || weights_.size() + 1 != sizes_.size() || biases_.size() != weights_.size()) {
    throw Error(ErrorKind::DimensionMismatch, "layer count does not match architecture");
  }
  for (std::size_t k = 0; k < weights_.size(); ++k) {
    if (weights_[k].rows() != sizes_[k + 1] || weights_[k].cols() != sizes_[k] || biases_[k].size() != sizes_[k + 1]) {
      throw Error(ErrorKind::DimensionMismatch, "layer " + std::to_string(k) + " shape does not match architecture");
    }
  }
}

std::size_t Mlp::parameter_count() const {
  std::size_t n = 0;
  for (std::size_t k = 0; k < weights_.size(); ++k) n += static_cast<std::size_t>(weights_[k].size() + biases_[k].size());
  return n;
}

Vector Mlp::forward(const Vector& input) const {
  Matrix batch = input;
  return forward(batch).col(0);
}

Matrix Mlp::forward(const Matrix& batch, MlpTape* tape) const {
  if (batch.rows() != input_size()) {
    throw Error(ErrorKind::DimensionMismatch, "input has " + std::to_string(batch.rows()) + " rows, network expects " +
                                                  std::to_string(input_size()));
  }
  if (tape) tape->inputs.clear();
  Matrix a = batch;
  for (std::size_t k = 0; k < weights_.size(); ++k) {
    if (tape) tape->inputs.push_back(a);
    Matrix z = weights_[k] * a;
    z.colwise() += biases_[k];
    if (k + 1 < weights_.size()) z = z.array().tanh().matrix();
    a = std::move(z);
  }
  if (tape) tape->inputs.push_back(a);
  return a;
}

MlpGradients Mlp::backward(const MlpTape& tape, const Matrix& output_adjoint) const {
  if (tape.empty()) throw Error(ErrorKind::NoForwardRecorded, "backward() called without a recorded forward pass");
  if (tape.inputs.size() != weights_.size() + 1 || output_adjoint.rows() != output_size() ||
      output_adjoint.cols() != tape.inputs.back().cols()) {
    throw Error(ErrorKind::DimensionMismatch, "adjoint does not match the recorded forward pass");
  }
  MlpGradients g;
  g.weights.resize(weights_.size());
  g.biases.resize(weights_.size());
  Matrix delta = output_adjoint;  // dL/d(pre-activation) of the current layer
  for (std::size_t k = weights_.size(); k-- > 0;) {
    g.weights[k] = delta * tape.inputs[k].transpose();
    g.biases[k] = delta.rowwise().sum();
    Matrix up = weights_[k].transpose() * delta;
    if (k > 0) {
      // tape.inputs[k] = tanh(pre-activation of layer k-1)
      up.array() *= (1.0 - tape.inputs[k].array().square());
    }
    delta = std::move(up);
  }
  g.input = std::move(delta);
  return g;
}

bool Mlp::all_finite() const {
  for (std::size_t k = 0; k < weights_.size(); ++k) {
    if (!weights_[k].allFinite() || !biases_[k].allFinite()) return false;
  }
  return true;
}

bool operator==(const Mlp& a, const Mlp& b) {
  if (a.sizes_ != b.sizes_) return false;
  for (std::size_t k = 0; k < a.weights_.size(); ++k) {
    if (a.weights_[k] != b.weights_[k] || a.biases_[k] != b.biases_[k]) return false;
  }
  return true;
}

Adam::Adam(const Mlp& net, Options options) : opt_(options) {
  for (std::size_t k = 0; k < net.layer_count(); ++k) {
    mw_.push_back(Matrix::Zero(net.weight(k).rows(), net.weight(k).cols()));
    vw_.push_back(Matrix::Zero(net.weight(k).rows(), net.weight(k).cols()));
    mb_.push_back(Vector::Zero(net.bias(k).size()));
    vb_.push_back(Vector::Zero(net.bias(k).size()));
  }
}

void Adam::step(Mlp& net, const MlpGradients& grads) {
  ++t_;
  const double c1 = 1.0 - std::pow(opt_.beta1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(opt_.beta2, static_cast<double>(t_));
  const double lr = opt_.lr * std::sqrt(c2) / c1;
  const double eps = opt_.eps * std::sqrt(c2);
  for (std::size_t k = 0; k < net.layer_count(); ++k) {
    mw_[k] = opt_.beta1 * mw_[k] + (1.0 - opt_.beta1) * grads.weights[k];
    vw_[k] = opt_.beta2 * vw_[k] + (1.0 - opt_.beta2) * grads.weights[k].cwiseProduct(grads.weights[k]);
    net.weight(k).array() -= lr * mw_[k].array() / (vw_[k].array().sqrt() + eps);
    mb_[k] = opt_.beta1 * mb_[k] + (1.0 - opt_.beta1) * grads.biases[k];
    vb_[k] = opt_.beta2 * vb_[k] + (1.0 - opt_.beta2) * grads.biases[k].cwiseProduct(grads.biases[k]);
    net.bias(k).array() -= lr * mb_[k].array() / (vb_[k].array().sqrt() + eps);
  }
}

}  // namespace bspplan::learning
