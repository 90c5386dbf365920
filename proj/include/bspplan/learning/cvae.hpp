#pragma once

#include <span>
#include <vector>

#include "bspplan/learning/mlp.hpp"
#include "bspplan/robots.hpp"

namespace bspplan::learning {

struct CvaeConfig {
  std::vector<int> hidden{256, 256};
  int latent_dim = 3;
  int epochs = 20;
  int batch_size = 32;
  double learning_rate = 1e-3;
  /// Configurations are mapped to [-data_scale, data_scale] per coordinate
  /// before the unit-variance reconstruction term.
  double data_scale = 16.0;
  std::uint64_t seed = 1;
};

/// Encoder maps [x; cond] to [mu_z; log sigma^2_z]; decoder maps [z; cond]
/// to x in model space. The prior over z is the standard normal.
struct CvaeModel {
  Mlp encoder;
  Mlp decoder;
  int latent_dim = 0;
  int cond_dim = 0;
  int x_dim = 0;
  std::vector<double> x_lower;
  std::vector<double> x_upper;
  double data_scale = 1.0;
  bool angular = false;

  Vector to_model(const Configuration& q) const;
  Configuration from_model(const Vector& v) const;
  friend bool operator==(const CvaeModel&, const CvaeModel&) = default;
};

/// Untrained model with the given shapes.
CvaeModel make_cvae(int x_dim, int cond_dim, std::vector<double> x_lower, std::vector<double> x_upper, bool angular,
                    const CvaeConfig& config);

/// 1/2 sum_i (mu_i^2 + exp(logvar_i) - 1 - logvar_i).
double kl_standard_gaussian(std::span<const double> mu, std::span<const double> logvar);

struct ElboEvaluation {
  double loss = 0.0;            ///< batch mean of KL + reconstruction
  double kl = 0.0;              ///< batch mean
  double reconstruction = 0.0;  ///< batch mean of 1/2 ||x - x_hat||^2
  MlpGradients encoder;
  MlpGradients decoder;
};

/// Negated single-sample ELBO with z = mu + exp(logvar / 2) * eps. Columns of
/// x (model space), cond and eps are samples. Gradients are of the batch mean.
ElboEvaluation elbo_loss(const CvaeModel& model, const Matrix& x, const Matrix& cond, const Matrix& eps,
                         bool with_gradients = true);

struct CvaeDataset {
  /// Shared conditioning vectors; many configurations reference one.
  std::vector<Vector> conditions;
  std::vector<Configuration> configurations;
  std::vector<int> condition_of;

  std::size_t size() const { return configurations.size(); }
  void add(const Configuration& q, int condition) {
    configurations.push_back(q);
    condition_of.push_back(condition);
  }
};

struct TrainingHistory {
  std::vector<double> epoch_loss;
};

/// Adam training over shuffled minibatches. Throws EmptyDataset, and
/// TrainingDiverged on a non-finite loss.
CvaeModel train_cvae(const CvaeDataset& data, int x_dim, std::vector<double> x_lower, std::vector<double> x_upper,
                     bool angular, const CvaeConfig& config, TrainingHistory* history = nullptr);

/// n draws of decoder(z, cond) with z ~ N(0, I).
std::vector<Configuration> sample_cvae(const CvaeModel& model, const Vector& cond, int n, Rng& rng);

/// One conditioned decoder with the condition's first-layer contribution
/// folded into a bias, for fast repeated draws.
class CvaeLocalSampler {
 public:
  CvaeLocalSampler(const CvaeModel& model, const Vector& cond);
  Configuration draw(Rng& rng) const;

 private:
  const CvaeModel* model_;
  Vector first_bias_;
};

}  // namespace bspplan::learning
