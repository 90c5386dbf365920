#include "bspplan/learning/cvae.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace bspplan::learning {

namespace {

std::vector<int> layer_sizes(int in, const std::vector<int>& hidden, int out) {
  std::vector<int> s{in};
  s.insert(s.end(), hidden.begin(), hidden.end());
  s.push_back(out);
  return s;
}

}  // namespace

Vector CvaeModel::to_model(const Configuration& q) const {
  Vector v(x_dim);
  for (int i = 0; i < x_dim; ++i) {
    const auto k = static_cast<std::size_t>(i);
    v[i] = data_scale * (2.0 * (q[k] - x_lower[k]) / (x_upper[k] - x_lower[k]) - 1.0);
  }
  return v;
}

Configuration CvaeModel::from_model(const Vector& v) const {
  Configuration q{std::vector<double>(static_cast<std::size_t>(x_dim))};
  for (int i = 0; i < x_dim; ++i) {
    const auto k = static_cast<std::size_t>(i);
    q[k] = x_lower[k] + 0.5 * (v[i] / data_scale + 1.0) * (x_upper[k] - x_lower[k]);
    if (angular) q[k] = wrap_angle(q[k]);
  }
  return q;
}

CvaeModel make_cvae(int x_dim, int cond_dim, std::vector<double> x_lower, std::vector<double> x_upper, bool angular,
                    const CvaeConfig& config) {
  if (x_dim <= 0 || cond_dim < 0 || config.latent_dim <= 0) throw Error(ErrorKind::InvalidParams, "bad CVAE shape");
  if (x_lower.size() != static_cast<std::size_t>(x_dim) || x_upper.size() != static_cast<std::size_t>(x_dim)) {
    throw Error(ErrorKind::DimensionMismatch, "normalization box does not match x_dim");
  }
  Rng rng(config.seed);
  CvaeModel m;
  m.latent_dim = config.latent_dim;
  m.cond_dim = cond_dim;
  m.x_dim = x_dim;
  m.encoder = Mlp(layer_sizes(x_dim + cond_dim, config.hidden, 2 * config.latent_dim), rng);
  m.decoder = Mlp(layer_sizes(config.latent_dim + cond_dim, config.hidden, x_dim), rng);
  m.x_lower = std::move(x_lower);
  m.x_upper = std::move(x_upper);
  m.data_scale = config.data_scale;
  m.angular = angular;
  return m;
}

double kl_standard_gaussian(std::span<const double> mu, std::span<const double> logvar) {
  if (mu.size() != logvar.size()) throw Error(ErrorKind::DimensionMismatch, "mu and logvar lengths differ");
  double kl = 0.0;
  for (std::size_t i = 0; i < mu.size(); ++i) kl += mu[i] * mu[i] + std::exp(logvar[i]) - 1.0 - logvar[i];
  return 0.5 * kl;
}

ElboEvaluation elbo_loss(const CvaeModel& m, const Matrix& x, const Matrix& cond, const Matrix& eps,
                         bool with_gradients) {
  const Eigen::Index batch = x.cols();
  if (x.rows() != m.x_dim || cond.rows() != m.cond_dim || eps.rows() != m.latent_dim || cond.cols() != batch ||
      eps.cols() != batch) {
    throw Error(ErrorKind::DimensionMismatch, "ELBO inputs do not match model dimensions");
  }
  const int L = m.latent_dim;

  Matrix enc_in(m.x_dim + m.cond_dim, batch);
  enc_in << x, cond;
  MlpTape enc_tape;
  const Matrix enc_out = m.encoder.forward(enc_in, with_gradients ? &enc_tape : nullptr);
  const Matrix mu = enc_out.topRows(L);
  const Matrix logvar = enc_out.bottomRows(L);
  const Matrix sigma = (0.5 * logvar.array()).exp().matrix();
  const Matrix z = mu + sigma.cwiseProduct(eps);

  Matrix dec_in(L + m.cond_dim, batch);
  dec_in << z, cond;
  MlpTape dec_tape;
  const Matrix x_hat = m.decoder.forward(dec_in, with_gradients ? &dec_tape : nullptr);
  const Matrix residual = x_hat - x;

  ElboEvaluation out;
  const double inv_b = 1.0 / static_cast<double>(batch);
  out.kl = 0.5 * (mu.array().square() + logvar.array().exp() - 1.0 - logvar.array()).sum() * inv_b;
  out.reconstruction = 0.5 * residual.squaredNorm() * inv_b;
  out.loss = out.kl + out.reconstruction;
  if (!with_gradients) return out;

  out.decoder = m.decoder.backward(dec_tape, residual * inv_b);
  const Matrix dz = out.decoder.input.topRows(L);
  Matrix enc_adj(2 * L, batch);
  enc_adj.topRows(L) = mu * inv_b + dz;
  enc_adj.bottomRows(L) =
      (0.5 * (logvar.array().exp() - 1.0) * inv_b + dz.array() * eps.array() * 0.5 * sigma.array()).matrix();
  out.encoder = m.encoder.backward(enc_tape, enc_adj);
  return out;
}

CvaeModel train_cvae(const CvaeDataset& data, int x_dim, std::vector<double> x_lower, std::vector<double> x_upper,
                     bool angular, const CvaeConfig& config, TrainingHistory* history) {
  if (data.size() == 0 || data.conditions.empty()) throw Error(ErrorKind::EmptyDataset, "CVAE dataset is empty");
  if (config.epochs <= 0 || config.batch_size <= 0) throw Error(ErrorKind::InvalidParams, "epochs and batch size must be positive");
  const int cond_dim = static_cast<int>(data.conditions.front().size());
  CvaeModel m = make_cvae(x_dim, cond_dim, std::move(x_lower), std::move(x_upper), angular, config);
  Adam enc_opt(m.encoder, {config.learning_rate});
  Adam dec_opt(m.decoder, {config.learning_rate});
  Rng rng(derive_seed(config.seed, 1));

  std::vector<Vector> xs;
  xs.reserve(data.size());
  for (const auto& q : data.configurations) {
    if (q.size() != static_cast<std::size_t>(x_dim)) throw Error(ErrorKind::DimensionMismatch, "dataset configuration size");
    xs.push_back(m.to_model(q));
  }

  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double total = 0.0;
    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(config.batch_size)) {
      const std::size_t end = std::min(order.size(), start + static_cast<std::size_t>(config.batch_size));
      const auto b = static_cast<Eigen::Index>(end - start);
      Matrix x(x_dim, b);
      Matrix c(cond_dim, b);
      Matrix e(m.latent_dim, b);
      for (Eigen::Index j = 0; j < b; ++j) {
        const std::size_t i = order[start + static_cast<std::size_t>(j)];
        x.col(j) = xs[i];
        c.col(j) = data.conditions[static_cast<std::size_t>(data.condition_of[i])];
        for (int k = 0; k < m.latent_dim; ++k) e(k, j) = standard_normal(rng);
      }
      const ElboEvaluation ev = elbo_loss(m, x, c, e);
      if (!std::isfinite(ev.loss)) throw Error(ErrorKind::TrainingDiverged, "CVAE loss became non-finite");
      total += ev.loss * static_cast<double>(b);
      enc_opt.step(m.encoder, ev.encoder);
      dec_opt.step(m.decoder, ev.decoder);
    }
    if (history) history->epoch_loss.push_back(total / static_cast<double>(data.size()));
  }
  if (!m.encoder.all_finite() || !m.decoder.all_finite()) {
    throw Error(ErrorKind::TrainingDiverged, "CVAE parameters became non-finite");
  }
  return m;
}

std::vector<Configuration> sample_cvae(const CvaeModel& model, const Vector& cond, int n, Rng& rng) {
  std::vector<Configuration> out;
  if (n <= 0) return out;
  const CvaeLocalSampler local(model, cond);
  out.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) out.push_back(local.draw(rng));
  return out;
}

CvaeLocalSampler::CvaeLocalSampler(const CvaeModel& model, const Vector& cond) : model_(&model) {
  if (cond.size() != model.cond_dim) throw Error(ErrorKind::DimensionMismatch, "condition size does not match model");
  const Matrix& w = model.decoder.weight(0);
  first_bias_ = w.rightCols(model.cond_dim) * cond + model.decoder.bias(0);
}

Configuration CvaeLocalSampler::draw(Rng& rng) const {
  const Mlp& dec = model_->decoder;
  Vector z(model_->latent_dim);
  for (int k = 0; k < model_->latent_dim; ++k) z[k] = standard_normal(rng);
  Vector a = dec.weight(0).leftCols(model_->latent_dim) * z + first_bias_;
  for (std::size_t k = 1; k < dec.layer_count(); ++k) {
    a = a.array().tanh().matrix();
    a = dec.weight(k) * a + dec.bias(k);
  }
  return model_->from_model(a);
}

}  // namespace bspplan::learning
