#include "bspplan/pipeline/gmm.hpp"

#include <cmath>
#include <limits>
#include <numbers>

namespace bspplan {

using learning::Matrix;
using learning::Vector;

namespace {

constexpr double kRegularization = 1e-6;

struct Gaussian {
  Eigen::LLT<Matrix> llt;
  double log_norm = 0.0;
};

Gaussian prepare(const Matrix& cov) {
  Gaussian g;
  g.llt.compute(cov);
  if (g.llt.info() != Eigen::Success) throw Error(ErrorKind::InvalidParams, "covariance is not positive definite");
  const Matrix L = g.llt.matrixL();
  const double logdet = 2.0 * L.diagonal().array().log().sum();
  g.log_norm = -0.5 * (static_cast<double>(cov.rows()) * std::log(2.0 * std::numbers::pi) + logdet);
  return g;
}

double log_gauss(const Gaussian& g, const Vector& mean, const Vector& x) {
  const Vector y = g.llt.matrixL().solve(x - mean);
  return g.log_norm - 0.5 * y.squaredNorm();
}

double log_sum_exp(const Vector& v) {
  const double m = v.maxCoeff();
  if (!std::isfinite(m)) return m;
  return m + std::log((v.array() - m).exp().sum());
}

}  // namespace

double gmm_log_density(const GmmModel& m, const Vector& x) {
  Vector terms(static_cast<Eigen::Index>(m.weights.size()));
  for (std::size_t j = 0; j < m.weights.size(); ++j) {
    terms[static_cast<Eigen::Index>(j)] = std::log(m.weights[j]) + log_gauss(prepare(m.covariances[j]), m.means[j], x);
  }
  return log_sum_exp(terms);
}

GmmModel fit_gmm(const std::vector<Configuration>& data, int k, std::uint64_t seed, int iterations) {
  if (data.empty()) throw Error(ErrorKind::EmptyDataset, "GMM dataset is empty");
  if (k < 1) throw Error(ErrorKind::InvalidParams, "k must be positive");
  const auto n = static_cast<Eigen::Index>(data.size());
  const auto d = static_cast<Eigen::Index>(data.front().size());
  Matrix X(d, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& q = data[static_cast<std::size_t>(i)];
    if (static_cast<Eigen::Index>(q.size()) != d) throw Error(ErrorKind::DimensionMismatch, "inconsistent configuration sizes");
    for (Eigen::Index r = 0; r < d; ++r) X(r, i) = q[static_cast<std::size_t>(r)];
  }
  Rng rng(seed);
  const auto K = static_cast<std::size_t>(std::min<Eigen::Index>(k, n));

  // k-means++ seeding, then Lloyd iterations.
  std::vector<Vector> centers{X.col(static_cast<Eigen::Index>(rng() % static_cast<std::uint64_t>(n)))};
  while (centers.size() < K) {
    Vector d2(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      double best = std::numeric_limits<double>::infinity();
      for (const auto& c : centers) best = std::min(best, (X.col(i) - c).squaredNorm());
      d2[i] = best;
    }
    const double total = d2.sum();
    Eigen::Index pick = 0;
    if (total > 0.0) {
      double u = uniform01(rng) * total;
      while (pick + 1 < n && (u -= d2[pick]) > 0.0) ++pick;
    }
    centers.push_back(X.col(pick));
  }
  std::vector<int> label(static_cast<std::size_t>(n), 0);
  for (int it = 0; it < 20; ++it) {
    for (Eigen::Index i = 0; i < n; ++i) {
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t j = 0; j < K; ++j) {
        const double dist = (X.col(i) - centers[j]).squaredNorm();
        if (dist < best) {
          best = dist;
          label[static_cast<std::size_t>(i)] = static_cast<int>(j);
        }
      }
    }
    std::vector<Vector> sum(K, Vector::Zero(d));
    std::vector<int> count(K, 0);
    for (Eigen::Index i = 0; i < n; ++i) {
      sum[static_cast<std::size_t>(label[static_cast<std::size_t>(i)])] += X.col(i);
      ++count[static_cast<std::size_t>(label[static_cast<std::size_t>(i)])];
    }
    for (std::size_t j = 0; j < K; ++j) {
      if (count[j] > 0) centers[j] = sum[j] / count[j];
    }
  }

  Matrix resp = Matrix::Zero(static_cast<Eigen::Index>(K), n);
  for (Eigen::Index i = 0; i < n; ++i) resp(label[static_cast<std::size_t>(i)], i) = 1.0;

  GmmModel m;
  auto m_step = [&] {
    m.weights.assign(K, 0.0);
    m.means.assign(K, Vector::Zero(d));
    m.covariances.assign(K, Matrix::Identity(d, d) * kRegularization);
    for (std::size_t j = 0; j < K; ++j) {
      const auto J = static_cast<Eigen::Index>(j);
      const double nj = resp.row(J).sum();
      m.weights[j] = std::max(nj, 1e-12) / static_cast<double>(n);
      if (nj <= 1e-12) {
        m.means[j] = centers[j];
        m.covariances[j] = Matrix::Identity(d, d);
        continue;
      }
      m.means[j] = X * resp.row(J).transpose() / nj;
      const Matrix centered = X.colwise() - m.means[j];
      m.covariances[j] += centered * resp.row(J).asDiagonal() * centered.transpose() / nj;
    }
    double wsum = 0.0;
    for (double w : m.weights) wsum += w;
    for (double& w : m.weights) w /= wsum;
  };
  auto e_step = [&] {
    std::vector<Gaussian> gs;
    for (std::size_t j = 0; j < K; ++j) gs.push_back(prepare(m.covariances[j]));
    double ll = 0.0;
    Vector terms(static_cast<Eigen::Index>(K));
    for (Eigen::Index i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < K; ++j) {
        terms[static_cast<Eigen::Index>(j)] = std::log(m.weights[j]) + log_gauss(gs[j], m.means[j], X.col(i));
      }
      const double lse = log_sum_exp(terms);
      ll += lse;
      resp.col(i) = (terms.array() - lse).exp().matrix();
    }
    return ll / static_cast<double>(n);
  };

  m_step();
  m.log_likelihood.push_back(e_step());
  for (int it = 0; it < iterations; ++it) {
    m_step();
    m.log_likelihood.push_back(e_step());
  }
  return m;
}

GmmSampler::GmmSampler(GmmModel model, bool angular) : model_(std::move(model)), angular_(angular) {
  for (const auto& c : model_.covariances) {
    Eigen::LLT<Matrix> llt(c);
    factors_.push_back(llt.matrixL());
  }
}

Configuration GmmSampler::draw(Rng& rng) {
  double u = uniform01(rng);
  std::size_t j = 0;
  while (j + 1 < model_.weights.size() && (u -= model_.weights[j]) > 0.0) ++j;
  Vector z(model_.means[j].size());
  for (Eigen::Index i = 0; i < z.size(); ++i) z[i] = standard_normal(rng);
  const Vector x = model_.means[j] + factors_[j] * z;
  std::vector<double> v(x.data(), x.data() + x.size());
  if (angular_) {
    for (double& a : v) a = wrap_angle(a);
  }
  return Configuration{std::move(v)};
}

GmmSampler fit_gmm_baseline(const std::vector<Configuration>& data, int k, std::uint64_t seed, bool angular) {
  return GmmSampler(fit_gmm(data, k, seed), angular);
}

}  // namespace bspplan
