#include <doctest.h>

#include "bspplan/learning/cvae.hpp"
#include "bspplan/learning/encoding.hpp"
#include "bspplan/learning/keypoint_net.hpp"
#include "support.hpp"

using namespace bspplan;
using namespace bspplan::learning;
using namespace testsupport;

namespace {

Matrix random_matrix(Rng& rng, Eigen::Index r, Eigen::Index c) {
  Matrix m(r, c);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = standard_normal(rng);
  return m;
}

/// Straightforward per-sample forward pass used as an oracle.
Vector oracle_forward(const Mlp& net, const Vector& x) {
  std::vector<double> a(x.data(), x.data() + x.size());
  for (std::size_t k = 0; k < net.layer_count(); ++k) {
    const Matrix& w = net.weight(k);
    std::vector<double> next(static_cast<std::size_t>(w.rows()));
    for (Eigen::Index i = 0; i < w.rows(); ++i) {
      double s = net.bias(k)[i];
      for (Eigen::Index j = 0; j < w.cols(); ++j) s += w(i, j) * a[static_cast<std::size_t>(j)];
      next[static_cast<std::size_t>(i)] = k + 1 < net.layer_count() ? std::tanh(s) : s;
    }
    a = next;
  }
  return Eigen::Map<Vector>(a.data(), static_cast<Eigen::Index>(a.size()));
}

double rel_error(const std::vector<double>& a, const std::vector<double>& b) {
  double diff = 0, na = 0, nb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    diff += (a[i] - b[i]) * (a[i] - b[i]);
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  return std::sqrt(diff) / std::max({std::sqrt(na), std::sqrt(nb), 1e-12});
}

/// Central differences of f over every parameter of `net`.
template <class F>
std::vector<double> numeric_grad(Mlp& net, F f, double h = 1e-5) {
  std::vector<double> g;
  for (std::size_t k = 0; k < net.layer_count(); ++k) {
    for (Eigen::Index i = 0; i < net.weight(k).size(); ++i) {
      double& p = net.weight(k).data()[i];
      const double old = p;
      p = old + h;
      const double up = f();
      p = old - h;
      const double down = f();
      p = old;
      g.push_back((up - down) / (2 * h));
    }
    for (Eigen::Index i = 0; i < net.bias(k).size(); ++i) {
      double& p = net.bias(k)[i];
      const double old = p;
      p = old + h;
      const double up = f();
      p = old - h;
      const double down = f();
      p = old;
      g.push_back((up - down) / (2 * h));
    }
  }
  return g;
}

std::vector<double> flatten(const MlpGradients& g) {
  std::vector<double> out;
  for (std::size_t k = 0; k < g.weights.size(); ++k) {
    out.insert(out.end(), g.weights[k].data(), g.weights[k].data() + g.weights[k].size());
    out.insert(out.end(), g.biases[k].data(), g.biases[k].data() + g.biases[k].size());
  }
  return out;
}

CvaeDataset corridor_data(Rng& rng, int n, const Vector& cond) {
  CvaeDataset d;
  d.conditions.push_back(cond);
  for (int i = 0; i < n; ++i) d.add({uniform(rng, 0.05, 0.95), uniform(rng, 0.46, 0.54)}, 0);
  return d;
}

Mlp linear_keypoint_net(int grid, double from_w, double to_w) {
  const int in = Conditioner::dimension(grid);
  Matrix w = Matrix::Zero(2, in);
  w(0, in - 4) = from_w;
  w(1, in - 3) = from_w;
  w(0, in - 2) = to_w;
  w(1, in - 1) = to_w;
  return Mlp({in, 2}, {w}, {Vector::Zero(2)});
}

}  // namespace

TEST_CASE("mlp forward examples") {
  const Mlp zero({3, 4, 2}, {Matrix::Zero(4, 3), Matrix::Zero(2, 4)}, {Vector::Zero(4), Vector::Zero(2)});
  CHECK(zero.forward(Vector(Vector::Ones(3))).isZero());
  const Mlp id({3, 3}, {Matrix::Identity(3, 3)}, {Vector::Zero(3)});
  const Vector x = Vector::LinSpaced(3, -2.0, 5.0);
  CHECK(id.forward(x) == x);
  CHECK_THROWS_AS(Mlp({3, 2}, {Matrix::Zero(3, 3)}, {Vector::Zero(2)}), Error);

  Rng rng(1);
  for (int t = 0; t < 10; ++t) {
    const Mlp net({5, 7, 6, 3}, rng);
    const Vector v = random_matrix(rng, 5, 1);
    CHECK((net.forward(v) - oracle_forward(net, v)).cwiseAbs().maxCoeff() <= 1e-12);
  }
}

TEST_CASE("mlp backward matches finite differences") {
  Rng rng(2);
  for (int t = 0; t < 10; ++t) {
    Mlp net({4, 6, 5, 3}, rng);
    const Matrix x = random_matrix(rng, 4, 3);
    const Matrix adj = random_matrix(rng, 3, 3);
    MlpTape tape;
    net.forward(x, &tape);
    const MlpGradients g = net.backward(tape, adj);
    auto loss = [&] { return (net.forward(x).array() * adj.array()).sum(); };
    CHECK(rel_error(flatten(g), numeric_grad(net, loss)) <= 1e-4);

    // Input adjoint.
    std::vector<double> num, ana(g.input.data(), g.input.data() + g.input.size());
    Matrix xp = x;
    for (Eigen::Index i = 0; i < xp.size(); ++i) {
      const double old = xp.data()[i];
      xp.data()[i] = old + 1e-5;
      const double up = (net.forward(xp).array() * adj.array()).sum();
      xp.data()[i] = old - 1e-5;
      const double down = (net.forward(xp).array() * adj.array()).sum();
      xp.data()[i] = old;
      num.push_back((up - down) / 2e-5);
    }
    CHECK(rel_error(ana, num) <= 1e-4);

    // Linearity and the zero adjoint.
    const MlpGradients g2 = net.backward(tape, 2.0 * adj);
    MlpGradients doubled = g;
    doubled *= 2.0;
    CHECK(rel_error(flatten(g2), flatten(doubled)) <= 1e-12);
    const MlpGradients z = net.backward(tape, Matrix::Zero(3, 3));
    for (double v : flatten(z)) CHECK(v == 0.0);
  }
  Mlp net({2, 2}, {Matrix::Identity(2, 2)}, {Vector::Zero(2)});
  CHECK_THROWS_AS(net.backward(MlpTape{}, Matrix::Zero(2, 1)), Error);
}

TEST_CASE("kl closed form") {
  const std::vector<double> zero{0.0}, one{1.0};
  CHECK(kl_standard_gaussian(zero, zero) == 0.0);
  CHECK(std::abs(kl_standard_gaussian(one, zero) - 0.5) <= 1e-12);
  Rng rng(3);
  for (int i = 0; i < 100; ++i) {
    std::vector<double> mu(4), lv(4);
    for (auto& v : mu) v = standard_normal(rng);
    for (auto& v : lv) v = standard_normal(rng);
    const double total = kl_standard_gaussian(mu, lv);
    double parts = 0;
    for (std::size_t k = 0; k < 4; ++k) parts += kl_standard_gaussian(std::span(mu).subspan(k, 1), std::span(lv).subspan(k, 1));
    CHECK(total == doctest::Approx(parts).epsilon(1e-12));
    CHECK(total > 0.0);
  }
  CHECK_THROWS_AS(kl_standard_gaussian(std::vector<double>{0, 0}, zero), Error);
}

TEST_CASE("elbo examples") {
  CvaeConfig cfg;
  cfg.hidden = {6};
  cfg.latent_dim = 2;
  cfg.data_scale = 1.0;
  CvaeModel m = make_cvae(2, 3, {0, 0}, {1, 1}, false, cfg);
  // Encoder at the prior, decoder emitting x regardless of z.
  for (std::size_t k = 0; k < m.encoder.layer_count(); ++k) {
    m.encoder.weight(k).setZero();
    m.encoder.bias(k).setZero();
  }
  const Vector target = m.to_model({0.3, 0.8});
  m.decoder.weight(m.decoder.layer_count() - 1).setZero();
  m.decoder.bias(m.decoder.layer_count() - 1) = target;
  Rng rng(4);
  const auto ev = elbo_loss(m, target, random_matrix(rng, 3, 1), random_matrix(rng, 2, 1));
  CHECK(ev.loss == doctest::Approx(0.0).epsilon(1e-12));

  // eps = 0: reconstruction at the posterior mean.
  CvaeModel r = make_cvae(2, 3, {0, 0}, {1, 1}, false, cfg);
  const Matrix x = random_matrix(rng, 2, 1), c = random_matrix(rng, 3, 1);
  const auto e0 = elbo_loss(r, x, c, Matrix::Zero(2, 1), false);
  Matrix enc_in(5, 1);
  enc_in << x, c;
  Matrix dec_in(5, 1);
  dec_in << r.encoder.forward(enc_in).topRows(2), c;
  CHECK(e0.reconstruction == doctest::Approx(0.5 * (r.decoder.forward(dec_in) - x).squaredNorm()).epsilon(1e-12));
}

TEST_CASE("elbo gradients match finite differences") {
  Rng rng(5);
  for (int t = 0; t < 10; ++t) {
    CvaeConfig cfg;
    cfg.hidden = {7, 5};
    cfg.latent_dim = 2;
    cfg.seed = static_cast<std::uint64_t>(t);
    CvaeModel m = make_cvae(3, 4, {0, 0, 0}, {1, 1, 1}, false, cfg);
    const Matrix x = random_matrix(rng, 3, 4), c = random_matrix(rng, 4, 4), e = random_matrix(rng, 2, 4);
    const auto ev = elbo_loss(m, x, c, e);
    auto loss = [&] { return elbo_loss(m, x, c, e, false).loss; };
    CHECK(rel_error(flatten(ev.encoder), numeric_grad(m.encoder, loss)) <= 1e-4);
    CHECK(rel_error(flatten(ev.decoder), numeric_grad(m.decoder, loss)) <= 1e-4);
  }
}

TEST_CASE("cvae training on a corridor") {
  Rng rng(6);
  const Workspace w = world({rect(0, 0, 1, 0.45), rect(0, 0.55, 1, 1)});
  const Vector cond = Vector::LinSpaced(4, 0.0, 1.0);
  const CvaeDataset data = corridor_data(rng, 500, cond);
  CvaeConfig cfg;
  cfg.hidden = {32, 32};
  cfg.epochs = 10;
  TrainingHistory h;
  const CvaeModel m = train_cvae(data, 2, {0, 0}, {1, 1}, false, cfg, &h);
  REQUIRE(h.epoch_loss.size() == 10);
  for (std::size_t i = 1; i < h.epoch_loss.size(); ++i) CHECK(h.epoch_loss[i] < h.epoch_loss[i - 1]);

  const CvaeModel again = train_cvae(data, 2, {0, 0}, {1, 1}, false, cfg);
  CHECK(m == again);

  Rng a(9), b(9);
  const auto draws = sample_cvae(m, cond, 1000, a);
  CHECK(draws == sample_cvae(m, cond, 1000, b));
  CHECK(sample_cvae(m, cond, 0, a).empty());
  int free = 0;
  for (const auto& q : draws) free += point_in_free_space({q[0], q[1]}, w);
  CHECK(free >= 600);
}

TEST_CASE("cvae memorizes a single datum") {
  CvaeDataset d;
  d.conditions.push_back(Vector::Ones(2));
  for (int i = 0; i < 64; ++i) d.add({0.2, 0.7}, 0);
  CvaeConfig cfg;
  cfg.hidden = {16};
  cfg.epochs = 400;
  cfg.learning_rate = 1e-2;
  TrainingHistory h;
  const CvaeModel m = train_cvae(d, 2, {0, 0}, {1, 1}, false, cfg, &h);
  CHECK(h.epoch_loss.back() < 0.01 * h.epoch_loss.front());
  Rng rng(1);
  for (const auto& q : sample_cvae(m, d.conditions[0], 20, rng)) {
    CHECK(std::abs(q[0] - 0.2) < 0.02);
    CHECK(std::abs(q[1] - 0.7) < 0.02);
  }
}

TEST_CASE("cvae errors") {
  CvaeDataset empty;
  CHECK_THROWS_AS(train_cvae(empty, 2, {0, 0}, {1, 1}, false, {}), Error);
  CvaeConfig huge;
  huge.hidden = {8};
  huge.learning_rate = 1e12;
  huge.epochs = 50;
  huge.data_scale = 1e150;
  CvaeDataset d;
  d.conditions.push_back(Vector::Ones(1));
  for (int i = 0; i < 64; ++i) d.add({static_cast<double>(i % 2), 0.5}, 0);
  try {
    train_cvae(d, 2, {0, 0}, {1, 1}, false, huge);
    FAIL("expected divergence");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::TrainingDiverged);
  }
}

TEST_CASE("angular cvae output is wrapped") {
  CvaeDataset d;
  d.conditions.push_back(Vector::Ones(1));
  for (int i = 0; i < 40; ++i) d.add({3.0, -3.0}, 0);
  CvaeConfig cfg;
  cfg.hidden = {8};
  cfg.epochs = 2;
  const CvaeModel m = train_cvae(d, 2, {-M_PI, -M_PI}, {M_PI, M_PI}, true, cfg);
  Rng rng(2);
  for (const auto& q : sample_cvae(m, d.conditions[0], 200, rng)) {
    CHECK(q[0] > -M_PI);
    CHECK(q[0] <= M_PI);
  }
}

TEST_CASE("environment encoding") {
  const Workspace empty = world({});
  const auto e = encode_environment(empty, {0.5, 0.5}, {0.1, 0.9}, 8);
  for (double v : e.occupancy) CHECK(v == 0.0);
  const auto peak = std::max_element(e.start.begin(), e.start.end()) - e.start.begin();
  CHECK(peak / 8 == 4);
  CHECK(peak % 8 == 4);
  CHECK(e.start[static_cast<std::size_t>(peak)] == 1.0);
  CHECK(e == encode_environment(empty, {0.5, 0.5}, {0.1, 0.9}, 8));
  CHECK(e.flatten().size() == 3 * 64);

  const Workspace left = world({rect(0, 0, 0.5, 1)});
  const auto l = encode_environment(left, {0.75, 0.5}, {0.9, 0.9}, 8);
  for (int r = 0; r < 8; ++r) {
    for (int c = 0; c < 8; ++c) CHECK(l.occupancy[static_cast<std::size_t>(r * 8 + c)] == (c < 4 ? 1.0 : 0.0));
  }
  CHECK_THROWS_AS(encode_environment(empty, {1.5, 0.5}, {0.1, 0.1}, 8), Error);
  CHECK_THROWS_AS(encode_environment(empty, {0.5, 0.5}, {0.1, 0.1}, 2), Error);

  const Conditioner cond(left, 8);
  const Vector v = cond.condition({0.75, 0.5}, {0.9, 0.9});
  CHECK(v.size() == Conditioner::dimension(8));
  CHECK(v.head(3 * 64) == l.flatten());
  CHECK(v[3 * 64] == doctest::Approx(0.5));
  CHECK(v[3 * 64 + 3] == doctest::Approx(0.8));
}

TEST_CASE("keypoint net regression") {
  Rng rng(7);
  std::vector<KeypointExample> same;
  for (int i = 0; i < 64; ++i) same.push_back({Vector::Constant(6, 0.3), {0.25, -0.5}});
  KeypointNetConfig cfg;
  cfg.hidden = {16};
  cfg.epochs = 200;
  const KeypointNet a = train_keypoint_net(same, cfg);
  const Vector out = a.mlp.forward(Vector(Vector::Constant(6, 0.3)));
  CHECK(std::abs(out[0] - 0.25) < 1e-2);
  CHECK(std::abs(out[1] + 0.5) < 1e-2);
  CHECK(a == train_keypoint_net(same, cfg));

  std::vector<KeypointExample> clusters;
  for (int i = 0; i < 200; ++i) {
    const bool first = i % 2 == 0;
    Vector x = random_matrix(rng, 6, 1) * 0.05;
    x[0] += first ? 1.0 : -1.0;
    clusters.push_back({x, first ? Point2{0.6, 0.6} : Point2{-0.6, -0.2}});
  }
  cfg.epochs = 100;
  TrainingHistory h;
  const KeypointNet b = train_keypoint_net(clusters, cfg, &h);
  CHECK(h.epoch_loss.back() < h.epoch_loss.front());
  Vector p = Vector::Zero(6);
  p[0] = 1.0;
  CHECK((b.mlp.forward(p) - Vector{{0.6, 0.6}}).norm() < 0.05);
  p[0] = -1.0;
  CHECK((b.mlp.forward(p) - Vector{{-0.6, -0.2}}).norm() < 0.05);
  CHECK_THROWS_AS(train_keypoint_net({}, cfg), Error);
}

TEST_CASE("keypoint prediction loop") {
  const Workspace w = world({});
  const KeypointNet to_target{linear_keypoint_net(4, 0.0, 1.0), 4};
  const auto one = predict_keypoints(to_target, w, {0.1, 0.1}, {0.9, 0.9}, 0.01);
  REQUIRE(one.size() == 2);
  CHECK(distance(one[1], {0.9, 0.9}) < 1e-12);

  const KeypointNet halfway{linear_keypoint_net(4, 0.5, 0.5), 4};
  const auto big = predict_keypoints(halfway, w, {0.1, 0.1}, {0.9, 0.9}, 2.0 * w.bounds.diagonal());
  CHECK(big.size() == 2);
  const auto seq = predict_keypoints(halfway, w, {0.1, 0.1}, {0.9, 0.9}, 0.3);
  REQUIRE(seq.size() == 3);
  CHECK(seq[1].x == doctest::Approx(0.5));
  CHECK(seq[2].x == doctest::Approx(0.7));
  try {
    predict_keypoints(halfway, w, {0.1, 0.1}, {0.9, 0.9}, 1e-9, 5);
    FAIL("expected NoTermination");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::NoTermination);
  }

  const auto ex = unroll_sequence(Conditioner(w, 4), w.bounds, {{0.1, 0.1}, {0.5, 0.5}, {0.9, 0.9}});
  REQUIRE(ex.size() == 2);
  CHECK(ex[0].label.x == doctest::Approx(0.0));
  CHECK(ex[1].label.x == doctest::Approx(0.8));
}
