#include <doctest.h>

#include <cmath>
#include <cstring>

#include "softadapt/rng.hpp"
#include "softadapt/sae.hpp"

using namespace softadapt;
using namespace softadapt::sae;

namespace {

// Loop-by-loop forward pass, independent of the Eigen expressions.
SaeLosses naive_losses(const NetParameters& p, const Matrix& batch) {
  const int n = static_cast<int>(batch.rows());
  const int d = p.input_dim();
  const int h = p.hidden_dim();
  double se = 0.0;
  double l1 = 0.0;
  std::vector<double> a(h);
  for (int r = 0; r < n; ++r) {
    for (int j = 0; j < h; ++j) {
      double z = p.encoder_bias[j];
      for (int i = 0; i < d; ++i) z += p.encoder_weights(j, i) * batch(r, i);
      a[j] = z > 0 ? z : 0.0;
      l1 += std::abs(a[j]);
    }
    for (int i = 0; i < d; ++i) {
      double u = p.decoder_bias[i];
      for (int j = 0; j < h; ++j) u += p.decoder_weights(i, j) * a[j];
      const double o = 1.0 / (1.0 + std::exp(-u));
      se += (o - batch(r, i)) * (o - batch(r, i));
    }
  }
  return {se / (n * d), l1 / n};
}

// Largest relative gap between analytic gradients and central differences
// over `count` parameters chosen from a seeded generator.
std::pair<double, double> gradient_check(const TinyNet& net, const Matrix& batch, int count, std::uint64_t seed) {
  const ComponentGradients g = backward(net, batch);
  Rng rng(seed);
  const double h = 1e-6;
  double worst_mse = 0.0;
  double worst_l1 = 0.0;
  auto rel = [](double a, double b) { return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-7}); };
  for (int c = 0; c < count; ++c) {
    const auto idx = static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(net.params.size())));
    TinyNet plus = net;
    TinyNet minus = net;
    plus.params.at(idx) += h;
    minus.params.at(idx) -= h;
    const SaeLosses lp = forward(plus, batch).losses;
    const SaeLosses lm = forward(minus, batch).losses;
    worst_mse = std::max(worst_mse, rel(g.mse.at(idx), (lp.mse - lm.mse) / (2 * h)));
    worst_l1 = std::max(worst_l1, rel(g.l1.at(idx), (lp.l1_act - lm.l1_act) / (2 * h)));
  }
  return {worst_mse, worst_l1};
}

bool same_trace(const TrainTrace& a, const TrainTrace& b) {
  if (a.epochs.size() != b.epochs.size()) return false;
  for (std::size_t i = 0; i < a.epochs.size(); ++i) {
    const auto& x = a.epochs[i];
    const auto& y = b.epochs[i];
    if (std::memcmp(&x.mse, &y.mse, sizeof(double)) != 0 || std::memcmp(&x.l1_act, &y.l1_act, sizeof(double)) != 0 ||
        std::memcmp(&x.alpha_mse, &y.alpha_mse, sizeof(double)) != 0) {
      return false;
    }
  }
  return true;
}

TrainConfig fixed_lambda(double lambda) {
  TrainConfig c;
  c.mode = TrainConfig::Mode::kFixedLambda;
  c.lambda = lambda;
  return c;
}

TrainTrace run(const TrainConfig& c) {
  const Dataset data = generate_patterns(7, 256, 64, 4);
  TinyNet net = TinyNet::initialize(64, 16, 7);
  return train(net, data, c);
}

}  // namespace

TEST_CASE("pattern generation") {
  const Dataset a = generate_patterns(7, 256, 64, 4);
  CHECK(a.rows() == 256);
  CHECK(a.cols() == 64);
  for (Eigen::Index r = 0; r < a.rows(); ++r) {
    CHECK(a.row(r).sum() == 4.0);
    CHECK(((a.row(r).array() == 0.0) || (a.row(r).array() == 1.0)).all());
  }
  CHECK(a == generate_patterns(7, 256, 64, 4));
  CHECK(a != generate_patterns(8, 256, 64, 4));
  CHECK(generate_patterns(1, 3, 5, 5).sum() == 15.0);
  CHECK_THROWS_AS(generate_patterns(7, 10, 4, 5), std::invalid_argument);
  CHECK_THROWS_AS(generate_patterns(7, 10, 4, 0), std::invalid_argument);
}

TEST_CASE("forward pass") {
  SUBCASE("saturated identity net reconstructs exactly") {
    TinyNet net{NetParameters::zeros(8, 8)};
    net.params.encoder_weights.setIdentity();
    net.params.decoder_weights = 2000.0 * Matrix::Identity(8, 8);
    net.params.decoder_bias.setConstant(-1000.0);
    const Matrix batch = generate_patterns(3, 10, 8, 3);
    const auto fp = forward(net, batch);
    CHECK(fp.losses.mse == 0.0);
    CHECK(fp.losses.l1_act == doctest::Approx(3.0));
  }
  SUBCASE("dead hidden layer has no penalty") {
    TinyNet net = TinyNet::initialize(16, 4, 1);
    net.params.encoder_weights.setZero();
    net.params.encoder_bias.setConstant(-1.0);
    CHECK(forward(net, generate_patterns(2, 5, 16, 2)).losses.l1_act == 0.0);
  }
  SUBCASE("matches a naive re-implementation") {
    for (std::uint64_t seed : {1u, 2u, 3u}) {
      TinyNet net = TinyNet::initialize(64, 16, seed);
      Rng rng(seed, 9);
      for (Eigen::Index i = 0; i < net.params.encoder_bias.size(); ++i) net.params.encoder_bias[i] = rng.uniform(-0.3, 0.3);
      for (Eigen::Index i = 0; i < net.params.decoder_bias.size(); ++i) net.params.decoder_bias[i] = rng.uniform(-0.3, 0.3);
      Matrix batch(32, 64);
      for (Eigen::Index i = 0; i < batch.size(); ++i) batch.data()[i] = rng.uniform();
      const SaeLosses got = forward(net, batch).losses;
      const SaeLosses want = naive_losses(net.params, batch);
      CHECK(std::abs(got.mse - want.mse) < 1e-10);
      CHECK(std::abs(got.l1_act - want.l1_act) < 1e-10);
      CHECK(got.mse >= 0.0);
      CHECK(got.l1_act >= 0.0);
    }
  }
  CHECK_THROWS_AS(forward(TinyNet::initialize(8, 4, 1), Matrix::Zero(2, 9)), std::invalid_argument);
  CHECK_THROWS_AS(forward(TinyNet::initialize(8, 4, 1), Matrix::Zero(0, 8)), std::invalid_argument);
}

TEST_CASE("backward pass") {
  SUBCASE("both components match finite differences") {
    TinyNet net = TinyNet::initialize(64, 16, 5);
    net.params.encoder_bias.setConstant(0.05);
    const Matrix batch = generate_patterns(5, 32, 64, 4);
    const auto [mse_err, l1_err] = gradient_check(net, batch, 20, 99);
    CHECK(mse_err < 1e-4);
    CHECK(l1_err < 1e-4);
  }
  SUBCASE("penalty ignores the decoder") {
    TinyNet net = TinyNet::initialize(64, 16, 5);
    const auto g = backward(net, generate_patterns(5, 32, 64, 4));
    CHECK(g.l1.decoder_weights.isZero(0.0));
    CHECK(g.l1.decoder_bias.isZero(0.0));
    CHECK_FALSE(g.l1.encoder_weights.isZero(0.0));
  }
  SUBCASE("zero batch with zero biases has no penalty gradient") {
    TinyNet net = TinyNet::initialize(64, 16, 5);
    const auto g = backward(net, Matrix::Zero(8, 64));
    CHECK(g.l1.encoder_weights.isZero(0.0));
    CHECK(g.l1.encoder_bias.isZero(0.0));
  }
}

TEST_CASE("parameter flat view") {
  NetParameters p = NetParameters::zeros(3, 2);
  CHECK(p.size() == 6 + 2 + 6 + 3);
  p.at(0) = 1.0;
  p.at(7) = 2.0;
  p.at(16) = 3.0;
  CHECK(p.encoder_weights(0, 0) == 1.0);
  CHECK(p.encoder_bias[1] == 2.0);
  CHECK(p.decoder_bias[2] == 3.0);
  CHECK_THROWS_AS(p.at(17), std::out_of_range);
}

TEST_CASE("training without a penalty lowers the reconstruction error") {
  const Dataset data = generate_patterns(7, 256, 64, 4);
  TinyNet net = TinyNet::initialize(64, 16, 7);
  const double initial = forward(net, data).losses.mse;
  const TrainTrace t = train(net, data, fixed_lambda(0.0));
  REQUIRE(t.epochs.size() == 30);
  CHECK(t.epochs.back().mse < initial);
  for (const auto& e : t.epochs) {
    CHECK(e.alpha_mse == 1.0);
    CHECK(e.alpha_l1 == 0.0);
  }
}

TEST_CASE("softadapt training") {
  const TrainTrace sa = run(TrainConfig{});
  const TrainTrace fixed = run(fixed_lambda(1e-4));
  const TrainTrace none = run(fixed_lambda(0.0));
  REQUIRE(sa.epochs.size() == 30);
  for (const auto& e : sa.epochs) {
    CHECK(e.alpha_mse >= 0.0);
    CHECK(e.alpha_l1 >= 0.0);
    CHECK(e.alpha_mse + e.alpha_l1 <= 1.0 + 1e-15);
    CHECK(e.alpha_mse + e.alpha_l1 >= 1.0 - 1e-6);
    CHECK(e.true_loss == e.mse + e.l1_act);
  }
  CHECK(sa.epochs.back().true_loss <= fixed.epochs.back().true_loss);
  CHECK(sa.epochs.back().l1_act < none.epochs.back().l1_act);
  CHECK(same_trace(sa, run(TrainConfig{})));
}

TEST_CASE("training errors") {
  TrainConfig bad;
  bad.lambda = -1.0;
  bad.mode = TrainConfig::Mode::kFixedLambda;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = TrainConfig{};
  bad.epochs = 0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);

  Dataset data = generate_patterns(7, 64, 64, 4);
  data(3, 5) = std::nan("");
  TinyNet net = TinyNet::initialize(64, 16, 7);
  try {
    train(net, data, TrainConfig{});
    FAIL("expected divergence");
  } catch (const TrainingDiverged& e) {
    CHECK(e.trace().epochs.empty());
  }
}
