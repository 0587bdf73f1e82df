#include "softadapt/sae.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "softadapt/rng.hpp"

namespace softadapt::sae {

namespace {

// Independent generator streams derived from one seed.
constexpr std::uint64_t kInitStream = 1;
constexpr std::uint64_t kShuffleStream = 2;

Matrix logistic(const Matrix& u) { return (1.0 + (-u.array()).exp()).inverse().matrix(); }

Matrix positive_mask(const Matrix& z) { return (z.array() > 0.0).cast<double>().matrix(); }

}  // namespace

Dataset generate_patterns(std::uint64_t seed, int count, int dim, int active) {
  if (dim <= 0 || count < 0) throw std::invalid_argument("pattern count and dimension must be positive");
  if (active <= 0 || active > dim) {
    throw std::invalid_argument("active units must lie in [1, " + std::to_string(dim) + "], got " +
                                std::to_string(active));
  }
  Rng rng(seed);
  Dataset data = Dataset::Zero(count, dim);
  std::vector<int> positions(dim);
  for (int r = 0; r < count; ++r) {
    std::iota(positions.begin(), positions.end(), 0);
    // Partial Fisher-Yates: the first `active` slots are a uniform subset.
    for (int i = 0; i < active; ++i) {
      const auto j = i + static_cast<int>(rng.below(static_cast<std::uint64_t>(dim - i)));
      std::swap(positions[i], positions[j]);
      data(r, positions[i]) = 1.0;
    }
  }
  return data;
}

NetParameters NetParameters::zeros(int input_dim, int hidden_dim) {
  return {Matrix::Zero(hidden_dim, input_dim), Vector::Zero(hidden_dim), Matrix::Zero(input_dim, hidden_dim),
          Vector::Zero(input_dim)};
}

Eigen::Index NetParameters::size() const {
  return encoder_weights.size() + encoder_bias.size() + decoder_weights.size() + decoder_bias.size();
}

double& NetParameters::at(Eigen::Index flat) {
  if (flat < 0 || flat >= size()) throw std::out_of_range("parameter index out of range");
  if (flat < encoder_weights.size()) return encoder_weights.data()[flat];
  flat -= encoder_weights.size();
  if (flat < encoder_bias.size()) return encoder_bias.data()[flat];
  flat -= encoder_bias.size();
  if (flat < decoder_weights.size()) return decoder_weights.data()[flat];
  flat -= decoder_weights.size();
  return decoder_bias.data()[flat];
}

double NetParameters::at(Eigen::Index flat) const { return const_cast<NetParameters&>(*this).at(flat); }

bool NetParameters::all_finite() const {
  return encoder_weights.allFinite() && encoder_bias.allFinite() && decoder_weights.allFinite() &&
         decoder_bias.allFinite();
}

void NetParameters::add_scaled(const NetParameters& other, double scale) {
  encoder_weights += scale * other.encoder_weights;
  encoder_bias += scale * other.encoder_bias;
  decoder_weights += scale * other.decoder_weights;
  decoder_bias += scale * other.decoder_bias;
}

TinyNet TinyNet::initialize(int input_dim, int hidden_dim, std::uint64_t seed) {
  if (input_dim <= 0 || hidden_dim <= 0) throw std::invalid_argument("layer dimensions must be positive");
  Rng rng(seed, kInitStream);
  const double range = std::sqrt(6.0 / (input_dim + hidden_dim));
  TinyNet net{NetParameters::zeros(input_dim, hidden_dim)};
  for (Eigen::Index i = 0; i < net.params.encoder_weights.size(); ++i) {
    net.params.encoder_weights.data()[i] = rng.uniform(-range, range);
  }
  for (Eigen::Index i = 0; i < net.params.decoder_weights.size(); ++i) {
    net.params.decoder_weights.data()[i] = rng.uniform(-range, range);
  }
  return net;
}

ForwardPass forward(const TinyNet& net, const Matrix& batch) {
  const NetParameters& p = net.params;
  if (batch.cols() != p.input_dim()) {
    throw std::invalid_argument("batch has " + std::to_string(batch.cols()) + " columns, net expects " +
                                std::to_string(p.input_dim()));
  }
  if (batch.rows() == 0) throw std::invalid_argument("empty batch");

  ForwardPass out;
  out.pre_activation = (batch * p.encoder_weights.transpose()).rowwise() + p.encoder_bias.transpose();
  out.hidden = out.pre_activation.cwiseMax(0.0);
  out.reconstruction = logistic((out.hidden * p.decoder_weights.transpose()).rowwise() + p.decoder_bias.transpose());

  const auto n = static_cast<double>(batch.rows());
  out.losses.mse = (out.reconstruction - batch).squaredNorm() / (n * static_cast<double>(batch.cols()));
  out.losses.l1_act = out.hidden.cwiseAbs().sum() / n;
  return out;
}

ComponentGradients backward(const TinyNet& net, const Matrix& batch) {
  const ForwardPass fp = forward(net, batch);
  const NetParameters& p = net.params;
  const auto n = static_cast<double>(batch.rows());
  const Matrix mask = positive_mask(fp.pre_activation);

  ComponentGradients g;
  g.losses = fp.losses;

  // d mse / d (decoder pre-activation)
  const Matrix& o = fp.reconstruction;
  const Matrix d_out = ((o - batch).array() * o.array() * (1.0 - o.array())).matrix() *
                       (2.0 / (n * static_cast<double>(batch.cols())));
  g.mse.decoder_weights = d_out.transpose() * fp.hidden;
  g.mse.decoder_bias = d_out.colwise().sum().transpose();
  const Matrix d_hidden = (d_out * p.decoder_weights).cwiseProduct(mask);
  g.mse.encoder_weights = d_hidden.transpose() * batch;
  g.mse.encoder_bias = d_hidden.colwise().sum().transpose();

  // The penalty only sees the encoder.
  const Matrix d_l1 = mask / n;
  g.l1.encoder_weights = d_l1.transpose() * batch;
  g.l1.encoder_bias = d_l1.colwise().sum().transpose();
  g.l1.decoder_weights = Matrix::Zero(p.decoder_weights.rows(), p.decoder_weights.cols());
  g.l1.decoder_bias = Vector::Zero(p.decoder_bias.size());
  return g;
}

void TrainConfig::validate() const {
  if (epochs <= 0) throw std::invalid_argument("epochs must be positive");
  if (batch_size <= 0) throw std::invalid_argument("batch size must be positive");
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    throw std::invalid_argument("learning rate must be positive");
  }
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw std::invalid_argument("lambda must be nonnegative");
  if (mode == Mode::kSoftAdapt) softadapt.validate();
}

TrainTrace train(TinyNet& net, const Dataset& data, const TrainConfig& config) {
  config.validate();
  if (data.rows() == 0) throw std::invalid_argument("empty dataset");
  if (data.cols() != net.params.input_dim()) {
    throw std::invalid_argument("dataset width does not match the net's input dimension");
  }

  Rng shuffler(config.seed, kShuffleStream);
  LossHistory history(2, config.softadapt.history_len);
  std::vector<Eigen::Index> order(static_cast<std::size_t>(data.rows()));
  std::iota(order.begin(), order.end(), Eigen::Index{0});

  TrainTrace trace;
  long step = 0;
  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    shuffler.shuffle(std::span<Eigen::Index>(order));
    double alpha_sum[2] = {0.0, 0.0};
    int steps = 0;

    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(config.batch_size)) {
      const std::size_t stop = std::min(order.size(), start + static_cast<std::size_t>(config.batch_size));
      Matrix batch(static_cast<Eigen::Index>(stop - start), data.cols());
      for (std::size_t r = start; r < stop; ++r) batch.row(static_cast<Eigen::Index>(r - start)) = data.row(order[r]);

      const ComponentGradients g = backward(net, batch);
      const SaeLosses& batch_losses = g.losses;
      if (!std::isfinite(batch_losses.mse) || !std::isfinite(batch_losses.l1_act)) {
        throw TrainingDiverged("non-finite loss at step " + std::to_string(step), std::move(trace));
      }

      WeightVector w{{1.0, config.lambda}};
      if (config.mode == TrainConfig::Mode::kSoftAdapt) {
        const double losses[2] = {batch_losses.mse, batch_losses.l1_act};
        history.record(losses);
        w = current_weights(history, config.softadapt);
      }
      net.params.add_scaled(g.mse, -config.learning_rate * w[0]);
      net.params.add_scaled(g.l1, -config.learning_rate * w[1]);
      if (!net.params.all_finite()) {
        throw TrainingDiverged("non-finite parameters after step " + std::to_string(step), std::move(trace));
      }
      alpha_sum[0] += w[0];
      alpha_sum[1] += w[1];
      ++steps;
      ++step;
    }

    const SaeLosses l = forward(net, data).losses;
    EpochRecord rec;
    rec.epoch = epoch;
    rec.mse = l.mse;
    rec.l1_act = l.l1_act;
    rec.alpha_mse = alpha_sum[0] / steps;
    rec.alpha_l1 = alpha_sum[1] / steps;
    rec.true_loss = l.mse + l.l1_act;
    trace.epochs.push_back(rec);
  }
  return trace;
}

}  // namespace softadapt::sae
