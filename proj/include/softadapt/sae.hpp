#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "softadapt/softadapt.hpp"

namespace softadapt::sae {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Rows are samples.
using Dataset = Matrix;

// Binary patterns with exactly `active` ones each at uniformly chosen
// positions. Throws std::invalid_argument unless 0 < active <= dim.
Dataset generate_patterns(std::uint64_t seed, int count, int dim, int active);

// Weights and biases of a one-hidden-layer autoencoder. Also used to carry
// gradients, which have the same shapes.
struct NetParameters {
  Matrix encoder_weights;  // hidden x input
  Vector encoder_bias;     // hidden
  Matrix decoder_weights;  // input x hidden
  Vector decoder_bias;     // input

  static NetParameters zeros(int input_dim, int hidden_dim);

  int input_dim() const { return static_cast<int>(encoder_weights.cols()); }
  int hidden_dim() const { return static_cast<int>(encoder_weights.rows()); }

  // Flat view over all parameters in declaration order, for gradient checks.
  Eigen::Index size() const;
  double& at(Eigen::Index flat);
  double at(Eigen::Index flat) const;

  bool all_finite() const;
  // this += scale * other
  void add_scaled(const NetParameters& other, double scale);
};

// Rectified hidden layer, logistic output layer.
struct TinyNet {
  NetParameters params;

  // Glorot-uniform weights, zero biases.
  static TinyNet initialize(int input_dim, int hidden_dim, std::uint64_t seed);
};

struct SaeLosses {
  double mse = 0.0;     // mean over samples and coordinates
  double l1_act = 0.0;  // per-sample sum of |hidden activation|, averaged over the batch
};

struct ForwardPass {
  Matrix pre_activation;  // samples x hidden
  Matrix hidden;          // samples x hidden
  Matrix reconstruction;  // samples x input
  SaeLosses losses;
};

struct ComponentGradients {
  NetParameters mse;
  NetParameters l1;
  SaeLosses losses;  // of the forward pass the gradients were taken at
};

// Throws std::invalid_argument when the batch width differs from the net's
// input dimension or the batch is empty.
ForwardPass forward(const TinyNet& net, const Matrix& batch);

// One gradient set per loss component. The subgradient of |a| at a = 0 is 0.
ComponentGradients backward(const TinyNet& net, const Matrix& batch);

struct TrainConfig {
  enum class Mode { kSoftAdapt, kFixedLambda };

  int epochs = 30;
  int batch_size = 32;
  double learning_rate = 1e-2;
  std::uint64_t seed = 7;
  Mode mode = Mode::kSoftAdapt;
  SoftAdaptConfig softadapt = default_softadapt();
  double lambda = 1e-4;

  static SoftAdaptConfig default_softadapt() {
    SoftAdaptConfig c;
    c.loss_weighted = true;
    return c;
  }

  void validate() const;
};

struct EpochRecord {
  int epoch = 0;
  double mse = 0.0;
  double l1_act = 0.0;
  // Step weights averaged over the epoch.
  double alpha_mse = 0.0;
  double alpha_l1 = 0.0;
  double true_loss = 0.0;
};

struct TrainTrace {
  std::vector<EpochRecord> epochs;
};

class TrainingDiverged : public std::runtime_error {
 public:
  TrainingDiverged(const std::string& what, TrainTrace partial)
      : std::runtime_error(what), trace_(std::move(partial)) {}

  const TrainTrace& trace() const noexcept { return trace_; }

 private:
  TrainTrace trace_;
};

// Mini-batch gradient descent on alpha_mse * mse + alpha_l1 * l1_act. In
// SoftAdapt mode the weights come from the per-step loss history; in
// fixed-lambda mode they are (1, lambda). Losses are re-evaluated on the
// whole dataset at the end of every epoch.
TrainTrace train(TinyNet& net, const Dataset& data, const TrainConfig& config);

}  // namespace softadapt::sae
