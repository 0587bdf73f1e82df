#pragma once

#include <cstddef>
#include <cstdint>
#include <deque>
#include <optional>
#include <span>
#include <vector>

namespace softadapt {

struct SoftAdaptConfig {
  double beta = 0.1;
  double epsilon = 1e-8;
  int history_len = 5;
  int fd_order = 4;
  bool normalized = false;
  bool loss_weighted = false;
  // Hold equal weights until history_len losses are stored instead of
  // adapting as soon as two are available.
  bool wait_for_full_history = false;

  // Throws std::invalid_argument on epsilon <= 0, history_len < 2 or an
  // fd_order outside [1, min(history_len - 1, 5)].
  void validate() const;
};

// Per-component ring buffers of the most recent losses.
class LossHistory {
 public:
  LossHistory(std::size_t n_components, int history_len);

  // Appends one loss per component, evicting the oldest entry once full.
  // Throws NonFiniteLoss or std::invalid_argument (size mismatch); the
  // history is left untouched on failure.
  void record(std::span<const double> losses);

  std::size_t n_components() const noexcept { return buffers_.size(); }
  std::size_t capacity() const noexcept { return capacity_; }
  // Entries currently held by every buffer.
  std::size_t size() const noexcept { return buffers_.front().size(); }
  // Total number of record() calls, including evicted steps.
  std::uint64_t count() const noexcept { return count_; }

  // Oldest-first copy of one component's buffer.
  std::vector<double> buffer(std::size_t component) const;

 private:
  std::size_t capacity_;
  std::uint64_t count_ = 0;
  std::vector<std::deque<double>> buffers_;
};

struct SlopeVector {
  std::vector<double> values;
  std::optional<std::vector<double>> normalized_values;
};

struct WeightVector {
  std::vector<double> alphas;

  static WeightVector equal(std::size_t n_components);

  std::size_t size() const noexcept { return alphas.size(); }
  double operator[](std::size_t i) const { return alphas[i]; }
  double sum() const noexcept;
};

// s_i / (sum_j |s_j| + epsilon).
std::vector<double> normalize_slopes(std::span<const double> values, double epsilon);

// Backward-difference slope of every component. Throws InsufficientHistory
// when fewer than two steps are stored.
SlopeVector slopes(const LossHistory& history, const SoftAdaptConfig& config);

// Mean of each component's stored losses.
std::vector<double> average_losses(const LossHistory& history);

// Stabilized softmax of beta * slopes (normalized slopes when
// config.normalized), optionally re-weighted by the averaged losses.
WeightVector compute_weights(const SlopeVector& slopes, std::span<const double> avg_losses,
                             const SoftAdaptConfig& config);

// Weights for the next step: equal weights during warm-up, otherwise
// compute_weights over the history's slopes and averages.
WeightVector current_weights(const LossHistory& history, const SoftAdaptConfig& config);

// sum_i alpha_i l_i
double weighted_loss(const WeightVector& weights, std::span<const double> losses);

// sum_i l_i
double true_loss(std::span<const double> losses);

}  // namespace softadapt
