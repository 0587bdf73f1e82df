#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "softadapt/error.hpp"
#include "softadapt/finite_diff.hpp"
#include "softadapt/softadapt.hpp"

namespace softadapt {

namespace {

void require_finite(std::span<const double> values, const char* what) {
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i])) {
      throw std::invalid_argument(std::string(what) + "[" + std::to_string(i) + "] is not finite");
    }
  }
}

}  // namespace

void SoftAdaptConfig::validate() const {
  if (!std::isfinite(beta)) throw std::invalid_argument("beta must be finite");
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) {
    throw std::invalid_argument("epsilon must be positive");
  }
  if (history_len < 2) {
    throw std::invalid_argument("history_len must be at least 2, got " + std::to_string(history_len));
  }
  const int max_order = std::min(history_len - 1, kMaxFiniteDiffOrder);
  if (fd_order < kMinFiniteDiffOrder || fd_order > max_order) {
    throw std::invalid_argument("fd_order must lie in [1, " + std::to_string(max_order) + "], got " +
                                std::to_string(fd_order));
  }
}

WeightVector WeightVector::equal(std::size_t n_components) {
  if (n_components == 0) throw std::invalid_argument("weight vector needs at least one component");
  return WeightVector{std::vector<double>(n_components, 1.0 / static_cast<double>(n_components))};
}

double WeightVector::sum() const noexcept { return std::accumulate(alphas.begin(), alphas.end(), 0.0); }

std::vector<double> normalize_slopes(std::span<const double> values, double epsilon) {
  double total = 0.0;
  for (double s : values) total += std::abs(s);
  std::vector<double> out(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) out[i] = values[i] / (total + epsilon);
  return out;
}

SlopeVector slopes(const LossHistory& history, const SoftAdaptConfig& config) {
  if (history.size() < 2) {
    throw InsufficientHistory("slopes need at least 2 recorded steps, have " + std::to_string(history.size()));
  }
  SlopeVector out;
  out.values.reserve(history.n_components());
  for (std::size_t k = 0; k < history.n_components(); ++k) {
    const std::vector<double> buf = history.buffer(k);
    out.values.push_back(estimate_slope(buf, config.fd_order));
  }
  if (config.normalized) out.normalized_values = normalize_slopes(out.values, config.epsilon);
  return out;
}

std::vector<double> average_losses(const LossHistory& history) {
  if (history.size() == 0) throw InsufficientHistory("cannot average an empty loss history");
  std::vector<double> out;
  out.reserve(history.n_components());
  for (std::size_t k = 0; k < history.n_components(); ++k) {
    const std::vector<double> buf = history.buffer(k);
    out.push_back(std::accumulate(buf.begin(), buf.end(), 0.0) / static_cast<double>(buf.size()));
  }
  return out;
}

WeightVector compute_weights(const SlopeVector& slopes, std::span<const double> avg_losses,
                             const SoftAdaptConfig& config) {
  const std::size_t m = slopes.values.size();
  if (m == 0) throw std::invalid_argument("no slopes given");
  if (avg_losses.size() != m) {
    throw std::invalid_argument("expected " + std::to_string(m) + " averaged losses, got " +
                                std::to_string(avg_losses.size()));
  }
  require_finite(slopes.values, "slope");

  std::vector<double> t;
  if (config.normalized) {
    t = slopes.normalized_values ? *slopes.normalized_values : normalize_slopes(slopes.values, config.epsilon);
    if (t.size() != m) throw std::invalid_argument("normalized slope count does not match slope count");
  } else {
    t = slopes.values;
  }

  // Subtracting the largest exponent keeps every term in (0, 1] for either
  // sign of beta, so the denominator is at least 1.
  std::vector<double> z(m);
  for (std::size_t i = 0; i < m; ++i) z[i] = config.beta * t[i];
  const double z_max = *std::max_element(z.begin(), z.end());
  double denom = 0.0;
  for (double& zi : z) {
    zi = std::exp(zi - z_max);
    denom += zi;
  }
  WeightVector w{std::move(z)};
  for (double& a : w.alphas) a /= denom;

  if (config.loss_weighted) {
    require_finite(avg_losses, "averaged loss");
    double scaled = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      if (avg_losses[i] < 0.0) {
        throw std::invalid_argument("loss-weighted variant requires nonnegative losses; component " +
                                    std::to_string(i) + " averages " + std::to_string(avg_losses[i]));
      }
      scaled += avg_losses[i] * w.alphas[i];
    }
    // All losses at zero carry no magnitude information; keep the softmax.
    if (scaled > 0.0) {
      for (std::size_t i = 0; i < m; ++i) w.alphas[i] = avg_losses[i] * w.alphas[i] / (scaled + config.epsilon);
    }
  }
  return w;
}

WeightVector current_weights(const LossHistory& history, const SoftAdaptConfig& config) {
  const std::size_t needed = config.wait_for_full_history ? history.capacity() : 2;
  if (history.size() < needed) return WeightVector::equal(history.n_components());
  return compute_weights(slopes(history, config), average_losses(history), config);
}

double weighted_loss(const WeightVector& weights, std::span<const double> losses) {
  if (weights.size() != losses.size()) {
    throw std::invalid_argument("weight count " + std::to_string(weights.size()) + " does not match loss count " +
                                std::to_string(losses.size()));
  }
  double total = 0.0;
  for (std::size_t i = 0; i < losses.size(); ++i) total += weights[i] * losses[i];
  return total;
}

double true_loss(std::span<const double> losses) {
  if (losses.empty()) throw std::invalid_argument("true loss of an empty loss vector");
  return std::accumulate(losses.begin(), losses.end(), 0.0);
}

}  // namespace softadapt
