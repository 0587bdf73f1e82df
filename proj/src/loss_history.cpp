#include <cmath>
#include <stdexcept>
#include <string>

#include "softadapt/error.hpp"
#include "softadapt/softadapt.hpp"

namespace softadapt {

NonFiniteLoss::NonFiniteLoss(std::size_t component, double value)
    : std::invalid_argument("non-finite loss " + std::to_string(value) + " for component " +
                            std::to_string(component)),
      component_(component),
      value_(value) {}

LossHistory::LossHistory(std::size_t n_components, int history_len) {
  if (n_components == 0) {
    throw std::invalid_argument("loss history needs at least one component");
  }
  if (history_len < 2) {
    throw std::invalid_argument("history length must be at least 2, got " + std::to_string(history_len));
  }
  capacity_ = static_cast<std::size_t>(history_len);
  buffers_.resize(n_components);
}

void LossHistory::record(std::span<const double> losses) {
  if (losses.size() != buffers_.size()) {
    throw std::invalid_argument("expected " + std::to_string(buffers_.size()) + " losses, got " +
                                std::to_string(losses.size()));
  }
  for (std::size_t k = 0; k < losses.size(); ++k) {
    if (!std::isfinite(losses[k])) throw NonFiniteLoss(k, losses[k]);
  }
  for (std::size_t k = 0; k < losses.size(); ++k) {
    auto& buf = buffers_[k];
    if (buf.size() == capacity_) buf.pop_front();
    buf.push_back(losses[k]);
  }
  ++count_;
}

std::vector<double> LossHistory::buffer(std::size_t component) const {
  const auto& buf = buffers_.at(component);
  return {buf.begin(), buf.end()};
}

}  // namespace softadapt
