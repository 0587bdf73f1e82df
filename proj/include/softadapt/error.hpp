#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace softadapt {

// Raised when a computation needs more recorded steps than are available.
class InsufficientHistory : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A NaN or infinite loss was offered to a LossHistory.
class NonFiniteLoss : public std::invalid_argument {
 public:
  NonFiniteLoss(std::size_t component, double value);

  std::size_t component() const noexcept { return component_; }
  double value() const noexcept { return value_; }

 private:
  std::size_t component_;
  double value_;
};

}  // namespace softadapt
