#pragma once

#include <span>
#include <vector>

namespace softadapt {

inline constexpr int kMinFiniteDiffOrder = 1;
inline constexpr int kMaxFiniteDiffOrder = 5;

// Backward-difference stencil for the first derivative at the newest sample,
// unit spacing. coefficients[j] multiplies the sample j steps in the past.
struct CoefficientRow {
  int order = 0;
  std::vector<double> coefficients;
};

// Throws std::invalid_argument unless 1 <= order <= 5.
CoefficientRow backward_coefficients(int order);

// Slope at the newest sample of an oldest-first history. The order is
// clamped to samples.size() - 1. Throws InsufficientHistory for fewer than
// two samples.
double estimate_slope(std::span<const double> samples, int order);

}  // namespace softadapt
