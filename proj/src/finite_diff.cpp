#include "softadapt/finite_diff.hpp"

#include <algorithm>
#include <array>
#include <stdexcept>
#include <string>

#include "softadapt/error.hpp"

namespace softadapt {

namespace {

// Rows solve sum_j c_j (-j)^q / q! = [q == 1] for q = 0..p on the stencil
// {0, -1, ..., -p}.
constexpr std::array<std::array<double, kMaxFiniteDiffOrder + 1>, kMaxFiniteDiffOrder> kRows = {{
    {1.0, -1.0},
    {3.0 / 2.0, -2.0, 1.0 / 2.0},
    {11.0 / 6.0, -3.0, 3.0 / 2.0, -1.0 / 3.0},
    {25.0 / 12.0, -4.0, 3.0, -4.0 / 3.0, 1.0 / 4.0},
    {137.0 / 60.0, -5.0, 5.0, -10.0 / 3.0, 5.0 / 4.0, -1.0 / 5.0},
}};

}  // namespace

CoefficientRow backward_coefficients(int order) {
  if (order < kMinFiniteDiffOrder || order > kMaxFiniteDiffOrder) {
    throw std::invalid_argument("finite-difference order " + std::to_string(order) +
                                " outside supported range [" + std::to_string(kMinFiniteDiffOrder) +
                                ", " + std::to_string(kMaxFiniteDiffOrder) + "]");
  }
  const auto& row = kRows[order - 1];
  return CoefficientRow{order, std::vector<double>(row.begin(), row.begin() + order + 1)};
}

double estimate_slope(std::span<const double> samples, int order) {
  if (samples.size() < 2) {
    throw InsufficientHistory("slope estimate needs at least 2 samples, got " +
                              std::to_string(samples.size()));
  }
  // Orders outside [1, 5] still fail once clamped to the history length.
  const auto available = static_cast<long long>(samples.size() - 1);
  const CoefficientRow row = backward_coefficients(static_cast<int>(std::min<long long>(order, available)));

  double slope = 0.0;
  const std::size_t newest = samples.size() - 1;
  for (std::size_t j = 0; j < row.coefficients.size(); ++j) {
    slope += row.coefficients[j] * samples[newest - j];
  }
  return slope;
}

}  // namespace softadapt
