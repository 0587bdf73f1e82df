#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "softadapt/optimize.hpp"

namespace softadapt {

struct BenchmarkSpec {
  std::string name;
  ComponentProblem problem;
  Vector known_minimum;
  double minimum_value = 0.0;
  Vector default_x0;
};

// f1 = (1 - x)^2, f2 = 100 (y - x^2)^2. Default start (-1, -1).
BenchmarkSpec rosenbrock();

// The three squared residuals of Beale's function:
// (1.5 - x + xy)^2, (2.25 - x + xy^2)^2, (2.625 - x + xy^3)^2. Default start (1, 1).
BenchmarkSpec beale();

// Throws std::invalid_argument for names other than "rosenbrock" and "beale".
BenchmarkSpec benchmark_by_name(std::string_view name);

std::vector<std::string> benchmark_names();

// Worst relative discrepancy between each component's analytic gradient and
// a central difference with step h, over every component and coordinate.
double check_gradient(const ComponentProblem& problem, const Vector& x, double h = 1e-6);

}  // namespace softadapt
