#include "softadapt/benchmarks.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace softadapt {

namespace {

Vector point(double x, double y) { return Vector{{x, y}}; }

ComponentEval eval_rosenbrock(const Vector& p) {
  const double x = p[0];
  const double y = p[1];
  const double a = 1.0 - x;
  const double b = y - x * x;
  ComponentEval e;
  e.losses = {a * a, 100.0 * b * b};
  e.gradients = {point(-2.0 * a, 0.0), point(-400.0 * x * b, 200.0 * b)};
  return e;
}

ComponentEval eval_beale(const Vector& p) {
  const double x = p[0];
  const double y = p[1];
  constexpr double kConstants[3] = {1.5, 2.25, 2.625};
  ComponentEval e;
  double y_pow = y;  // y^k
  double dy_pow = 1.0;  // k y^(k-1)
  for (int k = 1; k <= 3; ++k) {
    const double r = kConstants[k - 1] - x + x * y_pow;
    e.losses.push_back(r * r);
    e.gradients.push_back(point(2.0 * r * (y_pow - 1.0), 2.0 * r * x * dy_pow));
    dy_pow = (k + 1) * y_pow;
    y_pow *= y;
  }
  return e;
}

}  // namespace

BenchmarkSpec rosenbrock() {
  return {"rosenbrock", ComponentProblem{2, 2, eval_rosenbrock}, point(1.0, 1.0), 0.0, point(-1.0, -1.0)};
}

BenchmarkSpec beale() {
  return {"beale", ComponentProblem{2, 3, eval_beale}, point(3.0, 0.5), 0.0, point(1.0, 1.0)};
}

BenchmarkSpec benchmark_by_name(std::string_view name) {
  if (name == "rosenbrock") return rosenbrock();
  if (name == "beale") return beale();
  throw std::invalid_argument("unknown benchmark '" + std::string(name) + "' (expected rosenbrock or beale)");
}

std::vector<std::string> benchmark_names() { return {"rosenbrock", "beale"}; }

double check_gradient(const ComponentProblem& problem, const Vector& x, double h) {
  const ComponentEval analytic = problem.eval(x);
  double worst = 0.0;
  Vector probe = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    probe[i] = x[i] + h;
    const ComponentEval plus = problem.eval(probe);
    probe[i] = x[i] - h;
    const ComponentEval minus = problem.eval(probe);
    probe[i] = x[i];
    for (std::size_t k = 0; k < problem.n_components; ++k) {
      const double numeric = (plus.losses[k] - minus.losses[k]) / (2.0 * h);
      const double exact = analytic.gradients[k][i];
      const double scale = std::max({std::abs(numeric), std::abs(exact), 1e-8});
      worst = std::max(worst, std::abs(numeric - exact) / scale);
    }
  }
  return worst;
}

}  // namespace softadapt
