#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "softadapt/softadapt.hpp"

namespace softadapt {

using Vector = Eigen::VectorXd;

struct ComponentEval {
  std::vector<double> losses;
  std::vector<Vector> gradients;
};

// k scalar losses with analytic gradients over a shared parameter vector.
struct ComponentProblem {
  std::size_t dim = 0;
  std::size_t n_components = 0;
  std::function<ComponentEval(const Vector&)> eval;
};

struct StepRule {
  enum class Kind { kFixed, kBarzilaiBorwein };
  // kLong: (dx.dx)/(dx.dg). kShort: (dx.dg)/(dg.dg).
  enum class BbVariant { kLong, kShort };

  Kind kind = Kind::kFixed;
  double eta = 1e-3;
  double eta_min = 1e-4;
  double eta_max = 1e-1;
  BbVariant bb_variant = BbVariant::kLong;

  void validate() const;
};

struct StopRule {
  enum class Criterion { kTrueLoss, kGradientNorm };

  long max_iters = 200000;
  double tol = 1e-4;
  Criterion criterion = Criterion::kTrueLoss;

  void validate() const;
};

struct DescentRecord {
  long iter = 0;
  Vector x;
  std::vector<double> losses;
  WeightVector weights;
  double eta = 0.0;
  double true_loss = 0.0;
  double weighted_loss = 0.0;
  double direction_norm = 0.0;
};

enum class Termination { kConverged, kMaxIterations, kDiverged };

struct DescentTrace {
  std::vector<DescentRecord> records;
  Termination termination = Termination::kMaxIterations;

  // Steps taken; one less than the number of records.
  long iterations() const noexcept { return static_cast<long>(records.size()) - 1; }
};

class DescentDiverged : public std::runtime_error {
 public:
  DescentDiverged(const std::string& what, DescentTrace partial)
      : std::runtime_error(what), trace_(std::move(partial)) {}

  const DescentTrace& trace() const noexcept { return trace_; }

 private:
  DescentTrace trace_;
};

// h = sum_k alpha_k grad_k
Vector combined_direction(const WeightVector& weights, std::span<const Vector> gradients);

// Clamped Barzilai-Borwein step; eta_min whenever the curvature estimate is
// non-positive or non-finite.
double bb_step_size(const Vector& dx, const Vector& dg, const StepRule& rule);

// Gradient descent along the SoftAdapt-weighted direction. The weights are
// refreshed from the loss history every iteration; stopping uses the true
// (unweighted) loss or the norm of its gradient. Throws DescentDiverged with
// the records gathered so far on a non-finite iterate, loss or gradient.
DescentTrace descend(const ComponentProblem& problem, const SoftAdaptConfig& sa_config, const StepRule& rule,
                     const Vector& x0, const StopRule& stop);

}  // namespace softadapt
