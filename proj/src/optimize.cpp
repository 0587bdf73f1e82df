#include "softadapt/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace softadapt {

namespace {

bool all_finite(const ComponentEval& e) {
  for (double l : e.losses) {
    if (!std::isfinite(l)) return false;
  }
  for (const Vector& g : e.gradients) {
    if (!g.allFinite()) return false;
  }
  return true;
}

}  // namespace

void StepRule::validate() const {
  if (!(eta_min > 0.0) || !(eta_min <= eta_max) || !std::isfinite(eta_max)) {
    throw std::invalid_argument("step rule requires 0 < eta_min <= eta_max");
  }
  if (kind == Kind::kFixed && (!(eta > 0.0) || !std::isfinite(eta))) {
    throw std::invalid_argument("fixed step rule requires eta > 0");
  }
}

void StopRule::validate() const {
  if (max_iters < 1) throw std::invalid_argument("max_iters must be at least 1");
  if (!(tol > 0.0)) throw std::invalid_argument("tolerance must be positive");
}

Vector combined_direction(const WeightVector& weights, std::span<const Vector> gradients) {
  if (weights.size() != gradients.size()) {
    throw std::invalid_argument("got " + std::to_string(gradients.size()) + " gradients for " +
                                std::to_string(weights.size()) + " weights");
  }
  if (gradients.empty()) throw std::invalid_argument("no gradients to combine");
  Vector h = Vector::Zero(gradients.front().size());
  for (std::size_t k = 0; k < gradients.size(); ++k) {
    if (gradients[k].size() != h.size()) {
      throw std::invalid_argument("gradient " + std::to_string(k) + " has dimension " +
                                  std::to_string(gradients[k].size()) + ", expected " + std::to_string(h.size()));
    }
    h += weights[k] * gradients[k];
  }
  return h;
}

double bb_step_size(const Vector& dx, const Vector& dg, const StepRule& rule) {
  const double curvature = dx.dot(dg);
  if (!(curvature > 0.0) || !std::isfinite(curvature)) return rule.eta_min;
  const double step = rule.bb_variant == StepRule::BbVariant::kLong ? dx.squaredNorm() / curvature
                                                                     : curvature / dg.squaredNorm();
  if (!std::isfinite(step)) return rule.eta_min;
  return std::clamp(step, rule.eta_min, rule.eta_max);
}

DescentTrace descend(const ComponentProblem& problem, const SoftAdaptConfig& sa_config, const StepRule& rule,
                     const Vector& x0, const StopRule& stop) {
  sa_config.validate();
  rule.validate();
  stop.validate();
  if (static_cast<std::size_t>(x0.size()) != problem.dim) {
    throw std::invalid_argument("starting point has dimension " + std::to_string(x0.size()) + ", problem has " +
                                std::to_string(problem.dim));
  }

  DescentTrace trace;
  LossHistory history(problem.n_components, sa_config.history_len);
  Vector x = x0;
  Vector x_prev;
  Vector h_prev;

  for (long iter = 0;; ++iter) {
    if (!x.allFinite()) {
      trace.termination = Termination::kDiverged;
      throw DescentDiverged("iterate became non-finite at iteration " + std::to_string(iter), std::move(trace));
    }
    ComponentEval e = problem.eval(x);
    if (e.losses.size() != problem.n_components || e.gradients.size() != problem.n_components) {
      throw std::invalid_argument("problem returned the wrong number of components");
    }
    if (!all_finite(e)) {
      trace.termination = Termination::kDiverged;
      throw DescentDiverged("non-finite loss or gradient at iteration " + std::to_string(iter), std::move(trace));
    }

    history.record(e.losses);
    WeightVector w = current_weights(history, sa_config);
    Vector h = combined_direction(w, e.gradients);

    double eta = rule.eta;
    if (rule.kind == StepRule::Kind::kBarzilaiBorwein) {
      eta = iter == 0 ? rule.eta_min : bb_step_size(x - x_prev, h - h_prev, rule);
    }

    DescentRecord rec;
    rec.iter = iter;
    rec.x = x;
    rec.true_loss = true_loss(e.losses);
    rec.weighted_loss = weighted_loss(w, e.losses);
    rec.direction_norm = h.norm();
    rec.eta = eta;
    rec.losses = std::move(e.losses);
    rec.weights = std::move(w);
    const double tloss = rec.true_loss;
    trace.records.push_back(std::move(rec));

    bool converged = false;
    if (stop.criterion == StopRule::Criterion::kTrueLoss) {
      converged = tloss < stop.tol;
    } else {
      Vector full = Vector::Zero(x.size());
      for (const Vector& g : e.gradients) full += g;
      converged = full.norm() < stop.tol;
    }
    if (converged) {
      trace.termination = Termination::kConverged;
      return trace;
    }
    if (iter >= stop.max_iters) {
      trace.termination = Termination::kMaxIterations;
      return trace;
    }

    x_prev = x;
    x -= eta * h;
    h_prev = std::move(h);
  }
}

}  // namespace softadapt
