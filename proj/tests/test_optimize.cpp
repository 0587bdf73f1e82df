#include <doctest.h>

#include <cmath>
#include <cstring>
#include <vector>

#include "softadapt/benchmarks.hpp"
#include "softadapt/optimize.hpp"

using namespace softadapt;

namespace {

Vector v2(double a, double b) { return Vector{{a, b}}; }

// f1 = (x - 1)^2 + y^2, f2 = 2 x^2 + 3 (y - 1)^2; F is minimized at (1/3, 3/4).
ComponentProblem split_quadratic() {
  return {2, 2, [](const Vector& p) {
            const double x = p[0];
            const double y = p[1];
            ComponentEval e;
            e.losses = {(x - 1) * (x - 1) + y * y, 2 * x * x + 3 * (y - 1) * (y - 1)};
            e.gradients = {v2(2 * (x - 1), 2 * y), v2(4 * x, 6 * (y - 1))};
            return e;
          }};
}

bool same_bits(double a, double b) { return std::memcmp(&a, &b, sizeof(double)) == 0; }

}  // namespace

TEST_CASE("combined direction") {
  const std::vector<Vector> g{v2(2, 0), v2(0, 4)};
  CHECK(combined_direction(WeightVector{{0.5, 0.5}}, g) == v2(1, 2));
  CHECK(combined_direction(WeightVector{{0.25, 0.75}}, std::vector<Vector>{v2(4, 0), v2(0, 4)}) == v2(1, 3));

  const std::vector<Vector> three{v2(3, -6), v2(1, 1), v2(2, 2)};
  const Vector h = combined_direction(WeightVector::equal(3), three);
  CHECK(h[0] == doctest::Approx(2.0));
  CHECK(h[1] == doctest::Approx(-1.0));

  CHECK_THROWS_AS(combined_direction(WeightVector{{1.0}}, g), std::invalid_argument);
  CHECK_THROWS_AS(combined_direction(WeightVector{{0.5, 0.5}}, std::vector<Vector>{v2(1, 1), Vector::Ones(3)}),
                  std::invalid_argument);
}

TEST_CASE("Barzilai-Borwein step") {
  StepRule rule;
  rule.kind = StepRule::Kind::kBarzilaiBorwein;
  // (dx.dx) / (dx.dg) = 0.01 / 0.1
  CHECK(bb_step_size(v2(0.1, 0), v2(1, 0), rule) == doctest::Approx(0.1));
  CHECK(bb_step_size(v2(0.1, 0), v2(10, 0), rule) == doctest::Approx(0.01));
  CHECK(bb_step_size(v2(0.1, 0.2), v2(4, 2), rule) == doctest::Approx(0.05 / 0.8));
  CHECK(bb_step_size(v2(1, 0), v2(1e-9, 0), rule) == 0.1);
  CHECK(bb_step_size(v2(1, 0), v2(-1, 0), rule) == 1e-4);
  CHECK(bb_step_size(v2(0, 0), v2(0, 0), rule) == 1e-4);
  CHECK(bb_step_size(v2(1, 0), v2(1e6, 0), rule) == 1e-4);

  rule.bb_variant = StepRule::BbVariant::kShort;
  // (dx.dg) / (dg.dg) = 0.2 / 4
  CHECK(bb_step_size(v2(0.1, 0), v2(2, 0), rule) == doctest::Approx(0.05));
}

TEST_CASE("rule validation") {
  StepRule r;
  r.eta_min = 0.2;
  CHECK_THROWS_AS(r.validate(), std::invalid_argument);
  r = StepRule{};
  r.eta = 0.0;
  CHECK_THROWS_AS(r.validate(), std::invalid_argument);
  r.kind = StepRule::Kind::kBarzilaiBorwein;
  CHECK_NOTHROW(r.validate());
  StopRule s;
  s.max_iters = 0;
  CHECK_THROWS_AS(s.validate(), std::invalid_argument);
}

TEST_CASE("starting at the minimum stops immediately") {
  const auto spec = rosenbrock();
  const DescentTrace t = descend(spec.problem, SoftAdaptConfig{}, StepRule{}, v2(1, 1), StopRule{});
  CHECK(t.termination == Termination::kConverged);
  CHECK(t.iterations() == 0);
  REQUIRE(t.records.size() == 1);
  CHECK(t.records[0].true_loss == 0.0);
}

TEST_CASE("beta zero reproduces plain gradient descent on F / m") {
  const auto spec = rosenbrock();
  SoftAdaptConfig sa;
  sa.beta = 0.0;
  StopRule stop;
  stop.max_iters = 1000;
  stop.tol = 1e-300;
  const DescentTrace t = descend(spec.problem, sa, StepRule{}, spec.default_x0, stop);
  REQUIRE(t.records.size() == 1001);

  // Reference descent on the undivided Rosenbrock gradient.
  double x = -1.0;
  double y = -1.0;
  for (const DescentRecord& r : t.records) {
    CHECK(std::abs(r.x[0] - x) <= 1e-12);
    CHECK(std::abs(r.x[1] - y) <= 1e-12);
    const double gx = -2.0 * (1.0 - x) - 400.0 * x * (y - x * x);
    const double gy = 200.0 * (y - x * x);
    x -= 1e-3 * gx / 2.0;
    y -= 1e-3 * gy / 2.0;
  }
}

TEST_CASE("trace integrity") {
  const auto spec = beale();
  SoftAdaptConfig sa;
  sa.loss_weighted = true;
  StopRule stop;
  stop.max_iters = 500;
  const DescentTrace t = descend(spec.problem, sa, StepRule{}, spec.default_x0, stop);
  CHECK(static_cast<long>(t.records.size()) == t.iterations() + 1);
  for (const DescentRecord& r : t.records) {
    double tl = 0.0;
    double wl = 0.0;
    for (std::size_t k = 0; k < r.losses.size(); ++k) {
      tl += r.losses[k];
      wl += r.weights[k] * r.losses[k];
    }
    CHECK(std::abs(r.true_loss - tl) <= 1e-12);
    CHECK(std::abs(r.weighted_loss - wl) <= 1e-12);
  }
}

TEST_CASE("weighting gradients equals differentiating the weighted loss") {
  const auto spec = beale();
  const Vector x = v2(0.7, -1.3);
  const WeightVector w{{0.2, 0.5, 0.3}};
  const ComponentEval e = spec.problem.eval(x);
  const Vector h = combined_direction(w, e.gradients);
  const double step = 1e-6;
  for (int i = 0; i < 2; ++i) {
    Vector xp = x;
    Vector xm = x;
    xp[i] += step;
    xm[i] -= step;
    const double num =
        (weighted_loss(w, spec.problem.eval(xp).losses) - weighted_loss(w, spec.problem.eval(xm).losses)) / (2 * step);
    CHECK(num == doctest::Approx(h[i]).epsilon(1e-6));
  }
}

TEST_CASE("descent is deterministic") {
  const auto spec = rosenbrock();
  SoftAdaptConfig sa;
  sa.loss_weighted = true;
  StepRule rule;
  rule.kind = StepRule::Kind::kBarzilaiBorwein;
  const auto a = descend(spec.problem, sa, rule, spec.default_x0, StopRule{});
  const auto b = descend(spec.problem, sa, rule, spec.default_x0, StopRule{});
  REQUIRE(a.records.size() == b.records.size());
  for (std::size_t i = 0; i < a.records.size(); ++i) {
    CHECK(same_bits(a.records[i].x[0], b.records[i].x[0]));
    CHECK(same_bits(a.records[i].x[1], b.records[i].x[1]));
    CHECK(same_bits(a.records[i].eta, b.records[i].eta));
    CHECK(same_bits(a.records[i].weighted_loss, b.records[i].weighted_loss));
  }
}

TEST_CASE("split quadratic converges to the minimum of the sum") {
  SoftAdaptConfig sa;
  StepRule rule;
  rule.eta = 0.05;
  StopRule stop;
  stop.criterion = StopRule::Criterion::kGradientNorm;
  stop.tol = 1e-8;
  stop.max_iters = 100000;
  const auto t = descend(split_quadratic(), sa, rule, v2(-2, 3), stop);
  CHECK(t.termination == Termination::kConverged);
  const Vector& x = t.records.back().x;
  CHECK(std::abs(x[0] - 1.0 / 3.0) < 1e-8);
  CHECK(std::abs(x[1] - 0.75) < 1e-8);
}

TEST_CASE("adaptive steps stay within their clamps") {
  const auto spec = rosenbrock();
  for (bool lw : {false, true}) {
    SoftAdaptConfig sa;
    sa.loss_weighted = lw;
    StepRule rule;
    rule.kind = StepRule::Kind::kBarzilaiBorwein;
    const auto t = descend(spec.problem, sa, rule, spec.default_x0, StopRule{});
    CHECK(t.termination == Termination::kConverged);
    CHECK(t.records.front().eta == rule.eta_min);
    for (const auto& r : t.records) {
      CHECK(r.eta >= rule.eta_min);
      CHECK(r.eta <= rule.eta_max);
    }
  }
}

TEST_CASE("iteration cap and divergence") {
  const auto spec = rosenbrock();
  StopRule stop;
  stop.max_iters = 10;
  const auto capped = descend(spec.problem, SoftAdaptConfig{}, StepRule{}, spec.default_x0, stop);
  CHECK(capped.termination == Termination::kMaxIterations);
  CHECK(capped.iterations() == 10);

  StepRule big;
  big.eta = 0.1;
  try {
    descend(spec.problem, SoftAdaptConfig{}, big, spec.default_x0, StopRule{});
    FAIL("expected divergence");
  } catch (const DescentDiverged& e) {
    CHECK(e.trace().termination == Termination::kDiverged);
    CHECK_FALSE(e.trace().records.empty());
    for (const auto& r : e.trace().records) CHECK(std::isfinite(r.true_loss));
  }

  CHECK_THROWS_AS(descend(spec.problem, SoftAdaptConfig{}, StepRule{}, Vector::Zero(3), StopRule{}),
                  std::invalid_argument);
}

TEST_CASE("loss weighting speeds up Rosenbrock at a fixed step") {
  const auto spec = rosenbrock();
  SoftAdaptConfig base;
  base.beta = 0.0;
  SoftAdaptConfig lw;
  lw.loss_weighted = true;
  const auto b = descend(spec.problem, base, StepRule{}, spec.default_x0, StopRule{});
  const auto a = descend(spec.problem, lw, StepRule{}, spec.default_x0, StopRule{});
  REQUIRE(a.termination == Termination::kConverged);
  REQUIRE(b.termination == Termination::kConverged);
  CHECK(a.iterations() < b.iterations());
}
