#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "zopn/baselines.hpp"

using namespace zopn;

namespace {

CompositeProblem scaled_square(Index n, double L, Regularizer h = Regularizer::zero()) {
  return CompositeProblem{"q", BlackBoxOracle(n, [L](const Vector& x) { return 0.5 * L * x.squaredNorm(); }), h};
}

}  // namespace

TEST_CASE("one gradient step on a quadratic") {
  CompositeProblem P = scaled_square(2, 1.0);
  ProxGdConfig cfg;
  cfg.step = 1.0;
  cfg.radius = 1e-4;
  cfg.max_nf = 3;  // one iteration: 2 FD calls + 1 misc
  const SolveReport rep = proxgd_solve(P, cfg, Vector::Ones(2));
  REQUIRE(rep.trace.size() >= 2);
  // Recover x_1 from F(x_1) = |x_1|^2 / 2 and the known FD bias.
  CHECK(std::sqrt(2.0 * rep.trace[1].F) <= std::sqrt(2.0) * cfg.radius / 2 * 1.01 + 1e-15);
}

TEST_CASE("pure prox step") {
  CompositeProblem P{"zero", BlackBoxOracle(3, [](const Vector&) { return 0.0; }), Regularizer::l1(0.4)};
  ProxGdConfig cfg;
  cfg.step = 0.5;
  cfg.max_nf = 4;
  const Vector x0 = Eigen::Vector3d(1.0, -0.1, -0.7);
  Vector x1;
  proxgd_solve(P, cfg, x0, 0, [&](IterationView& v) {
    if (v.step) x1 = v.x;
    return v.step != nullptr;
  });
  REQUIRE(x1.size() == 3);
  for (Index i = 0; i < 3; ++i) CHECK(x1(i) == doctest::Approx(oracle::soft(x0(i), 0.2)).epsilon(1e-12));
}

TEST_CASE("fixed point up to estimator error") {
  std::mt19937_64 gen(2);
  for (int trial = 0; trial < 50; ++trial) {
    const Matrix A = oracle::random_spd(4, gen);
    const Vector c = oracle::random_vector(4, gen);
    // Minimizer of (x-c)'A(x-c)/2 with no regularizer is c.
    CompositeProblem P{"q", BlackBoxOracle(4, [A, c](const Vector& x) { return 0.5 * (x - c).dot(A * (x - c)); }),
                       Regularizer::zero()};
    ProxGdConfig cfg;
    cfg.step = 0.05;
    cfg.radius = 1e-4;
    cfg.max_nf = 5;
    Vector x1;
    proxgd_solve(P, cfg, c, 0, [&](IterationView& v) {
      if (v.step) x1 = v.x;
      return v.step != nullptr;
    });
    const double fd_error = 0.5 * cfg.radius * A.diagonal().norm();
    CHECK((x1 - c).norm() <= cfg.step * fd_error * (1 + 1e-6) + 1e-14);
  }
}

TEST_CASE("per-iteration oracle cost") {
  const Index n = 6;
  struct Case {
    GradEstimator est;
    std::uint64_t per_iteration;
  };
  for (const Case& c : {Case{ForwardDifference{}, n + 1}, Case{SphericalSmoothing{1}, 2},
                        Case{GaussianSmoothing{1}, 2}, Case{DoubleGaussianSmoothing{}, 3}}) {
    CompositeProblem P = scaled_square(n, 1.0, Regularizer::l1(0.01));
    ProxGdConfig cfg;
    cfg.estimator = c.est;
    cfg.step = 0.1;
    cfg.max_nf = 200;
    const SolveReport rep = proxgd_solve(P, cfg, Vector::Ones(n));
    for (std::size_t i = 1; i < rep.trace.size(); ++i) {
      CHECK(rep.trace[i].nf_total - rep.trace[i - 1].nf_total == c.per_iteration);
    }
    const std::uint64_t iters = rep.trace.size() - 1;
    CHECK(rep.counts.count(EvalPurpose::Misc) == iters + 1);
    CHECK(rep.counts.count(EvalPurpose::Gradient) == iters * (c.per_iteration - 1));
    CHECK(rep.stop_reason == StopReason::BudgetExhausted);
  }
}

TEST_CASE("divergence is detected") {
  CompositeProblem P = scaled_square(2, 3.0);
  ProxGdConfig cfg;
  cfg.step = 1024;
  const SolveReport rep = proxgd_solve(P, cfg, Vector::Ones(2));
  CHECK(rep.stop_reason == StopReason::Diverged);
}

TEST_CASE("tuning picks the best contraction on the grid") {
  for (double L : {3.0, 0.01, 70.0}) {
    CompositeProblem P = scaled_square(1, L);
    ProxGdConfig cfg;
    cfg.max_nf = 20;
    const StepTuning tuning = tune_step(P, cfg, Vector::Ones(1));
    double expected = 0, best = 1e300;
    for (double t : step_grid()) {
      const double rate = std::abs(1 - t * L);
      if (rate <= best) {
        best = rate;
        expected = t;
      }
    }
    CHECK(tuning.best_step == expected);
    CHECK(tuning.table.size() == 26);
    CHECK(tuning.solves == 26);
  }
}

TEST_CASE("grid size, runs and ties") {
  CHECK(step_grid().size() == 26);
  CHECK(step_grid().front() == std::ldexp(1.0, -15));
  CHECK(step_grid().back() == 1024.0);

  CompositeProblem flat{"flat", BlackBoxOracle(2, [](const Vector&) { return 1.0; }), Regularizer::zero()};
  ProxGdConfig cfg;
  cfg.estimator = GaussianSmoothing{1};
  cfg.runs = 3;
  cfg.max_nf = 6;
  const StepTuning tuning = tune_step(flat, cfg, Vector::Zero(2));
  CHECK(tuning.solves == 26 * 3);
  CHECK(tuning.best_step == 1024.0);
}
