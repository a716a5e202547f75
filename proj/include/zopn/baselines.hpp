#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "zopn/estimators.hpp"
#include "zopn/solver.hpp"

namespace zopn {

struct ProxGdConfig {
  GradEstimator estimator = ForwardDifference{};
  double step = 1.0;
  double radius = 5e-10;
  std::optional<std::uint64_t> max_nf;  // unset: 300 (n + 1)
  std::uint64_t seed = 0;
  int runs = 1;  // seeds averaged by tune_step and the harness
  double divergence_factor = 1e12;
};

void validate(const ProxGdConfig& cfg);

/// Zeroth-order proximal gradient: x+ = prox(h, x - step g, step).
///
/// Each iteration spends the estimator's cost plus one Misc call for f(x+),
/// which also serves as the cached base value of the next forward or
/// smoothing estimate. Stops on budget, divergence, or observer request.
SolveReport proxgd_solve(CompositeProblem& problem, const ProxGdConfig& cfg, const Vector& x0, std::uint64_t run = 0,
                         const IterationObserver& observer = {});

struct StepTuning {
  double best_step = 0.0;
  std::vector<std::pair<double, double>> table;  // (step, mean final F), ascending step
  std::size_t solves = 0;
};

/// Steps 2^j for j = -15..10, each run cfg.runs times on fresh copies.
/// Lowest mean final F wins; ties go to the larger step. With a target,
/// runs stop once F drops to it.
StepTuning tune_step(const CompositeProblem& problem, const ProxGdConfig& cfg_template, const Vector& x0,
                     std::optional<double> target = std::nullopt);

std::vector<double> step_grid();

}  // namespace zopn
