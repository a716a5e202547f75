#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string_view>
#include <vector>

#include "zopn/common.hpp"
#include "zopn/estimators.hpp"
#include "zopn/hessian.hpp"
#include "zopn/oracle.hpp"
#include "zopn/subsolver.hpp"

namespace zopn {

struct ZopnConfig {
  double c1 = 1e-4;
  double c2 = 1e-8;
  double beta = 0.5;
  double initial_step = 1.0;  // t-bar
  double gamma = 0.9;
  std::optional<double> tolerance = 0.0;  // stop when ||d_k|| <= tolerance; unset: never
  std::optional<std::uint64_t> max_nf;  // unset: 300 (n + 1)
  int max_inner = 1000;
  RadiusSchedule schedule = ConstantRadius{};
  GradEstimator estimator = ForwardDifference{};
  HessianStrategy hessian = BfgsHessian{};
  SpectralBounds bounds{};
  std::uint64_t seed = 0;
  std::uint64_t run = 0;
};

void validate(const ZopnConfig& cfg);

inline std::uint64_t default_budget(Index n) { return 300u * static_cast<std::uint64_t>(n + 1); }

enum class StopReason : std::uint8_t {
  StepTolerance,
  BudgetExhausted,
  InnerSmallStep,
  TargetReached,  // an observer asked to stop (gap or distance target)
  Diverged,       // baselines only: non-finite or exploding objective
};

std::string_view to_string(StopReason reason);

/// One row per iterate x_k. The step fields describe the iteration that
/// produced x_k from x_{k-1} and are zero for k = 0.
struct IterationRecord {
  std::int64_t k = 0;
  std::uint64_t nf_total = 0;
  double F = 0.0;
  double d_norm = 0.0;
  double t = 0.0;
  double radius = 0.0;
  int inner_iters = 0;
  std::optional<InnerStatus> inner_status;
  bool unit_step = false;
  int ls_trials = 0;
  double phi = 0.0;
  std::optional<double> dm_ratio;
};

struct SolveReport {
  std::vector<IterationRecord> trace;
  Vector x_final;
  double F_final = 0.0;
  StopReason stop_reason = StopReason::BudgetExhausted;
  EvalCounter counts;
  // BFGS runs only: iterations with radius_k > ||d_k||^3.
  std::uint64_t radius_rule_violations = 0;
};

/// What an observer sees after each new iterate. Pointers refer to the
/// iteration that produced x and are null for k = 0.
struct IterationView {
  IterationRecord& record;
  const Vector& x;
  const Vector* previous = nullptr;
  const Vector* step = nullptr;  // full d_{k-1}, before scaling by t
  const Vector* gradient = nullptr;
  const HessianState* hessian = nullptr;
  const SubproblemResult* subproblem = nullptr;
};

/// Returns true to stop the run (reported as TargetReached). May annotate
/// the record, e.g. with a Dennis-More ratio.
using IterationObserver = std::function<bool(IterationView&)>;

struct LineSearchResult {
  double t = 0.0;
  int trials = 0;
  double F = 0.0;  // F(x + t d)
  double f = 0.0;  // f(x + t d)
};

/// Backtracking t = beta^i t-bar until
///   F(x + t d) - F_x <= c1 t phi + n c2 radius^2.
/// One LineSearch oracle call per trial; throws NumericalFailure after 61 trials.
LineSearchResult line_search(CompositeProblem& problem, const Vector& x, const Vector& d, double phi, double F_x,
                             double radius, const ZopnConfig& cfg);

/// (L_f + (2 - gamma) kappa_max) ||d|| + kappa_eg radius.
double stationarity_bound(double d_norm, double radius, double lipschitz_grad, double kappa_max, double gamma,
                          double kappa_eg);

SolveReport zopn_solve(CompositeProblem& problem, const ZopnConfig& cfg, const Vector& x0,
                       const IterationObserver& observer = {});

}  // namespace zopn
