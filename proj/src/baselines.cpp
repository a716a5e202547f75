#include "zopn/baselines.hpp"

#include <cmath>
#include <limits>

#include "zopn/rng.hpp"

namespace zopn {

void validate(const ProxGdConfig& cfg) {
  require(cfg.step > 0.0, "proxgd: step must be positive");
  require(cfg.radius > 0.0, "proxgd: radius must be positive");
  require(cfg.runs >= 1, "proxgd: runs must be >= 1");
  require(cfg.divergence_factor > 0.0, "proxgd: divergence factor must be positive");
  validate(cfg.estimator);
}

SolveReport proxgd_solve(CompositeProblem& problem, const ProxGdConfig& cfg, const Vector& x0, std::uint64_t run,
                         const IterationObserver& observer) {
  validate(cfg);
  const Index n = problem.dimension();
  require(x0.size() == n, "proxgd_solve: x0 has the wrong dimension");
  const std::uint64_t budget = cfg.max_nf.value_or(default_budget(n));
  const auto nf = [&] { return problem.f.counter().total(); };

  SolveReport report;
  Vector x = x0;
  double fx = problem.f.eval(x, EvalPurpose::Misc);
  double F = fx + reg_value(problem.h, x);
  const double F0 = F;
  const double blowup = F0 + cfg.divergence_factor * (1.0 + std::abs(F0));

  IterationRecord first;
  first.nf_total = nf();
  first.F = F;
  report.trace.push_back(first);

  auto finish = [&](StopReason reason) {
    report.x_final = x;
    report.F_final = F;
    report.stop_reason = reason;
    report.counts = problem.f.counter();
    return report;
  };
  if (observer) {
    IterationView view{report.trace.back(), x};
    if (observer(view)) return finish(StopReason::TargetReached);
  }

  Vector x_prev;
  for (std::int64_t k = 0;; ++k) {
    if (nf() > budget) return finish(StopReason::BudgetExhausted);
    RngStream rng = RngStream::derive(cfg.seed, run, static_cast<std::uint64_t>(k));
    const GradientEstimate est = estimate_gradient(cfg.estimator, problem.f, x, cfg.radius, fx, rng);

    x_prev = x;
    x = prox(problem.h, x - cfg.step * est.g, cfg.step);
    fx = problem.f.eval(x, EvalPurpose::Misc);
    F = fx + reg_value(problem.h, x);
    const Vector d = x - x_prev;

    IterationRecord rec;
    rec.k = k + 1;
    rec.nf_total = nf();
    rec.F = F;
    rec.d_norm = d.norm();
    rec.t = cfg.step;
    rec.radius = cfg.radius;
    report.trace.push_back(rec);

    if (!std::isfinite(F) || F > blowup) return finish(StopReason::Diverged);
    if (observer) {
      IterationView view{report.trace.back(), x, &x_prev, &d, &est.g};
      if (observer(view)) return finish(StopReason::TargetReached);
    }
  }
}

std::vector<double> step_grid() {
  std::vector<double> grid;
  for (int j = -15; j <= 10; ++j) grid.push_back(std::ldexp(1.0, j));
  return grid;
}

StepTuning tune_step(const CompositeProblem& problem, const ProxGdConfig& cfg_template, const Vector& x0,
                     std::optional<double> target) {
  validate(cfg_template);
  StepTuning out;
  double best = std::numeric_limits<double>::infinity();
  IterationObserver stop_at_target;
  if (target) {
    stop_at_target = [t = *target](IterationView& v) { return v.record.F <= t; };
  }
  for (double step : step_grid()) {
    ProxGdConfig cfg = cfg_template;
    cfg.step = step;
    double total = 0.0;
    for (int r = 0; r < cfg.runs; ++r) {
      CompositeProblem copy = problem.fresh_copy();
      const SolveReport rep = proxgd_solve(copy, cfg, x0, static_cast<std::uint64_t>(r), stop_at_target);
      // Diverged runs rank last rather than poisoning the comparison with NaN.
      total += std::isfinite(rep.F_final) ? rep.F_final : std::numeric_limits<double>::infinity();
      ++out.solves;
    }
    const double mean = total / cfg.runs;
    out.table.emplace_back(step, mean);
    if (mean <= best) {
      best = mean;
      out.best_step = step;
    }
  }
  if (!std::isfinite(best)) out.best_step = out.table.front().first;
  return out;
}

}  // namespace zopn
