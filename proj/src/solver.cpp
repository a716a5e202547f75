#include "zopn/solver.hpp"

#include <cmath>

#include <fmt/format.h>

#include "zopn/rng.hpp"

namespace zopn {

namespace {

constexpr int kMaxBacktracks = 60;

}  // namespace

void validate(const ZopnConfig& cfg) {
  require(cfg.c1 > 0.0 && cfg.c1 < 0.5, "zopn: c1 must lie in (0, 1/2)");
  require(cfg.c2 > 0.0, "zopn: c2 must be positive");
  require(cfg.beta > 0.0 && cfg.beta < 1.0, "zopn: beta must lie in (0, 1)");
  require(cfg.initial_step > 0.0, "zopn: initial step must be positive");
  require(cfg.gamma > 0.0 && cfg.gamma <= 1.0, "zopn: gamma must lie in (0, 1]");
  require(!cfg.tolerance || *cfg.tolerance >= 0.0, "zopn: tolerance must be nonnegative");
  require(cfg.max_inner >= 1, "zopn: max_inner must be >= 1");
  require(cfg.bounds.min_eig > 0.0 && cfg.bounds.max_eig >= cfg.bounds.min_eig, "zopn: invalid spectral bounds");
  if (const auto* lazy = std::get_if<LazyHessian>(&cfg.hessian)) {
    require(lazy->period >= 0, "zopn: lazy Hessian period must be nonnegative");
  }
  validate(cfg.schedule);
  validate(cfg.estimator);
}

std::string_view to_string(StopReason reason) {
  switch (reason) {
    case StopReason::StepTolerance:
      return "step_tolerance";
    case StopReason::BudgetExhausted:
      return "budget_exhausted";
    case StopReason::InnerSmallStep:
      return "inner_small_step";
    case StopReason::TargetReached:
      return "target_reached";
    case StopReason::Diverged:
      return "diverged";
  }
  return "unknown";
}

LineSearchResult line_search(CompositeProblem& problem, const Vector& x, const Vector& d, double phi, double F_x,
                             double radius, const ZopnConfig& cfg) {
  require(x.size() == d.size() && x.size() == problem.dimension(), "line_search: dimension mismatch");
  require(std::isfinite(phi) && std::isfinite(F_x), "line_search: non-finite model decrease or value");
  const double slack = static_cast<double>(x.size()) * cfg.c2 * radius * radius;
  double t = cfg.initial_step;
  for (int i = 0; i <= kMaxBacktracks; ++i) {
    const Vector trial = x + t * d;
    const double f = problem.f.eval(trial, EvalPurpose::LineSearch);
    const double F = f + reg_value(problem.h, trial);
    if (F - F_x <= cfg.c1 * t * phi + slack) return LineSearchResult{t, i + 1, F, f};
    t *= cfg.beta;
  }
  throw NumericalFailure(fmt::format("line search found no acceptable step after {} trials", kMaxBacktracks + 1));
}

double stationarity_bound(double d_norm, double radius, double lipschitz_grad, double kappa_max, double gamma,
                          double kappa_eg) {
  require(d_norm >= 0.0 && radius >= 0.0 && lipschitz_grad >= 0.0 && kappa_max >= 0.0 && kappa_eg >= 0.0,
          "stationarity_bound: inputs must be nonnegative");
  return (lipschitz_grad + (2.0 - gamma) * kappa_max) * d_norm + kappa_eg * radius;
}

SolveReport zopn_solve(CompositeProblem& problem, const ZopnConfig& cfg, const Vector& x0,
                       const IterationObserver& observer) {
  validate(cfg);
  const Index n = problem.dimension();
  require(x0.size() == n, "zopn_solve: x0 has the wrong dimension");
  const std::uint64_t budget = cfg.max_nf.value_or(default_budget(n));
  const auto nf = [&] { return problem.f.counter().total(); };

  int lazy_period = 0;
  if (const auto* lazy = std::get_if<LazyHessian>(&cfg.hessian)) {
    lazy_period = lazy->period > 0 ? lazy->period : static_cast<int>(n);
  }
  const bool use_bfgs = std::holds_alternative<BfgsHessian>(cfg.hessian);
  const double bfgs_threshold = use_bfgs ? std::get<BfgsHessian>(cfg.hessian).curvature_threshold : 0.0;

  SolveReport report;
  Vector x = x0;
  double fx = problem.f.eval(x, EvalPurpose::Misc);
  double hx = reg_value(problem.h, x);
  double F = fx + hx;

  IterationRecord first;
  first.nf_total = nf();
  first.F = F;
  report.trace.push_back(first);
  bool stop_requested = false;
  if (observer) {
    IterationView view{report.trace.back(), x};
    stop_requested = observer(view);
  }

  auto finish = [&](StopReason reason) {
    report.x_final = x;
    report.F_final = F;
    report.stop_reason = reason;
    report.counts = problem.f.counter();
    return report;
  };
  if (stop_requested) return finish(StopReason::TargetReached);

  HessianState H = HessianState::identity(n);
  Vector x_prev, g_prev;
  for (std::int64_t k = 0;; ++k) {
    if (nf() > budget) return finish(StopReason::BudgetExhausted);

    const double radius = next_radius(cfg.schedule, k);
    RngStream rng = RngStream::derive(cfg.seed, cfg.run, static_cast<std::uint64_t>(k));
    const GradientEstimate est = estimate_gradient(cfg.estimator, problem.f, x, radius, fx, rng);
    const Vector& g = est.g;

    if (use_bfgs && k > 0) {
      const Vector s = x - x_prev;
      if (s.squaredNorm() > 0.0) H = bfgs_update(H, s, g - g_prev, bfgs_threshold, cfg.bounds);
    } else if (lazy_period > 0 && k % lazy_period == 0) {
      H = ensure_spd(lazy_hessian(problem.f, x, radius, fx).H, cfg.bounds, &H.dominant_direction());
    }

    const SubproblemResult sub =
        solve_subproblem(SubproblemSpec{x, g, H, problem.h, cfg.gamma, cfg.tolerance.value_or(0.0), cfg.max_inner});
    const Vector& d = sub.step;
    const double d_norm = d.norm();
    if (use_bfgs && radius > d_norm * d_norm * d_norm) ++report.radius_rule_violations;
    const double phi = g.dot(d) + reg_value(problem.h, x + d) - hx;

    IterationRecord rec;
    rec.k = k + 1;
    rec.d_norm = d_norm;
    rec.radius = radius;
    rec.inner_iters = sub.inner_iters;
    rec.inner_status = sub.status;
    rec.phi = phi;

    // Without a tolerance a zero step is a null step: the line search accepts t = t-bar
    // and the next iteration retries with the next radius.
    const bool small_step =
        cfg.tolerance && (sub.status == InnerStatus::SmallStep || d_norm <= *cfg.tolerance);
    if (small_step) {
      x_prev = x;
      x = x + d;
      fx = problem.f.eval(x, EvalPurpose::Misc);
      hx = reg_value(problem.h, x);
      F = fx + hx;
      rec.t = 1.0;
      rec.unit_step = true;
    } else {
      const LineSearchResult ls = line_search(problem, x, d, phi, F, radius, cfg);
      x_prev = x;
      x = x + ls.t * d;
      fx = ls.f;
      hx = reg_value(problem.h, x);
      F = ls.F;
      rec.t = ls.t;
      rec.unit_step = ls.t == cfg.initial_step;
      rec.ls_trials = ls.trials;
    }
    rec.nf_total = nf();
    rec.F = F;
    report.trace.push_back(rec);
    g_prev = g;

    if (observer) {
      IterationView view{report.trace.back(), x, &x_prev, &d, &g, &H, &sub};
      stop_requested = observer(view);
    }
    if (small_step) {
      return finish(sub.status == InnerStatus::SmallStep ? StopReason::InnerSmallStep : StopReason::StepTolerance);
    }
    if (stop_requested) return finish(StopReason::TargetReached);
  }
}

}  // namespace zopn
