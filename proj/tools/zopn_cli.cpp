#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "zopn/config.hpp"
#include "zopn/curvature.hpp"
#include "zopn/harness.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

struct CommonFlags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out = "out";
  std::optional<std::uint64_t> budget;
  std::string format = "both";
};

void add_common(CLI::App* cmd, CommonFlags& f, bool needs_config) {
  auto* opt = cmd->add_option("--config", f.config, "Experiment config file");
  if (needs_config) opt->required()->check(CLI::ExistingFile);
  cmd->add_option("--seed", f.seed, "Seed (overrides the config seed list)");
  cmd->add_option("--out", f.out, "Output directory");
  cmd->add_option("--budget", f.budget, "Evaluation budget (overrides the config expression)");
  cmd->add_option("--format", f.format, "csv, svg or both")->check(CLI::IsMember({"csv", "svg", "both"}));
}

zopn::ExperimentConfig load(const CommonFlags& f) {
  zopn::ExperimentConfig cfg = zopn::load_experiment(f.config);
  if (f.seed) cfg.seeds = {*f.seed};
  return cfg;
}

void print_summary(const zopn::BenchmarkResult& r) {
  fmt::print("problem {} n={} budget={} F*={}\n", r.problem, r.n, r.budget, zopn::format_number(r.reference.F_star));
  for (const auto& s : r.solvers) {
    double gap = 0.0;
    for (const auto& run : s.runs) gap += run.report.F_final - r.reference.F_star;
    gap /= static_cast<double>(s.runs.size());
    fmt::print("  {:<24} runs={:<3} step={:<12} mean final gap={:.3e} stop={}\n", s.name, s.runs.size(),
               s.step > 0 ? zopn::format_number(s.step) : "-", gap,
               zopn::to_string(s.runs.front().report.stop_reason));
    std::uint64_t violations = 0;
    for (const auto& run : s.runs) violations += run.report.radius_rule_violations;
    if (violations > 0) {
      fmt::print("  {:<24} note: radius exceeded ||d||^3 in {} iterations\n", "", violations);
    }
  }
}

void print_written(const std::vector<std::filesystem::path>& paths) {
  for (const auto& p : paths) fmt::print("wrote {}\n", p.string());
}

int cmd_bench(const CommonFlags& f, const std::optional<std::string>& only) {
  zopn::ExperimentConfig cfg = load(f);
  if (only) {
    std::erase_if(cfg.solvers, [&](const zopn::SolverEntry& e) { return e.name != *only; });
    if (cfg.solvers.empty()) throw zopn::ConfigError(fmt::format("no solver named '{}'", *only));
  }
  zopn::BenchmarkOptions opts;
  opts.budget = f.budget;
  const zopn::BenchmarkResult result = zopn::run_benchmark(cfg, opts);
  print_summary(result);
  print_written(zopn::emit_benchmark(result, f.out, zopn::parse_format(f.format)));
  return 0;
}

int cmd_tune(const CommonFlags& f) {
  zopn::ExperimentConfig cfg = load(f);
  const zopn::CompositeProblem problem = zopn::build_problem(cfg.problem);
  const zopn::Index n = problem.dimension();
  const std::uint64_t budget = f.budget.value_or(zopn::evaluate_budget(cfg.budget_expr, n));
  const zopn::ReferenceSolution ref = zopn::reference_optimum(problem);
  std::string csv = "solver,step,mean_final_F,mean_final_gap\n";
  bool any = false;
  for (const auto& entry : cfg.solvers) {
    const auto* p = std::get_if<zopn::ProxGdConfig>(&entry.config);
    if (p == nullptr) continue;
    any = true;
    zopn::ProxGdConfig tmpl = *p;
    tmpl.max_nf = entry.tune_budget_expr ? zopn::evaluate_budget(*entry.tune_budget_expr, n) : budget;
    if (entry.tune_runs) tmpl.runs = *entry.tune_runs;
    const zopn::StepTuning t = zopn::tune_step(problem, tmpl, zopn::Vector::Zero(n), ref.F_star + cfg.gap_tol);
    fmt::print("{}: best step {} ({} solves)\n", entry.name, zopn::format_number(t.best_step), t.solves);
    for (const auto& [step, F] : t.table) {
      fmt::print("  step {:<12} mean final gap {:.3e}\n", zopn::format_number(step), F - ref.F_star);
      csv += fmt::format("{},{},{},{}\n", entry.name, zopn::format_number(step), zopn::format_number(F),
                         zopn::format_number(F - ref.F_star));
    }
  }
  if (!any) throw zopn::ConfigError("config has no proxgd solver to tune");
  const auto path = std::filesystem::path(f.out) / "tuning.csv";
  zopn::write_text_file(path, csv);
  print_written({path});
  return 0;
}

struct SuperlinearFlags {
  zopn::Index n = 10;
  int runs = 10;
  double target = 1e-6;
};

int cmd_superlinear(const CommonFlags& f, const SuperlinearFlags& s) {
  zopn::SuperlinearOptions opts;
  opts.n = s.n;
  opts.target = s.target;
  opts.budget = f.budget;
  std::vector<std::uint64_t> seeds;
  const std::uint64_t first = f.seed.value_or(0);
  for (int r = 0; r < s.runs; ++r) seeds.push_back(first + static_cast<std::uint64_t>(r));
  const auto runs = zopn::run_superlinear(opts, seeds);
  for (const auto& run : runs) {
    const auto& last = run.rows.back();
    fmt::print("{:<12} seed {:<4} k={:<4} nf={:<6} eps={:.3e} root={:.3e} {}\n", run.solver, run.seed, last.k, last.nf,
               last.eps, last.root, run.reached ? "reached" : "not reached");
  }
  print_written(zopn::emit_superlinear(runs, f.out, zopn::parse_format(f.format)));
  return 0;
}

struct CurvatureFlags {
  zopn::CurvatureBoundInputs in;
  int trials = 0;
};

int cmd_curvature(const CommonFlags& f, CurvatureFlags c) {
  using zopn::SampleBound;
  if (c.in.radius == 0.0) c.in.radius = zopn::smoothing_curvature_radius(c.in);
  std::string csv = "quantity,value\n";
  auto emit = [&](const std::string& name, double value) {
    fmt::print("{:<22} {}\n", name, zopn::format_number(value));
    csv += fmt::format("{},{}\n", name, zopn::format_number(value));
  };
  emit("fd_radius_bound", zopn::fd_radius_bound(c.in));
  emit("smoothing_radius", zopn::smoothing_curvature_radius(c.in));
  for (SampleBound kind : {SampleBound::GaussianError, SampleBound::SphericalError, SampleBound::GaussianCurvature,
                           SampleBound::SphericalCurvature}) {
    emit(std::string(zopn::to_string(kind)), static_cast<double>(zopn::smoothing_sample_bound(kind, c.in)));
  }
  if (c.trials > 0) {
    // Diagonal quadratic with spectrum spread over [mu, L_f].
    const zopn::Index n = c.in.n;
    zopn::Vector diag(n);
    for (zopn::Index i = 0; i < n; ++i) {
      diag(i) = n == 1 ? c.in.mu
                       : c.in.mu + (c.in.lipschitz_grad - c.in.mu) * static_cast<double>(i) / static_cast<double>(n - 1);
    }
    const zopn::Matrix A = diag.asDiagonal();
    const std::uint64_t seed = f.seed.value_or(0);
    const zopn::PairSampling pairs{c.in.s_min, 0.0};
    const double fd_radius = 0.5 * zopn::fd_radius_bound(c.in);
    const double smooth_radius = zopn::smoothing_curvature_radius(c.in);
    emit("rate_forward", zopn::empirical_curvature_rate(zopn::ForwardDifference{}, A, fd_radius, c.trials, seed, pairs));
    const auto ng = static_cast<int>(zopn::smoothing_sample_bound(SampleBound::GaussianCurvature, c.in));
    const auto ns = static_cast<int>(zopn::smoothing_sample_bound(SampleBound::SphericalCurvature, c.in));
    emit("rate_gaussian_1", zopn::empirical_curvature_rate(zopn::GaussianSmoothing{1}, A, smooth_radius, c.trials, seed, pairs));
    emit("rate_gaussian_bound",
         zopn::empirical_curvature_rate(zopn::GaussianSmoothing{ng}, A, smooth_radius, c.trials, seed, pairs));
    emit("rate_spherical_1",
         zopn::empirical_curvature_rate(zopn::SphericalSmoothing{1}, A, smooth_radius, c.trials, seed, pairs));
    emit("rate_spherical_bound",
         zopn::empirical_curvature_rate(zopn::SphericalSmoothing{ns}, A, smooth_radius, c.trials, seed, pairs));
  }
  if (f.format != "svg") {
    const auto path = std::filesystem::path(f.out) / "curvature.csv";
    zopn::write_text_file(path, csv);
    print_written({path});
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Zeroth-order proximal Newton experiments"};
  app.require_subcommand(1);

  CommonFlags solve_flags, bench_flags, tune_flags, super_flags, curv_flags;
  std::optional<std::string> solver_name;
  SuperlinearFlags super;
  CurvatureFlags curv;

  auto* solve = app.add_subcommand("solve", "Run one solver from a config");
  add_common(solve, solve_flags, true);
  solve->add_option("--solver", solver_name, "Solver section label (default: the first)");

  auto* bench = app.add_subcommand("bench", "Run every solver in a config");
  add_common(bench, bench_flags, true);

  auto* tune = app.add_subcommand("tune", "Tune proximal-gradient step sizes");
  add_common(tune, tune_flags, true);

  auto* superlinear = app.add_subcommand("superlinear", "Local convergence protocol on small LASSO");
  add_common(superlinear, super_flags, false);
  superlinear->add_option("--n", super.n, "Dimension")->check(CLI::Range(2, 100000));
  superlinear->add_option("--runs", super.runs, "Number of seeds, starting at --seed")->check(CLI::PositiveNumber);
  superlinear->add_option("--target", super.target, "Stop once ||x - x*|| falls below this");

  auto* curvature = app.add_subcommand("curvature", "Radius and sample-size bounds for curvature conditions");
  add_common(curvature, curv_flags, false);
  curvature->add_option("--n", curv.in.n, "Dimension");
  curvature->add_option("--mu", curv.in.mu, "Strong convexity modulus");
  curvature->add_option("--lf", curv.in.lipschitz_grad, "Gradient Lipschitz constant");
  curvature->add_option("--nu", curv.in.nu, "Failure probability");
  curvature->add_option("--theta", curv.in.theta, "Radius fraction in (0, 1/2)");
  curvature->add_option("--lambda", curv.in.lambda, "Slack in (0, 1)");
  curvature->add_option("--grad-norm", curv.in.grad_norm, "Gradient norm at x_k");
  curvature->add_option("--s-min", curv.in.s_min, "Smaller of the two step norms");
  curvature->add_option("--radius", curv.in.radius, "Sampling radius (default: the curvature radius)");
  curvature->add_option("--w", curv.in.error_budget, "Error budget for the estimator bounds");
  curvature->add_option("--trials", curv.trials, "Monte Carlo trials on a diagonal quadratic (0: skip)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (*solve) {
      if (!solver_name) solver_name = zopn::load_experiment(solve_flags.config).solvers.front().name;
      return cmd_bench(solve_flags, solver_name);
    }
    if (*bench) return cmd_bench(bench_flags, std::nullopt);
    if (*tune) return cmd_tune(tune_flags);
    if (*superlinear) return cmd_superlinear(super_flags, super);
    if (*curvature) return cmd_curvature(curv_flags, curv);
  } catch (const zopn::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const zopn::ContractViolation& e) {
    std::cerr << "invalid input: " << e.what() << '\n';
    return kExitConfig;
  } catch (const zopn::NumericalFailure& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
