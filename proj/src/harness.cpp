#include "zopn/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>

#include <fmt/format.h>

#include "zopn/rng.hpp"

namespace zopn {

OutputFormat parse_format(std::string_view text) {
  if (text == "csv") return OutputFormat::Csv;
  if (text == "svg") return OutputFormat::Svg;
  if (text == "both") return OutputFormat::Both;
  throw ConfigError(fmt::format("unknown output format '{}' (csv|svg|both)", text));
}

std::vector<NfPoint> gap_series(const std::vector<IterationRecord>& trace, double F_star) {
  std::vector<NfPoint> out;
  out.reserve(trace.size());
  for (const IterationRecord& r : trace) out.push_back(NfPoint{r.nf_total, r.F - F_star});
  return out;
}

std::vector<NfPoint> aggregate_traces(const std::vector<std::vector<NfPoint>>& traces) {
  require(!traces.empty(), "aggregate_traces: need at least one trace");
  std::vector<std::uint64_t> grid;
  for (const auto& t : traces) {
    require(!t.empty(), "aggregate_traces: empty trace");
    for (const NfPoint& p : t) grid.push_back(p.nf);
  }
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());

  std::vector<NfPoint> out;
  out.reserve(grid.size());
  std::vector<std::size_t> cursor(traces.size(), 0);
  for (std::uint64_t nf : grid) {
    double sum = 0.0;
    for (std::size_t i = 0; i < traces.size(); ++i) {
      const auto& t = traces[i];
      // Last point with nf <= grid value; several points may share one nf.
      while (cursor[i] + 1 < t.size() && t[cursor[i] + 1].nf <= nf) ++cursor[i];
      sum += t[cursor[i]].value;
    }
    out.push_back(NfPoint{nf, sum / static_cast<double>(traces.size())});
  }
  return out;
}

void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& fn) {
  std::size_t workers = threads > 0 ? static_cast<std::size_t>(threads) : std::thread::hardware_concurrency();
  workers = std::max<std::size_t>(1, std::min(workers, count));
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

const SolverOutcome& BenchmarkResult::solver(const std::string& name) const {
  for (const auto& s : solvers) {
    if (s.name == name) return s;
  }
  throw ContractViolation(fmt::format("no solver named '{}'", name));
}

namespace {

std::string file_stem(const std::string& name) {
  std::string out = name;
  for (char& c : out) {
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '-' && c != '_' && c != '.') c = '_';
  }
  return out;
}

bool solver_is_stochastic(const SolverEntry& e) {
  return std::visit([](const auto& c) { return is_stochastic(c.estimator); }, e.config);
}

ReferenceSolution solve_reference(const CompositeProblem& problem) {
  try {
    return reference_optimum(problem);
  } catch (const NumericalFailure& e) {
    throw NumericalFailure(fmt::format("reference optimum for '{}': {}", problem.name, e.what()));
  }
}

}  // namespace

BenchmarkResult run_benchmark(const ExperimentConfig& cfg, const BenchmarkOptions& options) {
  require(!cfg.solvers.empty(), "run_benchmark: no solvers configured");
  const CompositeProblem base = build_problem(cfg.problem);
  const Index n = base.dimension();

  BenchmarkResult result;
  result.problem = base.name;
  result.n = n;
  result.budget = options.budget.value_or(evaluate_budget(cfg.budget_expr, n));
  result.gap_tol = cfg.gap_tol;
  result.reference = options.reference ? *options.reference : solve_reference(base);
  const double F_star = result.reference.F_star;
  const double gap_tol = cfg.gap_tol;
  const Vector x0 = Vector::Zero(n);

  struct Cell {
    std::size_t solver;
    std::uint64_t seed;
  };
  std::vector<Cell> cells;
  std::vector<ZopnConfig> zopn_cfgs(cfg.solvers.size());
  std::vector<ProxGdConfig> proxgd_cfgs(cfg.solvers.size());

  for (std::size_t s = 0; s < cfg.solvers.size(); ++s) {
    const SolverEntry& entry = cfg.solvers[s];
    SolverOutcome outcome;
    outcome.name = entry.name;
    if (const auto* z = std::get_if<ZopnConfig>(&entry.config)) {
      zopn_cfgs[s] = *z;
      zopn_cfgs[s].max_nf = result.budget;
    } else {
      ProxGdConfig p = std::get<ProxGdConfig>(entry.config);
      p.max_nf = result.budget;
      if (const auto it = options.fixed_steps.find(entry.name); it != options.fixed_steps.end()) {
        p.step = it->second;
      } else if (entry.tune) {
        ProxGdConfig tmpl = p;
        if (entry.tune_budget_expr) tmpl.max_nf = evaluate_budget(*entry.tune_budget_expr, n);
        if (entry.tune_runs) tmpl.runs = *entry.tune_runs;
        outcome.tuning = tune_step(base, tmpl, x0, F_star + gap_tol);
        p.step = outcome.tuning->best_step;
      }
      outcome.step = p.step;
      proxgd_cfgs[s] = p;
    }

    std::vector<std::uint64_t> seeds = cfg.seeds;
    if (!solver_is_stochastic(entry)) {
      seeds = {cfg.seeds.empty() ? 0 : cfg.seeds.front()};
    } else if (seeds.empty()) {
      const int runs = std::holds_alternative<ProxGdConfig>(entry.config) ? proxgd_cfgs[s].runs : 1;
      for (int r = 0; r < runs; ++r) seeds.push_back(static_cast<std::uint64_t>(r));
    }
    for (std::uint64_t seed : seeds) {
      cells.push_back(Cell{s, seed});
      outcome.runs.push_back(RunTrace{seed, {}});
    }
    result.solvers.push_back(std::move(outcome));
  }

  // Slot of each cell inside its solver's run list.
  std::vector<std::size_t> slot(cells.size());
  {
    std::vector<std::size_t> used(cfg.solvers.size(), 0);
    for (std::size_t c = 0; c < cells.size(); ++c) slot[c] = used[cells[c].solver]++;
  }

  const IterationObserver gap_stop = [F_star, gap_tol](IterationView& v) { return v.record.F - F_star < gap_tol; };
  parallel_for(cells.size(), cfg.threads, [&](std::size_t c) {
    const Cell& cell = cells[c];
    CompositeProblem problem = base.fresh_copy();
    SolveReport report;
    if (std::holds_alternative<ZopnConfig>(cfg.solvers[cell.solver].config)) {
      ZopnConfig z = zopn_cfgs[cell.solver];
      z.run = cell.seed;
      report = zopn_solve(problem, z, x0, gap_stop);
    } else {
      report = proxgd_solve(problem, proxgd_cfgs[cell.solver], x0, cell.seed, gap_stop);
    }
    result.solvers[cell.solver].runs[slot[c]].report = std::move(report);
  });

  for (SolverOutcome& outcome : result.solvers) {
    std::vector<std::vector<NfPoint>> series;
    for (const RunTrace& run : outcome.runs) series.push_back(gap_series(run.report.trace, F_star));
    outcome.mean_gap = aggregate_traces(series);
  }
  return result;
}

std::vector<std::filesystem::path> emit_benchmark(const BenchmarkResult& result, const std::filesystem::path& dir,
                                                  OutputFormat format) {
  require(!result.solvers.empty(), "emit_benchmark: nothing to write");
  std::vector<std::filesystem::path> written;
  const bool csv = format != OutputFormat::Svg;
  const bool svg = format != OutputFormat::Csv;
  const double F_star = result.reference.F_star;

  if (csv) {
    std::string summary = "solver,step,runs,mean_final_gap,mean_final_nf\n";
    for (const SolverOutcome& s : result.solvers) {
      const std::string stem = file_stem(s.name);
      double final_gap = 0.0, final_nf = 0.0;
      for (const RunTrace& run : s.runs) {
        const auto path = dir / fmt::format("{}_seed{}.csv", stem, run.seed);
        write_text_file(path, trace_csv(run.report.trace, F_star));
        written.push_back(path);
        final_gap += run.report.trace.back().F - F_star;
        final_nf += static_cast<double>(run.report.trace.back().nf_total);
      }
      std::string mean = "nf,gap\n";
      for (const NfPoint& p : s.mean_gap) mean += fmt::format("{},{}\n", p.nf, format_number(p.value));
      const auto mean_path = dir / fmt::format("{}_mean.csv", stem);
      write_text_file(mean_path, mean);
      written.push_back(mean_path);

      if (s.tuning) {
        std::string table = "step,mean_final_F\n";
        for (const auto& [step, F] : s.tuning->table) table += fmt::format("{},{}\n", format_number(step), format_number(F));
        const auto tune_path = dir / fmt::format("{}_tuning.csv", stem);
        write_text_file(tune_path, table);
        written.push_back(tune_path);
      }
      const double runs = static_cast<double>(s.runs.size());
      summary += fmt::format("{},{},{},{},{}\n", s.name, format_number(s.step), s.runs.size(),
                             format_number(final_gap / runs), format_number(final_nf / runs));
    }
    const auto summary_path = dir / "summary.csv";
    write_text_file(summary_path, summary);
    written.push_back(summary_path);
  }
  if (svg) {
    std::vector<PlotSeries> series;
    for (const SolverOutcome& s : result.solvers) {
      PlotSeries ps{s.name, {}};
      for (const NfPoint& p : s.mean_gap) ps.points.emplace_back(static_cast<double>(p.nf), p.value);
      series.push_back(std::move(ps));
    }
    PlotOptions opts;
    opts.title = fmt::format("{} (n = {})", result.problem, result.n);
    const auto path = dir / "benchmark.svg";
    write_text_file(path, render_svg(series, opts));
    written.push_back(path);
  }
  return written;
}

std::vector<SuperlinearRun> run_superlinear(const SuperlinearOptions& options, const std::vector<std::uint64_t>& seeds) {
  require(options.n >= 2, "run_superlinear: n must be >= 2");
  require(options.target > 0.0, "run_superlinear: target must be positive");
  const std::vector<std::uint64_t> run_seeds = seeds.empty() ? std::vector<std::uint64_t>{0} : seeds;
  const std::vector<std::pair<std::string, HessianStrategy>> solvers = {{"zopn-bfgs", BfgsHessian{}},
                                                                        {"zopn-lazyh", LazyHessian{}}};

  struct Instance {
    CompositeProblem problem;
    Vector x_star;
    Matrix hess_star;
    Vector x0;
  };
  std::vector<std::optional<Instance>> instances(run_seeds.size());
  parallel_for(run_seeds.size(), options.threads, [&](std::size_t i) {
    LassoSpec spec;
    spec.n = options.n;
    spec.p = std::max<Index>(1, static_cast<Index>(std::llround(0.4 * static_cast<double>(options.n))));
    spec.sparsity = options.sparsity;
    spec.noise_level = options.noise_level;
    spec.zeta = options.zeta;
    CompositeProblem problem = build_problem(ProblemSpec{spec, nullptr, run_seeds[i]});
    const ReferenceSolution ref = solve_reference(problem);
    RngStream rng = RngStream::derive(run_seeds[i], 0x5u, 0);
    const Vector x0 = ref.x_star + rng.normal_vector(options.n) / static_cast<double>(options.n);
    const Matrix hess = problem.truth->hessian(ref.x_star);
    instances[i] = Instance{std::move(problem), ref.x_star, hess, x0};
  });

  std::vector<SuperlinearRun> runs(run_seeds.size() * solvers.size());
  parallel_for(runs.size(), options.threads, [&](std::size_t c) {
    const Instance& inst = *instances[c / solvers.size()];
    const auto& [name, strategy] = solvers[c % solvers.size()];
    SuperlinearRun& run = runs[c];
    run.solver = name;
    run.seed = run_seeds[c / solvers.size()];
    run.n = options.n;

    ZopnConfig cfg;
    cfg.c2 = options.c2;
    cfg.schedule = options.schedule;
    cfg.max_inner = options.max_inner;
    cfg.hessian = strategy;
    cfg.max_nf = options.budget;
    cfg.tolerance = std::nullopt;

    const double target = options.target;
    IterationObserver track = [&](IterationView& v) {
      SuperlinearRecord row;
      row.k = v.record.k;
      row.nf = v.record.nf_total;
      row.eps = (v.x - inst.x_star).norm();
      row.root = std::pow(row.eps, 1.0 / static_cast<double>(row.k + 1));
      row.radius = v.record.radius;
      row.unit_step = v.record.unit_step;
      if (v.previous != nullptr && v.hessian != nullptr) {
        const Vector s = v.x - *v.previous;
        const double s_norm = s.norm();
        if (s_norm > 0.0) {
          v.record.dm_ratio = ((v.hessian->matrix() - inst.hess_star) * s).norm() / s_norm;
          row.dm_ratio = v.record.dm_ratio;
        }
      }
      run.rows.push_back(row);
      return row.eps < target;
    };
    CompositeProblem problem = inst.problem.fresh_copy();
    run.report = zopn_solve(problem, cfg, inst.x0, track);
    run.reached = !run.rows.empty() && run.rows.back().eps < target;
  });
  return runs;
}

std::string superlinear_csv(const SuperlinearRun& run) {
  std::string out = "k,nf,eps,root,delta,unit_step,dm_ratio\n";
  for (const SuperlinearRecord& r : run.rows) {
    out += fmt::format("{},{},{},{},{},{},{}\n", r.k, r.nf, format_number(r.eps), format_number(r.root),
                       format_number(r.radius), r.unit_step ? 1 : 0, r.dm_ratio ? format_number(*r.dm_ratio) : "");
  }
  return out;
}

std::vector<std::filesystem::path> emit_superlinear(const std::vector<SuperlinearRun>& runs,
                                                    const std::filesystem::path& dir, OutputFormat format) {
  require(!runs.empty(), "emit_superlinear: nothing to write");
  std::vector<std::filesystem::path> written;
  if (format != OutputFormat::Svg) {
    for (const SuperlinearRun& run : runs) {
      const auto path = dir / fmt::format("superlinear_{}_n{}_seed{}.csv", file_stem(run.solver), run.n, run.seed);
      write_text_file(path, superlinear_csv(run));
      written.push_back(path);
    }
  }
  if (format != OutputFormat::Csv) {
    std::vector<PlotSeries> series;
    for (const SuperlinearRun& run : runs) {
      PlotSeries ps{fmt::format("{} seed {}", run.solver, run.seed), {}};
      for (const SuperlinearRecord& r : run.rows) ps.points.emplace_back(static_cast<double>(r.k), r.eps);
      series.push_back(std::move(ps));
    }
    PlotOptions opts;
    opts.title = fmt::format("||x_k - x*||, LASSO n = {}", runs.front().n);
    opts.x_label = "k";
    opts.y_label = "log10 eps_k";
    const auto path = dir / fmt::format("superlinear_n{}.svg", runs.front().n);
    write_text_file(path, render_svg(series, opts));
    written.push_back(path);
  }
  return written;
}

}  // namespace zopn
