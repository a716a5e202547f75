#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "zopn/baselines.hpp"
#include "zopn/config.hpp"
#include "zopn/output.hpp"
#include "zopn/problems.hpp"
#include "zopn/solver.hpp"

namespace zopn {

enum class OutputFormat : std::uint8_t { Csv, Svg, Both };

OutputFormat parse_format(std::string_view text);

struct NfPoint {
  std::uint64_t nf = 0;
  double value = 0.0;
};

/// (nf, F - F_star) per record.
std::vector<NfPoint> gap_series(const std::vector<IterationRecord>& trace, double F_star);

/// Step-interpolated mean over the union of NF breakpoints. Each trace holds
/// its last value past its end and its first value before its start.
std::vector<NfPoint> aggregate_traces(const std::vector<std::vector<NfPoint>>& traces);

/// Runs fn(0), ..., fn(count - 1) on up to `threads` workers (0: hardware).
void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& fn);

struct RunTrace {
  std::uint64_t seed = 0;
  SolveReport report;
};

struct SolverOutcome {
  std::string name;
  std::optional<StepTuning> tuning;
  double step = 0.0;  // proxgd step actually used (0 for zopn)
  std::vector<RunTrace> runs;
  std::vector<NfPoint> mean_gap;
};

struct BenchmarkResult {
  std::string problem;
  Index n = 0;
  std::uint64_t budget = 0;
  double gap_tol = 0.0;
  ReferenceSolution reference;
  std::vector<SolverOutcome> solvers;

  const SolverOutcome& solver(const std::string& name) const;
};

struct BenchmarkOptions {
  std::optional<ReferenceSolution> reference;  // skip the reference solve
  std::map<std::string, double> fixed_steps;   // per proxgd solver, skip tuning
  std::optional<std::uint64_t> budget;         // overrides the config expression
};

/// Builds the problem, computes F*, tunes proxgd steps where asked, and runs
/// every (solver, seed) cell from x0 = 0 with the gap and NF stops.
/// Deterministic solvers run once (first seed, or 0); stochastic proxgd
/// solvers run over the seed list, or seeds 0..runs-1 when it is empty.
BenchmarkResult run_benchmark(const ExperimentConfig& cfg, const BenchmarkOptions& options = {});

/// One CSV per (solver, seed), one aggregate CSV per solver, and an SVG of the
/// mean gaps. Returns the written paths in order.
std::vector<std::filesystem::path> emit_benchmark(const BenchmarkResult& result, const std::filesystem::path& dir,
                                                  OutputFormat format);

struct SuperlinearRecord {
  std::int64_t k = 0;
  std::uint64_t nf = 0;
  double eps = 0.0;   // ||x_k - x*||
  double root = 0.0;  // eps^(1/(k+1))
  double radius = 0.0;
  bool unit_step = false;
  std::optional<double> dm_ratio;
};

struct SuperlinearRun {
  std::string solver;
  std::uint64_t seed = 0;
  Index n = 0;
  bool reached = false;
  SolveReport report;
  std::vector<SuperlinearRecord> rows;
};

struct SuperlinearOptions {
  Index n = 10;
  double sparsity = 0.1;
  double zeta = 5e-3;
  double noise_level = 1e-4;
  double target = 1e-6;
  int max_inner = 10000;
  std::optional<std::uint64_t> budget;
  DoublyExponentialRadius schedule{};
  double c2 = 1.0;
  int threads = 0;
};

/// For each seed: 0.1-sparse LASSO, x* from the reference solver,
/// x0 = x* + u/n, then ZOPN-BFGS and ZOPN-LazyH with the doubly exponential
/// radius and c2 = 1, stopped once ||x_k - x*|| < target. Rows carry the
/// Dennis-More ratio against the exact Hessian.
std::vector<SuperlinearRun> run_superlinear(const SuperlinearOptions& options, const std::vector<std::uint64_t>& seeds);

std::string superlinear_csv(const SuperlinearRun& run);
std::vector<std::filesystem::path> emit_superlinear(const std::vector<SuperlinearRun>& runs,
                                                    const std::filesystem::path& dir, OutputFormat format);

}  // namespace zopn
