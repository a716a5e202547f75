#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "zopn/baselines.hpp"
#include "zopn/estimators.hpp"
#include "zopn/problems.hpp"
#include "zopn/solver.hpp"

namespace zopn {

/// Raw `key = value` file split into sections.
///
///   # comment
///   [problem]
///   kind = lasso
///   [solver zopn-fd-bfgs]
///   type = zopn
///
/// Keys before the first header belong to an unnamed section.
struct ConfigSection {
  std::string kind;   // "problem", "experiment", "solver", ...
  std::string label;  // text after the kind in the header, may be empty
  std::size_t line = 0;
  std::map<std::string, std::string> values;
  std::map<std::string, std::size_t> lines;
};

std::vector<ConfigSection> parse_sections(std::string_view text);

/// Integer arithmetic over n: + - * / and parentheses, e.g. "300*(n+1)".
std::uint64_t evaluate_budget(std::string_view expr, Index n);

/// forward | central | gaussian[(N)] | spherical[(N)] | double_gaussian[(outer)]
GradEstimator parse_estimator(std::string_view text);
/// constant(r) | power(r0, s) | doubly_exponential(base, cap, floor) | a bare number
RadiusSchedule parse_schedule(std::string_view text);
/// identity | bfgs | lazy[(period)]
HessianStrategy parse_hessian(std::string_view text);

struct SolverEntry {
  std::string name;
  std::variant<ZopnConfig, ProxGdConfig> config;
  bool tune = false;                            // proxgd step chosen by tune_step
  std::optional<std::string> tune_budget_expr;  // budget for tuning runs, defaults to the run budget
  std::optional<int> tune_runs;                 // seeds per grid point, defaults to runs
};

struct ExperimentConfig {
  ProblemSpec problem;
  std::optional<std::filesystem::path> dataset_path;
  std::vector<SolverEntry> solvers;
  std::string budget_expr = "300*(n+1)";
  double gap_tol = 1e-16;
  std::vector<std::uint64_t> seeds;
  std::filesystem::path output = "out";
  int threads = 0;  // 0: hardware concurrency
};

/// Relative dataset paths are resolved against base_dir.
ExperimentConfig parse_experiment(std::string_view text, const std::filesystem::path& base_dir = ".");
ExperimentConfig load_experiment(const std::filesystem::path& path);

/// Problem dimension implied by the config (loads the dataset if needed).
Index problem_dimension(const ExperimentConfig& cfg);

}  // namespace zopn
