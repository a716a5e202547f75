#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <Eigen/SparseCore>

#include "zopn/common.hpp"
#include "zopn/oracle.hpp"

namespace zopn {

struct SparseEntry {
  Index index;  // 0-based
  double value;
  bool operator==(const SparseEntry&) const = default;
};

/// Binary classification data. Labels are -1 or +1.
struct Dataset {
  std::vector<std::vector<SparseEntry>> rows;
  std::vector<double> labels;
  Index n = 0;

  Index samples() const { return static_cast<Index>(rows.size()); }
  /// Rows a_i as a row-major sparse p x n matrix.
  Eigen::SparseMatrix<double, Eigen::RowMajor> matrix() const;
  bool operator==(const Dataset&) const = default;
};

class ParseError : public ConfigError {
 public:
  ParseError(std::size_t line, const std::string& what);
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

/// LIBSVM text: "label idx:value idx:value ..." per line, 1-based strictly
/// increasing indices, labels in {+1, -1, 1, 0} (0 maps to -1), '#' lines
/// and blank lines ignored. n is the largest index seen.
Dataset parse_libsvm(std::istream& in);
Dataset parse_libsvm(std::string_view text);
Dataset load_libsvm(const std::filesystem::path& path);

/// Canonical text: "+1"/"-1" labels, shortest round-trip values.
std::string serialize_libsvm(const Dataset& data);

/// Planted linear classifier with a few flipped labels and roughly
/// density*n nonzero features per row.
Dataset make_synthetic_classification(Index samples, Index features, double density, std::uint64_t seed,
                                      double label_noise = 0.05);

struct LassoSpec {
  Index n = 500;
  Index p = 200;
  double sparsity = 0.01;
  double noise_level = 1e-4;
  double zeta = 5e-3;
};
struct LogisticL1Spec {
  double zeta = 1e-3;
};
struct LogisticL2Spec {
  double zeta = 1e-3;
};
struct ElasticBinarySpec {
  double zeta1 = 1e-3;
  double zeta2 = 2e-3;
};
struct SvmTanhSpec {
  double zeta = 1e-5;
};

using ProblemKind = std::variant<LassoSpec, LogisticL1Spec, LogisticL2Spec, ElasticBinarySpec, SvmTanhSpec>;

struct ProblemSpec {
  ProblemKind kind = LassoSpec{};
  std::shared_ptr<const Dataset> dataset;
  std::uint64_t seed = 0;
};

std::string kind_name(const ProblemKind& kind);

/// Builds f as a counted oracle plus analytic truth (value, gradient,
/// Hessian) and constants L_f, L_H, mu.
CompositeProblem build_problem(const ProblemSpec& spec);

/// Synthetic LASSO pieces, exposed for tests.
struct LassoData {
  Matrix A;
  Vector b;
  Vector x_true;
};
LassoData make_lasso_data(const LassoSpec& spec, std::uint64_t seed);

struct ReferenceSolution {
  Vector x_star;
  double F_star = 0.0;
  std::int64_t iterations = 0;
  double residual = 0.0;  // ||x - prox(h, x - grad/L, 1/L)|| * L at the returned point
};

struct ReferenceOptions {
  double tolerance = 1e-12;
  std::int64_t max_iter = 1'000'000;
  std::int64_t stall_window = 5000;
  double accept_if_stalled = 1e-6;
};

/// Accelerated proximal gradient with adaptive restart on the true gradient,
/// step 1/L_f. Nonconvex SvmTanh uses plain proximal gradient and yields a
/// stationary point. Throws NumericalFailure when the residual stalls above
/// accept_if_stalled, ContractViolation without truth or constants.
ReferenceSolution reference_optimum(const CompositeProblem& problem, std::optional<Vector> x0 = std::nullopt,
                                    const ReferenceOptions& options = {});

}  // namespace zopn
