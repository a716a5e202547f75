#include "zopn/problems.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

#include <Eigen/Eigenvalues>
#include <fmt/format.h>

#include "zopn/rng.hpp"

namespace zopn {

using SparseRows = Eigen::SparseMatrix<double, Eigen::RowMajor>;

Eigen::SparseMatrix<double, Eigen::RowMajor> Dataset::matrix() const {
  std::vector<Eigen::Triplet<double>> triplets;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (const SparseEntry& e : rows[i]) triplets.emplace_back(static_cast<Index>(i), e.index, e.value);
  }
  SparseRows A(samples(), n);
  A.setFromTriplets(triplets.begin(), triplets.end());
  return A;
}

// ---------------------------------------------------------------------------
// LIBSVM text

ParseError::ParseError(std::size_t line, const std::string& what)
    : ConfigError(fmt::format("line {}: {}", line, what)), line_(line) {}

namespace {

bool parse_double(std::string_view s, double& out) {
  if (!s.empty() && s.front() == '+') {
    s.remove_prefix(1);
    if (!s.empty() && s.front() == '-') return false;
  }
  if (s.empty()) return false;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size() && std::isfinite(out);
}

bool parse_index(std::string_view s, long long& out) {
  if (s.empty()) return false;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> tokens;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    const std::size_t start = i;
    while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    if (i > start) tokens.push_back(line.substr(start, i - start));
  }
  return tokens;
}

}  // namespace

Dataset parse_libsvm(std::istream& in) {
  Dataset data;
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line(raw);
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    const auto tokens = split_ws(line);
    if (tokens.empty()) continue;

    double label = 0.0;
    if (!parse_double(tokens[0], label)) throw ParseError(line_no, fmt::format("bad label '{}'", tokens[0]));
    if (label == 1.0) {
      label = 1.0;
    } else if (label == -1.0 || label == 0.0) {
      label = -1.0;
    } else {
      throw ParseError(line_no, fmt::format("unknown label '{}'", tokens[0]));
    }

    std::vector<SparseEntry> row;
    long long previous = 0;
    for (std::size_t t = 1; t < tokens.size(); ++t) {
      const std::string_view tok = tokens[t];
      const auto colon = tok.find(':');
      if (colon == std::string_view::npos) throw ParseError(line_no, fmt::format("malformed pair '{}'", tok));
      long long index = 0;
      double value = 0.0;
      if (!parse_index(tok.substr(0, colon), index)) {
        throw ParseError(line_no, fmt::format("malformed index in '{}'", tok));
      }
      if (index <= 0) throw ParseError(line_no, fmt::format("nonpositive index in '{}'", tok));
      if (index <= previous) throw ParseError(line_no, fmt::format("index {} not increasing", index));
      if (!parse_double(tok.substr(colon + 1), value)) {
        throw ParseError(line_no, fmt::format("non-numeric value in '{}'", tok));
      }
      previous = index;
      row.push_back(SparseEntry{static_cast<Index>(index - 1), value});
      data.n = std::max<Index>(data.n, static_cast<Index>(index));
    }
    data.rows.push_back(std::move(row));
    data.labels.push_back(label);
  }
  return data;
}

Dataset parse_libsvm(std::string_view text) {
  std::istringstream in{std::string(text)};
  return parse_libsvm(in);
}

Dataset load_libsvm(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("cannot open dataset '{}'", path.string()));
  return parse_libsvm(in);
}

std::string serialize_libsvm(const Dataset& data) {
  std::string out;
  for (std::size_t i = 0; i < data.rows.size(); ++i) {
    out += data.labels[i] > 0 ? "+1" : "-1";
    for (const SparseEntry& e : data.rows[i]) out += fmt::format(" {}:{}", e.index + 1, e.value);
    out += '\n';
  }
  return out;
}

Dataset make_synthetic_classification(Index samples, Index features, double density, std::uint64_t seed,
                                      double label_noise) {
  require(samples > 0 && features > 0, "synthetic dataset needs positive sizes");
  require(density > 0.0 && density <= 1.0, "synthetic dataset density must lie in (0,1]");
  RngStream rng(seed);
  const Vector w = rng.normal_vector(features);
  Dataset data;
  data.n = features;
  for (Index i = 0; i < samples; ++i) {
    std::vector<SparseEntry> row;
    double margin = 0.0;
    for (Index j = 0; j < features; ++j) {
      if (rng.uniform() >= density) continue;
      // Rounded so that the text form is short.
      const double v = std::round(rng.normal() * 1e4) / 1e4;
      if (v == 0.0) continue;
      row.push_back(SparseEntry{j, v});
      margin += v * w(j);
    }
    double label = margin >= 0.0 ? 1.0 : -1.0;
    if (rng.uniform() < label_noise) label = -label;
    data.rows.push_back(std::move(row));
    data.labels.push_back(label);
  }
  return data;
}

// ---------------------------------------------------------------------------
// Problem construction

std::string kind_name(const ProblemKind& kind) {
  return std::visit(overloaded{
                        [](const LassoSpec&) { return std::string("lasso"); },
                        [](const LogisticL1Spec&) { return std::string("logistic_l1"); },
                        [](const LogisticL2Spec&) { return std::string("logistic_l2"); },
                        [](const ElasticBinarySpec&) { return std::string("elastic_binary"); },
                        [](const SvmTanhSpec&) { return std::string("svm_tanh"); },
                    },
                    kind);
}

LassoData make_lasso_data(const LassoSpec& spec, std::uint64_t seed) {
  require(spec.n > 0 && spec.p > 0, "lasso: sizes must be positive");
  require(spec.sparsity > 0.0 && spec.sparsity <= 1.0, "lasso: sparsity must lie in (0,1]");
  require(spec.noise_level >= 0.0 && spec.zeta >= 0.0, "lasso: noise and zeta must be nonnegative");
  RngStream rng(seed);
  LassoData out;
  out.A.resize(spec.p, spec.n);
  for (Index j = 0; j < spec.n; ++j) {
    for (Index i = 0; i < spec.p; ++i) out.A(i, j) = rng.normal();
  }
  out.A.colwise().normalize();

  const auto support = static_cast<Index>(std::ceil(spec.sparsity * static_cast<double>(spec.n) - 1e-9));
  std::vector<Index> order(static_cast<std::size_t>(spec.n));
  std::iota(order.begin(), order.end(), Index{0});
  for (Index i = 0; i < support; ++i) {
    const auto span = static_cast<double>(spec.n - i);
    const Index j = i + std::min<Index>(static_cast<Index>(rng.uniform() * span), spec.n - i - 1);
    std::swap(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(j)]);
  }
  out.x_true = Vector::Zero(spec.n);
  for (Index i = 0; i < support; ++i) out.x_true(order[static_cast<std::size_t>(i)]) = rng.normal();

  const Vector clean = out.A * out.x_true;
  const double scale = spec.noise_level * clean.norm() / std::sqrt(static_cast<double>(spec.p));
  out.b = clean + scale * rng.normal_vector(spec.p);
  return out;
}

namespace {

double softplus(double z) { return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }
double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

/// Largest eigenvalue of A'A by power iteration with sparse products.
double gram_norm(const SparseRows& A) {
  const Index n = A.cols();
  Vector v = Vector::Ones(n).normalized();
  double value = 0.0;
  for (int it = 0; it < 10000; ++it) {
    const Vector w = A.transpose() * (A * v);
    const double next = w.norm();
    if (next == 0.0) return 0.0;
    v = w / next;
    if (std::abs(next - value) <= 1e-13 * next) return next;
    value = next;
  }
  return value;
}

/// Loss l(m) on margins m_i = b_i a_i'x with its first two derivatives.
struct MarginLoss {
  double (*value)(double);
  double (*d1)(double);
  double (*d2)(double);
  double curvature_max;  // sup |l''|
  double third_max;      // sup |l'''|
  bool convex;
};

const MarginLoss kLogistic{
    [](double m) { return softplus(-m); },
    [](double m) { return -sigmoid(-m); },
    [](double m) { return sigmoid(m) * sigmoid(-m); },
    0.25,
    std::sqrt(3.0) / 18.0,
    true,
};

const MarginLoss kSigmoidLoss{
    [](double m) { return sigmoid(-m); },
    [](double m) { return -sigmoid(m) * sigmoid(-m); },
    [](double m) {
      const double s = sigmoid(-m);
      return s * (1.0 - s) * (1.0 - 2.0 * s);
    },
    std::sqrt(3.0) / 18.0,
    0.125,
    false,
};

const MarginLoss kTanhLoss{
    [](double m) { return 1.0 - std::tanh(m); },
    [](double m) {
      const double t = std::tanh(m);
      return -(1.0 - t * t);
    },
    [](double m) {
      const double t = std::tanh(m);
      return 2.0 * t * (1.0 - t * t);
    },
    4.0 / (3.0 * std::sqrt(3.0)),
    2.0,
    false,
};

CompositeProblem classification_problem(const std::string& name, const Dataset& data, const MarginLoss& loss,
                                        Regularizer h) {
  require(data.samples() > 0 && data.n > 0, "classification problem needs a nonempty dataset");
  auto A = std::make_shared<const SparseRows>(data.matrix());
  auto b = std::make_shared<const Vector>(Eigen::Map<const Vector>(data.labels.data(), data.samples()));
  const double p = static_cast<double>(data.samples());

  auto value = [A, b, p, &loss](const Vector& x) {
    const Vector m = b->cwiseProduct(*A * x);
    double sum = 0.0;
    for (Index i = 0; i < m.size(); ++i) sum += loss.value(m(i));
    return sum / p;
  };
  auto gradient = [A, b, p, &loss](const Vector& x) -> Vector {
    const Vector m = b->cwiseProduct(*A * x);
    Vector w(m.size());
    for (Index i = 0; i < m.size(); ++i) w(i) = loss.d1(m(i)) * (*b)(i);
    return A->transpose() * w / p;
  };
  auto hessian = [A, b, p, &loss](const Vector& x) -> Matrix {
    const Vector m = b->cwiseProduct(*A * x);
    Vector w(m.size());
    for (Index i = 0; i < m.size(); ++i) w(i) = loss.d2(m(i));
    const Matrix dense = A->toDense();
    return dense.transpose() * w.asDiagonal() * dense / p;
  };

  const double gram = gram_norm(*A);
  double max_row = 0.0;
  for (Index i = 0; i < A->rows(); ++i) max_row = std::max(max_row, A->row(i).norm());

  ProblemConstants constants;
  constants.lipschitz_grad = loss.curvature_max * gram / p;
  constants.lipschitz_hess = loss.third_max * max_row * gram / p;
  constants.convex = loss.convex;

  ProblemTruth truth;
  truth.value = value;
  truth.gradient = gradient;
  truth.hessian = hessian;
  return CompositeProblem{name, BlackBoxOracle(data.n, value), std::move(h), constants, std::move(truth)};
}

}  // namespace

CompositeProblem build_problem(const ProblemSpec& spec) {
  const std::string name = kind_name(spec.kind);
  if (const auto* lasso = std::get_if<LassoSpec>(&spec.kind)) {
    auto data = std::make_shared<const LassoData>(make_lasso_data(*lasso, spec.seed));
    auto value = [data](const Vector& x) { return 0.5 * (data->A * x - data->b).squaredNorm(); };
    ProblemTruth truth;
    truth.value = value;
    truth.gradient = [data](const Vector& x) -> Vector { return data->A.transpose() * (data->A * x - data->b); };
    const Matrix gram = data->A.transpose() * data->A;
    truth.hessian = [gram](const Vector&) -> Matrix { return gram; };

    // Eigenvalues of the smaller Gram matrix; A'A is singular when p < n.
    const Matrix small = lasso->p < lasso->n ? Matrix(data->A * data->A.transpose()) : gram;
    const Vector eig = Eigen::SelfAdjointEigenSolver<Matrix>(small, Eigen::EigenvaluesOnly).eigenvalues();
    ProblemConstants constants;
    constants.lipschitz_grad = eig(eig.size() - 1);
    constants.lipschitz_hess = 0.0;
    constants.strong_convexity = lasso->p >= lasso->n ? std::max(eig(0), 0.0) : 0.0;
    return CompositeProblem{name, BlackBoxOracle(lasso->n, value), Regularizer::l1(lasso->zeta), constants,
                            std::move(truth)};
  }

  if (!spec.dataset) throw ConfigError(fmt::format("problem '{}' needs a dataset", name));
  const Dataset& data = *spec.dataset;
  return std::visit(overloaded{
                        [](const LassoSpec&) -> CompositeProblem { throw std::logic_error("unreachable"); },
                        [&](const LogisticL1Spec& s) {
                          return classification_problem(name, data, kLogistic, Regularizer::l1(s.zeta));
                        },
                        [&](const LogisticL2Spec& s) {
                          return classification_problem(name, data, kLogistic, Regularizer::sq_l2(s.zeta));
                        },
                        [&](const ElasticBinarySpec& s) {
                          return classification_problem(name, data, kSigmoidLoss,
                                                        Regularizer::elastic_net(s.zeta1, s.zeta2));
                        },
                        [&](const SvmTanhSpec& s) {
                          return classification_problem(name, data, kTanhLoss, Regularizer::l1(s.zeta));
                        },
                    },
                    spec.kind);
}

// ---------------------------------------------------------------------------
// Reference optimum

ReferenceSolution reference_optimum(const CompositeProblem& problem, std::optional<Vector> x0,
                                    const ReferenceOptions& options) {
  require(problem.truth && problem.truth->gradient && problem.truth->value,
          "reference_optimum: problem has no analytic gradient");
  require(problem.constants.has_value(), "reference_optimum: problem has no Lipschitz constant");
  const Index n = problem.dimension();
  const auto& grad = problem.truth->gradient;
  const Regularizer& h = problem.h;
  const double L = std::max(problem.constants->lipschitz_grad, 1e-12);
  const double alpha = 1.0 / L;
  const bool accelerate = problem.constants->convex;

  Vector x = x0.value_or(Vector::Zero(n));
  require(x.size() == n, "reference_optimum: x0 has the wrong dimension");
  Vector y = x;
  double theta = 1.0;

  ReferenceSolution best;
  best.x_star = x;
  best.residual = std::numeric_limits<double>::infinity();
  std::int64_t last_improvement = 0;

  std::int64_t it = 0;
  for (; it < options.max_iter; ++it) {
    const Vector x_next = prox(h, y - alpha * grad(y), alpha);
    const double residual = L * (y - x_next).norm();
    if (residual < best.residual) {
      best.residual = residual;
      best.x_star = y;
      last_improvement = it;
    }
    if (residual <= options.tolerance) break;
    if (it - last_improvement > options.stall_window) break;

    if (!accelerate) {
      y = x_next;
    } else if ((y - x_next).dot(x_next - x) > 0.0) {
      theta = 1.0;
      y = x_next;
    } else {
      const double theta_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * theta * theta));
      y = x_next + ((theta - 1.0) / theta_next) * (x_next - x);
      theta = theta_next;
    }
    x = x_next;
  }
  best.iterations = it;
  if (!(best.residual <= options.accept_if_stalled)) {
    throw NumericalFailure(
        fmt::format("reference optimum did not converge: residual {:.3e} after {} iterations", best.residual, it));
  }
  best.F_star = problem.truth->value(best.x_star) + reg_value(h, best.x_star);
  return best;
}

}  // namespace zopn
