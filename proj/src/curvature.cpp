#include "zopn/curvature.hpp"

#include <cmath>

#include "zopn/oracle.hpp"
#include "zopn/rng.hpp"

namespace zopn {

void validate(const CurvatureBoundInputs& in) {
  require(in.n >= 1, "curvature bounds: n must be >= 1");
  require(in.mu >= 0.0 && in.lipschitz_grad > 0.0, "curvature bounds: need mu >= 0 and L_f > 0");
  require(in.nu > 0.0 && in.nu < 1.0, "curvature bounds: nu must lie in (0,1)");
  require(in.theta > 0.0 && in.theta < 0.5, "curvature bounds: theta must lie in (0,1/2)");
  require(in.lambda > 0.0 && in.lambda < 1.0, "curvature bounds: lambda must lie in (0,1)");
  require(in.grad_norm >= 0.0 && in.radius >= 0.0, "curvature bounds: norms must be nonnegative");
  require(in.s_min > 0.0, "curvature bounds: s_min must be positive");
  require(in.error_budget > 0.0, "curvature bounds: error budget must be positive");
}

std::string_view to_string(SampleBound kind) {
  switch (kind) {
    case SampleBound::GaussianError:
      return "gaussian_error";
    case SampleBound::SphericalError:
      return "spherical_error";
    case SampleBound::GaussianCurvature:
      return "gaussian_curvature";
    case SampleBound::SphericalCurvature:
      return "spherical_curvature";
  }
  return "unknown";
}

double fd_radius_bound(const CurvatureBoundInputs& in) {
  validate(in);
  return in.mu * in.s_min / (std::sqrt(static_cast<double>(in.n)) * in.lipschitz_grad);
}

double smoothing_curvature_radius(const CurvatureBoundInputs& in) { return in.theta * fd_radius_bound(in); }

double sample_bound_value(SampleBound kind, const CurvatureBoundInputs& in) {
  validate(in);
  const double n = static_cast<double>(in.n);
  const double L = in.lipschitz_grad;
  const double g = in.grad_norm;
  const double log_term = std::log((n + 1.0) / in.nu);
  switch (kind) {
    case SampleBound::GaussianError: {
      const double w = in.error_budget;
      const double D = in.radius;
      return 3.0 * n / (in.nu * w * w) * (3.0 * g * g + L * L * D * D / 4.0 * (n + 2.0) * (n + 4.0));
    }
    case SampleBound::SphericalError: {
      const double w = in.error_budget;
      const double D = in.radius;
      return (6.0 * n * n / (w * w) * (g * g / n + L * L * D * D / 4.0) + 2.0 * n / (3.0 * w) * (2.0 * g + L * D)) *
             log_term;
    }
    case SampleBound::GaussianCurvature: {
      require(in.mu > 0.0, "curvature sample bound needs mu > 0");
      const double a = (1.0 - in.lambda) * (0.5 - in.theta);
      const double ratio = g / in.s_min;
      return 9.0 * n / (in.nu * in.mu * in.mu * a * a) * ratio * ratio +
             3.0 * in.theta * in.theta * (n + 2.0) * (n + 4.0) / (4.0 * in.nu * a * a);
    }
    case SampleBound::SphericalCurvature: {
      require(in.mu > 0.0, "curvature sample bound needs mu > 0");
      const double half = 0.5 - in.theta / std::sqrt(n);
      const double one_l = 1.0 - in.lambda;
      const double ratio = g / in.s_min;
      const double bracket = 6.0 * n / (in.mu * in.mu * one_l * one_l * half * half) * ratio * ratio +
                             4.0 * n / (3.0 * in.mu * one_l * half) * ratio +
                             2.0 * in.theta * std::sqrt(n) / (3.0 * one_l * half * half) +
                             3.0 * in.theta * in.theta * n / (2.0 * one_l * one_l * half * half);
      return bracket * log_term;
    }
  }
  return 1.0;
}

std::int64_t smoothing_sample_bound(SampleBound kind, const CurvatureBoundInputs& in) {
  const double value = sample_bound_value(kind, in);
  return std::max<std::int64_t>(1, static_cast<std::int64_t>(std::ceil(value)));
}

namespace {

BlackBoxOracle quadratic_oracle(const Matrix& A) {
  require(A.rows() == A.cols() && A.rows() > 0, "curvature lab: A must be square");
  return BlackBoxOracle(A.rows(), [A](const Vector& x) { return 0.5 * x.dot(A * x); });
}

}  // namespace

double empirical_curvature_rate(const GradEstimator& est, const Matrix& A, double radius, int trials,
                                std::uint64_t seed, const PairSampling& pairs) {
  require(trials >= 1, "empirical_curvature_rate: trials must be >= 1");
  require(pairs.step_norm > 0.0 && pairs.offset_norm >= 0.0, "empirical_curvature_rate: bad pair geometry");
  BlackBoxOracle oracle = quadratic_oracle(A);
  const Index n = A.rows();
  int positive = 0;
  for (int t = 0; t < trials; ++t) {
    const auto run = static_cast<std::uint64_t>(t);
    RngStream geometry = RngStream::derive(seed, run, 0);
    const Vector mid = pairs.offset_norm * geometry.unit_sphere(n);
    const Vector s = pairs.step_norm * geometry.unit_sphere(n);
    const Vector x_prev = mid - 0.5 * s;
    const Vector x_next = mid + 0.5 * s;

    RngStream rng_prev = RngStream::derive(seed, run, 1);
    RngStream rng_next = RngStream::derive(seed, run, 2);
    const Vector g_prev = estimate_gradient(est, oracle, x_prev, radius, std::nullopt, rng_prev).g;
    const Vector g_next = estimate_gradient(est, oracle, x_next, radius, std::nullopt, rng_next).g;
    if ((g_next - g_prev).dot(s) > 0.0) ++positive;
  }
  return static_cast<double>(positive) / trials;
}

double empirical_error_rate(const GradEstimator& est, const Matrix& A, const Vector& x, double radius,
                            double threshold, int trials, std::uint64_t seed) {
  require(trials >= 1, "empirical_error_rate: trials must be >= 1");
  BlackBoxOracle oracle = quadratic_oracle(A);
  require(x.size() == A.rows(), "empirical_error_rate: dimension mismatch");
  const Vector truth = A * x;
  const double fx = 0.5 * x.dot(truth);
  int within = 0;
  for (int t = 0; t < trials; ++t) {
    RngStream rng = RngStream::derive(seed, static_cast<std::uint64_t>(t), 0);
    const Vector g = estimate_gradient(est, oracle, x, radius, fx, rng).g;
    if ((g - truth).norm() <= threshold) ++within;
  }
  return static_cast<double>(within) / trials;
}

}  // namespace zopn
