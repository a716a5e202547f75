#include "zopn/estimators.hpp"

#include <cmath>

#include <fmt/format.h>

namespace zopn {

namespace {

double base_value(BlackBoxOracle& oracle, const Vector& x, std::optional<double> cached_fx,
                  std::uint64_t& evals) {
  if (cached_fx) return *cached_fx;
  ++evals;
  return oracle.eval(x, EvalPurpose::Gradient);
}

}  // namespace

bool is_stochastic(const GradEstimator& est) {
  return std::holds_alternative<GaussianSmoothing>(est) || std::holds_alternative<SphericalSmoothing>(est) ||
         std::holds_alternative<DoubleGaussianSmoothing>(est);
}

std::string estimator_name(const GradEstimator& est) {
  return std::visit(overloaded{
                        [](const ForwardDifference&) -> std::string { return "forward"; },
                        [](const CentralDifference&) -> std::string { return "central"; },
                        [](const GaussianSmoothing& e) { return fmt::format("gaussian(N={})", e.samples); },
                        [](const SphericalSmoothing& e) { return fmt::format("spherical(N={})", e.samples); },
                        [](const DoubleGaussianSmoothing& e) {
                          return fmt::format("double_gaussian(outer={})", e.outer_radius);
                        },
                    },
                    est);
}

void validate(const GradEstimator& est) {
  std::visit(overloaded{
                 [](const ForwardDifference&) {},
                 [](const CentralDifference&) {},
                 [](const GaussianSmoothing& e) { require(e.samples >= 1, "gaussian estimator needs N >= 1"); },
                 [](const SphericalSmoothing& e) { require(e.samples >= 1, "spherical estimator needs N >= 1"); },
                 [](const DoubleGaussianSmoothing& e) {
                   require(e.outer_radius > 0.0, "double gaussian outer radius must be positive");
                 },
             },
             est);
}

GradientEstimate estimate_gradient(const GradEstimator& est, BlackBoxOracle& oracle, const Vector& x,
                                   double radius, std::optional<double> cached_fx, RngStream& rng) {
  require(radius > 0.0, "estimate_gradient: radius must be positive");
  require(x.size() == oracle.dimension(), "estimate_gradient: dimension mismatch");
  validate(est);

  const Index n = x.size();
  GradientEstimate out;
  out.g = Vector::Zero(n);
  std::uint64_t& evals = out.new_evals;
  auto eval = [&](const Vector& p) {
    ++evals;
    return oracle.eval(p, EvalPurpose::Gradient);
  };

  std::visit(overloaded{
                 [&](const ForwardDifference&) {
                   const double fx = base_value(oracle, x, cached_fx, evals);
                   Vector p = x;
                   for (Index i = 0; i < n; ++i) {
                     p(i) = x(i) + radius;
                     out.g(i) = (eval(p) - fx) / radius;
                     p(i) = x(i);
                   }
                 },
                 [&](const CentralDifference&) {
                   Vector p = x;
                   for (Index i = 0; i < n; ++i) {
                     p(i) = x(i) + radius;
                     const double plus = eval(p);
                     p(i) = x(i) - radius;
                     const double minus = eval(p);
                     p(i) = x(i);
                     out.g(i) = (plus - minus) / (2.0 * radius);
                   }
                 },
                 [&](const GaussianSmoothing& e) {
                   const double fx = base_value(oracle, x, cached_fx, evals);
                   for (int s = 0; s < e.samples; ++s) {
                     const Vector u = rng.normal_vector(n);
                     out.g += ((eval(x + radius * u) - fx) / radius) * u;
                   }
                   out.g /= static_cast<double>(e.samples);
                 },
                 [&](const SphericalSmoothing& e) {
                   const double fx = base_value(oracle, x, cached_fx, evals);
                   for (int s = 0; s < e.samples; ++s) {
                     const Vector u = rng.unit_sphere(n);
                     out.g += ((eval(x + radius * u) - fx) / radius) * u;
                   }
                   out.g *= static_cast<double>(n) / static_cast<double>(e.samples);
                 },
                 [&](const DoubleGaussianSmoothing& e) {
                   const Vector u1 = rng.normal_vector(n);
                   const Vector u2 = rng.normal_vector(n);
                   const Vector shifted = x + e.outer_radius * u1;
                   const double base = eval(shifted);
                   out.g = ((eval(shifted + radius * u2) - base) / radius) * u2;
                 },
             },
             est);
  return out;
}

double theoretical_kappa_eg(const GradEstimator& est, Index n, double lipschitz_grad, double lipschitz_hess) {
  require(lipschitz_grad >= 0.0 && lipschitz_hess >= 0.0, "kappa_eg: constants must be nonnegative");
  const double root_n = std::sqrt(static_cast<double>(n));
  if (std::holds_alternative<ForwardDifference>(est)) return root_n * lipschitz_grad / 2.0;
  if (std::holds_alternative<CentralDifference>(est)) return root_n * lipschitz_hess / 6.0;
  throw UnsupportedEstimator(estimator_name(est) + " has no deterministic error constant");
}

void validate(const RadiusSchedule& schedule) {
  std::visit(overloaded{
                 [](const ConstantRadius& s) { require(s.radius > 0.0, "constant radius must be positive"); },
                 [](const PowerDecayRadius& s) {
                   require(s.initial > 0.0, "power decay initial radius must be positive");
                   require(s.exponent > 0.5, "power decay exponent must exceed 1/2");
                 },
                 [](const DoublyExponentialRadius& s) {
                   require(s.base > 0.0 && s.base < 1.0, "doubly exponential base must lie in (0,1)");
                   require(s.cap > 0.0 && s.floor > 0.0 && s.floor <= s.cap,
                           "doubly exponential needs 0 < floor <= cap");
                 },
             },
             schedule);
}

double next_radius(const RadiusSchedule& schedule, std::int64_t k) {
  require(k >= 0, "next_radius: iteration index must be nonnegative");
  return std::visit(overloaded{
                        [](const ConstantRadius& s) { return s.radius; },
                        [k](const PowerDecayRadius& s) {
                          return s.initial / std::pow(static_cast<double>(k + 1), s.exponent);
                        },
                        [k](const DoublyExponentialRadius& s) {
                          // 2^k overflows to inf for large k and base^inf is 0.
                          const double decayed = std::pow(s.base, std::ldexp(1.0, static_cast<int>(std::min<std::int64_t>(k, 4096))));
                          return std::max(s.floor, std::min(s.cap, decayed));
                        },
                    },
                    schedule);
}

std::string schedule_name(const RadiusSchedule& schedule) {
  return std::visit(overloaded{
                        [](const ConstantRadius& s) { return fmt::format("constant({})", s.radius); },
                        [](const PowerDecayRadius& s) {
                          return fmt::format("power({}, {})", s.initial, s.exponent);
                        },
                        [](const DoublyExponentialRadius& s) {
                          return fmt::format("doubly_exponential({}, {}, {})", s.base, s.cap, s.floor);
                        },
                    },
                    schedule);
}

}  // namespace zopn
