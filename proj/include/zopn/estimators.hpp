#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>

#include "zopn/common.hpp"
#include "zopn/oracle.hpp"
#include "zopn/rng.hpp"

namespace zopn {

// ---------------------------------------------------------------------------
// Gradient estimators

struct ForwardDifference {};
struct CentralDifference {};
/// Average of `samples` Gaussian directional differences.
struct GaussianSmoothing {
  int samples = 1;
};
/// Average of `samples` sphere directional differences, scaled by n.
struct SphericalSmoothing {
  int samples = 1;
};
/// Two-radius Gaussian estimator; the inner radius is the call's radius.
struct DoubleGaussianSmoothing {
  double outer_radius = 5e-7;
};

using GradEstimator =
    std::variant<ForwardDifference, CentralDifference, GaussianSmoothing, SphericalSmoothing, DoubleGaussianSmoothing>;

bool is_stochastic(const GradEstimator& est);
std::string estimator_name(const GradEstimator& est);
void validate(const GradEstimator& est);

struct GradientEstimate {
  Vector g;
  std::uint64_t new_evals = 0;
};

/// Zeroth-order gradient estimate at x with sampling radius `radius`.
///
/// All oracle calls are tagged EvalPurpose::Gradient. If `cached_fx` is given
/// it must equal f(x); the one-sided estimators then skip re-evaluating the
/// base point, so Forward costs n calls, Gaussian/Spherical cost N calls,
/// Central always costs 2n and DoubleGaussian always costs 2.
GradientEstimate estimate_gradient(const GradEstimator& est, BlackBoxOracle& oracle, const Vector& x,
                                   double radius, std::optional<double> cached_fx, RngStream& rng);

/// The smoothing estimators only satisfy probabilistic error bounds.
class UnsupportedEstimator : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// kappa_eg in ||g - grad f|| <= kappa_eg * radius.
///
/// Forward: sqrt(n) L_f / 2. Central: sqrt(n) L_H / 6; that bound multiplies
/// radius^2, so treating it as a first-order constant needs radius <= 1.
double theoretical_kappa_eg(const GradEstimator& est, Index n, double lipschitz_grad, double lipschitz_hess);

// ---------------------------------------------------------------------------
// Sampling-radius schedules

struct ConstantRadius {
  double radius = 5e-10;
};
/// radius_k = initial / (k+1)^exponent, exponent > 1/2.
struct PowerDecayRadius {
  double initial = 1.0;
  double exponent = 1.0;
};
/// radius_k = max(floor, min(cap, base^(2^k))).
struct DoublyExponentialRadius {
  double base = 0.99;
  double cap = 1e-3;
  double floor = 1e-10;
};

using RadiusSchedule = std::variant<ConstantRadius, PowerDecayRadius, DoublyExponentialRadius>;

void validate(const RadiusSchedule& schedule);
double next_radius(const RadiusSchedule& schedule, std::int64_t k);
std::string schedule_name(const RadiusSchedule& schedule);

}  // namespace zopn
