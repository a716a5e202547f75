#pragma once

#include <cstdint>
#include <string_view>

#include "zopn/common.hpp"
#include "zopn/estimators.hpp"

namespace zopn {

struct CurvatureBoundInputs {
  Index n = 1;
  double mu = 1.0;              // strong convexity modulus
  double lipschitz_grad = 1.0;  // L_f
  double nu = 0.1;              // failure probability
  double theta = 0.25;          // in (0, 1/2)
  double lambda = 0.1;          // in (0, 1)
  double grad_norm = 0.0;       // ||grad f(x_k)||
  double s_min = 1.0;           // min(||s_{k-1}||, ||s_k||)
  double radius = 0.0;          // sampling radius for the error bounds
  double error_budget = 1.0;    // w
};

void validate(const CurvatureBoundInputs& in);

enum class SampleBound : std::uint8_t { GaussianError, SphericalError, GaussianCurvature, SphericalCurvature };

std::string_view to_string(SampleBound kind);

/// mu s_min / (sqrt(n) L_f). Forward differences below this radius keep y's > 0
/// on mu-strongly convex f.
double fd_radius_bound(const CurvatureBoundInputs& in);

/// theta mu s_min / (sqrt(n) L_f), the radius the smoothing curvature bounds assume.
double smoothing_curvature_radius(const CurvatureBoundInputs& in);

/// Unrounded sample-count expression.
double sample_bound_value(SampleBound kind, const CurvatureBoundInputs& in);

/// Rounded up and floored at 1.
std::int64_t smoothing_sample_bound(SampleBound kind, const CurvatureBoundInputs& in);

/// Geometry of the sampled pairs (x_{k-1}, x_k) around the minimizer 0 of
/// f(x) = x'Ax/2: midpoint at distance offset_norm in a random direction,
/// s = x_k - x_{k-1} of norm step_norm in an independent random direction.
struct PairSampling {
  double step_norm = 1.0;
  double offset_norm = 0.0;
};

/// Fraction of trials with (g(x_k) - g(x_{k-1}))'s > 0 under the estimator.
double empirical_curvature_rate(const GradEstimator& est, const Matrix& A, double radius, int trials,
                                std::uint64_t seed, const PairSampling& pairs = {});

/// Fraction of trials with ||g(x) - A x|| <= threshold at a fixed point x.
double empirical_error_rate(const GradEstimator& est, const Matrix& A, const Vector& x, double radius,
                            double threshold, int trials, std::uint64_t seed);

}  // namespace zopn
