#pragma once

#include <cstdint>
#include <stdexcept>
#include <string_view>

#include "zopn/common.hpp"
#include "zopn/hessian.hpp"
#include "zopn/oracle.hpp"

namespace zopn {

enum class InnerStatus : std::uint8_t { CriterionMet, SmallStep, InnerCapHit };

std::string_view to_string(InnerStatus status);

/// Model  g'd + 0.5 d'Hd + h(center + d)  around the current iterate.
struct SubproblemSpec {
  const Vector& center;
  const Vector& gradient;
  const HessianState& hessian;
  const Regularizer& reg;
  double gamma = 0.9;       // accept d when ||r||_{H^-1} <= (1 - gamma) ||d||_H
  double tolerance = 0.0;   // stop when ||d|| <= tolerance
  int max_inner = 1000;
};

struct SubproblemResult {
  Vector step;      // d
  Vector residual;  // r, an element of g + H d + dh(center + d)
  int inner_iters = 0;
  InnerStatus status = InnerStatus::InnerCapHit;
};

/// Accelerated proximal gradient (FISTA) on the model with step 1/||H||.
///
/// The residual at inner step l is H(y_l - z_{l-1}) + (z_{l-1} - y_l)/alpha,
/// which lies in the model subdifferential at y_l without touching dh.
/// When the cap is hit the iterate with the lowest model value is returned.
/// Makes no oracle calls.
SubproblemResult solve_subproblem(const SubproblemSpec& spec);

/// g'd + h(x + d) - h(x).
double model_decrease(const Vector& gradient, const Vector& step, const Regularizer& reg, const Vector& center);

class UnboundedInnerIterations : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Worst-case FISTA iterations before the inexactness test must fire:
///   ceil(16 kmax^{3/2} dist / ((1-gamma) kmin^{3/2} tol)) + 1.
/// gamma = 1 (or tol = 0 with dist > 0) demands an exact solve and has no bound.
std::int64_t inner_iteration_bound(double kappa_max, double kappa_min, double gamma, double tolerance,
                                   double dist_to_opt);

}  // namespace zopn
