#include "zopn/subsolver.hpp"

#include <cmath>
#include <limits>

namespace zopn {

std::string_view to_string(InnerStatus status) {
  switch (status) {
    case InnerStatus::CriterionMet:
      return "criterion_met";
    case InnerStatus::SmallStep:
      return "small_step";
    case InnerStatus::InnerCapHit:
      return "inner_cap_hit";
  }
  return "unknown";
}

double model_decrease(const Vector& gradient, const Vector& step, const Regularizer& reg, const Vector& center) {
  return gradient.dot(step) + reg_value(reg, center + step) - reg_value(reg, center);
}

SubproblemResult solve_subproblem(const SubproblemSpec& spec) {
  const Index n = spec.center.size();
  require(spec.gradient.size() == n && spec.hessian.dimension() == n, "solve_subproblem: dimension mismatch");
  require(spec.gamma > 0.0 && spec.gamma <= 1.0, "solve_subproblem: gamma must lie in (0,1]");
  require(spec.tolerance >= 0.0, "solve_subproblem: tolerance must be nonnegative");
  require(spec.max_inner >= 1, "solve_subproblem: max_inner must be >= 1");

  const Matrix& H = spec.hessian.matrix();
  const auto L = spec.hessian.factor().matrixL();
  const double alpha = 1.0 / spec.hessian.norm();
  const Vector& x = spec.center;
  const Vector& g = spec.gradient;

  Vector y_prev = x;
  Vector z = x;
  double theta_prev = 1.0;

  Vector Hzx(n), Hyz(n), y(n), r(n), d(n);
  SubproblemResult best;
  double best_model = std::numeric_limits<double>::infinity();

  for (int l = 1; l <= spec.max_inner; ++l) {
    const double theta = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * theta_prev * theta_prev));

    Hzx.noalias() = H * (z - x);
    y = prox(spec.reg, z - alpha * (g + Hzx), alpha);
    Hyz.noalias() = H * (y - z);
    r = Hyz + (z - y) / alpha;
    d = y - x;

    const double dHd = std::max(d.dot(Hyz + Hzx), 0.0);
    const double d_h_norm = std::sqrt(dHd);
    const double r_h_inv_norm = L.solve(r).norm();

    if (r_h_inv_norm <= (1.0 - spec.gamma) * d_h_norm) {
      return SubproblemResult{d, r, l, InnerStatus::CriterionMet};
    }
    if (d.norm() <= spec.tolerance) {
      return SubproblemResult{d, r, l, InnerStatus::SmallStep};
    }

    const double model = g.dot(d) + 0.5 * dHd + reg_value(spec.reg, y);
    if (model < best_model) {
      best_model = model;
      best.step = d;
      best.residual = r;
    }

    z = y + ((theta_prev - 1.0) / theta) * (y - y_prev);
    y_prev = y;
    theta_prev = theta;
  }

  best.inner_iters = spec.max_inner;
  best.status = InnerStatus::InnerCapHit;
  return best;
}

std::int64_t inner_iteration_bound(double kappa_max, double kappa_min, double gamma, double tolerance,
                                   double dist_to_opt) {
  require(kappa_max > 0.0 && kappa_min > 0.0, "inner_iteration_bound: curvature bounds must be positive");
  require(gamma > 0.0 && gamma <= 1.0, "inner_iteration_bound: gamma must lie in (0,1]");
  require(dist_to_opt >= 0.0 && tolerance >= 0.0, "inner_iteration_bound: distances must be nonnegative");
  if (dist_to_opt == 0.0) return 1;
  if (gamma == 1.0) throw UnboundedInnerIterations("gamma = 1 asks for an exact subproblem solve");
  if (tolerance == 0.0) throw UnboundedInnerIterations("zero step tolerance gives no inner iteration bound");
  const double ratio = std::pow(kappa_max / kappa_min, 1.5);
  const double bound = 16.0 * ratio * dist_to_opt / ((1.0 - gamma) * tolerance);
  // Drop representation noise so exact integers are not rounded up.
  const double snapped = std::nearbyint(bound);
  const double whole = std::abs(bound - snapped) <= 1e-12 * bound ? snapped : std::ceil(bound);
  return static_cast<std::int64_t>(whole) + 1;
}

}  // namespace zopn
