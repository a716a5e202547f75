#include "zopn/hessian.hpp"

#include <cmath>

#include <Eigen/Eigenvalues>
#include <fmt/format.h>

namespace zopn {

std::string strategy_name(const HessianStrategy& strategy) {
  return std::visit(overloaded{
                        [](const IdentityHessian&) -> std::string { return "identity"; },
                        [](const BfgsHessian&) -> std::string { return "bfgs"; },
                        [](const LazyHessian& s) {
                          return s.period > 0 ? fmt::format("lazy({})", s.period) : std::string("lazy");
                        },
                    },
                    strategy);
}

PowerIterationResult power_iteration(const Matrix& H, const Vector* warm_start, double rel_tol, int max_iter) {
  const Index n = H.rows();
  PowerIterationResult out;
  if (warm_start != nullptr && warm_start->size() == n && warm_start->norm() > 0.0) {
    out.direction = warm_start->normalized();
  } else {
    // Deterministic start with no special alignment to coordinate axes.
    out.direction.resize(n);
    for (Index i = 0; i < n; ++i) out.direction(i) = 1.0 + static_cast<double>((i * 7919) % 97) / 97.0;
    out.direction.normalize();
  }

  double previous = 0.0;
  Vector w(n);
  for (int it = 1; it <= max_iter; ++it) {
    w.noalias() = H * out.direction;
    const double value = w.norm();
    out.iterations = it;
    if (value == 0.0) {
      out.value = 0.0;
      out.converged = true;
      return out;
    }
    out.direction = w / value;
    out.value = value;
    if (it > 1 && std::abs(value - previous) <= rel_tol * value) {
      out.converged = true;
      return out;
    }
    previous = value;
  }
  return out;
}

HessianState HessianState::identity(Index n) {
  require(n > 0, "identity Hessian needs positive dimension");
  return ensure_spd(Matrix::Identity(n, n));
}

HessianState ensure_spd(Matrix H, const SpectralBounds& bounds, const Vector* warm_start) {
  require(H.rows() == H.cols() && H.rows() > 0, "ensure_spd: square matrix required");
  require(bounds.min_eig > 0.0 && bounds.max_eig >= bounds.min_eig, "ensure_spd: invalid eigenvalue bounds");
  require(H.allFinite(), "ensure_spd: matrix has non-finite entries");
  const Index n = H.rows();
  H = (0.5 * (H + H.transpose())).eval();

  const Matrix shifted = H - bounds.min_eig * Matrix::Identity(n, n);
  if (Eigen::LLT<Matrix>(shifted).info() != Eigen::Success) {
    const double lambda_min = Eigen::SelfAdjointEigenSolver<Matrix>(H, Eigen::EigenvaluesOnly).eigenvalues()(0);
    if (lambda_min < bounds.min_eig) {
      double lambda = bounds.min_eig;
      while (lambda_min + lambda < bounds.min_eig) lambda *= 10.0;
      H.diagonal().array() += lambda;
    }
  }

  HessianState state;
  PowerIterationResult top = power_iteration(H, warm_start);
  double norm = top.converged ? top.value : H.norm();
  if (norm > bounds.max_eig) {
    H *= bounds.max_eig / norm;
    norm = bounds.max_eig;
  }
  state.llt_.compute(H);
  if (state.llt_.info() != Eigen::Success) {
    throw NumericalFailure("ensure_spd: repaired matrix failed to factor");
  }
  state.H_ = std::move(H);
  state.norm_ = norm;
  state.dominant_ = std::move(top.direction);
  return state;
}

bool bfgs_curvature_ok(const Vector& s, const Vector& y, double threshold) {
  return y.dot(s) >= threshold * s.squaredNorm();
}

HessianState bfgs_update(const HessianState& state, const Vector& s, const Vector& y, double threshold,
                         const SpectralBounds& bounds) {
  require(s.size() == state.dimension() && y.size() == state.dimension(), "bfgs_update: dimension mismatch");
  require(s.norm() > 0.0, "bfgs_update: step s must be nonzero");
  if (!bfgs_curvature_ok(s, y, threshold)) return state;

  const Matrix& H = state.matrix();
  const Vector Hs = H * s;
  const double sHs = s.dot(Hs);
  if (!(sHs > 0.0)) throw NumericalFailure("bfgs_update: s'Hs <= 0 for a positive definite H");
  const double ys = y.dot(s);

  Matrix updated = H;
  updated.noalias() += (y / ys) * y.transpose();
  updated.noalias() -= (Hs / sHs) * Hs.transpose();
  return ensure_spd(std::move(updated), bounds, &state.dominant_direction());
}

LazyHessianEstimate lazy_hessian(BlackBoxOracle& oracle, const Vector& x, double radius, double cached_fx) {
  require(radius > 0.0, "lazy_hessian: radius must be positive");
  require(x.size() == oracle.dimension(), "lazy_hessian: dimension mismatch");
  const Index n = x.size();
  LazyHessianEstimate out;
  out.H.resize(n, n);

  Vector single(n);
  Vector p = x;
  for (Index i = 0; i < n; ++i) {
    p(i) = x(i) + radius;
    single(i) = oracle.eval(p, EvalPurpose::Hessian);
    p(i) = x(i);
  }
  out.new_evals += static_cast<std::uint64_t>(n);

  const double r2 = radius * radius;
  for (Index i = 0; i < n; ++i) {
    for (Index j = i; j < n; ++j) {
      p(i) += radius;
      p(j) += radius;
      const double fij = oracle.eval(p, EvalPurpose::Hessian);
      p(i) = x(i);
      p(j) = x(j);
      const double hij = (fij - single(i) - single(j) + cached_fx) / r2;
      out.H(i, j) = hij;
      out.H(j, i) = hij;
    }
  }
  out.new_evals += static_cast<std::uint64_t>(n * (n + 1) / 2);
  return out;
}

WeightedNorms weighted_norms(const HessianState& state, const Vector& v) {
  require(v.size() == state.dimension(), "weighted_norms: dimension mismatch");
  const auto& llt = state.factor();
  WeightedNorms out;
  out.h_norm = (llt.matrixU() * v).norm();
  out.h_inv_norm = llt.matrixL().solve(v).norm();
  return out;
}

}  // namespace zopn
