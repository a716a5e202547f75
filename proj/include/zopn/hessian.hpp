#pragma once

#include <cstdint>
#include <string>
#include <variant>

#include <Eigen/Cholesky>

#include "zopn/common.hpp"
#include "zopn/oracle.hpp"

namespace zopn {

struct IdentityHessian {};
/// Safeguarded BFGS: a pair (s, y) is used only if y's >= threshold * ||s||^2.
struct BfgsHessian {
  double curvature_threshold = 1e-9;
};
/// Finite-difference Hessian refreshed every `period` iterations (0 means n).
struct LazyHessian {
  int period = 0;
};

using HessianStrategy = std::variant<IdentityHessian, BfgsHessian, LazyHessian>;

std::string strategy_name(const HessianStrategy& strategy);

/// Eigenvalue window every HessianState is forced into.
struct SpectralBounds {
  double min_eig = 1e-8;
  double max_eig = 1e8;
};

struct PowerIterationResult {
  double value = 0.0;
  Vector direction;
  int iterations = 0;
  bool converged = false;
};

/// Largest |eigenvalue| of a symmetric matrix by power iteration on ||H v||.
PowerIterationResult power_iteration(const Matrix& H, const Vector* warm_start = nullptr,
                                     double rel_tol = 1e-8, int max_iter = 200);

/// ||H||_2 for symmetric H. Falls back to the Frobenius norm (an upper bound)
/// if power iteration stalls.
template <typename Derived>
double spectral_norm(const Eigen::MatrixBase<Derived>& H) {
  const Matrix dense = H;
  const PowerIterationResult r = power_iteration(dense);
  return r.converged ? r.value : dense.norm();
}

/// Symmetric positive definite approximation with its Cholesky factor and
/// spectral norm cached. Construct through identity() or ensure_spd().
class HessianState {
 public:
  HessianState() = default;

  static HessianState identity(Index n);

  const Matrix& matrix() const { return H_; }
  const Eigen::LLT<Matrix>& factor() const { return llt_; }
  double norm() const { return norm_; }
  Index dimension() const { return H_.rows(); }
  const Vector& dominant_direction() const { return dominant_; }

 private:
  friend HessianState ensure_spd(Matrix H, const SpectralBounds& bounds, const Vector* warm_start);

  Matrix H_;
  Eigen::LLT<Matrix> llt_;
  double norm_ = 0.0;
  Vector dominant_;
};

/// Repairs a symmetric matrix into the window [min_eig, max_eig].
///
/// If H - min_eig*I does not factor, the smallest shift lambda in
/// {0, min_eig, 10 min_eig, 100 min_eig, ...} with lambda_min(H) + lambda >= min_eig
/// is added. Matrices whose norm exceeds max_eig are scaled down.
HessianState ensure_spd(Matrix H, const SpectralBounds& bounds = {}, const Vector* warm_start = nullptr);

bool bfgs_curvature_ok(const Vector& s, const Vector& y, double threshold);

/// H + yy'/(y's) - (Hs)(Hs)'/(s'Hs) when the curvature safeguard passes,
/// otherwise the unchanged state.
HessianState bfgs_update(const HessianState& state, const Vector& s, const Vector& y, double threshold = 1e-9,
                         const SpectralBounds& bounds = {});

struct LazyHessianEstimate {
  Matrix H;
  std::uint64_t new_evals = 0;
};

/// Second-order forward differences
///   H_ij = (f(x + r e_i + r e_j) - f(x + r e_i) - f(x + r e_j) + f(x)) / r^2
/// for i <= j, mirrored. Costs n + n(n+1)/2 calls tagged EvalPurpose::Hessian.
LazyHessianEstimate lazy_hessian(BlackBoxOracle& oracle, const Vector& x, double radius, double cached_fx);

struct WeightedNorms {
  double h_norm = 0.0;      // sqrt(v' H v)
  double h_inv_norm = 0.0;  // sqrt(v' H^{-1} v)
};

WeightedNorms weighted_norms(const HessianState& state, const Vector& v);

}  // namespace zopn
