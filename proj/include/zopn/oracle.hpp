#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <variant>

#include "zopn/common.hpp"

namespace zopn {

/// Why an oracle call was made. Every evaluation is tagged so that the
/// total function-evaluation count can be broken down afterwards.
enum class EvalPurpose : std::uint8_t { Gradient = 0, Hessian = 1, LineSearch = 2, Misc = 3 };

inline constexpr std::size_t kPurposeCount = 4;

std::string_view to_string(EvalPurpose purpose);

class EvalCounter {
 public:
  void record(EvalPurpose purpose) {
    ++total_;
    ++by_purpose_[static_cast<std::size_t>(purpose)];
  }

  std::uint64_t total() const { return total_; }
  std::uint64_t count(EvalPurpose purpose) const {
    return by_purpose_[static_cast<std::size_t>(purpose)];
  }

 private:
  std::uint64_t total_ = 0;
  std::array<std::uint64_t, kPurposeCount> by_purpose_{};
};

/// Counted, deterministic black-box access to the smooth part f.
class BlackBoxOracle {
 public:
  using Function = std::function<double(const Vector&)>;

  BlackBoxOracle(Index dimension, Function f);

  double eval(const Vector& x, EvalPurpose purpose);

  Index dimension() const { return dimension_; }
  const EvalCounter& counter() const { return counter_; }

  /// Same function, counter starting from zero.
  BlackBoxOracle fresh_copy() const { return BlackBoxOracle(dimension_, f_); }

 private:
  Index dimension_;
  Function f_;
  EvalCounter counter_;
};

// ---------------------------------------------------------------------------
// Regularizers

struct ZeroReg {};
struct L1Reg {
  double weight;
};
struct SqL2Reg {
  double weight;
};
struct ElasticNetReg {
  double l1;
  double l2;
};

/// Structured convex term h. Adding a kind means adding a value and a prox
/// branch below; nothing else in the library inspects the alternatives.
class Regularizer {
 public:
  using Kind = std::variant<ZeroReg, L1Reg, SqL2Reg, ElasticNetReg>;

  Regularizer() = default;
  Regularizer(Kind kind);  // NOLINT(google-explicit-constructor)

  static Regularizer zero() { return Regularizer(ZeroReg{}); }
  static Regularizer l1(double weight) { return Regularizer(L1Reg{weight}); }
  static Regularizer sq_l2(double weight) { return Regularizer(SqL2Reg{weight}); }
  static Regularizer elastic_net(double l1, double l2) { return Regularizer(ElasticNetReg{l1, l2}); }

  const Kind& kind() const { return kind_; }

  /// Weight of the |x| term (0 when absent).
  double l1_weight() const;
  /// Weight of the (1/2)||x||^2 term (0 when absent).
  double l2_weight() const;

  std::string describe() const;

 private:
  Kind kind_ = ZeroReg{};
};

template <typename Derived>
typename Derived::Scalar reg_value(const Regularizer& h, const Eigen::MatrixBase<Derived>& x) {
  using Scalar = typename Derived::Scalar;
  const Scalar l1 = static_cast<Scalar>(h.l1_weight());
  const Scalar l2 = static_cast<Scalar>(h.l2_weight());
  Scalar value(0);
  if (l1 != Scalar(0)) value += l1 * x.template lpNorm<1>();
  if (l2 != Scalar(0)) value += Scalar(0.5) * l2 * x.squaredNorm();
  return value;
}

/// argmin_y  alpha*h(y) + 0.5*||y - v||^2.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1> prox(const Regularizer& h,
                                                                const Eigen::MatrixBase<Derived>& v,
                                                                typename Derived::Scalar alpha) {
  using Scalar = typename Derived::Scalar;
  require(alpha > Scalar(0), "prox: step must be positive");
  const Scalar shrink = alpha * static_cast<Scalar>(h.l1_weight());
  const Scalar scale = Scalar(1) + alpha * static_cast<Scalar>(h.l2_weight());
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> y(v.size());
  for (Index i = 0; i < v.size(); ++i) {
    const Scalar vi = v(i);
    const Scalar mag = std::max(std::abs(vi) - shrink, Scalar(0));
    y(i) = (vi < Scalar(0) ? -mag : mag) / scale;
  }
  return y;
}

// ---------------------------------------------------------------------------
// Composite problem

struct ProblemConstants {
  double lipschitz_grad = 0.0;  // L_f
  double lipschitz_hess = 0.0;  // L_H
  double strong_convexity = 0.0;  // mu
  bool convex = true;
};

/// Analytic information for synthetic problems. Test and reference code only;
/// solvers never read it.
struct ProblemTruth {
  std::function<double(const Vector&)> value;  // uncounted f
  std::function<Vector(const Vector&)> gradient;
  std::function<Matrix(const Vector&)> hessian;
  std::optional<Vector> x_star;
  std::optional<double> F_star;
};

struct CompositeProblem {
  std::string name;
  BlackBoxOracle f;
  Regularizer h;
  std::optional<ProblemConstants> constants;
  std::optional<ProblemTruth> truth;

  Index dimension() const { return f.dimension(); }

  /// Copy with a zeroed evaluation counter, for independent runs.
  CompositeProblem fresh_copy() const {
    return CompositeProblem{name, f.fresh_copy(), h, constants, truth};
  }
};

/// f(x) + h(x) with exactly one oracle call.
double composite_value(CompositeProblem& problem, const Vector& x, EvalPurpose purpose);

}  // namespace zopn
