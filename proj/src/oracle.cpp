#include "zopn/oracle.hpp"

#include <fmt/format.h>

namespace zopn {

std::string_view to_string(EvalPurpose purpose) {
  switch (purpose) {
    case EvalPurpose::Gradient:
      return "gradient";
    case EvalPurpose::Hessian:
      return "hessian";
    case EvalPurpose::LineSearch:
      return "line_search";
    case EvalPurpose::Misc:
      return "misc";
  }
  return "unknown";
}

BlackBoxOracle::BlackBoxOracle(Index dimension, Function f) : dimension_(dimension), f_(std::move(f)) {
  require(dimension_ > 0, "oracle dimension must be positive");
  require(static_cast<bool>(f_), "oracle function is empty");
}

double BlackBoxOracle::eval(const Vector& x, EvalPurpose purpose) {
  if (x.size() != dimension_) {
    throw ContractViolation(fmt::format("oracle expects dimension {}, got {}", dimension_, x.size()));
  }
  counter_.record(purpose);
  return f_(x);
}

Regularizer::Regularizer(Kind kind) : kind_(kind) {
  const bool ok = std::visit(
      [](const auto& k) {
        using K = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<K, ZeroReg>) {
          return true;
        } else if constexpr (std::is_same_v<K, ElasticNetReg>) {
          return k.l1 >= 0.0 && k.l2 >= 0.0;
        } else {
          return k.weight >= 0.0;
        }
      },
      kind_);
  require(ok, "regularizer weights must be nonnegative");
}

double Regularizer::l1_weight() const {
  if (const auto* k = std::get_if<L1Reg>(&kind_)) return k->weight;
  if (const auto* k = std::get_if<ElasticNetReg>(&kind_)) return k->l1;
  return 0.0;
}

double Regularizer::l2_weight() const {
  if (const auto* k = std::get_if<SqL2Reg>(&kind_)) return k->weight;
  if (const auto* k = std::get_if<ElasticNetReg>(&kind_)) return k->l2;
  return 0.0;
}

std::string Regularizer::describe() const {
  return std::visit(
      [](const auto& k) -> std::string {
        using K = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<K, ZeroReg>) {
          return "zero";
        } else if constexpr (std::is_same_v<K, L1Reg>) {
          return fmt::format("l1({})", k.weight);
        } else if constexpr (std::is_same_v<K, SqL2Reg>) {
          return fmt::format("sql2({})", k.weight);
        } else {
          return fmt::format("elastic_net({}, {})", k.l1, k.l2);
        }
      },
      kind_);
}

double composite_value(CompositeProblem& problem, const Vector& x, EvalPurpose purpose) {
  return problem.f.eval(x, purpose) + reg_value(problem.h, x);
}

}  // namespace zopn
