#include <doctest.h>

#include <cmath>
#include <memory>
#include <random>

#include "oracles.hpp"
#include "zopn/problems.hpp"

using namespace zopn;

namespace {

std::shared_ptr<const Dataset> small_dataset(std::uint64_t seed = 0) {
  return std::make_shared<const Dataset>(make_synthetic_classification(60, 8, 0.6, seed));
}

CompositeProblem one_dim(double center, Regularizer h) {
  CompositeProblem P{"1d", BlackBoxOracle(1, [center](const Vector& x) { return 0.5 * std::pow(x(0) - center, 2); }),
                     h};
  P.constants = ProblemConstants{1.0, 0.0, 1.0, true};
  ProblemTruth truth;
  truth.value = [center](const Vector& x) { return 0.5 * std::pow(x(0) - center, 2); };
  truth.gradient = [center](const Vector& x) { return Vector::Constant(1, x(0) - center); };
  P.truth = truth;
  return P;
}

}  // namespace

TEST_CASE("classification values at the origin") {
  const auto data = small_dataset();
  CompositeProblem logistic = build_problem(ProblemSpec{LogisticL1Spec{}, data, 0});
  CHECK(logistic.f.eval(Vector::Zero(8), EvalPurpose::Misc) == doctest::Approx(std::log(2.0)).epsilon(1e-14));
  CompositeProblem svm = build_problem(ProblemSpec{SvmTanhSpec{}, data, 0});
  CHECK(svm.f.eval(Vector::Zero(8), EvalPurpose::Misc) == doctest::Approx(1.0));
  CHECK(composite_value(svm, Vector::Zero(8), EvalPurpose::Misc) == doctest::Approx(1.0));
  CompositeProblem elastic = build_problem(ProblemSpec{ElasticBinarySpec{}, data, 0});
  CHECK(elastic.f.eval(Vector::Zero(8), EvalPurpose::Misc) == doctest::Approx(0.5));
  CHECK(elastic.h.l1_weight() == 1e-3);
  CHECK(elastic.h.l2_weight() == 2e-3);
  CHECK_THROWS_AS(build_problem(ProblemSpec{LogisticL2Spec{}, nullptr, 0}), ConfigError);
}

TEST_CASE("lasso generator") {
  LassoSpec spec;
  spec.n = 100;
  spec.p = 40;
  const LassoData d = make_lasso_data(spec, 5);
  for (Index j = 0; j < spec.n; ++j) CHECK(std::abs(d.A.col(j).norm() - 1.0) <= 1e-12);
  CHECK((d.x_true.array() != 0.0).count() == 1);
  const Vector clean = d.A * d.x_true;
  const double ratio = (d.b - clean).norm() / clean.norm();
  CHECK(ratio > 0.5e-4);
  CHECK(ratio < 2e-4);

  spec.sparsity = 0.1;
  CHECK((make_lasso_data(spec, 5).x_true.array() != 0.0).count() == 10);
  const LassoData again = make_lasso_data(spec, 5);
  CHECK(again.b == make_lasso_data(spec, 5).b);
}

TEST_CASE("truth gradients agree with central differences") {
  const auto data = small_dataset(3);
  LassoSpec lasso;
  lasso.n = 12;
  lasso.p = 6;
  lasso.sparsity = 0.2;
  std::mt19937_64 gen(13);
  for (const ProblemKind& kind : {ProblemKind{lasso}, ProblemKind{LogisticL1Spec{}}, ProblemKind{LogisticL2Spec{}},
                                  ProblemKind{ElasticBinarySpec{}}, ProblemKind{SvmTanhSpec{}}}) {
    const CompositeProblem P = build_problem(ProblemSpec{kind, data, 1});
    const Index n = P.dimension();
    for (int trial = 0; trial < 20; ++trial) {
      const Vector x = oracle::random_vector(n, gen, 0.5);
      const Vector g = P.truth->gradient(x);
      Vector fd(n);
      const double r = 1e-5;
      for (Index i = 0; i < n; ++i) {
        Vector p = x, m = x;
        p(i) += r;
        m(i) -= r;
        fd(i) = (P.truth->value(p) - P.truth->value(m)) / (2 * r);
      }
      CHECK((g - fd).norm() <= 1e-6 * std::max(1.0, g.norm()));
      if (P.truth->hessian) {
        const Matrix H = P.truth->hessian(x);
        Matrix fdH(n, n);
        for (Index i = 0; i < n; ++i) {
          Vector p = x, m = x;
          p(i) += r;
          m(i) -= r;
          fdH.col(i) = (P.truth->gradient(p) - P.truth->gradient(m)) / (2 * r);
        }
        CHECK((H - fdH).norm() <= 1e-5 * std::max(1.0, H.norm()));
      }
    }
  }
}

TEST_CASE("losses are nonnegative and constants bound the curvature") {
  const auto data = small_dataset(4);
  std::mt19937_64 gen(5);
  for (const ProblemKind& kind : {ProblemKind{LogisticL1Spec{}}, ProblemKind{ElasticBinarySpec{}},
                                  ProblemKind{SvmTanhSpec{}}}) {
    const CompositeProblem P = build_problem(ProblemSpec{kind, data, 0});
    for (int trial = 0; trial < 50; ++trial) {
      const Vector x = oracle::random_vector(P.dimension(), gen, 2.0);
      CHECK(P.truth->value(x) >= 0.0);
      if (P.truth->hessian) {
        const double top = Eigen::SelfAdjointEigenSolver<Matrix>(P.truth->hessian(x)).eigenvalues().cwiseAbs().maxCoeff();
        CHECK(top <= P.constants->lipschitz_grad * (1 + 1e-9));
      }
    }
  }
}

TEST_CASE("libsvm examples") {
  const Dataset d = parse_libsvm("+1 1:0.5 3:2\n");
  REQUIRE(d.samples() == 1);
  CHECK(d.labels[0] == 1.0);
  CHECK(d.rows[0] == std::vector<SparseEntry>{{0, 0.5}, {2, 2.0}});
  CHECK(d.n == 3);
  CHECK(parse_libsvm("0 2:1").labels[0] == -1.0);
  CHECK(parse_libsvm("1 2:1").labels[0] == 1.0);
  CHECK(parse_libsvm("-1 2:1").labels[0] == -1.0);

  const Dataset c = parse_libsvm("# header\n\n+1 1:1 # trailing\n-1\n");
  CHECK(c.samples() == 2);
  CHECK(c.rows[1].empty());
  const Eigen::SparseMatrix<double, Eigen::RowMajor> M = c.matrix();
  CHECK(M.rows() == 2);
  CHECK(M.cols() == 1);
  CHECK(M.coeff(0, 0) == 1.0);
}

TEST_CASE("libsvm errors carry line numbers") {
  struct Bad {
    const char* text;
    std::size_t line;
  };
  const std::vector<Bad> cases = {
      {"1 1:abc", 1},         {"+1 1:1\n2 1:1", 2},      {"+1 0:1", 1},         {"+1 -2:1", 1},
      {"+1 3:1 2:1", 1},      {"+1 2:1 2:1", 1},         {"+1 1", 1},           {"x 1:1", 1},
      {"+1 1:1\n\n-1 a:1", 3}, {"+1 1:nan", 1},          {"+1 1:inf", 1},       {"+1 1:", 1},
      {"+1 :1", 1},           {"+-1 1:1", 1},            {"+1 1:1:2", 1},       {"0.5 1:1", 1},
  };
  for (const Bad& b : cases) {
    CAPTURE(b.text);
    try {
      parse_libsvm(b.text);
      FAIL("accepted malformed input");
    } catch (const ParseError& e) {
      CHECK(e.line() == b.line);
    }
  }
}

TEST_CASE("libsvm round trip") {
  const Dataset d = make_synthetic_classification(300, 30, 0.3, 9);
  const Dataset back = parse_libsvm(serialize_libsvm(d));
  CHECK(back.rows == d.rows);
  CHECK(back.labels == d.labels);
  const Dataset again = parse_libsvm(serialize_libsvm(back));
  CHECK(again == back);
}

TEST_CASE("reference optimum closed forms") {
  const ReferenceSolution a = reference_optimum(one_dim(3.0, Regularizer::zero()));
  CHECK(a.x_star(0) == doctest::Approx(3.0).epsilon(1e-10));
  CHECK(a.F_star == doctest::Approx(0.0).epsilon(1e-12));

  const ReferenceSolution b = reference_optimum(one_dim(0.0, Regularizer::l1(0.3)));
  CHECK(b.x_star(0) == 0.0);
  CHECK(b.F_star == 0.0);

  const ReferenceSolution c = reference_optimum(one_dim(1.0, Regularizer::l1(0.4)));
  CHECK(c.x_star(0) == doctest::Approx(oracle::soft(1.0, 0.4)).epsilon(1e-10));
  CHECK(c.F_star == doctest::Approx(0.32).epsilon(1e-10));

  CompositeProblem bare{"bare", BlackBoxOracle(1, [](const Vector&) { return 0.0; }), Regularizer::zero()};
  CHECK_THROWS_AS(reference_optimum(bare), ContractViolation);
}

TEST_CASE("reference optimum on LASSO is stationary") {
  LassoSpec spec;
  spec.n = 40;
  spec.p = 16;
  spec.sparsity = 0.1;
  const CompositeProblem P = build_problem(ProblemSpec{spec, nullptr, 2});
  const ReferenceSolution ref = reference_optimum(P);
  CHECK(oracle::l1_stationarity(P.truth->gradient(ref.x_star), ref.x_star, spec.zeta) <= 1e-10);
}
