#include <doctest.h>

#include <random>

#include "oracles.hpp"
#include "zopn/estimators.hpp"

using namespace zopn;

namespace {

BlackBoxOracle quadratic(const Matrix& A) {
  return BlackBoxOracle(A.rows(), [A](const Vector& x) { return 0.5 * x.dot(A * x); });
}

BlackBoxOracle linear(const Vector& a, double c = 0.0) {
  return BlackBoxOracle(a.size(), [a, c](const Vector& x) { return a.dot(x) + c; });
}

}  // namespace

TEST_CASE("forward difference basics") {
  RngStream rng(0);
  BlackBoxOracle c = BlackBoxOracle(3, [](const Vector&) { return 4.2; });
  CHECK(estimate_gradient(ForwardDifference{}, c, Vector::Ones(3), 1e-3, std::nullopt, rng).g.isZero(0.0));

  Vector a(2);
  a << 1, -2;
  BlackBoxOracle f = linear(a);
  const Vector g = estimate_gradient(ForwardDifference{}, f, Vector::Zero(2), 0.5, std::nullopt, rng).g;
  CHECK(g(0) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(g(1) == doctest::Approx(-2.0).epsilon(1e-14));

  Matrix A = Vector(Eigen::Vector2d(2, 4)).asDiagonal();
  BlackBoxOracle q = quadratic(A);
  const Vector gq = estimate_gradient(ForwardDifference{}, q, Vector::Ones(2), 0.1, std::nullopt, rng).g;
  CHECK(gq(0) == doctest::Approx(2.1).epsilon(1e-12));
  CHECK(gq(1) == doctest::Approx(4.2).epsilon(1e-12));
}

TEST_CASE("evaluation costs match the counter") {
  const Index n = 7;
  Vector a = Vector::LinSpaced(n, -1, 1);
  RngStream rng(1);
  const Vector x = Vector::Constant(n, 0.2);
  struct Case {
    GradEstimator est;
    bool cached;
    std::uint64_t expected;
  };
  const std::vector<Case> cases = {
      {ForwardDifference{}, true, n},        {ForwardDifference{}, false, n + 1},
      {CentralDifference{}, true, 2 * n},    {GaussianSmoothing{3}, true, 3},
      {GaussianSmoothing{3}, false, 4},      {SphericalSmoothing{1}, true, 1},
      {DoubleGaussianSmoothing{}, true, 2},  {DoubleGaussianSmoothing{}, false, 2},
  };
  for (const Case& c : cases) {
    BlackBoxOracle f = linear(a);
    const std::optional<double> fx = c.cached ? std::optional<double>(a.dot(x)) : std::nullopt;
    const GradientEstimate est = estimate_gradient(c.est, f, x, 1e-4, fx, rng);
    CHECK(est.new_evals == c.expected);
    CHECK(f.counter().total() == est.new_evals);
    CHECK(f.counter().count(EvalPurpose::Gradient) == est.new_evals);
  }
}

TEST_CASE("deterministic estimators are exact on affine f") {
  std::mt19937_64 gen(3);
  RngStream rng(0);
  for (int trial = 0; trial < 50; ++trial) {
    const Vector a = oracle::random_vector(5, gen);
    BlackBoxOracle f = linear(a, 2.5);
    const Vector x = oracle::random_vector(5, gen);
    for (double radius : {1e-6, 1e-2, 1.0}) {
      for (const GradEstimator& est : {GradEstimator{ForwardDifference{}}, GradEstimator{CentralDifference{}}}) {
        const Vector g = estimate_gradient(est, f, x, radius, std::nullopt, rng).g;
        // Only rounding of f near x remains.
        const double scale = 2.5 + a.cwiseAbs().dot(x.cwiseAbs() + Vector::Constant(5, radius));
        CHECK((g - a).norm() <= 64 * 2.2e-16 * scale / radius);
      }
    }
  }
}

TEST_CASE("forward error law and central exactness on quadratics") {
  std::mt19937_64 gen(5);
  RngStream rng(0);
  for (int trial = 0; trial < 100; ++trial) {
    const Matrix A = oracle::random_spd(6, gen);
    BlackBoxOracle f = quadratic(A);
    const Vector x = oracle::random_vector(6, gen);
    const double radius = 1e-3;
    const Vector gf = estimate_gradient(ForwardDifference{}, f, x, radius, std::nullopt, rng).g;
    const double expected = 0.5 * radius * A.diagonal().norm();
    CHECK((gf - A * x).norm() == doctest::Approx(expected).epsilon(1e-6));
    const Vector gc = estimate_gradient(CentralDifference{}, f, x, radius, std::nullopt, rng).g;
    CHECK((gc - A * x).norm() <= 1e-9 * (A * x).norm() + 1e-9);
  }
}

TEST_CASE("forward difference is fully linear with the theoretical constant") {
  std::mt19937_64 gen(9);
  std::uniform_real_distribution<double> log_radius(-8, 0);
  RngStream rng(0);
  for (int trial = 0; trial < 1000; ++trial) {
    const Matrix A = oracle::random_spd(4, gen, 0.5, 5.0);
    const double L = Eigen::SelfAdjointEigenSolver<Matrix>(A).eigenvalues().maxCoeff();
    BlackBoxOracle f = quadratic(A);
    const Vector x = oracle::random_vector(4, gen);
    const double radius = std::pow(10.0, log_radius(gen));
    const Vector g = estimate_gradient(ForwardDifference{}, f, x, radius, std::nullopt, rng).g;
    const double kappa = theoretical_kappa_eg(ForwardDifference{}, 4, L, 0.0);
    const double roundoff = 8.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, f.eval(x, EvalPurpose::Misc)) / radius;
    CHECK((g - A * x).norm() <= kappa * radius * (1.0 + 1e-6) + 2.0 * roundoff);
  }
}

TEST_CASE("gaussian smoothing mean on linear f") {
  Vector a(2);
  a << 1, -2;
  BlackBoxOracle f = linear(a);
  RngStream rng(2024);
  const int N = 10000;
  const Vector g = estimate_gradient(GaussianSmoothing{N}, f, Vector::Zero(2), 1e-3, std::nullopt, rng).g;
  CHECK((g - a).norm() <= 3.0 * a.norm() / std::sqrt(static_cast<double>(N)));
}

TEST_CASE("kappa_eg formulas") {
  CHECK(theoretical_kappa_eg(ForwardDifference{}, 4, 2.0, 0.0) == doctest::Approx(2.0));
  CHECK(theoretical_kappa_eg(CentralDifference{}, 9, 0.0, 6.0) == doctest::Approx(3.0));
  CHECK_THROWS_AS(theoretical_kappa_eg(GaussianSmoothing{}, 3, 1.0, 1.0), UnsupportedEstimator);
  CHECK_THROWS_AS(theoretical_kappa_eg(SphericalSmoothing{}, 3, 1.0, 1.0), UnsupportedEstimator);
}

TEST_CASE("radius schedules") {
  CHECK(next_radius(ConstantRadius{5e-10}, 7) == 5e-10);
  CHECK(next_radius(DoublyExponentialRadius{0.99, 1e-3, 1e-10}, 0) == 1e-3);
  CHECK(next_radius(PowerDecayRadius{1.0, 1.0}, 3) == doctest::Approx(0.25));
  const DoublyExponentialRadius de{0.99, 1e-3, 1e-10};
  CHECK(next_radius(de, 9) == 1e-3);
  CHECK(next_radius(de, 10) == doctest::Approx(std::pow(0.99, 1024.0)));
  CHECK(next_radius(de, 12) == 1e-10);
  CHECK(next_radius(de, 100000) == 1e-10);
  double prev = 1.0;
  for (int k = 0; k < 40; ++k) {
    CHECK(next_radius(de, k) <= prev);
    prev = next_radius(de, k);
  }
  CHECK_THROWS_AS(validate(RadiusSchedule{PowerDecayRadius{1.0, 0.5}}), ContractViolation);
  CHECK_THROWS_AS(next_radius(ConstantRadius{}, -1), ContractViolation);
}

TEST_CASE("contract violations") {
  BlackBoxOracle f = linear(Vector::Ones(2));
  RngStream rng(0);
  CHECK_THROWS_AS(estimate_gradient(ForwardDifference{}, f, Vector::Zero(2), 0.0, std::nullopt, rng),
                  ContractViolation);
  CHECK_THROWS_AS(estimate_gradient(ForwardDifference{}, f, Vector::Zero(3), 1.0, std::nullopt, rng),
                  ContractViolation);
  CHECK_THROWS_AS(estimate_gradient(GaussianSmoothing{0}, f, Vector::Zero(2), 1.0, std::nullopt, rng),
                  ContractViolation);
}

TEST_CASE("rng streams are keyed and reproducible") {
  RngStream a = RngStream::derive(1, 2, 3), b = RngStream::derive(1, 2, 3), c = RngStream::derive(1, 2, 4);
  const Vector va = a.normal_vector(5);
  CHECK(va == b.normal_vector(5));
  CHECK(va != c.normal_vector(5));
  RngStream s(4);
  CHECK(s.unit_sphere(9).norm() == doctest::Approx(1.0).epsilon(1e-14));
}
