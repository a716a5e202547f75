#include <doctest.h>

#include <random>

#include "oracles.hpp"
#include "zopn/subsolver.hpp"

using namespace zopn;

namespace {

HessianState diagonal(const Vector& h) { return ensure_spd(h.asDiagonal().toDenseMatrix()); }

}  // namespace

TEST_CASE("identity model is solved in one step") {
  const Vector x = Eigen::Vector3d(0.5, -1, 2);
  const Vector g = Eigen::Vector3d(1, 2, -3);
  const HessianState H = HessianState::identity(3);
  const Regularizer h = Regularizer::zero();
  const SubproblemResult r = solve_subproblem(SubproblemSpec{x, g, H, h});
  CHECK(r.status == InnerStatus::CriterionMet);
  CHECK(r.inner_iters == 1);
  CHECK((r.step + g).norm() <= 1e-15);
  CHECK(r.residual.norm() <= 1e-15);
}

TEST_CASE("diagonal l1 model matches the closed form") {
  const Vector x = Vector::Zero(2);
  const Vector g = Eigen::Vector2d(3, -0.5);
  const Vector hd = Eigen::Vector2d(2, 2);
  const HessianState H = diagonal(hd);
  const Regularizer h = Regularizer::l1(1.0);
  const SubproblemResult r = solve_subproblem(SubproblemSpec{x, g, H, h, 0.9});
  const Vector expected = oracle::diagonal_model_minimizer(x, g, hd, 1.0, 0.0) - x;
  CHECK(expected(0) == doctest::Approx(-1.0));
  CHECK(expected(1) == 0.0);
  CHECK((r.step - expected).norm() <= 1e-6);
}

TEST_CASE("large tolerance gives a small-step exit") {
  const Vector x = Vector::Zero(2);
  const Vector g = Eigen::Vector2d(0.3, 0.1);
  const HessianState H = diagonal(Eigen::Vector2d(1, 5));
  const Regularizer h = Regularizer::zero();
  const SubproblemResult r = solve_subproblem(SubproblemSpec{x, g, H, h, 0.99, 10.0});
  CHECK(r.status == InnerStatus::SmallStep);
  CHECK(r.inner_iters == 1);
  CHECK(r.step.norm() <= 10.0);
}

TEST_CASE("criterion and model decrease on random instances") {
  std::mt19937_64 gen(31);
  for (int trial = 0; trial < 200; ++trial) {
    const HessianState H = ensure_spd(oracle::random_spd(8, gen, 0.1, 20.0));
    const Vector x = oracle::random_vector(8, gen);
    const Vector g = oracle::random_vector(8, gen, 2.0);
    const Regularizer h = trial % 2 ? Regularizer::l1(0.3) : Regularizer::elastic_net(0.2, 0.5);
    const SubproblemResult r = solve_subproblem(SubproblemSpec{x, g, H, h, 0.9});
    REQUIRE(r.status == InnerStatus::CriterionMet);
    const double r_inv = std::sqrt(r.residual.dot(H.matrix().ldlt().solve(r.residual)));
    const double d_h = std::sqrt(r.step.dot(H.matrix() * r.step));
    CHECK(r_inv <= 0.1 * d_h + 1e-12);
    const double phi = model_decrease(g, r.step, h, x);
    CHECK(phi <= -0.9 * d_h * d_h + 1e-10);
  }
}

TEST_CASE("inner iterations stay below the worst-case bound") {
  std::mt19937_64 gen(41);
  std::uniform_real_distribution<double> unif(0.2, 5.0);
  const double tol = 1e-6;
  for (int trial = 0; trial < 100; ++trial) {
    const Index n = 10;
    Vector hd(n);
    for (Index i = 0; i < n; ++i) hd(i) = unif(gen);
    const Vector x = oracle::random_vector(n, gen);
    const Vector g = oracle::random_vector(n, gen, 2.0);
    const HessianState H = diagonal(hd);
    const Regularizer h = Regularizer::l1(0.5);
    const SubproblemResult r = solve_subproblem(SubproblemSpec{x, g, H, h, 0.9, tol, 100000});
    const Vector y_star = oracle::diagonal_model_minimizer(x, g, hd, 0.5, 0.0);
    const std::int64_t bound = inner_iteration_bound(hd.maxCoeff(), hd.minCoeff(), 0.9, tol, (x - y_star).norm());
    CHECK(r.status != InnerStatus::InnerCapHit);
    CHECK(r.inner_iters <= bound);
  }
}

TEST_CASE("FISTA gap decays like 1/l^2") {
  std::mt19937_64 gen(43);
  std::uniform_real_distribution<double> unif(0.05, 4.0);
  for (int trial = 0; trial < 20; ++trial) {
    const Index n = 12;
    Vector hd(n);
    for (Index i = 0; i < n; ++i) hd(i) = unif(gen);
    const Vector x = oracle::random_vector(n, gen);
    const Vector g = oracle::random_vector(n, gen);
    const HessianState H = diagonal(hd);
    const Regularizer h = Regularizer::l1(0.2);
    const Vector y_star = oracle::diagonal_model_minimizer(x, g, hd, 0.2, 0.0);
    const double psi_star = oracle::diagonal_model_value(x, g, hd, 0.2, 0.0, y_star);
    for (int l : {1, 2, 5, 10, 40}) {
      // gamma = 1 never accepts, so the cap returns the best of y_1..y_l.
      const SubproblemResult r = solve_subproblem(SubproblemSpec{x, g, H, h, 1.0, 0.0, l});
      REQUIRE(r.status == InnerStatus::InnerCapHit);
      const double psi = oracle::diagonal_model_value(x, g, hd, 0.2, 0.0, x + r.step);
      const double bound = 2.0 * hd.maxCoeff() * (x - y_star).squaredNorm() / ((l + 1.0) * (l + 1.0));
      CHECK(psi - psi_star <= bound + 1e-12);
    }
  }
}

TEST_CASE("no oracle calls") {
  BlackBoxOracle f(2, [](const Vector& v) { return v.squaredNorm(); });
  const Vector x = Vector::Zero(2), g = Vector::Ones(2);
  const HessianState H = HessianState::identity(2);
  const Regularizer h = Regularizer::l1(0.1);
  solve_subproblem(SubproblemSpec{x, g, H, h});
  CHECK(f.counter().total() == 0);
}

TEST_CASE("inner iteration bound") {
  CHECK(inner_iteration_bound(1, 1, 0.5, 1, 1) == 33);
  CHECK(inner_iteration_bound(1, 1, 0.5, 1, 0) == 1);
  CHECK(inner_iteration_bound(4, 1, 0.9, 0.1, 0.5) == 6401);
  CHECK_THROWS_AS(inner_iteration_bound(1, 1, 1.0, 1, 1), UnboundedInnerIterations);
  CHECK_THROWS_AS(inner_iteration_bound(1, 1, 0.5, 0, 1), UnboundedInnerIterations);
  CHECK_THROWS_AS(inner_iteration_bound(0, 1, 0.5, 1, 1), ContractViolation);
}
