#include <doctest.h>

#include <random>

#include <Eigen/Eigenvalues>

#include "oracles.hpp"
#include "zopn/hessian.hpp"

using namespace zopn;

namespace {

double min_eig(const Matrix& H) { return Eigen::SelfAdjointEigenSolver<Matrix>(H).eigenvalues().minCoeff(); }

}  // namespace

TEST_CASE("bfgs examples") {
  const HessianState I = HessianState::identity(2);
  const HessianState H = bfgs_update(I, Vector::Unit(2, 0), 2.0 * Vector::Unit(2, 0));
  CHECK(H.matrix().isApprox(Vector(Eigen::Vector2d(2, 1)).asDiagonal().toDenseMatrix(), 1e-15));

  const Vector s = Eigen::Vector2d(0.3, -0.7);
  const HessianState same = bfgs_update(I, s, -s);
  CHECK(same.matrix() == I.matrix());
  CHECK_THROWS_AS(bfgs_update(I, Vector::Zero(2), Vector::Ones(2)), ContractViolation);
}

TEST_CASE("bfgs secant identity and positive definiteness") {
  std::mt19937_64 gen(17);
  for (int chain = 0; chain < 20; ++chain) {
    const Matrix A = oracle::random_spd(5, gen, 0.2, 8.0);
    HessianState H = ensure_spd(oracle::random_spd(5, gen));
    for (int step = 0; step < 50; ++step) {
      const Vector s = oracle::random_vector(5, gen);
      const Vector y = A * s;
      H = bfgs_update(H, s, y);
      CHECK((H.matrix() * s - y).norm() <= 1e-10 * y.norm());
      CHECK(min_eig(H.matrix()) > 0.0);
      CHECK((H.matrix() - H.matrix().transpose()).cwiseAbs().maxCoeff() == 0.0);
    }
  }
}

TEST_CASE("lazy hessian") {
  Matrix A(2, 2);
  A << 2, 1, 1, 3;
  BlackBoxOracle q(2, [A](const Vector& x) { return 0.5 * x.dot(A * x); });
  const Vector x = Eigen::Vector2d(0.4, -1.3);
  const LazyHessianEstimate est = lazy_hessian(q, x, 1e-2, q.eval(x, EvalPurpose::Misc));
  CHECK((est.H - A).cwiseAbs().maxCoeff() <= 1e-10);
  CHECK(est.new_evals == 2 + 3);
  CHECK(q.counter().count(EvalPurpose::Hessian) == 5);

  BlackBoxOracle c(3, [](const Vector&) { return 1.0; });
  const LazyHessianEstimate zero = lazy_hessian(c, Vector::Zero(3), 0.1, 1.0);
  CHECK(zero.H.isZero(0.0));
  const HessianState lifted = ensure_spd(zero.H);
  CHECK(lifted.matrix().isApprox(1e-8 * Matrix::Identity(3, 3)));

  BlackBoxOracle cube(1, [](const Vector& x) { return x(0) * x(0) * x(0); });
  const LazyHessianEstimate h3 = lazy_hessian(cube, Vector::Zero(1), 0.01, 0.0);
  CHECK(h3.H(0, 0) == doctest::Approx(0.06).epsilon(1e-12));
}

TEST_CASE("lazy hessian error on a smooth non-quadratic f") {
  // f = sum_i x_i^3 / 6 has third derivative tensor bounded by L_H = 1.
  const Index n = 4;
  BlackBoxOracle f(n, [](const Vector& x) { return x.array().cube().sum() / 6.0; });
  std::mt19937_64 gen(3);
  for (int trial = 0; trial < 50; ++trial) {
    const Vector x = oracle::random_vector(n, gen);
    for (double radius : {1e-3, 1e-2, 1e-1}) {
      const Matrix H = lazy_hessian(f, x, radius, f.eval(x, EvalPurpose::Misc)).H;
      const Matrix truth = x.asDiagonal();
      const double bound = (std::sqrt(2.0) + 1.0) * static_cast<double>(n) / 3.0 * radius;
      CHECK((H - truth).norm() <= bound);
    }
  }
}

TEST_CASE("ensure_spd") {
  const Matrix D = Vector(Eigen::Vector2d(1, 2)).asDiagonal();
  CHECK(ensure_spd(D).matrix() == D);
  CHECK(ensure_spd(Matrix::Zero(2, 2)).matrix().isApprox(1e-8 * Matrix::Identity(2, 2)));

  const Matrix N = Vector(Eigen::Vector2d(-1, 1)).asDiagonal();
  const HessianState repaired = ensure_spd(N);
  CHECK(min_eig(repaired.matrix()) >= 1e-8);
  const double lambda = repaired.matrix()(1, 1) - 1.0;
  CHECK(repaired.matrix()(0, 0) == doctest::Approx(-1.0 + lambda));
  CHECK(repaired.matrix()(0, 1) == 0.0);

  const HessianState big = ensure_spd(1e10 * Matrix::Identity(2, 2));
  CHECK(big.norm() == doctest::Approx(1e8));

  std::mt19937_64 gen(21);
  for (int trial = 0; trial < 50; ++trial) {
    const Matrix A = oracle::random_spd(6, gen, -3.0, 3.0);
    const HessianState S = ensure_spd(A);
    const Matrix& H = S.matrix();
    const Matrix L = S.factor().matrixL();
    const Matrix LLt = L * L.transpose();
    CHECK((LLt - H).norm() <= 1e-10 * H.norm());
    CHECK(min_eig(H) >= 1e-8 * (1 - 1e-6));
    CHECK(S.norm() <= 1e8);
  }
}

TEST_CASE("spectral norm") {
  CHECK(spectral_norm(Vector(Eigen::Vector2d(2, 5)).asDiagonal().toDenseMatrix()) == doctest::Approx(5.0));
  CHECK(spectral_norm(Matrix::Identity(3, 3)) == doctest::Approx(1.0));
  Matrix M(2, 2);
  M << 2, 1, 1, 2;
  CHECK(spectral_norm(M) == doctest::Approx(3.0).epsilon(1e-8));
  std::mt19937_64 gen(1);
  const Matrix A = oracle::random_spd(8, gen);
  const double truth = Eigen::SelfAdjointEigenSolver<Matrix>(A).eigenvalues().maxCoeff();
  CHECK(spectral_norm(A) == doctest::Approx(truth).epsilon(1e-6));
}

TEST_CASE("weighted norms") {
  const Vector v = Eigen::Vector3d(1, -2, 0.5);
  const WeightedNorms id = weighted_norms(HessianState::identity(3), v);
  CHECK(id.h_norm == doctest::Approx(v.norm()));
  CHECK(id.h_inv_norm == doctest::Approx(v.norm()));
  const WeightedNorms four = weighted_norms(ensure_spd(4.0 * Matrix::Identity(1, 1)), Vector::Ones(1));
  CHECK(four.h_norm == doctest::Approx(2.0));
  CHECK(four.h_inv_norm == doctest::Approx(0.5));

  std::mt19937_64 gen(8);
  for (int trial = 0; trial < 1000; ++trial) {
    const HessianState S = ensure_spd(oracle::random_spd(4, gen));
    const Vector w = oracle::random_vector(4, gen);
    const WeightedNorms nw = weighted_norms(S, w);
    CHECK(nw.h_norm * nw.h_inv_norm >= w.squaredNorm() * (1 - 1e-12));
    CHECK(nw.h_norm == doctest::Approx(std::sqrt(w.dot(S.matrix() * w))).epsilon(1e-10));
  }
}
