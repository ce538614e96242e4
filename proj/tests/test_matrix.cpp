#include <cmath>
#include <random>

#include "doctest.h"
#include "wgf/errors.hpp"
#include "wgf/matrix.hpp"

using namespace wgf;

TEST_CASE("linear_solve identity") {
  const DenseMatrix a = DenseMatrix::identity(3);
  const Vector x = linear_solve(a, {1.0, 2.0, 3.0});
  CHECK(x[0] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(x[1] == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(x[2] == doctest::Approx(3.0).epsilon(1e-12));
}

TEST_CASE("linear_solve diagonal") {
  DenseMatrix a(2, 2);
  a(0, 0) = 2.0;
  a(1, 1) = 4.0;
  const Vector x = linear_solve(a, {2.0, 8.0});
  CHECK(x[0] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(x[1] == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("linear_solve 2x2 elimination") {
  DenseMatrix a(2, 2);
  a(0, 0) = 1.0; a(0, 1) = 1.0;
  a(1, 0) = 1.0; a(1, 1) = -1.0;
  const Vector x = linear_solve(a, {3.0, 1.0});
  CHECK(x[0] == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(x[1] == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("linear_solve rejects singular systems") {
  DenseMatrix a(2, 2);
  a(0, 0) = 1.0; a(0, 1) = 2.0;
  a(1, 0) = 2.0; a(1, 1) = 4.0;
  CHECK_THROWS_AS(linear_solve(a, {1.0, 2.0}), SingularMatrixError);
}

TEST_CASE("linear_solve residual on random well-conditioned systems") {
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 5 + static_cast<std::size_t>(trial) * 3;
    DenseMatrix a(n, n);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) a(i, j) = dist(rng);
      a(i, i) += static_cast<double>(n);  // diagonally dominant
    }
    Vector b(n);
    for (double& x : b) x = dist(rng);
    const Vector x = linear_solve(a, b);
    const Vector r = a.apply(x);
    double err = 0.0;
    for (std::size_t i = 0; i < n; ++i) err = std::max(err, std::abs(r[i] - b[i]));
    CHECK(err <= 1e-9 * (1.0 + norm_inf(b)));
  }
}

TEST_CASE("conjugate_gradient identity in one iteration") {
  const auto op = [](const Vector& v) { return v; };
  const CgResult r = conjugate_gradient(op, {5.0, -3.0}, 1e-12, 10, 0.0);
  CHECK(r.converged);
  CHECK(r.iterations <= 1);
  CHECK(r.x[0] == doctest::Approx(5.0).epsilon(1e-12));
  CHECK(r.x[1] == doctest::Approx(-3.0).epsilon(1e-12));
}

TEST_CASE("conjugate_gradient diagonal inverse") {
  const auto op = [](const Vector& v) { return Vector{4.0 * v[0], 2.0 * v[1]}; };
  const CgResult r = conjugate_gradient(op, {4.0, 2.0}, 1e-12, 10, 0.0);
  CHECK(r.converged);
  CHECK(r.x[0] == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(r.x[1] == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("conjugate_gradient damping-only solve") {
  const auto op = [](const Vector& v) { return Vector(v.size(), 0.0); };
  const CgResult r = conjugate_gradient(op, {1.0}, 1e-12, 10, 0.5);
  CHECK(r.converged);
  CHECK(r.x[0] == doctest::Approx(2.0).epsilon(1e-10));
}

TEST_CASE("conjugate_gradient reports non-convergence without throwing") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> dist(0.1, 1.0);
  DenseMatrix a(30, 30);
  for (std::size_t i = 0; i < 30; ++i) a(i, i) = dist(rng) * std::pow(10.0, i / 4.0);
  Vector b(30, 1.0);
  const auto op = [&a](const Vector& v) { return a.apply(v); };
  const CgResult r = conjugate_gradient(op, b, 1e-15, 2, 0.0);
  CHECK_FALSE(r.converged);
  CHECK(r.x.size() == 30);
}

TEST_CASE("conjugate_gradient matches linear_solve on SPD systems") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  for (std::size_t n : {5, 40, 200}) {
    DenseMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) m(i, j) = dist(rng);
    DenseMatrix a = m.transpose().matmul(m);
    for (std::size_t i = 0; i < n; ++i) a(i, i) += 1.0;
    Vector b(n);
    for (double& x : b) x = dist(rng);
    const Vector direct = linear_solve(a, b);
    const auto op = [&a](const Vector& v) { return a.apply(v); };
    const CgResult r = conjugate_gradient(op, b, 1e-12, 5 * n, 0.0);
    CHECK(r.converged);
    for (std::size_t i = 0; i < n; ++i) {
      CHECK(r.x[i] == doctest::Approx(direct[i]).epsilon(1e-6));
    }
  }
}

TEST_CASE("ridge_solve identity features") {
  DenseMatrix phi = DenseMatrix::identity(2);
  DenseMatrix y(2, 1);
  y(0, 0) = 3.0;
  y(1, 0) = 4.0;
  const DenseMatrix w = ridge_solve(phi, y, 0.0);
  CHECK(w(0, 0) == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(w(1, 0) == doctest::Approx(4.0).epsilon(1e-12));
}

TEST_CASE("ridge_solve scalar closed form") {
  DenseMatrix phi(1, 1);
  phi(0, 0) = 2.0;
  DenseMatrix y(1, 1);
  y(0, 0) = 4.0;
  const DenseMatrix w = ridge_solve(phi, y, 4.0);
  CHECK(w(0, 0) == doctest::Approx(1.0).epsilon(1e-12));  // (4+4)^-1 * 8
}

TEST_CASE("ridge_solve least squares mean") {
  DenseMatrix phi(2, 1);
  phi(0, 0) = 1.0;
  phi(1, 0) = 1.0;
  DenseMatrix y(2, 1);
  y(0, 0) = 1.0;
  y(1, 0) = 3.0;
  const DenseMatrix w = ridge_solve(phi, y, 0.0);
  CHECK(w(0, 0) == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("ridge_solve satisfies the normal equations") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  DenseMatrix phi(40, 7);
  DenseMatrix y(40, 2);
  for (std::size_t i = 0; i < 40; ++i) {
    for (std::size_t j = 0; j < 7; ++j) phi(i, j) = dist(rng);
    for (std::size_t j = 0; j < 2; ++j) y(i, j) = dist(rng);
  }
  const double lambda = 0.3;
  const DenseMatrix w = ridge_solve(phi, y, lambda);
  const DenseMatrix lhs = phi.transpose().matmul(phi.matmul(w));
  const DenseMatrix rhs = phi.transpose().matmul(y);
  for (std::size_t i = 0; i < 7; ++i) {
    for (std::size_t j = 0; j < 2; ++j) {
      const double full = lhs(i, j) + lambda * w(i, j);
      CHECK(full == doctest::Approx(rhs(i, j)).epsilon(1e-8));
    }
  }
}

TEST_CASE("ProbabilityVector validates its invariants") {
  CHECK_NOTHROW(ProbabilityVector({0.25, 0.75}));
  CHECK_THROWS_AS(ProbabilityVector({0.6, 0.6}), DomainError);
  CHECK_THROWS_AS(ProbabilityVector({-0.1, 1.1}), DomainError);
}
