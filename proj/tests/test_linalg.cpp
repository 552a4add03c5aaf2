#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "lmtight/linalg.hpp"

namespace lmtight {
namespace {

TEST(SolveLinear, Identity) {
  const auto y = solve_linear(Matrix::identity(3), {1.0, 2.0, 3.0});
  EXPECT_EQ(y, (Vector{1.0, 2.0, 3.0}));
}

TEST(SolveLinear, TrimmedBigramSystem) {
  const auto y = solve_linear(Matrix{{1.0, -1.0}, {0.0, 0.3}}, {0.0, 0.1});
  EXPECT_NEAR(y[0], 1.0 / 3.0, 1e-15);
  EXPECT_NEAR(y[1], 1.0 / 3.0, 1e-15);
}

TEST(SolveLinear, ZeroMatrixIsSingular) {
  try {
    solve_linear(Matrix(2, 2), {1.0, 0.0});
    FAIL() << "expected Singular";
  } catch (const Singular& e) {
    EXPECT_EQ(e.pivot(), 0u);
  }
}

TEST(SolveLinear, NeedsPivoting) {
  const auto y = solve_linear(Matrix{{0.0, 1.0}, {1.0, 0.0}}, {2.0, 5.0});
  EXPECT_DOUBLE_EQ(y[0], 5.0);
  EXPECT_DOUBLE_EQ(y[1], 2.0);
}

TEST(SolveLinear, ShapeMismatch) {
  EXPECT_THROW(solve_linear(Matrix(2, 3), {1.0, 1.0}), std::invalid_argument);
  EXPECT_THROW(solve_linear(Matrix::identity(2), {1.0}), std::invalid_argument);
}

TEST(SolveLinear, RandomResidualsAreSmall) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 1 + trial % 8;
    Matrix a(n, n);
    Vector b(n);
    for (std::size_t i = 0; i < n; ++i) {
      double off = 0.0;
      for (std::size_t j = 0; j < n; ++j)
        if (i != j) off += std::abs(a(i, j) = u(rng));
      a(i, i) = off + 1.0 + std::abs(u(rng));  // diagonally dominant
      b[i] = u(rng);
    }
    const auto y = solve_linear(a, b);
    const auto r = multiply(a, y);
    double res = 0.0;
    for (std::size_t i = 0; i < n; ++i) res = std::max(res, std::abs(r[i] - b[i]));
    EXPECT_LE(res, 1e-12 * (1.0 + inf_norm(b)));
  }
}

TEST(NeumannPartialSum, ZeroTermsIsT) {
  EXPECT_EQ(neumann_partial_sum(Matrix{{0.3, 0.2}, {0.1, 0.4}}, {0.5, 0.5}, 0), (Vector{0.5, 0.5}));
}

TEST(NeumannPartialSum, ScalarGeometric) {
  const auto y = neumann_partial_sum(Matrix{{0.5}}, {0.5}, 3);
  EXPECT_NEAR(y[0], 0.9375, 1e-15);
}

TEST(NeumannPartialSum, ConvergesToSolve) {
  const Matrix p{{0.0, 1.0}, {0.0, 0.7}};
  const auto y = neumann_partial_sum(p, {0.0, 0.1}, 60);
  EXPECT_NEAR(y[0], 1.0 / 3.0, 1e-9);
  EXPECT_NEAR(y[1], 1.0 / 3.0, 1e-9);
}

TEST(NeumannPartialSum, MonotoneInTerms) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 1 + trial % 5;
    Matrix p(n, n);
    Vector t(n);
    for (std::size_t i = 0; i < n; ++i) {
      t[i] = u(rng);
      for (std::size_t j = 0; j < n; ++j) p(i, j) = u(rng) / static_cast<double>(n);
    }
    Vector prev = neumann_partial_sum(p, t, 0);
    for (std::size_t k = 1; k < 12; ++k) {
      const Vector cur = neumann_partial_sum(p, t, k);
      for (std::size_t i = 0; i < n; ++i) EXPECT_GE(cur[i], prev[i]);
      prev = cur;
    }
  }
}

TEST(SpectralRadius, ZeroMatrix) {
  const auto r = spectral_radius_estimate(Matrix(3, 3));
  EXPECT_EQ(r.estimate, 0.0);
  EXPECT_EQ(r.inf_norm_bound, 0.0);
}

TEST(SpectralRadius, Scalar) {
  EXPECT_NEAR(spectral_radius_estimate(Matrix{{0.7}}).estimate, 0.7, 1e-12);
}

TEST(SpectralRadius, Nilpotent) {
  const auto r = spectral_radius_estimate(Matrix{{0.0, 1.0}, {0.0, 0.0}});
  EXPECT_EQ(r.estimate, 0.0);
  EXPECT_EQ(r.inf_norm_bound, 1.0);
}

TEST(SpectralRadius, TriangularTakesLargestDiagonal) {
  EXPECT_NEAR(spectral_radius_estimate(Matrix{{0.0, 1.0, 0.0}, {0.0, 0.7, 0.2}, {0.0, 0.0, 0.9}}).estimate,
              0.9, 1e-6);
}

TEST(SpectralRadius, PermutationHasRadiusOne) {
  EXPECT_NEAR(spectral_radius_estimate(Matrix{{0.0, 1.0}, {1.0, 0.0}}).estimate, 1.0, 1e-9);
}

TEST(SpectralRadius, SubstochasticWithStrictRowStaysBelowOne) {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 1 + trial % 6;
    Matrix p(n, n);
    for (std::size_t i = 0; i < n; ++i) {
      double z = 0.0;
      for (std::size_t j = 0; j < n; ++j) z += (p(i, j) = u(rng));
      const double keep = i == 0 ? 0.9 : 1.0;  // row 0 leaks
      for (std::size_t j = 0; j < n; ++j) p(i, j) *= keep / z;
    }
    const auto r = spectral_radius_estimate(p);
    EXPECT_LT(r.estimate, 1.0 + 1e-9);
    EXPECT_LE(r.estimate, r.inf_norm_bound);
  }
}

}  // namespace
}  // namespace lmtight
