#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <set>

#include "bernstein/hermite.hpp"
#include "generators.hpp"

using namespace bernstein;

namespace {

// Explicit sum H_n(x) = n! sum_m (-1)^m (2x)^{n-2m} / (m! (n-2m)!), in long double.
long double hermite_explicit(int n, long double x) {
  long double s = 0.0L;
  for (int m = 0; 2 * m <= n; ++m) {
    const long double term = std::pow(2.0L * x, n - 2 * m) / (std::tgamma(m + 1.0L) * std::tgamma(n - 2 * m + 1.0L));
    s += (m % 2 == 0 ? term : -term);
  }
  return s * std::tgamma(n + 1.0L);
}

// Trapezoid sum over [-L, L]; spectrally accurate for rapidly decaying smooth integrands.
template <class F>
double trapezoid(F f, double L = 14.0, int n = 4000) {
  const double h = 2.0 * L / n;
  double s = 0.0;
  for (int i = 0; i <= n; ++i) s += (i == 0 || i == n ? 0.5 : 1.0) * f(-L + h * i);
  return s * h;
}

}  // namespace

TEST(HermitePolynomial, LowOrders) {
  EXPECT_EQ(hermite_polynomial(0, 3.7), 1.0);
  EXPECT_EQ(hermite_polynomial(1, 1.0), 2.0);
  EXPECT_DOUBLE_EQ(hermite_polynomial(4, 1.0), -20.0);
}

TEST(HermitePolynomial, MatchesExplicitSum) {
  gen::Source g(11);
  for (int c = 0; c < gen::kCases; ++c) {
    const int n = g.integer(0, 18);
    const double x = g.uniform(-3.0, 3.0);
    const long double ref = hermite_explicit(n, x);
    EXPECT_NEAR(hermite_polynomial(n, x), static_cast<double>(ref), 1e-10 * std::max(1.0L, std::abs(ref)))
        << "n=" << n << " x=" << x;
  }
}

TEST(HermitePolynomial, OverflowIsReported) {
  EXPECT_THROW(hermite_polynomial(400, 60.0), OutOfRangeError);
  EXPECT_THROW(hermite_polynomial(-1, 0.0), ValidationError);
}

TEST(HermiteFunction, ValuesAtOrigin) {
  EXPECT_NEAR(hermite_function(0, 0.0), std::pow(std::numbers::pi, -0.25), 1e-15);
  EXPECT_EQ(hermite_function(1, 0.0), 0.0);
  // h_2(0) = -2 / sqrt(8 sqrt(pi))
  EXPECT_NEAR(hermite_function(2, 0.0), -2.0 / std::sqrt(8.0 * std::sqrt(std::numbers::pi)), 1e-15);
}

TEST(HermiteFunction, MatchesExplicitNormalization) {
  for (int n : {3, 7, 12}) {
    const long double x = 0.5L;
    const long double ref = std::exp(-x * x / 2) * hermite_explicit(n, x) /
                            std::sqrt(std::sqrt(std::numbers::pi_v<long double>) * std::pow(2.0L, n) * std::tgamma(n + 1.0L));
    EXPECT_NEAR(hermite_function(n, 0.5), static_cast<double>(ref), 1e-14);
  }
}

TEST(HermiteFunction, Orthonormal) {
  for (int m = 0; m <= 12; ++m)
    for (int n = m; n <= 12; ++n) {
      const double ip = trapezoid([&](double x) { return hermite_function(m, x) * hermite_function(n, x); });
      EXPECT_NEAR(ip, m == n ? 1.0 : 0.0, 1e-12) << m << "," << n;
    }
}

TEST(HermiteFunction, CramerCharlierBound) {
  const double bound = kCramerCharlier * std::pow(std::numbers::pi, -0.25);
  gen::Source g(12);
  for (int c = 0; c < 2000; ++c) {
    const int n = g.integer(0, 200);
    const double x = g.uniform(-30.0, 30.0);
    EXPECT_LE(std::abs(hermite_function(n, x)), bound);
  }
}

TEST(HermiteFunction, LargeDegreeStaysFinite) {
  const auto h = hermite_functions(kMaxHermiteDegree, 25.0);
  for (double v : h) EXPECT_TRUE(std::isfinite(v));
  EXPECT_THROW(hermite_functions(kMaxHermiteDegree + 1, 0.0), OutOfRangeError);
}

TEST(TensorHermite, ProductOfFactors) {
  const MultiIndex n{2, 1};
  const std::vector<double> x{0.5, -0.5};
  EXPECT_NEAR(tensor_hermite(n, x), hermite_function(2, 0.5) * hermite_function(1, -0.5), 1e-16);
  EXPECT_THROW(tensor_hermite(n, std::vector<double>{1.0}), ValidationError);
}

TEST(Energy, GroundStateAndIntegerGaps) {
  EXPECT_EQ(energy(MultiIndex::zero(3)), 1.5);
  gen::Source g(13);
  for (int c = 0; c < gen::kCases; ++c) {
    const std::size_t d = g.integer(1, 4);
    std::vector<int> e(d);
    for (int& v : e) v = g.integer(0, 9);
    const MultiIndex n(e);
    const double E = energy(n);
    EXPECT_GE(E, 0.5 * d);
    EXPECT_EQ(E - 0.5 * d, static_cast<double>(n.total()));
    EXPECT_EQ(E == 0.5 * d, n.is_zero());
  }
}

TEST(MultiIndex, RejectsNegativeEntries) {
  EXPECT_THROW(MultiIndex({1, -1}), ValidationError);
  EXPECT_THROW(MultiIndex(std::vector<int>{}), ValidationError);
}

TEST(EnumerateTruncation, SizeAndUniqueness) {
  for (std::size_t d : {1u, 2u, 3u})
    for (int N : {1, 3, 5}) {
      const auto idx = enumerate_truncation(d, N);
      EXPECT_EQ(idx.size(), static_cast<std::size_t>(std::pow(N, d)));
      std::set<MultiIndex> unique(idx.begin(), idx.end());
      EXPECT_EQ(unique.size(), idx.size());
      for (const auto& n : idx) EXPECT_LT(n.max_entry(), N);
    }
}

TEST(EigenResidual, SmallForEigenfunctions) {
  EXPECT_LE(eigen_residual(MultiIndex{0}, std::vector<double>{0.0}, 1e-4), 1e-6);
  EXPECT_LE(eigen_residual(MultiIndex{4}, std::vector<double>{1.3}, 1e-4), 1e-5);
  EXPECT_LE(eigen_residual(MultiIndex{2, 1}, std::vector<double>{0.5, -0.5}, 1e-4), 1e-5);
}
