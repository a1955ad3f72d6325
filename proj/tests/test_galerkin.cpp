#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "bernstein/galerkin.hpp"
#include "generators.hpp"

using namespace bernstein;

namespace {

template <class F>
double trapezoid(F f, double a, double b, int n) {
  const double h = (b - a) / n;
  double s = 0.0;
  for (int i = 0; i <= n; ++i) s += (i == 0 || i == n ? 0.5 : 1.0) * f(a + h * i);
  return s * h;
}

}  // namespace

TEST(FourierCoefficient, GaussianGroundState) {
  gen::Source g(61);
  for (int c = 0; c < 50; ++c) {
    const double sigma = g.uniform(0.2, 4.0), a = g.uniform(-2.0, 2.0), N = g.uniform(0.5, 2.0);
    const double expected = N * std::pow(std::numbers::pi, -0.25) * std::sqrt(2.0 * std::numbers::pi * sigma / (1.0 + sigma)) *
                            std::exp(-a * a / (2.0 * (1.0 + sigma)));
    EXPECT_NEAR(fourier_coefficient(Datum::gaussian(sigma, {a}), MultiIndex{0}, N), expected, 1e-14 * expected);
  }
}

TEST(FourierCoefficient, GaussianRatioOfSecondToGround) {
  for (double sigma : {0.3, 1.0, 2.5}) {
    const Datum d = Datum::gaussian(sigma, {0.0});
    const double ratio = unit_fourier_coefficient(d, MultiIndex{2}) / unit_fourier_coefficient(d, MultiIndex{0});
    EXPECT_NEAR(ratio, (sigma - 1.0) / (std::numbers::sqrt2 * (1.0 + sigma)), 1e-14);
  }
}

TEST(FourierCoefficient, GaussianMatchesTrapezoid) {
  gen::Source g(62);
  for (int c = 0; c < 30; ++c) {
    const double sigma = g.uniform(0.3, 3.0), a = g.uniform(-2.0, 2.0);
    const int n = g.integer(0, 25);
    const double ref = trapezoid(
        [&](double x) { return std::exp(-(x - a) * (x - a) / (2.0 * sigma)) * hermite_function(n, x); }, -20.0, 20.0,
        8000);
    EXPECT_NEAR(unit_fourier_coefficient(Datum::gaussian(sigma, {a}), MultiIndex{n}), ref, 1e-12);
  }
}

TEST(FourierCoefficient, DiracOddIndicesVanish) {
  const Datum d = Datum::dirac(2);
  EXPECT_EQ(fourier_coefficient(d, MultiIndex{3, 0}, 1.7), 0.0);
  EXPECT_EQ(fourier_coefficient(d, MultiIndex{2, 1}, 1.7), 0.0);
  EXPECT_NEAR(fourier_coefficient(d, MultiIndex{2, 0}, 1.7), 1.7 * hermite_function(2, 0.0) * hermite_function(0, 0.0),
              1e-15);
}

TEST(FourierCoefficient, HatProductRefinementOracle) {
  const Datum hat = Datum::hat_product(0.8, {0.3});
  auto ref = [&](int n, int m) {
    // Kinks at a - sigma, a, a + sigma are grid points for the composite trapezoid.
    return trapezoid([&](double x) { return (1.0 - std::abs(x - 0.3) / 0.8) * hermite_function(n, x); }, -0.5, 1.1, m);
  };
  for (int n : {0, 1, 4, 9}) {
    const double coarse = ref(n, 20000), fine = ref(n, 40000);
    EXPECT_NEAR(coarse, fine, 1e-8);
    EXPECT_NEAR(unit_fourier_coefficient(hat, MultiIndex{n}), fine, 1e-8);
  }
  EXPECT_GT(unit_fourier_coefficient(hat, MultiIndex{0}), 0.0);
}

TEST(FourierCoefficient, IsotropicHatMatchesCubature) {
  const Datum hat = Datum::hat_isotropic(0.9, {0.2, -0.1});
  const MultiIndex n{1, 2};
  const double ref = integrate([&](std::span<const double> x) { return evaluate_datum(hat, x) * tensor_hermite(n, x); },
                               hat.support())
                         .value;
  EXPECT_NEAR(unit_fourier_coefficient(hat, n), ref, 1e-10);
}

TEST(GalerkinTruncation, ConvergesToClosedForm) {
  const auto spec = ProcessSpec::create(1, 2.0, Datum::gaussian(2.0, {1.0}), Datum::gaussian(0.5, {0.5}));
  const GalerkinTruncation tr(spec, 40);
  EXPECT_EQ(tr.alpha().values.size(), 40u);
  double sup = 0.0;
  for (int i = 0; i <= 40; ++i)
    for (double t : {0.1, 1.0, 2.0}) {
      const std::vector<double> x{-4.0 + 0.2 * i};
      sup = std::max(sup, std::abs(truncated_forward(tr, x, t) - forward_solution(spec, x, t)));
      sup = std::max(sup, std::abs(truncated_backward(tr, x, t) - backward_solution(spec, x, t)));
    }
  EXPECT_LE(sup, 1e-8);
}

TEST(GalerkinTruncation, TableSizesAndSeparableConsistency) {
  const auto spec = ProcessSpec::create(2, 1.0, Datum::gaussian(2.0, {1.0, -0.5}), Datum::hat_isotropic(1.0, {0.0, 0.0}));
  const GalerkinTruncation tr(spec, 6);
  EXPECT_EQ(tr.alpha().values.size(), 36u);
  EXPECT_EQ(tr.beta().values.size(), 36u);
  const MultiIndex n{2, 3};
  EXPECT_NEAR(tr.alpha().at(n), fourier_coefficient(spec.phi0(), n, spec.normalization()), 1e-14);
  EXPECT_NEAR(tr.beta().at(n), fourier_coefficient(spec.psiT(), n, spec.normalization()), 1e-12);
}

TEST(GalerkinTruncation, GroundStateFormAtHorizon) {
  const auto spec = ProcessSpec::create(2, 3.0, Datum::gaussian(1.0, {0.0, 0.0}), Datum::gaussian(1.0, {0.0, 0.0}));
  const GalerkinTruncation tr(spec, 1);
  const double a0 = unit_fourier_coefficient(spec.phi0(), MultiIndex::zero(2));
  for (double r : {0.0, 0.5, 1.5}) {
    const std::vector<double> x{r, -r};
    const double expected = std::pow(std::numbers::pi, -0.5) * spec.normalization() * a0 * std::exp(-(2 * r * r + 6.0) / 2.0);
    EXPECT_NEAR(truncated_forward(tr, x, 3.0), expected, 1e-15);
  }
}

TEST(SpectralNormalization, ResidualVanishesWithExactConstant) {
  const Datum g = Datum::gaussian(1.0, {0.0});
  EXPECT_LE(spectral_normalization_residual(GalerkinTruncation(ProcessSpec::create(1, 2.0, g, g), 30)), 1e-10);
  const auto spec = ProcessSpec::create(2, 1.0, Datum::hat_product(0.7, {0.1, 0.0}), Datum::gaussian(2.0, {0.0, 0.5}));
  EXPECT_LE(spectral_normalization_residual(GalerkinTruncation(spec, 40)), 1e-10);
}

TEST(SpectralNormalization, GroundStateResidualDecaysLikeExpMinusT) {
  const Datum phi = Datum::gaussian(2.0, {1.0}), psi = Datum::gaussian(0.5, {0.5});
  std::vector<double> scaled;
  for (double T : {6.0, 8.0, 10.0, 12.0}) {
    const double r = spectral_normalization_residual(GalerkinTruncation(ProcessSpec::create(1, T, phi, psi), 1));
    EXPECT_GT(r, 0.0);
    scaled.push_back(r * std::exp(T));
  }
  for (std::size_t i = 1; i < scaled.size(); ++i) EXPECT_NEAR(scaled[i] / scaled[0], 1.0, 0.05);
}

TEST(LemmaNormalization, ExactForGroundStateTruncation) {
  const Datum phi = Datum::gaussian(2.0, {1.0, 0.0}), psi = Datum::hat_product(1.0, {0.0, 0.3});
  const auto spec = ProcessSpec::create(2, 5.0, phi, psi);
  const LemmaNormalization ln = lemma_normalization(2, 5.0, phi, psi);
  EXPECT_GT(ln.value, 0.0);
  EXPECT_LE(spectral_normalization_residual(GalerkinTruncation(spec, 1, ln.value)), 1e-14);
}

TEST(LemmaNormalization, AffineLogAndExponentialAccuracy) {
  const Datum g = Datum::gaussian(1.5, {0.4}), h = Datum::gaussian(0.8, {-0.2});
  const double l4 = std::log(lemma_normalization(1, 4.0, g, h).value);
  const double l8 = std::log(lemma_normalization(1, 8.0, g, h).value);
  EXPECT_NEAR((l8 - l4) / 4.0, 0.25, 1e-14);
  EXPECT_EQ(lemma_normalization(1, 4.0, g, h).c, lemma_normalization(1, 8.0, g, h).c);
  for (double T : {4.0, 8.0, 12.0}) {
    const double rel = std::abs(lemma_normalization(1, T, g, h).value / normalization_constant(1, T, g, h) - 1.0);
    EXPECT_LE(rel, 2.0 * std::exp(-T));
  }
}

TEST(Prop4, ErrorWithinBoundAndDecaying) {
  const Region F0 = Region::ball({0.0}, 1.0), FT = Region::box({-0.5}, {2.0});
  double prev = 1.0;
  for (double T : {3.0, 5.0, 7.0, 9.0}) {
    const auto spec = ProcessSpec::create(1, T, Datum::gaussian(2.0, {1.0}), Datum::gaussian(0.5, {0.5}));
    const Prop4Result p = prop4_joint_probability(2.0, 0.5, std::vector<double>{1.0}, std::vector<double>{0.5}, F0, FT, T, 1);
    const double err = std::abs(p.leading - joint_endpoint_probability(spec, F0, FT));
    EXPECT_LE(err, p.total_bound);
    EXPECT_EQ(p.total_bound, 2.0 * p.error_bound);
    EXPECT_LT(err, prev);
    prev = err;
  }
}

TEST(Prop4, TwoDimensionalLeadingTermFactorizes) {
  const Region F = Region::box({-1.0, -1.0}, {1.0, 0.5});
  const std::vector<double> a{0.5, -0.5}, b{0.0, 1.0};
  const Prop4Result p = prop4_joint_probability(1.5, 0.7, a, b, F, F, 12.0, 2);
  const auto spec = ProcessSpec::create(2, 12.0, Datum::gaussian(1.5, a), Datum::gaussian(0.7, b));
  EXPECT_LE(std::abs(p.leading - joint_endpoint_probability(spec, F, F)), p.total_bound);
  EXPECT_LT(p.total_bound, 1e-3);
}

TEST(N1Marginal, ApproachesExactMarginal) {
  const Region F = Region::ball({0.0}, 1.0);
  for (double T : {6.0, 10.0}) {
    const auto spec = ProcessSpec::create(1, T, Datum::gaussian(2.0, {1.0}), Datum::gaussian(0.5, {0.5}));
    EXPECT_LE(std::abs(n1_marginal_probability(spec, F) - region_probability(spec, F, T)), 2.0 * std::exp(-T));
  }
  const auto loop = ProcessSpec::create(1, 2.0, Datum::dirac(1), Datum::dirac(1));
  EXPECT_THROW(n1_marginal_probability(loop, F), UnsupportedError);
}
