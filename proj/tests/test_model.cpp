#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "bernstein/model.hpp"
#include "generators.hpp"

using namespace bernstein;

namespace {

double mehler_1d(double x, double t, double y) {
  return std::exp(-((x * x + y * y) * std::cosh(t) - 2.0 * x * y) / (2.0 * std::sinh(t))) /
         std::sqrt(2.0 * std::numbers::pi * std::sinh(t));
}

template <class F>
double trapezoid(F f, double a, double b, int n = 6000) {
  const double h = (b - a) / n;
  double s = 0.0;
  for (int i = 0; i <= n; ++i) s += (i == 0 || i == n ? 0.5 : 1.0) * f(a + h * i);
  return s * h;
}

// int g(x,t,y) exp(-(y-a)^2/(2 sigma)) dy by trapezoid.
double propagated_gaussian_1d(double sigma, double a, double x, double t) {
  return trapezoid([&](double y) { return mehler_1d(x, t, y) * std::exp(-(y - a) * (y - a) / (2.0 * sigma)); },
                   a - 14.0 * std::sqrt(sigma) - 10.0, a + 14.0 * std::sqrt(sigma) + 10.0);
}

}  // namespace

TEST(Classify, NamedCases) {
  const Datum g = Datum::gaussian(1.0, {0.0});
  const Datum d = Datum::dirac(1);
  EXPECT_EQ(classify(g, g), ProcessCase::stationary);
  EXPECT_EQ(classify(d, g), ProcessCase::pinned_start);
  EXPECT_EQ(classify(g, d), ProcessCase::pinned_end);
  EXPECT_EQ(classify(d, d), ProcessCase::loop);
  EXPECT_EQ(classify(Datum::gaussian(2.0, {0.0}), g), ProcessCase::general);
  EXPECT_EQ(classify(Datum::gaussian(1.0, {0.1}), g), ProcessCase::general);
}

TEST(Datum, Validation) {
  EXPECT_THROW(Datum::gaussian(0.0, {0.0}), ValidationError);
  EXPECT_THROW(Datum::hat_product(-1.0, {0.0}), ValidationError);
  EXPECT_THROW(Datum::gaussian(1.0, {}), ValidationError);
}

TEST(Normalization, NamedCasesClosedForm) {
  for (std::size_t d : {1u, 2u, 3u})
    for (double T : {0.5, 1.0, 2.0, 5.0}) {
      const double dd = static_cast<double>(d);
      const Datum g = Datum::gaussian(1.0, Point(d, 0.0));
      const Datum delta = Datum::dirac(d);
      EXPECT_NEAR(normalization_constant(d, T, g, g) / (std::pow(std::numbers::pi, -dd / 4) * std::exp(dd * T / 4)),
                  1.0, 1e-12);
      EXPECT_NEAR(normalization_constant(d, T, delta, g) / std::exp(dd * T / 4), 1.0, 1e-12);
      EXPECT_NEAR(normalization_constant(d, T, delta, delta) / std::pow(2.0 * std::numbers::pi * std::sinh(T), dd / 4),
                  1.0, 1e-12);
    }
}

TEST(Normalization, ThreeRoutesAgreeForGaussians) {
  gen::Source g(41);
  for (int c = 0; c < 20; ++c) {
    const std::size_t d = g.integer(1, 2);
    const Datum phi = Datum::gaussian(g.uniform(0.3, 3.0), g.point(d, -1.5, 1.5));
    const Datum psi = Datum::gaussian(g.uniform(0.3, 3.0), g.point(d, -1.5, 1.5));
    const double T = g.uniform(0.3, 4.0);
    const double closed = normalization_integral(phi, psi, T, NormalizationMethod::closed_form);
    EXPECT_NEAR(normalization_integral(phi, psi, T, NormalizationMethod::quadrature) / closed, 1.0, 1e-10);
    EXPECT_NEAR(normalization_integral(phi, psi, T, NormalizationMethod::spectral) / closed, 1.0, 1e-10);
  }
}

TEST(Normalization, OneDimensionalTrapezoidOracle) {
  const double s0 = 2.0, a0 = 1.0, sT = 0.5, aT = -0.5, T = 1.5;
  const double I = trapezoid(
      [&](double x) { return propagated_gaussian_1d(s0, a0, x, T) * std::exp(-(x - aT) * (x - aT) / (2.0 * sT)); },
      -12.0, 12.0, 1500);
  const double closed = normalization_integral(Datum::gaussian(s0, {a0}), Datum::gaussian(sT, {aT}), T);
  EXPECT_NEAR(closed / I, 1.0, 1e-9);
}

TEST(Normalization, HatDataQuadratureAndSpectralAgree) {
  const Datum phi = Datum::hat_product(0.8, {0.2, -0.1});
  const Datum psi = Datum::hat_isotropic(0.6, {-0.3, 0.4});
  const double q = normalization_integral(phi, psi, 1.0, NormalizationMethod::quadrature);
  const double s = normalization_integral(phi, psi, 1.0, NormalizationMethod::spectral);
  EXPECT_NEAR(q / s, 1.0, 1e-10);
  EXPECT_THROW(normalization_integral(phi, psi, 1.0, NormalizationMethod::closed_form), UnsupportedError);
}

TEST(Normalization, RejectsBadHorizon) {
  const Datum g = Datum::gaussian(1.0, {0.0});
  EXPECT_THROW(ProcessSpec::create(1, 0.0, g, g), ValidationError);
  EXPECT_THROW(ProcessSpec::create(2, 1.0, g, g), ValidationError);
}

TEST(ForwardSolution, StationaryIsSeparatedInTime) {
  const Datum g = Datum::gaussian(1.0, {0.0, 0.0});
  const auto spec = ProcessSpec::create(2, 2.0, g, g);
  for (double t : {0.0, 0.7, 2.0}) {
    const std::vector<double> x{0.4, -1.1};
    const double expected = spec.normalization() * std::exp(-t) * std::exp(-0.5 * (0.16 + 1.21));
    EXPECT_NEAR(forward_solution(spec, x, t), expected, 1e-14);
    EXPECT_NEAR(backward_solution(spec, x, t), spec.normalization() * std::exp(-(2.0 - t)) * std::exp(-0.5 * 1.37),
                1e-14);
  }
}

TEST(ForwardSolution, GaussianMatchesTrapezoidOracle) {
  gen::Source g(42);
  for (int c = 0; c < 15; ++c) {
    const double sigma = g.uniform(0.3, 3.0), a = g.uniform(-1.5, 1.5);
    const double T = 3.0;
    const auto spec = ProcessSpec::create(1, T, Datum::gaussian(sigma, {a}), Datum::gaussian(1.0, {0.0}));
    const double x = g.uniform(-3.0, 3.0), t = g.uniform(0.2, 3.0);
    const double ref = spec.normalization() * propagated_gaussian_1d(sigma, a, x, t);
    const std::vector<double> X{x};
    EXPECT_NEAR(forward_solution(spec, X, t, SolutionPath::closed_form()), ref, 1e-10 * std::max(ref, 1e-3));
  }
}

TEST(ForwardSolution, PathsAgree) {
  const auto spec =
      ProcessSpec::create(2, 2.0, Datum::gaussian(2.0, {1.0, 0.0}), Datum::gaussian(0.5, {0.0, -0.5}));
  gen::Source g(43);
  for (int c = 0; c < 20; ++c) {
    const auto x = g.point(2, -2.5, 2.5);
    const double t = g.uniform(0.1, 2.0);
    const double closed = forward_solution(spec, x, t, SolutionPath::closed_form());
    EXPECT_NEAR(forward_solution(spec, x, t, SolutionPath::quadrature()), closed, 1e-12);
    EXPECT_NEAR(forward_solution(spec, x, t, SolutionPath::spectral(60)), closed, 1e-10);
    EXPECT_NEAR(backward_solution(spec, x, t, SolutionPath::quadrature()),
                backward_solution(spec, x, t, SolutionPath::closed_form()), 1e-12);
  }
}

TEST(ForwardSolution, DiracDataIsTheKernel) {
  const auto spec = ProcessSpec::create(1, 2.0, Datum::dirac(1), Datum::gaussian(1.0, {0.0}));
  const std::vector<double> x{0.6}, z{0.0};
  EXPECT_NEAR(forward_solution(spec, x, 0.8), spec.normalization() * mehler(x, 0.8, z), 1e-15);
  EXPECT_THROW(forward_solution(spec, x, 0.0), ValidationError);
  EXPECT_THROW(forward_solution(spec, x, 2.5), ValidationError);
}

TEST(ForwardSolution, HatOnlyByQuadratureOrSeries) {
  const auto spec = ProcessSpec::create(1, 1.0, Datum::hat_product(1.0, {0.0}), Datum::gaussian(1.0, {0.0}));
  const std::vector<double> x{0.3};
  EXPECT_THROW(forward_solution(spec, x, 0.5, SolutionPath::closed_form()), UnsupportedError);
  // (1 - |y|) on [-1, 1] propagated by the trapezoid oracle.
  const double ref = spec.normalization() *
                     trapezoid([&](double y) { return mehler_1d(0.3, 0.5, y) * (1.0 - std::abs(y)); }, -1.0, 1.0, 20000);
  EXPECT_NEAR(forward_solution(spec, x, 0.5, SolutionPath::quadrature()), ref, 1e-8);
  EXPECT_NEAR(forward_solution(spec, x, 0.5, SolutionPath::spectral(120)), ref, 1e-6);
  EXPECT_NEAR(forward_solution(spec, x, 0.0), spec.normalization() * 0.7, 1e-15);
}

TEST(PdeResidual, SmallForExactSolutions) {
  const auto spec = ProcessSpec::create(1, 2.0, Datum::gaussian(2.0, {0.5}), Datum::gaussian(1.0, {0.0}));
  const SolutionField u(spec, SolutionField::Direction::forward);
  EXPECT_LE(pde_residual(u, std::vector<double>{0.5}, 1.0, 1e-4), 1e-6);

  const auto loop = ProcessSpec::create(1, 2.0, Datum::dirac(1), Datum::dirac(1));
  const SolutionField v(loop, SolutionField::Direction::backward);
  EXPECT_LE(pde_residual(v, std::vector<double>{0.2}, 1.0, 1e-4), 1e-6);

  const auto hat = ProcessSpec::create(1, 1.0, Datum::hat_product(1.0, {0.0}), Datum::gaussian(1.0, {0.0}));
  const SolutionField uh(hat, SolutionField::Direction::forward, SolutionPath::quadrature());
  EXPECT_LE(pde_residual(uh, std::vector<double>{0.2}, 0.5, 1e-3), 1e-4);
}

TEST(EndpointIntegral, FullSpaceGivesNormalization) {
  const auto spec = ProcessSpec::create(2, 1.5, Datum::gaussian(0.7, {0.3, 0.0}), Datum::hat_isotropic(1.0, {0.0, 0.5}));
  const Region full = Region::full_space(2);
  const Integral I = endpoint_integral(spec.phi0(), spec.psiT(), 1.5, full, full);
  EXPECT_NEAR(I.value * spec.normalization() * spec.normalization(), 1.0, 1e-9);
}
