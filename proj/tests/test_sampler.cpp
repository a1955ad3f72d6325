#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>

#include "bernstein/sampler.hpp"

using namespace bernstein;

namespace {

void set_threads(const char* v) {
  if (v)
    ::setenv("BERNSTEIN_LAB_THREADS", v, 1);
  else
    ::unsetenv("BERNSTEIN_LAB_THREADS");
}

}  // namespace

TEST(Sampler, DeterministicForFixedSeed) {
  const GaussianCase gc{ProcessCase::loop, 2, 4.0, {0.5, 1.0, 2.0, 3.5}};
  const SampleBatch a = sample_paths(gc, 500, 7);
  const SampleBatch b = sample_paths(gc, 500, 7);
  const SampleBatch c = sample_paths(gc, 500, 8);
  EXPECT_EQ(a.values, b.values);
  EXPECT_NE(a.values, c.values);
}

TEST(Sampler, IndependentOfThreadCount) {
  const GaussianCase gc{ProcessCase::pinned_start, 1, 3.0, {0.2, 0.7, 1.5}};
  set_threads("1");
  const SampleBatch one = sample_paths(gc, 2000, 3);
  set_threads("5");
  const SampleBatch five = sample_paths(gc, 2000, 3);
  set_threads(nullptr);
  EXPECT_EQ(one.values, five.values);
}

TEST(Sampler, RejectsNonGaussianAndOversizedRequests) {
  const auto spec = ProcessSpec::create(1, 1.0, Datum::hat_product(1.0, {0.0}), Datum::gaussian(1.0, {0.0}));
  EXPECT_THROW(gaussian_case(spec, {0.5}), ValidationError);
  const GaussianCase gc{ProcessCase::stationary, 2, 1.0, {0.1, 0.2}};
  EXPECT_THROW(sample_paths(gc, 1000, 1, 1000), ValidationError);
  const GaussianCase unsorted{ProcessCase::stationary, 1, 1.0, {0.5, 0.2}};
  EXPECT_THROW(sample_paths(unsorted, 10, 1), ValidationError);
}

TEST(Sampler, PinnedStartIsZeroAtTimeZero) {
  const GaussianCase gc{ProcessCase::pinned_start, 2, 2.0, {0.0, 1.0}};
  const SampleBatch b = sample_paths(gc, 100, 5);
  for (std::size_t p = 0; p < b.count; ++p) {
    EXPECT_EQ(b.value(p, 0, 0), 0.0);
    EXPECT_EQ(b.value(p, 0, 1), 0.0);
  }
  const GaussianCase loop{ProcessCase::loop, 1, 2.0, {0.0, 1.0, 2.0}};
  const SampleBatch l = sample_paths(loop, 100, 5);
  for (std::size_t p = 0; p < l.count; ++p) EXPECT_EQ(l.value(p, 2, 0), 0.0);
}

TEST(Sampler, StationaryMarginalsAreNormal) {
  const GaussianCase gc{ProcessCase::stationary, 2, 3.0, {0.3, 1.1, 2.0}};
  const SampleBatch b = sample_paths(gc, 20000, 11);
  for (std::size_t k = 0; k < 3; ++k)
    for (std::size_t j = 0; j < 2; ++j) EXPECT_GT(ks_test_normal(b, k, j, 0.5).p_value, 1e-3);
}

TEST(Sampler, LoopWidthsAndTimeReversal) {
  const double T = 4.0;
  const GaussianCase gc{ProcessCase::loop, 2, T, {0.5, 1.0, 2.0, 3.0, 3.5}};
  const SampleBatch b = sample_paths(gc, 40000, 13);
  for (std::size_t k = 0; k < gc.times.size(); ++k) {
    const Estimate w = empirical_width(b, k);
    EXPECT_LE(std::abs(w.value - width_parameter(ProcessCase::loop, gc.times[k], T)), 4.5 * w.std_error);
  }
  const SampleBatch other = sample_paths(gc, 40000, 14);
  EXPECT_GT(ks_test_two_sample(b, 1, other, 3).p_value, 1e-3);
  EXPECT_GT(ks_test_normal(b, 2, 1, width_parameter(ProcessCase::loop, 2.0, T)).p_value, 1e-3);
}

TEST(Sampler, PinnedEndCovariance) {
  const double T = 3.0;
  const GaussianCase gc{ProcessCase::pinned_end, 1, T, {1.0, 2.0, 2.8}};
  const SampleBatch b = sample_paths(gc, 100000, 17);
  const CovarianceKernel K(ProcessCase::pinned_end, 1, T);
  for (auto [i, k] : {std::pair<std::size_t, std::size_t>{0, 1}, {1, 2}, {0, 2}}) {
    const Estimate e = empirical_covariance(b, i, k);
    EXPECT_LE(std::abs(e.value - K(gc.times[i], gc.times[k], 0, 0)), 4.5 * e.std_error);
  }
}

TEST(Sampler, AnnulusProbabilityMatchesClosedForm) {
  const auto spec = ProcessSpec::create(2, 2.0, Datum::dirac(2), Datum::gaussian(1.0, {0.0, 0.0}));
  const GaussianCase gc = gaussian_case(spec, {0.5, 1.5});
  const SampleBatch b = sample_paths(gc, 50000, 19);
  const Region A = Region::annulus(2, 0.3, 0.9);
  for (std::size_t k = 0; k < 2; ++k) {
    const Estimate e = empirical_region_probability(b, A, k);
    EXPECT_LE(std::abs(e.value - region_probability(spec, A, gc.times[k])), 4.5 * e.std_error);
  }
}

TEST(CovarianceFactor, DegenerateMatrices) {
  Eigen::MatrixXd C(3, 3);
  C << 1.0, 1.0, 0.0, 1.0, 1.0, 0.0, 0.0, 0.0, 0.0;
  const Eigen::MatrixXd L = detail::covariance_factor(C);
  EXPECT_LE((L * L.transpose() - C).cwiseAbs().maxCoeff(), 1e-12);
  Eigen::MatrixXd bad(2, 2);
  bad << 1.0, 0.0, 0.0, -1.0;
  EXPECT_THROW(detail::covariance_factor(bad), NumericError);
}

TEST(Kolmogorov, PValueLimits) {
  EXPECT_EQ(kolmogorov_p_value(0.0, 100), 1.0);
  EXPECT_LT(kolmogorov_p_value(0.5, 100), 1e-10);
  // Critical value 1.358 / sqrt(n) at the 5% level.
  EXPECT_NEAR(kolmogorov_p_value(1.358 / std::sqrt(10000.0), 10000), 0.05, 2e-3);
}
