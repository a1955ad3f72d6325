#pragma once

// Exact sampling of the centered Gaussian cases on a finite time grid, and Monte
// Carlo estimators built on the samples.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdlib>
#include <numeric>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include <Eigen/Dense>

#include "bernstein/errors.hpp"
#include "bernstein/model.hpp"
#include "bernstein/process.hpp"
#include "bernstein/region.hpp"

namespace bernstein {

/// Default cap on the size of one batch (paths * times * d doubles).
inline constexpr std::size_t kDefaultSampleBudgetBytes = std::size_t{1} << 30;

/// One Gaussian case on a strictly increasing grid inside [0, T].
struct GaussianCase {
  ProcessCase kind = ProcessCase::stationary;
  std::size_t dimension = 1;
  double horizon = 1.0;
  std::vector<double> times;

  void validate() const {
    detail::require(kind != ProcessCase::general, "GaussianCase: only stationary, pinned and loop cases are Gaussian");
    detail::require(dimension >= 1, "GaussianCase: d must be >= 1");
    detail::require(horizon > 0.0 && std::isfinite(horizon), "GaussianCase: T must be positive");
    detail::require(!times.empty(), "GaussianCase: empty time grid");
    for (std::size_t k = 0; k < times.size(); ++k) {
      detail::require(times[k] >= 0.0 && times[k] <= horizon, "GaussianCase: grid times must lie in [0, T]");
      if (k > 0) detail::require(times[k] > times[k - 1], "GaussianCase: grid must increase strictly");
    }
  }
};

/// The case of a ProcessSpec, if it is one of the Gaussian ones.
inline GaussianCase gaussian_case(const ProcessSpec& spec, std::vector<double> times) {
  GaussianCase c{spec.process_case(), spec.dimension(), spec.horizon(), std::move(times)};
  if (c.kind == ProcessCase::general) throw ValidationError("sampling needs a stationary, pinned or loop process");
  c.validate();
  return c;
}

/// Paths stored path-major: value(p, k, j) is component j at grid time k of path p.
struct SampleBatch {
  GaussianCase source;
  std::uint64_t seed = 0;
  std::size_t count = 0;
  std::vector<double> values;

  std::size_t times() const { return source.times.size(); }
  std::size_t dimension() const { return source.dimension; }
  double value(std::size_t p, std::size_t k, std::size_t j) const {
    return values[(p * times() + k) * dimension() + j];
  }
  std::span<const double> point(std::size_t p, std::size_t k) const {
    return {values.data() + (p * times() + k) * dimension(), dimension()};
  }
};

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Independent generator for one path, a function of (seed, path) only.
inline std::mt19937_64 path_stream(std::uint64_t seed, std::size_t path) {
  return std::mt19937_64(splitmix64(splitmix64(seed) ^ splitmix64(static_cast<std::uint64_t>(path) + 1)));
}

/// Worker count: hardware concurrency capped by BERNSTEIN_LAB_THREADS.
inline unsigned worker_count() {
  unsigned n = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("BERNSTEIN_LAB_THREADS")) {
    const long cap = std::strtol(env, nullptr, 10);
    if (cap >= 1) n = std::min<unsigned>(n, static_cast<unsigned>(cap));
  }
  return n;
}

/// Runs body(i) for i in [0, n), split in contiguous blocks over the workers.
template <class Body>
void parallel_for(std::size_t n, Body body) {
  const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(worker_count(), std::max<std::size_t>(n / 256, 1)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::vector<std::thread> pool;
  const std::size_t block = (n + workers - 1) / workers;
  for (unsigned w = 0; w < workers; ++w) {
    const std::size_t lo = w * block, hi = std::min(n, lo + block);
    if (lo >= hi) break;
    pool.emplace_back([lo, hi, &body] {
      for (std::size_t i = lo; i < hi; ++i) body(i);
    });
  }
  for (auto& t : pool) t.join();
}

/// Factor C = L L^T. Rows with zero variance stay exactly zero; the rest use
/// Cholesky, or a symmetric eigendecomposition with eigenvalues below 1e-12 clipped.
inline Eigen::MatrixXd covariance_factor(const Eigen::MatrixXd& C) {
  const Eigen::Index n = C.rows();
  const double diag_scale = std::max(1.0, n > 0 ? C.diagonal().cwiseAbs().maxCoeff() : 0.0);
  std::vector<Eigen::Index> live;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (C(i, i) < -1e-10 * diag_scale) throw NumericError("sampler: covariance matrix has a negative variance");
    if (C(i, i) > 0.0) live.push_back(i);
  }
  Eigen::MatrixXd sub(live.size(), live.size());
  for (std::size_t a = 0; a < live.size(); ++a)
    for (std::size_t b = 0; b < live.size(); ++b) sub(a, b) = C(live[a], live[b]);
  Eigen::MatrixXd Lsub;
  Eigen::LLT<Eigen::MatrixXd> llt(sub);
  if (llt.info() == Eigen::Success) {
    Lsub = llt.matrixL();
  } else {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sub);
    Eigen::VectorXd ev = es.eigenvalues();
    const double scale = std::max(1.0, ev.cwiseAbs().maxCoeff());
    if (ev.minCoeff() < -1e-10 * scale) throw NumericError("sampler: covariance matrix is not positive semidefinite");
    for (Eigen::Index i = 0; i < ev.size(); ++i) ev(i) = ev(i) < 1e-12 ? 0.0 : std::sqrt(ev(i));
    Lsub = es.eigenvectors() * ev.asDiagonal();
  }
  Eigen::MatrixXd L = Eigen::MatrixXd::Zero(n, static_cast<Eigen::Index>(live.size()));
  for (std::size_t a = 0; a < live.size(); ++a) L.row(live[a]) = Lsub.row(static_cast<Eigen::Index>(a));
  return L;
}

/// Loop transition from (s, x) to time t: Gaussian with mean m x and variance q, where
///   m = sinh(T-t) / sinh(T-s),   q = sinh(t-s) sinh(T-t) / sinh(T-s).
struct LoopStep {
  double mean_factor;
  double variance;
};

inline LoopStep loop_step(double s, double t, double T) {
  if (t >= T) return {0.0, 0.0};
  const double m = std::exp(-(t - s)) * std::expm1(-2.0 * (T - t)) / std::expm1(-2.0 * (T - s));
  return {m, sinh_ratio(t - s, T - t)};
}

/// Loop steps along the grid, starting from the origin at time 0. Fails unless
/// the implied marginal variances reproduce the loop width parameter.
inline std::vector<LoopStep> loop_steps(const GaussianCase& c) {
  std::vector<LoopStep> steps;
  double prev = 0.0, var = 0.0;
  for (double t : c.times) {
    const LoopStep st = t == 0.0 ? LoopStep{0.0, 0.0} : loop_step(prev, t, c.horizon);
    var = st.mean_factor * st.mean_factor * var + st.variance;
    const double rho = width_parameter(ProcessCase::loop, t, c.horizon);
    if (std::abs(var - rho) > 1e-10) throw ConsistencyError("sampler: loop kernel does not reproduce the loop width");
    steps.push_back(st);
    prev = t;
  }
  return steps;
}

}  // namespace detail

/// Draws `count` independent paths from the exact finite-dimensional law. Path p
/// only depends on (seed, p), so batches do not depend on the thread count.
inline SampleBatch sample_paths(const GaussianCase& c, std::size_t count, std::uint64_t seed,
                                std::size_t budget_bytes = kDefaultSampleBudgetBytes) {
  c.validate();
  detail::require(count >= 1, "sample_paths: count must be >= 1");
  const std::size_t n = c.times.size(), d = c.dimension;
  if (count > budget_bytes / sizeof(double) / (n * d))
    throw ValidationError("sample_paths: batch exceeds the memory budget");
  SampleBatch batch{c, seed, count, std::vector<double>(count * n * d)};

  if (c.kind == ProcessCase::loop) {
    const auto steps = detail::loop_steps(c);
    detail::parallel_for(count, [&](std::size_t p) {
      auto rng = detail::path_stream(seed, p);
      std::normal_distribution<double> normal;
      for (std::size_t j = 0; j < d; ++j) {
        double x = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
          const double z = normal(rng);
          x = steps[k].mean_factor * x + std::sqrt(steps[k].variance) * z;
          batch.values[(p * n + k) * d + j] = x;
        }
      }
    });
    return batch;
  }

  const Eigen::MatrixXd L = detail::covariance_factor(CovarianceKernel(c.kind, d, c.horizon).matrix(c.times));
  const Eigen::Index r = L.cols();
  detail::parallel_for(count, [&](std::size_t p) {
    auto rng = detail::path_stream(seed, p);
    std::normal_distribution<double> normal;
    Eigen::VectorXd z(r);
    for (std::size_t j = 0; j < d; ++j) {
      for (Eigen::Index i = 0; i < r; ++i) z(i) = normal(rng);
      const Eigen::VectorXd x = L * z;
      for (std::size_t k = 0; k < n; ++k) batch.values[(p * n + k) * d + j] = x(static_cast<Eigen::Index>(k));
    }
  });
  return batch;
}

struct Estimate {
  double value = 0.0;
  double std_error = 0.0;
};

/// Fraction of paths in F at grid index k, with the binomial standard error.
inline Estimate empirical_region_probability(const SampleBatch& batch, const Region& F, std::size_t k) {
  detail::require(k < batch.times(), "empirical_region_probability: time index out of range");
  detail::require(F.dimension() == batch.dimension(), "empirical_region_probability: dimension mismatch");
  std::size_t hits = 0;
  for (std::size_t p = 0; p < batch.count; ++p)
    if (F.contains(batch.point(p, k))) ++hits;
  const double q = static_cast<double>(hits) / static_cast<double>(batch.count);
  return {q, std::sqrt(q * (1.0 - q) / static_cast<double>(batch.count))};
}

/// Per-component sample variance at grid index k, averaged over components.
inline Estimate empirical_width(const SampleBatch& batch, std::size_t k) {
  detail::require(k < batch.times(), "empirical_width: time index out of range");
  detail::require(batch.count >= 2, "empirical_width: need at least two paths");
  const double n = static_cast<double>(batch.count);
  double total = 0.0;
  for (std::size_t j = 0; j < batch.dimension(); ++j) {
    double mean = 0.0;
    for (std::size_t p = 0; p < batch.count; ++p) mean += batch.value(p, k, j);
    mean /= n;
    double ss = 0.0;
    for (std::size_t p = 0; p < batch.count; ++p) ss += (batch.value(p, k, j) - mean) * (batch.value(p, k, j) - mean);
    total += ss / (n - 1.0);
  }
  const double w = total / static_cast<double>(batch.dimension());
  return {w, w * std::sqrt(2.0 / ((n - 1.0) * static_cast<double>(batch.dimension())))};
}

/// E[Z^j_{t_a} Z^j_{t_b}] (mean zero known), pooled over components.
inline Estimate empirical_covariance(const SampleBatch& batch, std::size_t a, std::size_t b) {
  detail::require(a < batch.times() && b < batch.times(), "empirical_covariance: time index out of range");
  const std::size_t m = batch.count * batch.dimension();
  double s = 0.0, s2 = 0.0;
  for (std::size_t p = 0; p < batch.count; ++p)
    for (std::size_t j = 0; j < batch.dimension(); ++j) {
      const double v = batch.value(p, a, j) * batch.value(p, b, j);
      s += v;
      s2 += v * v;
    }
  const double mean = s / static_cast<double>(m);
  const double var = std::max(0.0, s2 / static_cast<double>(m) - mean * mean);
  return {mean, std::sqrt(var / static_cast<double>(m))};
}

struct KsResult {
  double statistic = 0.0;
  double p_value = 1.0;
};

/// Asymptotic Kolmogorov distribution tail with the Stephens small-sample correction.
inline double kolmogorov_p_value(double D, std::size_t n) {
  const double sn = std::sqrt(static_cast<double>(n));
  const double lambda = (sn + 0.12 + 0.11 / sn) * D;
  if (lambda < 0.2) return 1.0;
  double p = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    p += (k % 2 == 1 ? 2.0 : -2.0) * term;
    if (term < 1e-16) break;
  }
  return std::clamp(p, 0.0, 1.0);
}

/// One-sample KS test of component j at grid index k against N(0, variance).
inline KsResult ks_test_normal(const SampleBatch& batch, std::size_t k, std::size_t j, double variance) {
  detail::require(k < batch.times() && j < batch.dimension(), "ks_test_normal: index out of range");
  detail::require(variance > 0.0, "ks_test_normal: variance must be positive");
  std::vector<double> xs(batch.count);
  for (std::size_t p = 0; p < batch.count; ++p) xs[p] = batch.value(p, k, j);
  std::sort(xs.begin(), xs.end());
  const double n = static_cast<double>(xs.size());
  const double sd = std::sqrt(variance);
  double D = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double F = 0.5 * std::erfc(-xs[i] / (sd * std::numbers::sqrt2));
    D = std::max({D, F - static_cast<double>(i) / n, static_cast<double>(i + 1) / n - F});
  }
  return {D, kolmogorov_p_value(D, xs.size())};
}

/// Two-sample KS test between component j of two batches (grid indices ka, kb).
inline KsResult ks_test_two_sample(const SampleBatch& a, std::size_t ka, const SampleBatch& b, std::size_t kb,
                                   std::size_t j = 0) {
  std::vector<double> xa(a.count), xb(b.count);
  for (std::size_t p = 0; p < a.count; ++p) xa[p] = a.value(p, ka, j);
  for (std::size_t p = 0; p < b.count; ++p) xb[p] = b.value(p, kb, j);
  std::sort(xa.begin(), xa.end());
  std::sort(xb.begin(), xb.end());
  double D = 0.0;
  std::size_t i = 0, k = 0;
  while (i < xa.size() && k < xb.size()) {
    const double x = std::min(xa[i], xb[k]);
    while (i < xa.size() && xa[i] <= x) ++i;
    while (k < xb.size() && xb[k] <= x) ++k;
    D = std::max(D, std::abs(static_cast<double>(i) / xa.size() - static_cast<double>(k) / xb.size()));
  }
  const std::size_t ne = xa.size() * xb.size() / (xa.size() + xb.size());
  return {D, kolmogorov_p_value(D, ne)};
}

}  // namespace bernstein
