#pragma once

// Spectral basis of the isotropic harmonic oscillator -1/2 Laplacian + |x|^2/2:
// Hermite polynomials, normalized Hermite functions and their tensor products.

#include <cmath>
#include <compare>
#include <cstddef>
#include <initializer_list>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "bernstein/errors.hpp"

namespace bernstein {

/// Uniform bound |h_n(x)| <= k * pi^{-1/4} (Cramer-Charlier inequality).
inline constexpr double kCramerCharlier = 1.086435;
static_assert(kCramerCharlier > 1.0 && kCramerCharlier <= 1.086435);

/// Largest Hermite degree accepted by the evaluators.
inline constexpr int kMaxHermiteDegree = 512;

using Point = std::vector<double>;

class MultiIndex {
 public:
  MultiIndex() = default;
  explicit MultiIndex(std::vector<int> entries) : entries_(std::move(entries)) {
    detail::require(!entries_.empty(), "MultiIndex: dimension must be >= 1");
    for (int n : entries_) detail::require(n >= 0, "MultiIndex: entries must be >= 0");
  }
  MultiIndex(std::initializer_list<int> entries) : MultiIndex(std::vector<int>(entries)) {}

  static MultiIndex zero(std::size_t d) { return MultiIndex(std::vector<int>(d, 0)); }

  std::size_t dimension() const { return entries_.size(); }
  int operator[](std::size_t j) const { return entries_[j]; }
  std::span<const int> entries() const { return entries_; }
  auto begin() const { return entries_.begin(); }
  auto end() const { return entries_.end(); }

  int total() const {
    int s = 0;
    for (int n : entries_) s += n;
    return s;
  }
  int max_entry() const {
    int m = 0;
    for (int n : entries_) m = n > m ? n : m;
    return m;
  }
  bool is_zero() const { return max_entry() == 0; }

  auto operator<=>(const MultiIndex&) const = default;

 private:
  std::vector<int> entries_;
};

struct SpectralData {
  MultiIndex index;
  double energy = 0.0;
};

namespace detail {

inline void check_degree(int n) {
  if (n < 0) throw ValidationError("Hermite degree must be >= 0");
  if (n > kMaxHermiteDegree)
    throw OutOfRangeError("Hermite degree " + std::to_string(n) + " exceeds cap " +
                          std::to_string(kMaxHermiteDegree));
}

inline void check_finite_point(std::span<const double> x) {
  for (double v : x) require(std::isfinite(v), "point coordinates must be finite");
}

// log(pi^{-1/4})
inline constexpr double kLogPiQuarter = -0.25 * 1.1447298858494002;

}  // namespace detail

/// Physicists' Hermite polynomial H_n(x) via H_{n+1} = 2x H_n - 2n H_{n-1}.
inline double hermite_polynomial(int n, double x) {
  detail::check_degree(n);
  detail::require(std::isfinite(x), "hermite_polynomial: x must be finite");
  if (n == 0) return 1.0;
  double prev = 1.0;
  double cur = 2.0 * x;
  for (int k = 1; k < n; ++k) {
    const double next = 2.0 * x * cur - 2.0 * k * prev;
    prev = cur;
    cur = next;
  }
  if (!std::isfinite(cur))
    throw OutOfRangeError("hermite_polynomial: H_" + std::to_string(n) + " overflows at x");
  return cur;
}

/// Hermite functions h_0(x), ..., h_nmax(x).
///
/// Runs the normalized recurrence
///   h_{k+1} = x sqrt(2/(k+1)) h_k - sqrt(k/(k+1)) h_{k-1}
/// on rescaled values with a running log-scale, so neither 2^n n! nor
/// exp(-x^2/2) can overflow or underflow prematurely.
inline std::vector<double> hermite_functions(int nmax, double x) {
  detail::check_degree(nmax);
  detail::require(std::isfinite(x), "hermite_functions: x must be finite");
  std::vector<double> out(static_cast<std::size_t>(nmax) + 1);
  double log_scale = detail::kLogPiQuarter - 0.5 * x * x;
  double prev = 0.0;
  double cur = 1.0;
  out[0] = std::exp(log_scale);
  constexpr double kBig = 1e150;
  for (int k = 0; k < nmax; ++k) {
    const double next = x * std::sqrt(2.0 / (k + 1)) * cur - std::sqrt(double(k) / (k + 1)) * prev;
    prev = cur;
    cur = next;
    if (std::abs(cur) > kBig) {
      cur /= kBig;
      prev /= kBig;
      log_scale += std::log(kBig);
    }
    out[static_cast<std::size_t>(k) + 1] =
        cur == 0.0 ? 0.0 : std::copysign(std::exp(std::log(std::abs(cur)) + log_scale), cur);
  }
  return out;
}

/// Normalized Hermite function h_n(x) = (pi^{1/2} 2^n n!)^{-1/2} e^{-x^2/2} H_n(x).
inline double hermite_function(int n, double x) { return hermite_functions(n, x).back(); }

/// Tensor eigenfunction h_n(x) = prod_j h_{n_j}(x_j).
inline double tensor_hermite(const MultiIndex& index, std::span<const double> x) {
  detail::require(index.dimension() == x.size(), "tensor_hermite: dimension mismatch");
  double v = 1.0;
  for (std::size_t j = 0; j < x.size(); ++j) v *= hermite_function(index[j], x[j]);
  return v;
}

/// Harmonic-oscillator energy E_n = sum_j n_j + d/2.
inline double energy(const MultiIndex& index) {
  return index.total() + 0.5 * static_cast<double>(index.dimension());
}

inline SpectralData spectral_data(const MultiIndex& index) { return {index, energy(index)}; }

/// All multi-indices of {0, ..., N-1}^d in lexicographic order (last axis fastest).
inline std::vector<MultiIndex> enumerate_truncation(std::size_t d, int N) {
  detail::require(d >= 1, "enumerate_truncation: d must be >= 1");
  detail::require(N >= 1, "enumerate_truncation: N must be >= 1");
  std::size_t count = 1;
  for (std::size_t j = 0; j < d; ++j) count *= static_cast<std::size_t>(N);
  std::vector<MultiIndex> out;
  out.reserve(count);
  std::vector<int> n(d, 0);
  for (std::size_t i = 0; i < count; ++i) {
    out.emplace_back(n);
    for (std::size_t j = d; j-- > 0;) {
      if (++n[j] < N) break;
      n[j] = 0;
    }
  }
  return out;
}

/// |(-1/2 Laplacian + |x|^2/2) h_n(x) - E_n h_n(x)| with a central-difference Laplacian.
inline double eigen_residual(const MultiIndex& index, std::span<const double> x, double h) {
  detail::require(h > 0.0, "eigen_residual: step must be positive");
  detail::require(index.dimension() == x.size(), "eigen_residual: dimension mismatch");
  const double center = tensor_hermite(index, x);
  Point shifted(x.begin(), x.end());
  double laplacian = 0.0;
  double r2 = 0.0;
  for (std::size_t j = 0; j < x.size(); ++j) {
    r2 += x[j] * x[j];
    shifted[j] = x[j] + h;
    const double plus = tensor_hermite(index, shifted);
    shifted[j] = x[j] - h;
    const double minus = tensor_hermite(index, shifted);
    shifted[j] = x[j];
    laplacian += (plus - 2.0 * center + minus) / (h * h);
  }
  return std::abs(-0.5 * laplacian + 0.5 * r2 * center - energy(index) * center);
}

}  // namespace bernstein
