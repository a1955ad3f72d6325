#pragma once

// Green's function of  d/dt u = 1/2 Laplacian u - V u  for the harmonic potential
// V(x) = |x|^2/2 (Mehler's kernel and its Hermite expansion), plus a pass-through
// kernel built from externally supplied eigendata.

#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <numbers>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "bernstein/errors.hpp"
#include "bernstein/hermite.hpp"
#include "bernstein/quadrature.hpp"

namespace bernstein {

/// Smallest time accepted by the closed-form kernel.
inline constexpr double kMinKernelTime = 1e-12;

namespace detail {

/// log(sinh t) for t > 0 without overflow.
inline double log_sinh(double t) {
  if (t > 20.0) return t - std::numbers::ln2 + std::log1p(-std::exp(-2.0 * t));
  return std::log(std::sinh(t));
}

/// coth t, stable for large t.
inline double coth(double t) { return 1.0 / std::tanh(t); }

inline void check_time(double t, const char* who) {
  if (!(t > 0.0)) throw ValidationError(std::string(who) + ": time must be positive");
  if (t < kMinKernelTime) throw NumericError(std::string(who) + ": sinh(t) underflows below t = 1e-12");
}

inline double dot(std::span<const double> x, std::span<const double> y) {
  double s = 0.0;
  for (std::size_t j = 0; j < x.size(); ++j) s += x[j] * y[j];
  return s;
}

inline double norm2(std::span<const double> x) { return dot(x, x); }

}  // namespace detail

/// Mehler's kernel
///   g(x,t,y) = (2 pi sinh t)^{-d/2} exp[-(cosh t (|x|^2+|y|^2) - 2(x,y)) / (2 sinh t)].
inline double mehler(std::span<const double> x, double t, std::span<const double> y) {
  detail::require(x.size() == y.size() && !x.empty(), "mehler: dimension mismatch");
  detail::check_time(t, "mehler");
  const double d = static_cast<double>(x.size());
  const double log_pref = -0.5 * d * (std::log(2.0 * std::numbers::pi) + detail::log_sinh(t));
  const double expo = -0.5 * detail::coth(t) * (detail::norm2(x) + detail::norm2(y)) +
                      detail::dot(x, y) * std::exp(-detail::log_sinh(t));
  return std::exp(log_pref + expo);
}

/// log g(x,t,y); finite wherever the kernel itself underflows.
inline double log_mehler(std::span<const double> x, double t, std::span<const double> y) {
  detail::require(x.size() == y.size() && !x.empty(), "log_mehler: dimension mismatch");
  detail::check_time(t, "log_mehler");
  const double d = static_cast<double>(x.size());
  return -0.5 * d * (std::log(2.0 * std::numbers::pi) + detail::log_sinh(t)) -
         0.5 * detail::coth(t) * (detail::norm2(x) + detail::norm2(y)) +
         detail::dot(x, y) * std::exp(-detail::log_sinh(t));
}

namespace detail {

/// Mehler's kernel at one fixed time, with the hyperbolic factors computed once.
class MehlerAtTime {
 public:
  MehlerAtTime(std::size_t d, double t) {
    check_time(t, "MehlerAtTime");
    log_pref_ = -0.5 * static_cast<double>(d) * (std::log(2.0 * std::numbers::pi) + log_sinh(t));
    coth_ = coth(t);
    inv_sinh_ = std::exp(-log_sinh(t));
  }
  double log_value(std::span<const double> x, std::span<const double> y) const {
    return log_pref_ - 0.5 * coth_ * (norm2(x) + norm2(y)) + dot(x, y) * inv_sinh_;
  }
  double operator()(std::span<const double> x, std::span<const double> y) const {
    return std::exp(log_value(x, y));
  }

 private:
  double log_pref_ = 0.0;
  double coth_ = 1.0;
  double inv_sinh_ = 0.0;
};

}  // namespace detail

/// Truncated Hermite expansion  sum_{n : 0 <= n_j <= N-1} e^{-t E_n} h_n(x) h_n(y).
///
/// The summand factorizes over axes, so the d-fold sum is evaluated as the
/// product of d one-dimensional sums; the two are algebraically identical.
inline double spectral_series(std::span<const double> x, double t, std::span<const double> y, int N) {
  detail::require(x.size() == y.size() && !x.empty(), "spectral_series: dimension mismatch");
  if (!(t > 0.0)) throw ValidationError("spectral_series: time must be positive");
  detail::require(N >= 1, "spectral_series: N must be >= 1");
  double g = 1.0;
  for (std::size_t j = 0; j < x.size(); ++j) {
    const auto hx = hermite_functions(N - 1, x[j]);
    const auto hy = hermite_functions(N - 1, y[j]);
    double s = 0.0;
    for (int n = N - 1; n >= 0; --n) s += std::exp(-t * (n + 0.5)) * hx[n] * hy[n];
    g *= s;
  }
  return g;
}

/// Uniform bound on |g - g_N| from the Cramer-Charlier inequality:
///   k^{2d} pi^{-d/2} sum_{n : max_j n_j >= N} e^{-t E_n}
/// = k^{2d} pi^{-d/2} e^{-dt/2} (1 - e^{-t})^{-d} [1 - (1 - e^{-Nt})^d].
inline double series_tail_bound(double t, std::size_t d, int N) {
  if (!(t > 0.0)) throw ValidationError("series_tail_bound: time must be positive");
  detail::require(d >= 1 && N >= 1, "series_tail_bound: need d >= 1 and N >= 1");
  const double dd = static_cast<double>(d);
  const double q_n = std::exp(-static_cast<double>(N) * t);
  const double missing = -std::expm1(dd * std::log1p(-q_n));
  const double log_geo = -dd * std::log(-std::expm1(-t));
  return std::pow(kCramerCharlier, 2.0 * dd) * std::pow(std::numbers::pi, -0.5 * dd) *
         std::exp(-0.5 * dd * t + log_geo) * missing;
}

/// Hypothesis on a user potential: continuous, bounded below, confining.
struct PotentialHypothesis {
  bool continuous = false;
  double lower_bound = -std::numeric_limits<double>::infinity();
  bool confining = false;

  bool holds() const { return continuous && std::isfinite(lower_bound) && confining; }
};

/// Externally computed spectrum and eigenfunctions of -1/2 Laplacian + V.
struct UserEigendata {
  std::size_t dimension = 1;
  std::vector<double> energies;
  std::vector<std::function<double(std::span<const double>)>> eigenfunctions;
};

/// Green's function in one of three representations.
class GreenFunction {
 public:
  struct Mehler {};
  struct Spectral {
    int truncation;
  };
  struct Eigendata {
    UserEigendata data;
  };

  static GreenFunction mehler_closed_form(std::size_t d) {
    detail::require(d >= 1, "GreenFunction: d must be >= 1");
    return GreenFunction(d, Mehler{});
  }
  static GreenFunction spectral_series(std::size_t d, int N) {
    detail::require(d >= 1, "GreenFunction: d must be >= 1");
    detail::require(N >= 1 && N - 1 <= kMaxHermiteDegree, "GreenFunction: truncation out of range");
    return GreenFunction(d, Spectral{N});
  }
  /// Accepted only if the potential satisfies the hypothesis and the eigendata are
  /// consistent (finite energies bounded below by inf V, one function per energy).
  static GreenFunction user_eigendata(UserEigendata data, const PotentialHypothesis& hyp) {
    if (!hyp.holds())
      throw ValidationError("user eigendata: potential must be continuous, bounded below and confining");
    detail::require(data.dimension >= 1, "user eigendata: dimension must be >= 1");
    detail::require(!data.energies.empty() && data.energies.size() == data.eigenfunctions.size(),
                    "user eigendata: need one eigenfunction per energy");
    for (double e : data.energies)
      detail::require(std::isfinite(e) && e >= hyp.lower_bound,
                      "user eigendata: energies must be finite and >= inf V");
    const std::size_t d = data.dimension;
    return GreenFunction(d, Eigendata{std::move(data)});
  }

  std::size_t dimension() const { return dim_; }
  bool is_closed_form() const { return std::holds_alternative<Mehler>(kind_); }

  double operator()(std::span<const double> x, double t, std::span<const double> y) const {
    detail::require(x.size() == dim_ && y.size() == dim_, "GreenFunction: dimension mismatch");
    return std::visit(
        [&](const auto& k) -> double {
          using K = std::decay_t<decltype(k)>;
          if constexpr (std::is_same_v<K, Mehler>) {
            return mehler(x, t, y);
          } else if constexpr (std::is_same_v<K, Spectral>) {
            return bernstein::spectral_series(x, t, y, k.truncation);
          } else {
            if (!(t > 0.0)) throw ValidationError("GreenFunction: time must be positive");
            double s = 0.0;
            for (std::size_t n = 0; n < k.data.energies.size(); ++n)
              s += std::exp(-t * k.data.energies[n]) * k.data.eigenfunctions[n](x) *
                   k.data.eigenfunctions[n](y);
            return s;
          }
        },
        kind_);
  }

  /// sum_n e^{-t E_n} over the represented spectrum (finite for t > 0).
  double trace(double t) const {
    if (!(t > 0.0)) throw ValidationError("GreenFunction::trace: time must be positive");
    const double d = static_cast<double>(dim_);
    return std::visit(
        [&](const auto& k) -> double {
          using K = std::decay_t<decltype(k)>;
          if constexpr (std::is_same_v<K, Mehler>) {
            return std::pow(2.0 * std::sinh(0.5 * t), -d);
          } else if constexpr (std::is_same_v<K, Spectral>) {
            return std::pow(std::exp(-0.5 * t) * -std::expm1(-k.truncation * t) / -std::expm1(-t), d);
          } else {
            double s = 0.0;
            for (double e : k.data.energies) s += std::exp(-t * e);
            return s;
          }
        },
        kind_);
  }

 private:
  using Kind = std::variant<Mehler, Spectral, Eigendata>;
  GreenFunction(std::size_t d, Kind k) : dim_(d), kind_(std::move(k)) {}

  std::size_t dim_;
  Kind kind_;
};

/// Center and length scale of z -> g(x,t,z) g(z,s,y): a Gaussian with precision
/// coth t + coth s per axis and mean (x / sinh t + y / sinh s) / precision.
inline std::pair<Point, double> chapman_kolmogorov_envelope(std::span<const double> x,
                                                            std::span<const double> y, double s,
                                                            double t) {
  const double precision = detail::coth(t) + detail::coth(s);
  Point c(x.size());
  for (std::size_t j = 0; j < x.size(); ++j)
    c[j] = (x[j] / std::sinh(t) + y[j] / std::sinh(s)) / precision;
  return {c, std::sqrt(2.0 / precision)};
}

/// |int g(x,t,z) g(z,s,y) dz - g(x,t+s,y)| by tensor Gauss-Hermite of the given order.
inline double semigroup_residual(std::span<const double> x, std::span<const double> y, double s,
                                 double t, int order = 64) {
  detail::require(x.size() == y.size() && !x.empty(), "semigroup_residual: dimension mismatch");
  if (!(s > 0.0) || !(t > 0.0)) throw ValidationError("semigroup_residual: times must be positive");
  const auto [center, scale] = chapman_kolmogorov_envelope(x, y, s, t);
  const QuadratureRule rule = gauss_hermite_tensor(x.size(), order, center, scale);
  const double composed =
      apply_rule(rule, [&](std::span<const double> z) { return mehler(x, t, z) * mehler(z, s, y); });
  return std::abs(composed - mehler(x, t + s, y));
}

}  // namespace bernstein
