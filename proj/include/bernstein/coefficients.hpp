#pragma once

// Projections of the data onto the Hermite basis: the unit coefficients
//   alpha_hat_n = int phi_0(x) h_n(x) dx,   beta_hat_n = int psi_T(x) h_n(x) dx.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <vector>

#include "bernstein/datum.hpp"
#include "bernstein/errors.hpp"
#include "bernstein/hermite.hpp"
#include "bernstein/quadrature.hpp"

namespace bernstein {

/// I_n = int exp(-(x-a)^2/(2 sigma)) h_n(x) dx for n = 0..nmax, from
///   I_0 = pi^{-1/4} sqrt(2 pi sigma / (1+sigma)) exp(-a^2 / (2 (1+sigma)))
///   (1+sigma) sqrt((n+1)/2) I_{n+1} = a I_n + (sigma-1) sqrt(n/2) I_{n-1},
/// which follows from the ladder relations of h_n and one integration by parts.
inline std::vector<double> gaussian_hermite_projections(double sigma, double a, int nmax) {
  detail::require(sigma > 0.0, "gaussian projections: sigma must be positive");
  detail::check_degree(nmax);
  std::vector<double> I(static_cast<std::size_t>(nmax) + 1);
  I[0] = std::pow(std::numbers::pi, -0.25) * std::sqrt(2.0 * std::numbers::pi * sigma / (1.0 + sigma)) *
         std::exp(-a * a / (2.0 * (1.0 + sigma)));
  for (int n = 0; n < nmax; ++n) {
    const double prev = n > 0 ? I[n - 1] : 0.0;
    I[n + 1] = (a * I[n] + (sigma - 1.0) * std::sqrt(n / 2.0) * prev) /
               ((1.0 + sigma) * std::sqrt((n + 1) / 2.0));
  }
  return I;
}

/// I_n = int ((1 - |x-a|/sigma) v 0) h_n(x) dx by Gauss-Legendre panels on
/// [a-sigma, a] and [a, a+sigma], where the integrand is smooth.
inline std::vector<double> hat_hermite_projections(double sigma, double a, int nmax, int panels = 4) {
  detail::require(sigma > 0.0, "hat projections: sigma must be positive");
  detail::check_degree(nmax);
  const int m = std::clamp(nmax + 16, 32, 256);
  std::vector<double> I(static_cast<std::size_t>(nmax) + 1, 0.0);
  for (int side = -1; side <= 1; side += 2) {
    const double lo = side < 0 ? a - sigma : a;
    const double hi = side < 0 ? a : a + sigma;
    const auto [xs, ws] = composite_interval(lo, hi, panels, m, false);
    for (std::size_t i = 0; i < xs.size(); ++i) {
      const double w = ws[i] * std::max(1.0 - std::abs(xs[i] - a) / sigma, 0.0);
      const auto h = hermite_functions(nmax, xs[i]);
      for (int n = 0; n <= nmax; ++n) I[n] += w * h[n];
    }
  }
  return I;
}

/// Coefficients over the truncation {0..N-1}^d in lexicographic order.
struct CoefficientTable {
  std::size_t dim = 1;
  int truncation = 1;
  bool separable = true;
  std::vector<std::vector<double>> axes;  // per-axis factors when separable
  std::vector<double> values;             // N^d entries

  double operator[](std::size_t flat) const { return values[flat]; }
  double at(const MultiIndex& n) const {
    detail::require(n.dimension() == dim, "CoefficientTable: dimension mismatch");
    std::size_t flat = 0;
    for (std::size_t j = 0; j < dim; ++j) {
      detail::require(n[j] < truncation, "CoefficientTable: index outside truncation");
      flat = flat * static_cast<std::size_t>(truncation) + static_cast<std::size_t>(n[j]);
    }
    return values[flat];
  }
  CoefficientTable scaled(double factor) const {
    CoefficientTable out = *this;
    for (double& v : out.values) v *= factor;
    return out;
  }
};

namespace detail {

inline std::vector<double> tensor_values(const std::vector<std::vector<double>>& axes, int N) {
  const std::size_t d = axes.size();
  std::size_t count = 1;
  for (std::size_t j = 0; j < d; ++j) count *= static_cast<std::size_t>(N);
  std::vector<double> values(count);
  std::vector<int> idx(d, 0);
  for (std::size_t i = 0; i < count; ++i) {
    double v = 1.0;
    for (std::size_t j = 0; j < d; ++j) v *= axes[j][idx[j]];
    values[i] = v;
    for (std::size_t j = d; j-- > 0;) {
      if (++idx[j] < N) break;
      idx[j] = 0;
    }
  }
  return values;
}

}  // namespace detail

/// Unit coefficients int datum(x) h_n(x) dx for n in {0..N-1}^d.
inline CoefficientTable unit_coefficients(const Datum& datum, int N) {
  detail::require(N >= 1 && N - 1 <= kMaxHermiteDegree, "unit_coefficients: truncation out of range");
  const std::size_t d = datum.dimension();
  CoefficientTable t;
  t.dim = d;
  t.truncation = N;
  t.separable = datum.is_separable();
  if (t.separable) {
    for (std::size_t j = 0; j < d; ++j) {
      const double a = datum.center()[j];
      std::vector<double> ax;
      switch (datum.kind()) {
        case Datum::Kind::gaussian: ax = gaussian_hermite_projections(datum.sigma(), a, N - 1); break;
        case Datum::Kind::hat_product:
        case Datum::Kind::hat_isotropic: ax = hat_hermite_projections(datum.sigma(), a, N - 1); break;
        case Datum::Kind::dirac_origin: ax = hermite_functions(N - 1, 0.0); break;
      }
      t.axes.push_back(std::move(ax));
    }
    t.values = detail::tensor_values(t.axes, N);
    return t;
  }
  // Isotropic hat in d >= 2: direct projection on the support ball.
  RuleOptions opt;
  opt.order = std::clamp(N + 16, 32, 256);
  opt.panels = 4;
  opt.angular = std::max(64, 2 * N);
  const QuadratureRule rule = region_rule(datum.support(), opt);
  std::size_t count = 1;
  for (std::size_t j = 0; j < d; ++j) count *= static_cast<std::size_t>(N);
  t.values.assign(count, 0.0);
  std::vector<std::vector<double>> h(d);
  std::vector<int> idx(d);
  for (std::size_t i = 0; i < rule.size(); ++i) {
    const auto x = rule.node(i);
    const double w = rule.weights[i] * evaluate_datum(datum, x);
    if (w == 0.0) continue;
    for (std::size_t j = 0; j < d; ++j) h[j] = hermite_functions(N - 1, x[j]);
    std::fill(idx.begin(), idx.end(), 0);
    for (std::size_t k = 0; k < count; ++k) {
      double v = w;
      for (std::size_t j = 0; j < d; ++j) v *= h[j][idx[j]];
      t.values[k] += v;
      for (std::size_t j = d; j-- > 0;) {
        if (++idx[j] < N) break;
        idx[j] = 0;
      }
    }
  }
  return t;
}

/// Single unit coefficient int datum(x) h_n(x) dx.
inline double unit_fourier_coefficient(const Datum& datum, const MultiIndex& index) {
  detail::require(index.dimension() == datum.dimension(), "unit_fourier_coefficient: dimension mismatch");
  return unit_coefficients(datum, index.max_entry() + 1).at(index);
}

}  // namespace bernstein
