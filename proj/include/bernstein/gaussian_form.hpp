#pragma once

// Isotropic Gaussian functions  f(x) = exp(log_c - A |x|^2 / 2 + (b, x))  and the
// exact operations on them needed by the harmonic model: products, integrals
// over R^d and propagation by Mehler's kernel.

#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>

#include "bernstein/datum.hpp"
#include "bernstein/errors.hpp"
#include "bernstein/hermite.hpp"
#include "bernstein/kernel.hpp"

namespace bernstein {

struct GaussianForm {
  double log_c = 0.0;
  double precision = 0.0;  // A
  Point linear;            // b

  std::size_t dimension() const { return linear.size(); }

  double log_value(std::span<const double> x) const {
    return log_c - 0.5 * precision * detail::norm2(x) + detail::dot(linear, x);
  }
  double operator()(std::span<const double> x) const { return std::exp(log_value(x)); }

  /// Mode b / A (the mean once normalized).
  Point mode() const {
    Point m(linear);
    for (double& v : m) v /= precision;
    return m;
  }
  /// Length scale sqrt(2/A): f / f(mode) = exp(-|x - mode|^2 / scale^2).
  double scale() const { return std::sqrt(2.0 / precision); }

  /// log of the integral over R^d; requires A > 0.
  double log_integral() const {
    if (!(precision > 0.0)) throw NumericError("GaussianForm: integral diverges (A <= 0)");
    const double d = static_cast<double>(dimension());
    return log_c + 0.5 * d * std::log(2.0 * std::numbers::pi / precision) +
           detail::norm2(linear) / (2.0 * precision);
  }

  GaussianForm operator*(const GaussianForm& o) const {
    detail::require(dimension() == o.dimension(), "GaussianForm: dimension mismatch");
    GaussianForm r{log_c + o.log_c, precision + o.precision, linear};
    for (std::size_t j = 0; j < r.linear.size(); ++j) r.linear[j] += o.linear[j];
    return r;
  }
};

/// exp(-|x-a|^2 / (2 sigma)) as a form.
inline GaussianForm gaussian_datum_form(double sigma, std::span<const double> a) {
  GaussianForm f{-detail::norm2(a) / (2.0 * sigma), 1.0 / sigma, Point(a.begin(), a.end())};
  for (double& v : f.linear) v /= sigma;
  return f;
}

/// x -> g(x, t, 0) as a form.
inline GaussianForm mehler_at_origin_form(std::size_t d, double t) {
  detail::check_time(t, "mehler_at_origin_form");
  return {-0.5 * static_cast<double>(d) * (std::log(2.0 * std::numbers::pi) + detail::log_sinh(t)),
          detail::coth(t), Point(d, 0.0)};
}

/// x -> int g(x, t, y) f(y) dy, by completing the square in y.
inline GaussianForm propagate(const GaussianForm& f, double t) {
  detail::check_time(t, "propagate");
  const double d = static_cast<double>(f.dimension());
  const double coth = detail::coth(t);
  const double inv_sinh = std::exp(-detail::log_sinh(t));
  const double ay = coth + f.precision;
  GaussianForm out;
  out.precision = coth - inv_sinh * inv_sinh / ay;
  out.linear = f.linear;
  for (double& v : out.linear) v *= inv_sinh / ay;
  out.log_c = f.log_c - 0.5 * d * (std::log(2.0 * std::numbers::pi) + detail::log_sinh(t)) +
              0.5 * d * std::log(2.0 * std::numbers::pi / ay) + detail::norm2(f.linear) / (2.0 * ay);
  return out;
}

/// Form of y -> g(x, t, y) at fixed x.
inline GaussianForm mehler_slice_form(std::span<const double> x, double t) {
  detail::check_time(t, "mehler_slice_form");
  const double d = static_cast<double>(x.size());
  const double inv_sinh = std::exp(-detail::log_sinh(t));
  GaussianForm f{-0.5 * d * (std::log(2.0 * std::numbers::pi) + detail::log_sinh(t)) -
                     0.5 * detail::coth(t) * detail::norm2(x),
                 detail::coth(t), Point(x.begin(), x.end())};
  for (double& v : f.linear) v *= inv_sinh;
  return f;
}

}  // namespace bernstein
