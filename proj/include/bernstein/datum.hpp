#pragma once

#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>
#include <string>
#include <utility>

#include "bernstein/errors.hpp"
#include "bernstein/hermite.hpp"
#include "bernstein/quadrature.hpp"
#include "bernstein/region.hpp"

namespace bernstein {

/// Unnormalized initial or final datum phi_0 / psi_T.
///
///  gaussian:      exp(-|x-a|^2 / (2 sigma))
///  hat_product:   prod_j ((1 - |x_j - a_j| / sigma) v 0)
///  hat_isotropic: (1 - |x - a| / sigma) v 0
///  dirac_origin:  the Dirac measure at the origin (never evaluated pointwise)
class Datum {
 public:
  enum class Kind { gaussian, hat_product, hat_isotropic, dirac_origin };

  static Datum gaussian(double sigma, Point center) { return Datum(Kind::gaussian, sigma, std::move(center)); }
  static Datum hat_product(double sigma, Point center) {
    return Datum(Kind::hat_product, sigma, std::move(center));
  }
  static Datum hat_isotropic(double sigma, Point center) {
    return Datum(Kind::hat_isotropic, sigma, std::move(center));
  }
  static Datum dirac(std::size_t d) {
    detail::require(d >= 1, "Datum: dimension must be >= 1");
    Datum out;
    out.kind_ = Kind::dirac_origin;
    out.center_.assign(d, 0.0);
    return out;
  }

  Kind kind() const { return kind_; }
  double sigma() const { return sigma_; }
  const Point& center() const { return center_; }
  std::size_t dimension() const { return center_.size(); }

  bool is_dirac() const { return kind_ == Kind::dirac_origin; }
  bool is_gaussian() const { return kind_ == Kind::gaussian; }
  bool is_hat() const { return kind_ == Kind::hat_product || kind_ == Kind::hat_isotropic; }
  /// Gaussian with sigma = 1 centered at the origin.
  bool is_standard_gaussian() const {
    if (kind_ != Kind::gaussian || sigma_ != 1.0) return false;
    for (double a : center_)
      if (a != 0.0) return false;
    return true;
  }
  /// Product of one-dimensional factors (everything except the isotropic hat in d >= 2).
  bool is_separable() const { return kind_ != Kind::hat_isotropic || dimension() == 1; }

  /// Set outside which a hat datum vanishes identically.
  Region support() const {
    switch (kind_) {
      case Kind::hat_product: return Region::hypercube(center_, sigma_);
      case Kind::hat_isotropic: return Region::ball(center_, sigma_);
      case Kind::dirac_origin: return Region::singleton(center_);
      case Kind::gaussian: return Region::full_space(dimension());
    }
    throw UnsupportedError("Datum::support: unknown kind");
  }

  /// Lebesgue integral of the datum (1 for the Dirac measure).
  double mass() const {
    const double d = static_cast<double>(dimension());
    switch (kind_) {
      case Kind::gaussian: return std::pow(2.0 * std::numbers::pi * sigma_, 0.5 * d);
      case Kind::hat_product: return std::pow(sigma_, d);
      case Kind::hat_isotropic: {
        const double ball = std::pow(std::numbers::pi, 0.5 * d) / std::tgamma(0.5 * d + 1.0);
        return ball * std::pow(sigma_, d) / (d + 1.0);
      }
      case Kind::dirac_origin: return 1.0;
    }
    return 0.0;
  }

  std::string kind_name() const {
    switch (kind_) {
      case Kind::gaussian: return "gaussian";
      case Kind::hat_product: return "hat_product";
      case Kind::hat_isotropic: return "hat_isotropic";
      case Kind::dirac_origin: return "dirac";
    }
    return "unknown";
  }

  bool operator==(const Datum&) const = default;

 private:
  Datum() = default;
  Datum(Kind k, double sigma, Point center) : kind_(k), sigma_(sigma), center_(std::move(center)) {
    detail::require(!center_.empty(), "Datum: dimension must be >= 1");
    detail::require(sigma_ > 0.0 && std::isfinite(sigma_), "Datum: sigma must be positive");
    detail::check_finite_point(center_);
  }

  Kind kind_ = Kind::gaussian;
  double sigma_ = 1.0;
  Point center_;
};

/// Pointwise value of a non-Dirac datum.
inline double evaluate_datum(const Datum& datum, std::span<const double> x) {
  detail::require(x.size() == datum.dimension(), "evaluate_datum: dimension mismatch");
  const auto& a = datum.center();
  const double s = datum.sigma();
  switch (datum.kind()) {
    case Datum::Kind::gaussian: {
      double r2 = 0.0;
      for (std::size_t j = 0; j < x.size(); ++j) r2 += (x[j] - a[j]) * (x[j] - a[j]);
      return std::exp(-r2 / (2.0 * s));
    }
    case Datum::Kind::hat_product: {
      double v = 1.0;
      for (std::size_t j = 0; j < x.size(); ++j) v *= std::max(1.0 - std::abs(x[j] - a[j]) / s, 0.0);
      return v;
    }
    case Datum::Kind::hat_isotropic: {
      double r2 = 0.0;
      for (std::size_t j = 0; j < x.size(); ++j) r2 += (x[j] - a[j]) * (x[j] - a[j]);
      return std::max(1.0 - std::sqrt(r2) / s, 0.0);
    }
    case Datum::Kind::dirac_origin:
      throw UnsupportedError("evaluate_datum: the Dirac datum is a measure and has no pointwise value");
  }
  return 0.0;
}

}  // namespace bernstein
