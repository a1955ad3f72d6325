#pragma once

// Laws of the Bernstein process built from a ProcessSpec: endpoint law, marginals
// u(.,t) v(.,t), transition and finite-dimensional densities, and the closed-form
// width / covariance structure of the Gaussian cases.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "bernstein/datum.hpp"
#include "bernstein/errors.hpp"
#include "bernstein/gaussian_form.hpp"
#include "bernstein/kernel.hpp"
#include "bernstein/model.hpp"
#include "bernstein/quadrature.hpp"
#include "bernstein/region.hpp"

namespace bernstein {

// ---------------------------------------------------------------------------
// Width parameter and annulus law of the centered cases

namespace detail {

inline void require_centered_case(ProcessCase c, const char* who) {
  if (c == ProcessCase::general)
    throw UnsupportedError(std::string(who) + ": only the stationary, pinned and loop cases have a width parameter");
}

inline void require_time(double t, double T, const char* who) {
  detail::require(T > 0.0 && std::isfinite(T), std::string(who) + ": T must be positive");
  detail::require(t >= 0.0 && t <= T, std::string(who) + ": t must lie in [0, T]");
}

/// sinh(a) sinh(b) / sinh(a+b), evaluated through e^{-2a}, e^{-2b}.
inline double sinh_ratio(double a, double b) {
  return std::expm1(-2.0 * a) * std::expm1(-2.0 * b) / (-2.0 * std::expm1(-2.0 * (a + b)));
}

}  // namespace detail

/// Per-axis variance rho(t) of the centered Gaussian marginal:
///   stationary 1/2, pinned_start sinh(t) e^{-t}, pinned_end rho_pinned(T-t),
///   loop sinh(t) sinh(T-t) / sinh(T).
inline double width_parameter(ProcessCase c, double t, double T) {
  detail::require_centered_case(c, "width_parameter");
  detail::require_time(t, T, "width_parameter");
  switch (c) {
    case ProcessCase::stationary: return 0.5;
    case ProcessCase::pinned_start: return -0.5 * std::expm1(-2.0 * t);
    case ProcessCase::pinned_end: return -0.5 * std::expm1(-2.0 * (T - t));
    case ProcessCase::loop: return detail::sinh_ratio(t, T - t);
    case ProcessCase::general: break;
  }
  return 0.0;
}

/// d rho / dt in closed form.
inline double width_derivative(ProcessCase c, double t, double T) {
  detail::require_centered_case(c, "width_derivative");
  detail::require_time(t, T, "width_derivative");
  switch (c) {
    case ProcessCase::stationary: return 0.0;
    case ProcessCase::pinned_start: return std::exp(-2.0 * t);
    case ProcessCase::pinned_end: return -std::exp(-2.0 * (T - t));
    case ProcessCase::loop: return std::sinh(T - 2.0 * t) / std::sinh(T);
    case ProcessCase::general: break;
  }
  return 0.0;
}

/// chi(R, rho) = R^2 exp(-R^2 / (2 rho)).
inline double chi(double R, double rho) {
  detail::require(R >= 0.0, "chi: radius must be nonnegative");
  if (!(rho > 0.0)) throw ValidationError("chi: width parameter must be positive");
  return R * R * std::exp(-R * R / (2.0 * rho));
}

inline double chi(ProcessCase c, double R, double t, double T) { return chi(R, width_parameter(c, t, T)); }

/// P(Z_t in A_{R1,R2}) for a centered planar case.
inline double annulus_probability(ProcessCase c, double R1, double R2, double t, double T) {
  const double rho = width_parameter(c, t, T);
  detail::require(R1 >= 0.0 && R1 < R2, "annulus_probability: need 0 <= R1 < R2");
  if (rho == 0.0) return R1 == 0.0 ? 1.0 : 0.0;  // all mass at the origin
  return annulus_probability_of_radial_gaussian(rho, R1, R2, 2);
}

/// d/dt P(Z_t in A_{R1,R2}) = rho'(t) / (2 rho(t)^2) (chi(R1,t) - chi(R2,t)).
inline double annulus_probability_derivative(ProcessCase c, double R1, double R2, double t, double T) {
  detail::require(R1 >= 0.0 && R1 < R2, "annulus_probability_derivative: need 0 <= R1 < R2");
  const double rho = width_parameter(c, t, T);
  if (!(rho > 0.0)) throw ValidationError("annulus_probability_derivative: width parameter vanishes at this time");
  return width_derivative(c, t, T) / (2.0 * rho * rho) * (chi(R1, rho) - chi(R2, rho));
}

/// Smallest t* in [1e-6, T] after which the pinned-start annulus probability is
/// nonincreasing, found by 80 bisection steps on the sign of chi(R1,t) - chi(R2,t)
/// (rho' > 0 in this case). Returns nothing when the sign never turns within [1e-6, T].
inline std::optional<double> critical_time(double R1, double R2, double T) {
  detail::require(R1 >= 0.0 && R1 < R2, "critical_time: need 0 <= R1 < R2");
  detail::require(T > 0.0 && std::isfinite(T), "critical_time: T must be positive");
  constexpr double eps = 1e-6;
  if (T <= eps) return std::nullopt;
  // log(chi(R1)/chi(R2)) has the sign of chi(R1) - chi(R2) and does not underflow at small rho.
  auto sign = [&](double t) {
    if (R1 == 0.0) return -1.0;
    const double rho = width_parameter(ProcessCase::pinned_start, t, T);
    return 2.0 * std::log(R1 / R2) + (R2 * R2 - R1 * R1) / (2.0 * rho);
  };
  if (sign(T) > 0.0) return std::nullopt;
  if (sign(eps) <= 0.0) return eps;
  double lo = eps, hi = T;
  for (int it = 0; it < 80; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (sign(mid) <= 0.0)
      hi = mid;
    else
      lo = mid;
  }
  return hi;
}

/// Covariance E[Z_s^i Z_t^j] of the centered Gaussian cases:
///   stationary   1/2 e^{-|t-s|}
///   pinned_start 1/2 e^{-(t+s)} (e^{2 min(s,t)} - 1)
///   pinned_end   the pinned_start kernel at (T-s, T-t)
/// The loop covariance has no closed form here.
class CovarianceKernel {
 public:
  CovarianceKernel(ProcessCase c, std::size_t d, double T) : case_(c), d_(d), T_(T) {
    detail::require(d >= 1, "CovarianceKernel: d must be >= 1");
    detail::require(T > 0.0 && std::isfinite(T), "CovarianceKernel: T must be positive");
    if (c == ProcessCase::loop) throw UnsupportedError("covariance: no closed form for the loop case");
    if (c == ProcessCase::general) throw UnsupportedError("covariance: only the stationary and pinned cases are Gaussian here");
  }

  ProcessCase process_case() const { return case_; }
  std::size_t dimension() const { return d_; }

  /// Scalar per-component kernel, 0-based components.
  double operator()(double s, double t, std::size_t i, std::size_t j) const {
    detail::require(i < d_ && j < d_, "covariance: component index out of range");
    detail::require_time(s, T_, "covariance");
    detail::require_time(t, T_, "covariance");
    if (i != j) return 0.0;
    return component(s, t);
  }

  double component(double s, double t) const {
    switch (case_) {
      case ProcessCase::stationary: return 0.5 * std::exp(-std::abs(t - s));
      case ProcessCase::pinned_start: return 0.5 * (std::exp(-std::abs(t - s)) - std::exp(-(t + s)));
      case ProcessCase::pinned_end:
        return 0.5 * (std::exp(-std::abs(t - s)) - std::exp(-(2.0 * T_ - t - s)));
      default: break;
    }
    throw UnsupportedError("covariance: unsupported case");
  }

  /// Per-component covariance matrix on a time grid.
  Eigen::MatrixXd matrix(std::span<const double> times) const {
    const auto n = static_cast<Eigen::Index>(times.size());
    Eigen::MatrixXd C(n, n);
    for (Eigen::Index a = 0; a < n; ++a)
      for (Eigen::Index b = 0; b < n; ++b) C(a, b) = (*this)(times[a], times[b], 0, 0);
    return C;
  }

 private:
  ProcessCase case_;
  std::size_t d_;
  double T_;
};

// ---------------------------------------------------------------------------
// Gaussian masses of regions

namespace detail {

inline double normal_interval(double m, double sd, double lo, double hi) {
  const double zl = (lo - m) / (sd * std::numbers::sqrt2);
  const double zh = (hi - m) / (sd * std::numbers::sqrt2);
  if (zl >= 0.0) return 0.5 * (std::erfc(zl) - std::erfc(zh));
  if (zh <= 0.0) return 0.5 * (std::erfc(-zh) - std::erfc(-zl));
  return 1.0 - 0.5 * (std::erfc(-zl) + std::erfc(zh));
}

inline bool all_zero(std::span<const double> a) {
  return std::all_of(a.begin(), a.end(), [](double v) { return v == 0.0; });
}

}  // namespace detail

/// Mass of F under N(mean, var I). Boxes, hypercubes, d=1 balls/annuli and centered
/// planar balls/annuli are exact; centered annuli in d >= 3 use 1-D radial
/// quadrature; any other region falls back to cubature of the density.
inline double gaussian_region_mass(std::span<const double> mean, double var, const Region& F) {
  const std::size_t d = mean.size();
  detail::require(F.dimension() == d, "gaussian_region_mass: dimension mismatch");
  detail::require(var > 0.0, "gaussian_region_mass: variance must be positive");
  if (F.is_complement()) return 1.0 - gaussian_region_mass(mean, var, F.base());
  const double sd = std::sqrt(var);
  switch (F.kind()) {
    case Region::Kind::full_space: return 1.0;
    case Region::Kind::singleton: return 0.0;
    case Region::Kind::box:
    case Region::Kind::hypercube: {
      const auto [lo, hi] = F.bounding_box();
      double p = 1.0;
      for (std::size_t j = 0; j < d; ++j) p *= detail::normal_interval(mean[j], sd, lo[j], hi[j]);
      return p;
    }
    case Region::Kind::ball: {
      if (d == 1) {
        const double c = F.center()[0], r = F.outer_radius();
        return detail::normal_interval(mean[0], sd, c - r, c + r);
      }
      Point shift(d);
      for (std::size_t j = 0; j < d; ++j) shift[j] = F.center()[j] - mean[j];
      if (d == 2 && detail::all_zero(shift)) return -std::expm1(-F.outer_radius() * F.outer_radius() / (2.0 * var));
      break;
    }
    case Region::Kind::annulus: {
      const double r1 = F.inner_radius(), r2 = F.outer_radius();
      if (d == 1) {
        const double hi = std::isfinite(r2) ? r2 : r1 + 40.0 * sd + std::abs(mean[0]);
        return detail::normal_interval(mean[0], sd, r1, hi) + detail::normal_interval(mean[0], sd, -hi, -r1);
      }
      if (!detail::all_zero(mean)) break;
      if (d == 2) return annulus_probability_of_radial_gaussian(var, r1, r2, 2);
      const double norm = std::pow(2.0 * std::numbers::pi * var, -0.5 * static_cast<double>(d));
      return integrate_radial([&](double r) { return norm * std::exp(-r * r / (2.0 * var)); }, d, r1, r2,
                              40.0 * sd)
          .value;
    }
  }
  RuleOptions opt;
  opt.order = 48;
  opt.panels = 4;
  opt.center = Point(mean.begin(), mean.end());
  opt.scale = std::sqrt(2.0 * var);
  const double norm = std::pow(2.0 * std::numbers::pi * var, -0.5 * static_cast<double>(d));
  Point m(mean.begin(), mean.end());
  return integrate(
             [&](std::span<const double> x) {
               double r2 = 0.0;
               for (std::size_t j = 0; j < d; ++j) r2 += (x[j] - m[j]) * (x[j] - m[j]);
               return norm * std::exp(-r2 / (2.0 * var));
             },
             F, opt)
      .value;
}

// ---------------------------------------------------------------------------
// Marginals and region probabilities

/// Gaussian form of x -> u(x,t) v(x,t) (Gaussian or Dirac data, no atom at t).
inline GaussianForm marginal_form(const ProcessSpec& spec, double t) {
  const double T = spec.horizon();
  detail::require_time(t, T, "marginal_form");
  if (!spec.has_closed_forms()) throw UnsupportedError("marginal_form: hat data have no Gaussian marginal");
  const Datum& phi = spec.phi0();
  const Datum& psi = spec.psiT();
  if ((t == 0.0 && phi.is_dirac()) || (t == T && psi.is_dirac()))
    throw ValidationError("marginal_form: the marginal is an atom at this time");
  GaussianForm fu = t == 0.0 ? detail::datum_form(phi) : detail::propagated_form(phi, t);
  GaussianForm fv = t == T ? detail::datum_form(psi) : detail::propagated_form(psi, T - t);
  GaussianForm f = fu * fv;
  f.log_c += 2.0 * std::log(spec.normalization());
  return f;
}

/// u(x,t) v(x,t) on the chosen solution path.
inline double marginal_density(const ProcessSpec& spec, std::span<const double> x, double t,
                               const SolutionPath& path = {}) {
  return forward_solution(spec, x, t, path) * backward_solution(spec, x, t, path);
}

enum class RegionMethod { closed_form, quadrature };

namespace detail {

/// Dirac datum at this endpoint: the marginal is the atom at the origin.
inline bool marginal_is_atom(const ProcessSpec& spec, double t) {
  return (t == 0.0 && spec.phi0().is_dirac()) || (t == spec.horizon() && spec.psiT().is_dirac());
}

/// A Gaussian stand-in with the same center and per-axis variance, used only to place nodes.
inline GaussianForm envelope_form(const Datum& datum) {
  if (datum.is_gaussian()) return datum_form(datum);
  if (datum.is_dirac()) return gaussian_datum_form(1e-2, datum.center());
  return gaussian_datum_form(datum.sigma() * datum.sigma() / 6.0, datum.center());
}

inline RuleOptions marginal_hint(const ProcessSpec& spec, double t, RuleOptions opt) {
  if (opt.center) return opt;
  const double T = spec.horizon();
  GaussianForm fu = t == 0.0 ? envelope_form(spec.phi0())
                             : (spec.phi0().is_hat() ? propagate(envelope_form(spec.phi0()), t)
                                                     : propagated_form(spec.phi0(), t));
  GaussianForm fv = t == T ? envelope_form(spec.psiT())
                           : (spec.psiT().is_hat() ? propagate(envelope_form(spec.psiT()), T - t)
                                                   : propagated_form(spec.psiT(), T - t));
  apply_hint(opt, fu * fv);
  return opt;
}

}  // namespace detail

/// P(Z_0 in F0, Z_T in FT) = N^2 iint_{F0 x FT} phi0(x) g(x,T,y) psiT(y) dx dy.
inline Integral joint_endpoint_integral(const ProcessSpec& spec, const Region& F0, const Region& FT,
                                        const RuleOptions& opt = {}) {
  const double N2 = spec.normalization() * spec.normalization();
  Integral r = endpoint_integral(spec.phi0(), spec.psiT(), spec.horizon(), F0, FT, opt);
  return {N2 * r.value, N2 * r.error_estimate};
}

inline double joint_endpoint_probability(const ProcessSpec& spec, const Region& F0, const Region& FT,
                                         const RuleOptions& opt = {}) {
  return joint_endpoint_integral(spec, F0, FT, opt).value;
}

/// int_F u(x,t) v(x,t) dx by quadrature, with the refinement error estimate.
inline Integral region_probability_integral(const ProcessSpec& spec, const Region& F, double t,
                                            RuleOptions opt = {}, const SolutionPath& path = {}) {
  const double T = spec.horizon();
  detail::require_time(t, T, "region_probability");
  detail::require(F.dimension() == spec.dimension(), "region_probability: dimension mismatch");
  if (detail::marginal_is_atom(spec, t)) return {F.contains(Point(spec.dimension(), 0.0)) ? 1.0 : 0.0, 0.0};
  const Region full = Region::full_space(spec.dimension());
  // At a hat endpoint the marginal has kinks and no closed-form partner; use the
  // endpoint law, whose rules follow the hat panels.
  if (t == 0.0 && spec.phi0().is_hat()) return joint_endpoint_integral(spec, F, full, opt);
  if (t == T && spec.psiT().is_hat()) return joint_endpoint_integral(spec, full, F, opt);
  auto f = [&](std::span<const double> x) { return marginal_density(spec, x, t, path); };
  return integrate(f, F, detail::marginal_hint(spec, t, opt));
}

/// P(Z_t in F). The closed form covers Gaussian and Dirac data (the marginal is
/// an explicit Gaussian, or the atom at the origin at a Dirac endpoint).
inline double region_probability(const ProcessSpec& spec, const Region& F, double t,
                                 RegionMethod method = RegionMethod::closed_form, const RuleOptions& opt = {}) {
  const double T = spec.horizon();
  detail::require_time(t, T, "region_probability");
  detail::require(F.dimension() == spec.dimension(), "region_probability: dimension mismatch");
  if (method == RegionMethod::quadrature) return region_probability_integral(spec, F, t, opt).value;
  if (detail::marginal_is_atom(spec, t)) return F.contains(Point(spec.dimension(), 0.0)) ? 1.0 : 0.0;
  const ProcessCase c = spec.process_case();
  if (c != ProcessCase::general) {
    const Point zero(spec.dimension(), 0.0);
    return gaussian_region_mass(zero, width_parameter(c, t, T), F);
  }
  const GaussianForm f = marginal_form(spec, t);
  return gaussian_region_mass(f.mode(), 1.0 / f.precision, F);
}

/// Both methods, failing with ConsistencyError when they differ by more than tol.
inline std::pair<double, double> checked_region_probability(const ProcessSpec& spec, const Region& F, double t,
                                                            double tol = 1e-6, const RuleOptions& opt = {}) {
  const double closed = region_probability(spec, F, t, RegionMethod::closed_form, opt);
  const double quad = region_probability(spec, F, t, RegionMethod::quadrature, opt);
  detail::check_consistency(closed, quad, tol, "region_probability");
  return {closed, quad};
}

// ---------------------------------------------------------------------------
// Transition and finite-dimensional densities

/// p(x,t; z,r; y,s) = g(x,t-r,z) g(z,r-s,y) / g(x,t-s,y) for s < r < t: the density
/// in z of the position at r given the positions y at s and x at t.
inline double transition_density(std::span<const double> x, double t, std::span<const double> z, double r,
                                 std::span<const double> y, double s) {
  detail::require(s < r && r < t, "transition_density: need s < r < t");
  const double lv = log_mehler(x, t - r, z) + log_mehler(z, r - s, y) - log_mehler(x, t - s, y);
  const double v = std::exp(lv);
  if (!std::isfinite(v)) throw NumericError("transition_density: overflow");
  return v;
}

/// u(x_1,t_1) prod_{k>=2} g(x_k, t_k - t_{k-1}, x_{k-1}) v(x_n,t_n) for interior times t_1 < ... < t_n.
inline double finite_dimensional_density(const ProcessSpec& spec, std::span<const double> times,
                                         const std::vector<Point>& points, const SolutionPath& path = {}) {
  detail::require(!times.empty() && times.size() == points.size(), "finite_dimensional_density: times/points mismatch");
  const double T = spec.horizon();
  for (std::size_t k = 0; k < times.size(); ++k) {
    detail::require(times[k] > 0.0 && times[k] < T, "finite_dimensional_density: times must lie in (0, T)");
    if (k > 0) detail::require(times[k] > times[k - 1], "finite_dimensional_density: times must increase strictly");
    detail::require(points[k].size() == spec.dimension(), "finite_dimensional_density: point dimension");
  }
  double logp = 0.0;
  for (std::size_t k = 1; k < times.size(); ++k) logp += log_mehler(points[k], times[k] - times[k - 1], points[k - 1]);
  return forward_solution(spec, points.front(), times.front(), path) * std::exp(logp) *
         backward_solution(spec, points.back(), times.back(), path);
}

// ---------------------------------------------------------------------------
// Moments of the marginal law

struct MarginalFit {
  double mass = 0.0;
  Point mean;
  Point variance;            ///< per-axis variance
  double width = 0.0;        ///< average per-axis variance
  double profile_error = 0.0;  ///< max |p - gaussian(width)| / gaussian peak on a radial probe grid
};

/// Moments of u(.,t) v(.,t) by full-space quadrature on the given rule options and a
/// comparison of the density with the centered isotropic Gaussian of the fitted width.
inline MarginalFit fit_marginal(const ProcessSpec& spec, double t, const SolutionPath& u_path,
                                const SolutionPath& v_path, RuleOptions opt = {}) {
  const std::size_t d = spec.dimension();
  detail::require_time(t, spec.horizon(), "fit_marginal");
  if (detail::marginal_is_atom(spec, t)) throw ValidationError("fit_marginal: the marginal is an atom");
  auto density = [&](std::span<const double> x) {
    return forward_solution(spec, x, t, u_path) * backward_solution(spec, x, t, v_path);
  };
  const QuadratureRule rule = region_rule(Region::full_space(d), opt);
  std::vector<double> p(rule.size());
  for (std::size_t i = 0; i < rule.size(); ++i) p[i] = density(rule.node(i));
  MarginalFit fit;
  fit.mass = detail::weighted_sum(rule, p);
  fit.mean.assign(d, 0.0);
  fit.variance.assign(d, 0.0);
  std::vector<double> terms(rule.size());
  for (std::size_t j = 0; j < d; ++j) {
    for (std::size_t i = 0; i < rule.size(); ++i) terms[i] = rule.weights[i] * p[i] * rule.node(i)[j];
    fit.mean[j] = detail::pairwise_sum(terms) / fit.mass;
  }
  for (std::size_t j = 0; j < d; ++j) {
    for (std::size_t i = 0; i < rule.size(); ++i) {
      const double dx = rule.node(i)[j] - fit.mean[j];
      terms[i] = rule.weights[i] * p[i] * dx * dx;
    }
    fit.variance[j] = detail::pairwise_sum(terms) / fit.mass;
    fit.width += fit.variance[j] / static_cast<double>(d);
  }
  const double peak = std::pow(2.0 * std::numbers::pi * fit.width, -0.5 * static_cast<double>(d));
  for (int k = 0; k <= 12; ++k) {
    for (int dir = 0; dir < 4; ++dir) {
      Point x(d, 0.0);
      const double r = 0.25 * k * std::sqrt(fit.width);
      const double th = 0.5 * std::numbers::pi * dir + 0.3;
      x[0] = r * std::cos(th);
      if (d > 1) x[1] = r * std::sin(th);
      const double gauss = peak * std::exp(-r * r / (2.0 * fit.width));
      fit.profile_error = std::max(fit.profile_error, std::abs(density(x) - gauss) / peak);
    }
  }
  return fit;
}

}  // namespace bernstein
