#pragma once

// Quadrature engine: Gauss-Hermite / Gauss-Legendre rules built by Golub-Welsch,
// tensor, polar and composite box rules, and region-adapted integration with a
// refinement error estimate.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <map>
#include <mutex>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bernstein/errors.hpp"
#include "bernstein/hermite.hpp"
#include "bernstein/region.hpp"

namespace bernstein {

using Integrand = std::function<double(std::span<const double>)>;

enum class RuleKind { gauss_hermite_tensor, radial_polar_2d, box_composite };

/// One-dimensional Gauss rule.
///
/// `weights` integrate against the rule's weight function (e^{-x^2} for
/// Hermite, 1 for Legendre); `plain_weights` integrate f(x) dx directly.
struct GaussRule1D {
  std::vector<double> nodes;
  std::vector<double> weights;
  std::vector<double> plain_weights;
};

/// Nodes and weights on R^d, flattened node-major.
struct QuadratureRule {
  RuleKind kind = RuleKind::gauss_hermite_tensor;
  int order = 0;
  std::size_t dim = 0;
  std::vector<double> nodes;
  std::vector<double> weights;

  std::size_t size() const { return weights.size(); }
  std::span<const double> node(std::size_t i) const { return {nodes.data() + i * dim, dim}; }
};

struct Integral {
  double value = 0.0;
  double error_estimate = 0.0;
};

/// Placement hints for building a region-adapted rule.
struct RuleOptions {
  int order = 32;       ///< points per axis (Gauss-Hermite) or per panel (Gauss-Legendre)
  int panels = 2;       ///< panels per axis of composite rules, radial panels of polar rules
  int angular = 0;      ///< angular points of polar rules; 0 selects max(2*order, 32)
  bool midpoint = false;  ///< composite midpoint instead of Gauss-Legendre panels
  std::optional<Point> center;  ///< center of the integrand's Gaussian envelope
  double scale = 1.0;   ///< envelope length scale: integrand ~ exp(-|x-center|^2 / scale^2)
  double truncation = 12.0;  ///< improper radial integrals are cut at this many length scales
};

namespace detail {

/// Pairwise summation; the result only depends on the order of `terms`.
inline double pairwise_sum(std::span<const double> terms) {
  if (terms.size() <= 8) {
    double s = 0.0;
    for (double t : terms) s += t;
    return s;
  }
  const std::size_t half = terms.size() / 2;
  return pairwise_sum(terms.first(half)) + pairwise_sum(terms.subspan(half));
}

inline GaussRule1D build_gauss_hermite(int m) {
  // Golub-Welsch on the Jacobi matrix of e^{-x^2}: zero diagonal, sqrt(k/2) off-diagonal.
  Eigen::VectorXd diag = Eigen::VectorXd::Zero(m);
  Eigen::VectorXd sub(std::max(m - 1, 0));
  for (int k = 1; k < m; ++k) sub(k - 1) = std::sqrt(k / 2.0);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
  es.computeFromTridiagonal(diag, sub, Eigen::EigenvaluesOnly);
  GaussRule1D r;
  r.nodes.resize(m);
  r.weights.resize(m);
  r.plain_weights.resize(m);
  for (int i = 0; i < m; ++i) {
    double x = es.eigenvalues()(i);
    // Newton polish on h_m using h_m' / h_m = sqrt(2m) h_{m-1} / h_m at a root.
    for (int it = 0; it < 4; ++it) {
      const auto h = hermite_functions(m, x);
      const double step = h[m] / (std::sqrt(2.0 * m) * h[m - 1]);
      x -= step;
      if (std::abs(step) < 1e-16 * std::max(1.0, std::abs(x))) break;
    }
    const auto h = hermite_functions(m - 1, x);
    // Christoffel-Darboux: sum_{k<m} h_k(x_i)^2 = m h_{m-1}(x_i)^2 at the roots.
    const double plain = 1.0 / (m * h[m - 1] * h[m - 1]);
    r.nodes[i] = x;
    r.plain_weights[i] = plain;
    r.weights[i] = plain * std::exp(-x * x);
  }
  // Exact antisymmetry of nodes and symmetry of weights.
  for (int i = 0; i < m / 2; ++i) {
    const int j = m - 1 - i;
    const double x = 0.5 * (r.nodes[j] - r.nodes[i]);
    r.nodes[i] = -x;
    r.nodes[j] = x;
    const double w = 0.5 * (r.plain_weights[i] + r.plain_weights[j]);
    r.plain_weights[i] = r.plain_weights[j] = w;
    r.weights[i] = r.weights[j] = w * std::exp(-x * x);
  }
  if (m % 2 == 1) r.nodes[m / 2] = 0.0;
  return r;
}

inline GaussRule1D build_gauss_legendre(int m) {
  Eigen::VectorXd diag = Eigen::VectorXd::Zero(m);
  Eigen::VectorXd sub(std::max(m - 1, 0));
  for (int k = 1; k < m; ++k) sub(k - 1) = k / std::sqrt(4.0 * k * k - 1.0);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
  es.computeFromTridiagonal(diag, sub, Eigen::EigenvaluesOnly);
  GaussRule1D r;
  r.nodes.resize(m);
  r.weights.resize(m);
  for (int i = 0; i < m; ++i) {
    double x = es.eigenvalues()(i);
    double dp = 1.0;
    for (int it = 0; it < 5; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= m; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      const double pm = m == 1 ? x : p1;
      const double pm1 = m == 1 ? 1.0 : p0;
      dp = m * (x * pm - pm1) / (x * x - 1.0);
      const double step = pm / dp;
      x -= step;
      if (std::abs(step) < 1e-16) break;
    }
    r.nodes[i] = x;
    r.weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
  }
  for (int i = 0; i < m / 2; ++i) {
    const int j = m - 1 - i;
    const double x = 0.5 * (r.nodes[j] - r.nodes[i]);
    r.nodes[i] = -x;
    r.nodes[j] = x;
    r.weights[i] = r.weights[j] = 0.5 * (r.weights[i] + r.weights[j]);
  }
  if (m % 2 == 1) r.nodes[m / 2] = 0.0;
  r.plain_weights = r.weights;
  return r;
}

template <class Build>
const GaussRule1D& cached_rule(std::map<int, GaussRule1D>& cache, std::mutex& mu, int m,
                               Build build) {
  std::lock_guard lock(mu);
  auto it = cache.find(m);
  if (it == cache.end()) it = cache.emplace(m, build(m)).first;
  return it->second;
}

}  // namespace detail

inline constexpr int kMaxRuleOrder = 512;

/// Gauss-Hermite rule of order m (exact for p(x) e^{-x^2}, deg p <= 2m-1).
inline const GaussRule1D& gauss_hermite(int m) {
  detail::require(m >= 1 && m <= kMaxRuleOrder, "gauss_hermite: order must be in [1, 512]");
  static std::map<int, GaussRule1D> cache;
  static std::mutex mu;
  return detail::cached_rule(cache, mu, m, detail::build_gauss_hermite);
}

/// Gauss-Legendre rule of order m on [-1, 1].
inline const GaussRule1D& gauss_legendre(int m) {
  detail::require(m >= 1 && m <= kMaxRuleOrder, "gauss_legendre: order must be in [1, 512]");
  static std::map<int, GaussRule1D> cache;
  static std::mutex mu;
  return detail::cached_rule(cache, mu, m, detail::build_gauss_legendre);
}

/// Tensor Gauss-Hermite rule for integrals of f over R^d, nodes center + scale * xi.
inline QuadratureRule gauss_hermite_tensor(std::size_t d, int m, std::span<const double> center = {},
                                           double scale = 1.0) {
  detail::require(d >= 1, "gauss_hermite_tensor: d must be >= 1");
  detail::require(center.empty() || center.size() == d, "gauss_hermite_tensor: center dimension");
  detail::require(scale > 0.0, "gauss_hermite_tensor: scale must be positive");
  const auto& g = gauss_hermite(m);
  QuadratureRule rule{RuleKind::gauss_hermite_tensor, m, d, {}, {}};
  std::size_t count = 1;
  for (std::size_t j = 0; j < d; ++j) count *= static_cast<std::size_t>(m);
  rule.nodes.resize(count * d);
  rule.weights.resize(count);
  std::vector<int> idx(d, 0);
  for (std::size_t i = 0; i < count; ++i) {
    double w = 1.0;
    for (std::size_t j = 0; j < d; ++j) {
      const double c = center.empty() ? 0.0 : center[j];
      rule.nodes[i * d + j] = c + scale * g.nodes[idx[j]];
      w *= scale * g.plain_weights[idx[j]];
    }
    rule.weights[i] = w;
    for (std::size_t j = d; j-- > 0;) {
      if (++idx[j] < m) break;
      idx[j] = 0;
    }
  }
  return rule;
}

/// Composite 1-D rule on [a, b]: `panels` equal panels with m Gauss-Legendre points
/// each, or one midpoint per panel when `midpoint` is set.
inline std::pair<std::vector<double>, std::vector<double>> composite_interval(double a, double b,
                                                                             int panels, int m,
                                                                             bool midpoint) {
  detail::require(a < b, "composite_interval: need a < b");
  detail::require(panels >= 1, "composite_interval: panels must be >= 1");
  std::vector<double> x, w;
  const double width = (b - a) / panels;
  if (midpoint) {
    for (int p = 0; p < panels; ++p) {
      x.push_back(a + (p + 0.5) * width);
      w.push_back(width);
    }
    return {x, w};
  }
  const auto& g = gauss_legendre(m);
  for (int p = 0; p < panels; ++p) {
    const double lo = a + p * width;
    for (int i = 0; i < m; ++i) {
      x.push_back(lo + 0.5 * width * (g.nodes[i] + 1.0));
      w.push_back(0.5 * width * g.weights[i]);
    }
  }
  return {x, w};
}

/// Tensor product of composite interval rules on the box [lo, hi].
inline QuadratureRule box_rule(std::span<const double> lo, std::span<const double> hi, int panels,
                               int m, bool midpoint = false) {
  detail::require(!lo.empty() && lo.size() == hi.size(), "box_rule: bounds dimension mismatch");
  const std::size_t d = lo.size();
  std::vector<std::vector<double>> xs(d), ws(d);
  for (std::size_t j = 0; j < d; ++j) std::tie(xs[j], ws[j]) = composite_interval(lo[j], hi[j], panels, m, midpoint);
  const std::size_t per_axis = xs[0].size();
  QuadratureRule rule{RuleKind::box_composite, midpoint ? 1 : m, d, {}, {}};
  std::size_t count = 1;
  for (std::size_t j = 0; j < d; ++j) count *= per_axis;
  rule.nodes.resize(count * d);
  rule.weights.resize(count);
  std::vector<std::size_t> idx(d, 0);
  for (std::size_t i = 0; i < count; ++i) {
    double w = 1.0;
    for (std::size_t j = 0; j < d; ++j) {
      rule.nodes[i * d + j] = xs[j][idx[j]];
      w *= ws[j][idx[j]];
    }
    rule.weights[i] = w;
    for (std::size_t j = d; j-- > 0;) {
      if (++idx[j] < per_axis) break;
      idx[j] = 0;
    }
  }
  return rule;
}

/// Polar rule on the planar annulus r_lo <= |x - center| < r_hi: composite
/// Gauss-Legendre in r (with the Jacobian r folded into the weights) and the
/// periodic trapezoid rule in the angle.
inline QuadratureRule polar_rule(std::span<const double> center, double r_lo, double r_hi,
                                 int radial_panels, int radial_points, int angular_points) {
  detail::require(center.size() == 2, "polar_rule: center must be a point of R^2");
  detail::require(r_lo >= 0.0 && r_lo < r_hi && std::isfinite(r_hi), "polar_rule: need 0 <= r_lo < r_hi < inf");
  detail::require(angular_points >= 1, "polar_rule: angular points must be >= 1");
  const auto [rs, wr] = composite_interval(r_lo, r_hi, radial_panels, radial_points, false);
  QuadratureRule rule{RuleKind::radial_polar_2d, radial_points, 2, {}, {}};
  const double dtheta = 2.0 * std::numbers::pi / angular_points;
  rule.nodes.reserve(rs.size() * angular_points * 2);
  rule.weights.reserve(rs.size() * angular_points);
  for (std::size_t i = 0; i < rs.size(); ++i) {
    for (int k = 0; k < angular_points; ++k) {
      const double th = (k + 0.5) * dtheta;
      rule.nodes.push_back(center[0] + rs[i] * std::cos(th));
      rule.nodes.push_back(center[1] + rs[i] * std::sin(th));
      rule.weights.push_back(wr[i] * rs[i] * dtheta);
    }
  }
  return rule;
}

/// Sum_i w_i f(x_i) with pairwise summation; throws on a non-finite integrand value.
inline double apply_rule(const QuadratureRule& rule, const Integrand& f) {
  std::vector<double> terms(rule.size());
  for (std::size_t i = 0; i < rule.size(); ++i) {
    if (rule.weights[i] == 0.0) {
      terms[i] = 0.0;
      continue;
    }
    const double v = f(rule.node(i));
    if (!std::isfinite(v)) throw NumericError("quadrature: non-finite integrand value at a node");
    terms[i] = rule.weights[i] * v;
  }
  return detail::pairwise_sum(terms);
}

namespace detail {

inline double norm(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += v * v;
  return std::sqrt(s);
}

inline QuadratureRule concatenate(QuadratureRule a, const QuadratureRule& b) {
  a.nodes.insert(a.nodes.end(), b.nodes.begin(), b.nodes.end());
  a.weights.insert(a.weights.end(), b.weights.begin(), b.weights.end());
  return a;
}

inline void mask_rule(QuadratureRule& rule, const Region& region) {
  for (std::size_t i = 0; i < rule.size(); ++i)
    if (!region.contains(rule.node(i))) rule.weights[i] = 0.0;
}

inline double outer_truncation_radius(const Region& region, const RuleOptions& opt) {
  const double c = opt.center ? norm(*opt.center) : 0.0;
  return std::max(region.inner_radius(), c) + opt.truncation * std::max(opt.scale, 1.0);
}

}  // namespace detail

/// Rule adapted to a base region (the complement flag is ignored). Lebesgue-null
/// regions (singletons) yield an empty rule.
inline QuadratureRule region_rule(const Region& region, const RuleOptions& opt) {
  const std::size_t d = region.dimension();
  const int m = opt.order;
  const int angular = opt.angular > 0 ? opt.angular : std::max(2 * m, 32);
  switch (region.kind()) {
    case Region::Kind::full_space:
      return gauss_hermite_tensor(d, m, opt.center ? std::span<const double>(*opt.center)
                                                   : std::span<const double>{},
                                  opt.scale);
    case Region::Kind::box:
      return box_rule(region.lower(), region.upper(), opt.panels, m, opt.midpoint);
    case Region::Kind::hypercube: {
      // Even panel count keeps the center, where hat data have their kink, on a panel edge.
      const auto [lo, hi] = region.bounding_box();
      return box_rule(lo, hi, 2 * ((opt.panels + 1) / 2), m, opt.midpoint);
    }
    case Region::Kind::ball: {
      if (d == 2) return polar_rule(region.center(), 0.0, region.outer_radius(), opt.panels, m, angular);
      const auto [lo, hi] = region.bounding_box();
      QuadratureRule rule = box_rule(lo, hi, 2 * ((opt.panels + 1) / 2), m, opt.midpoint);
      if (d > 1) detail::mask_rule(rule, region);
      return rule;
    }
    case Region::Kind::annulus: {
      const double r1 = region.inner_radius();
      const double r2 = std::isfinite(region.outer_radius()) ? region.outer_radius()
                                                             : detail::outer_truncation_radius(region, opt);
      if (d == 2) {
        const Point origin{0.0, 0.0};
        return polar_rule(origin, r1, r2, opt.panels, m, angular);
      }
      if (d == 1) {
        const Point lo1{r1}, hi1{r2}, lo2{-r2}, hi2{-r1};
        return detail::concatenate(box_rule(lo2, hi2, opt.panels, m, opt.midpoint),
                                   box_rule(lo1, hi1, opt.panels, m, opt.midpoint));
      }
      const Point lo(d, -r2), hi(d, r2);
      QuadratureRule rule = box_rule(lo, hi, opt.panels, m, opt.midpoint);
      detail::mask_rule(rule, Region::annulus(d, r1, r2));
      return rule;
    }
    case Region::Kind::singleton:
      return QuadratureRule{RuleKind::box_composite, m, d, {}, {}};
  }
  throw UnsupportedError("region_rule: unknown region kind");
}

/// Integral of f over `region` by the region-adapted rule at a fixed order, no refinement.
inline double integrate_fixed(const Integrand& f, const Region& region, const RuleOptions& opt) {
  const QuadratureRule base = region_rule(region.base(), opt);
  const double inside = base.size() == 0 ? 0.0 : apply_rule(base, f);
  if (!region.is_complement()) return inside;
  const Region full = Region::full_space(region.dimension());
  return apply_rule(region_rule(full, opt), f) - inside;
}

/// Integral of f over `region`. The value comes from the order-2p rule, the error
/// estimate is |I_2p - I_p| plus a tail estimate for truncated improper integrals.
inline Integral integrate(const Integrand& f, const Region& region, const RuleOptions& opt = {}) {
  detail::require(opt.order >= 1 && 2 * opt.order <= kMaxRuleOrder, "integrate: order out of range");
  RuleOptions fine = opt;
  fine.order = 2 * opt.order;
  const double coarse_value = integrate_fixed(f, region, opt);
  const double fine_value = integrate_fixed(f, region, fine);
  Integral out{fine_value, std::abs(fine_value - coarse_value)};
  if (region.kind() == Region::Kind::annulus && !std::isfinite(region.outer_radius()) &&
      region.dimension() <= 2) {
    // Gaussian tail beyond the truncation radius: |f(r_cut)| times the rim length and one scale.
    const double rc = detail::outer_truncation_radius(region, opt);
    double fmax = 0.0;
    const int k = 16;
    for (int i = 0; i < k; ++i) {
      Point x(region.dimension(), 0.0);
      const double th = 2.0 * std::numbers::pi * i / k;
      x[0] = rc * std::cos(th);
      if (x.size() > 1) x[1] = rc * std::sin(th);
      fmax = std::max(fmax, std::abs(f(x)));
    }
    const double rim = region.dimension() == 2 ? 2.0 * std::numbers::pi * rc : 2.0;
    out.error_estimate += fmax * rim * std::max(opt.scale, 1.0);
  }
  return out;
}

/// Adaptive Gauss-Legendre on [a, b]: bisect until the order-m rule and the
/// two half-interval rules agree within tol (scaled by the panel length).
inline Integral integrate_interval(const std::function<double(double)>& f, double a, double b,
                                   double tol = 1e-13, int m = 16, int max_depth = 30) {
  detail::require(a <= b, "integrate_interval: need a <= b");
  const auto& g = gauss_legendre(m);
  auto panel = [&](double lo, double hi) {
    std::vector<double> terms(m);
    for (int i = 0; i < m; ++i) {
      const double v = f(lo + 0.5 * (hi - lo) * (g.nodes[i] + 1.0));
      if (!std::isfinite(v)) throw NumericError("integrate_interval: non-finite integrand");
      terms[i] = 0.5 * (hi - lo) * g.weights[i] * v;
    }
    return detail::pairwise_sum(terms);
  };
  Integral total;
  std::function<void(double, double, double, int)> recurse = [&](double lo, double hi, double whole,
                                                                 int depth) {
    const double mid = 0.5 * (lo + hi);
    const double left = panel(lo, mid);
    const double right = panel(mid, hi);
    const double diff = std::abs(left + right - whole);
    if (diff <= tol * std::max(1.0, (hi - lo) / std::max(b - a, 1e-300)) || depth >= max_depth) {
      total.value += left + right;
      total.error_estimate += diff;
      return;
    }
    recurse(lo, mid, left, depth + 1);
    recurse(mid, hi, right, depth + 1);
  };
  if (a == b) return total;
  recurse(a, b, panel(a, b), 0);
  return total;
}

/// Surface area of the unit sphere S^{d-1}.
inline double unit_sphere_area(std::size_t d) {
  return 2.0 * std::pow(std::numbers::pi, 0.5 * d) / std::tgamma(0.5 * d);
}

/// Integral of a radial function f(|x|) over R1 <= |x| < R2 in R^d, through
/// |S^{d-1}| int r^{d-1} f(r) dr. An infinite R2 is truncated at R1 + truncation.
inline Integral integrate_radial(const std::function<double(double)>& f, std::size_t d, double r1,
                                 double r2, double truncation = 12.0, double tol = 1e-13) {
  detail::require(d >= 1, "integrate_radial: d must be >= 1");
  detail::require(r1 >= 0.0 && r1 < r2, "integrate_radial: need 0 <= R1 < R2");
  const double hi = std::isfinite(r2) ? r2 : std::max(r1, 0.0) + truncation;
  const double area = unit_sphere_area(d);
  auto g = [&](double r) { return std::pow(r, static_cast<double>(d) - 1.0) * f(r); };
  Integral in = integrate_interval(g, r1, hi, tol);
  in.value *= area;
  in.error_estimate *= area;
  if (!std::isfinite(r2)) in.error_estimate += area * std::abs(g(hi));
  return in;
}

/// Probability that a centered planar Gaussian with per-axis variance rho lies
/// in the annulus R1 <= |x| < R2: exp(-R1^2/(2 rho)) - exp(-R2^2/(2 rho)).
inline double annulus_probability_of_radial_gaussian(double rho, double r1, double r2, std::size_t d = 2) {
  if (d != 2) throw UnsupportedError("closed-form annulus probability is only available for d = 2");
  detail::require(rho > 0.0, "annulus probability: width must be positive");
  detail::require(r1 >= 0.0 && r1 <= r2, "annulus probability: need 0 <= R1 <= R2");
  const double a = r1 * r1 / (2.0 * rho);
  if (!std::isfinite(r2)) return std::exp(-a);
  const double b = r2 * r2 / (2.0 * rho);
  return -std::exp(-a) * std::expm1(-(b - a));
}

}  // namespace bernstein
