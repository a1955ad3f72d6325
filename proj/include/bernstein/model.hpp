#pragma once

// Forward and backward solutions of the harmonic heat system
//   d/dt u =  1/2 Lap u - |x|^2/2 u,  u(., 0) = N phi_0,
//  -d/dt v =  1/2 Lap v - |x|^2/2 v,  v(., T) = N psi_T,
// and the normalization N with  N^2 iint phi_0(x) g(x,T,y) psi_T(y) dx dy = 1.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "bernstein/coefficients.hpp"
#include "bernstein/datum.hpp"
#include "bernstein/errors.hpp"
#include "bernstein/gaussian_form.hpp"
#include "bernstein/hermite.hpp"
#include "bernstein/kernel.hpp"
#include "bernstein/quadrature.hpp"
#include "bernstein/region.hpp"

namespace bernstein {

enum class NormalizationMethod { automatic, closed_form, quadrature, spectral };

/// Data pairs with special structure.
///  stationary:   both data standard Gaussians
///  pinned_start: Dirac start, standard Gaussian end
///  pinned_end:   standard Gaussian start, Dirac end
///  loop:         Dirac at both ends
enum class ProcessCase { stationary, pinned_start, pinned_end, loop, general };

inline ProcessCase classify(const Datum& phi0, const Datum& psiT) {
  if (phi0.is_standard_gaussian() && psiT.is_standard_gaussian()) return ProcessCase::stationary;
  if (phi0.is_dirac() && psiT.is_standard_gaussian()) return ProcessCase::pinned_start;
  if (phi0.is_standard_gaussian() && psiT.is_dirac()) return ProcessCase::pinned_end;
  if (phi0.is_dirac() && psiT.is_dirac()) return ProcessCase::loop;
  return ProcessCase::general;
}

inline std::string case_name(ProcessCase c) {
  switch (c) {
    case ProcessCase::stationary: return "stationary";
    case ProcessCase::pinned_start: return "pinned_start";
    case ProcessCase::pinned_end: return "pinned_end";
    case ProcessCase::loop: return "loop";
    case ProcessCase::general: return "general";
  }
  return "general";
}

namespace detail {

inline void check_consistency(double a, double b, double tol, const std::string& what) {
  if (!(std::abs(a - b) <= tol))
    throw ConsistencyError(what + ": closed form and quadrature disagree (" + std::to_string(a) + " vs " +
                           std::to_string(b) + ")");
}

inline GaussianForm datum_form(const Datum& datum) {
  if (!datum.is_gaussian()) throw UnsupportedError("datum_form: only Gaussian data have a Gaussian form");
  return gaussian_datum_form(datum.sigma(), datum.center());
}

/// x -> int g(x,t,y) datum(y) dy for Gaussian or Dirac data.
inline GaussianForm propagated_form(const Datum& datum, double t) {
  if (datum.is_dirac()) return mehler_at_origin_form(datum.dimension(), t);
  return propagate(datum_form(datum), t);
}

/// Envelope hint for rules integrating datum(x) * F(x), where F is another
/// (possibly absent) Gaussian factor.
inline void apply_hint(RuleOptions& opt, const GaussianForm& f) {
  if (!(f.precision > 0.0)) return;
  opt.center = f.mode();
  opt.scale = f.scale();
}

/// Rule for integrals  int_F f(x) datum(x) dx  of a non-Dirac datum. Hat data use
/// the support rule with nodes outside F dropped; complements of other regions
/// use the full-space rule minus the rule on the base region.
inline QuadratureRule datum_region_rule(const Datum& datum, const Region& F, const RuleOptions& opt) {
  if (datum.is_hat()) {
    RuleOptions o = opt;
    o.panels = std::max(4, 2 * ((opt.panels + 1) / 2));
    QuadratureRule rule = region_rule(datum.support(), o);
    if (F.kind() != Region::Kind::full_space || F.is_complement()) mask_rule(rule, F);
    return rule;
  }
  QuadratureRule inside = region_rule(F.base(), opt);
  if (!F.is_complement()) return inside;
  for (double& w : inside.weights) w = -w;
  return concatenate(region_rule(Region::full_space(F.dimension()), opt), inside);
}

/// sum_i w_i f(x_i) without the non-zero check's overhead for zero weights.
inline double weighted_sum(const QuadratureRule& rule, const std::vector<double>& values) {
  std::vector<double> terms(rule.size());
  for (std::size_t i = 0; i < rule.size(); ++i) terms[i] = rule.weights[i] == 0.0 ? 0.0 : rule.weights[i] * values[i];
  return pairwise_sum(terms);
}

}  // namespace detail

/// Coarse per-panel Gauss-Legendre order used for hat data in double integrals.
inline constexpr int kHatPanelOrder = 10;

/// iint_{F0 x FT} phi0(x) g(x,T,y) psiT(y) dx dy for arbitrary data (a Dirac datum
/// contributes the atom at the origin). The value comes from order 2p, the error
/// estimate is the difference to order p.
inline Integral endpoint_integral(const Datum& phi0, const Datum& psiT, double T, const Region& F0,
                                  const Region& FT, RuleOptions opt = {}) {
  const std::size_t d = phi0.dimension();
  detail::require(psiT.dimension() == d && F0.dimension() == d && FT.dimension() == d,
                  "endpoint_integral: dimension mismatch");
  detail::check_time(T, "endpoint_integral");
  const Point origin(d, 0.0);
  const detail::MehlerAtTime g(d, T);
  if (phi0.is_dirac() && psiT.is_dirac())
    return {F0.contains(origin) && FT.contains(origin) ? g(origin, origin) : 0.0, 0.0};

  // One-sided integral against a Dirac partner at the origin.
  auto one_sided = [&](const Datum& datum, const Region& F, const Region& F_dirac) -> Integral {
    if (!F_dirac.contains(origin)) return {0.0, 0.0};
    RuleOptions o = opt;
    if (datum.is_gaussian()) detail::apply_hint(o, detail::datum_form(datum) * mehler_at_origin_form(d, T));
    auto at = [&](const RuleOptions& oo) {
      const QuadratureRule rule = detail::datum_region_rule(datum, F, oo);
      return apply_rule(rule, [&](std::span<const double> x) { return evaluate_datum(datum, x) * g(x, origin); });
    };
    RuleOptions fine = o;
    fine.order = 2 * o.order;
    const double coarse = at(o), value = at(fine);
    return {value, std::abs(value - coarse)};
  };
  if (phi0.is_dirac()) return one_sided(psiT, FT, F0);
  if (psiT.is_dirac()) return one_sided(phi0, F0, FT);

  RuleOptions ox = opt, oy = opt;
  if (phi0.is_gaussian()) {
    GaussianForm fx = detail::datum_form(phi0);
    if (psiT.is_gaussian()) fx = fx * propagate(detail::datum_form(psiT), T);
    detail::apply_hint(ox, fx);
  }
  if (psiT.is_gaussian()) {
    GaussianForm fy = detail::datum_form(psiT);
    if (phi0.is_gaussian()) fy = fy * propagate(detail::datum_form(phi0), T);
    detail::apply_hint(oy, fy);
  }
  // Hat data are polynomial on each panel, so low per-panel orders suffice there.
  auto at = [&](int level) {
    RuleOptions a = ox, b = oy;
    a.order = level * (phi0.is_hat() ? std::min(opt.order, kHatPanelOrder) : opt.order);
    b.order = level * (psiT.is_hat() ? std::min(opt.order, kHatPanelOrder) : opt.order);
    const QuadratureRule rx = detail::datum_region_rule(phi0, F0, a);
    const QuadratureRule ry = detail::datum_region_rule(psiT, FT, b);
    std::vector<double> px(rx.size()), py(ry.size());
    for (std::size_t i = 0; i < rx.size(); ++i) px[i] = rx.weights[i] == 0.0 ? 0.0 : evaluate_datum(phi0, rx.node(i));
    for (std::size_t k = 0; k < ry.size(); ++k) py[k] = ry.weights[k] == 0.0 ? 0.0 : evaluate_datum(psiT, ry.node(k));
    std::vector<double> inner(rx.size(), 0.0), row(ry.size());
    for (std::size_t i = 0; i < rx.size(); ++i) {
      if (px[i] == 0.0 || rx.weights[i] == 0.0) continue;
      for (std::size_t k = 0; k < ry.size(); ++k)
        row[k] = py[k] == 0.0 || ry.weights[k] == 0.0 ? 0.0 : ry.weights[k] * py[k] * g(rx.node(i), ry.node(k));
      inner[i] = px[i] * detail::pairwise_sum(row);
    }
    return detail::weighted_sum(rx, inner);
  };
  const double coarse = at(1);
  const double value = at(2);
  if (!std::isfinite(value)) throw NumericError("endpoint_integral: non-finite value");
  return {value, std::abs(value - coarse)};
}

/// iint phi0 g(.,T,.) psiT in closed form (Gaussian and Dirac data only).
inline double closed_form_normalization_integral(const Datum& phi0, const Datum& psiT, double T) {
  if (phi0.is_hat() || psiT.is_hat())
    throw UnsupportedError("normalization: no closed form for hat data");
  const std::size_t d = phi0.dimension();
  if (phi0.is_dirac() && psiT.is_dirac()) {
    const Point o(d, 0.0);
    return mehler(o, T, o);
  }
  if (phi0.is_dirac()) return std::exp((detail::datum_form(psiT) * mehler_at_origin_form(d, T)).log_integral());
  if (psiT.is_dirac()) return std::exp((detail::datum_form(phi0) * mehler_at_origin_form(d, T)).log_integral());
  return std::exp((propagate(detail::datum_form(phi0), T) * detail::datum_form(psiT)).log_integral());
}

struct SpectralSum {
  double value = 0.0;
  int truncation = 0;
  double tail_bound = 0.0;  ///< bound on the omitted terms
};

/// sum_n alpha_hat_n e^{-T E_n} beta_hat_n over {0..N-1}^d.
inline double spectral_pairing(const CoefficientTable& a, const CoefficientTable& b, double T) {
  detail::require(a.dim == b.dim && a.truncation == b.truncation, "spectral_pairing: table mismatch");
  const int N = a.truncation;
  if (a.separable && b.separable) {
    double prod = 1.0;
    for (std::size_t j = 0; j < a.dim; ++j) {
      std::vector<double> terms(N);
      for (int n = 0; n < N; ++n) terms[n] = a.axes[j][n] * b.axes[j][n] * std::exp(-T * (n + 0.5));
      prod *= detail::pairwise_sum(terms);
    }
    return prod;
  }
  const auto indices = enumerate_truncation(a.dim, N);
  std::vector<double> terms(indices.size());
  for (std::size_t i = 0; i < indices.size(); ++i) terms[i] = a[i] * b[i] * std::exp(-T * energy(indices[i]));
  return detail::pairwise_sum(terms);
}

/// Spectral evaluation of the normalization integral: the truncation doubles
/// until the tail bound drops below rel_tol times the partial sum.
inline SpectralSum spectral_normalization_integral(const Datum& phi0, const Datum& psiT, double T,
                                                   double rel_tol = 1e-15) {
  detail::require(T > 0.0, "spectral normalization: T must be positive");
  const std::size_t d = phi0.dimension();
  const double masses = phi0.mass() * psiT.mass();
  const bool cheap = phi0.is_separable() && psiT.is_separable();
  const int cap = cheap ? kMaxHermiteDegree + 1 : 64;
  SpectralSum out;
  for (int N = 16;; N = std::min(2 * N, cap)) {
    const auto a = unit_coefficients(phi0, N);
    const auto b = unit_coefficients(psiT, N);
    out.value = spectral_pairing(a, b, T);
    out.truncation = N;
    out.tail_bound = series_tail_bound(T, d, N) * masses;
    if (out.tail_bound <= rel_tol * std::abs(out.value)) return out;
    if (N == cap) break;
  }
  if (out.tail_bound > 1e-8 * std::abs(out.value))
    throw NumericError("spectral normalization: series not converged at the maximal truncation");
  return out;
}

/// iint phi0 g(.,T,.) psiT by the requested method; automatic prefers the closed form.
inline double normalization_integral(const Datum& phi0, const Datum& psiT, double T,
                                     NormalizationMethod method = NormalizationMethod::automatic) {
  detail::require(phi0.dimension() == psiT.dimension(), "normalization: data dimension mismatch");
  detail::require(T > 0.0 && std::isfinite(T), "normalization: T must be positive and finite");
  const bool closed = !phi0.is_hat() && !psiT.is_hat();
  if (method == NormalizationMethod::automatic)
    method = closed ? NormalizationMethod::closed_form : NormalizationMethod::quadrature;
  double I = 0.0;
  switch (method) {
    case NormalizationMethod::closed_form: I = closed_form_normalization_integral(phi0, psiT, T); break;
    case NormalizationMethod::spectral: I = spectral_normalization_integral(phi0, psiT, T).value; break;
    case NormalizationMethod::quadrature:
    case NormalizationMethod::automatic: {
      const Region full = Region::full_space(phi0.dimension());
      RuleOptions opt;
      opt.order = 40;
      const Integral r = endpoint_integral(phi0, psiT, T, full, full, opt);
      if (r.error_estimate > 1e-8 * r.value) throw NumericError("normalization: quadrature did not converge");
      I = r.value;
      break;
    }
  }
  if (!(I > 0.0) || !std::isfinite(I)) throw NumericError("normalization: integral is not a positive finite number");
  return I;
}

/// N = (iint phi0 g psiT)^{-1/2}.
inline double normalization_constant(std::size_t d, double T, const Datum& phi0, const Datum& psiT,
                                     NormalizationMethod method = NormalizationMethod::automatic) {
  detail::require(phi0.dimension() == d && psiT.dimension() == d, "normalization: data dimension must equal d");
  return 1.0 / std::sqrt(normalization_integral(phi0, psiT, T, method));
}

/// One Bernstein process: dimension, horizon, data and the normalization computed at construction.
class ProcessSpec {
 public:
  static ProcessSpec create(std::size_t d, double T, Datum phi0, Datum psiT,
                            NormalizationMethod method = NormalizationMethod::automatic) {
    detail::require(d >= 1, "ProcessSpec: d must be >= 1");
    detail::require(T > 0.0 && std::isfinite(T), "ProcessSpec: T must be positive and finite");
    detail::require(phi0.dimension() == d && psiT.dimension() == d, "ProcessSpec: data dimension must equal d");
    const double N = normalization_constant(d, T, phi0, psiT, method);
    return ProcessSpec(d, T, std::move(phi0), std::move(psiT), N, method);
  }

  std::size_t dimension() const { return d_; }
  double horizon() const { return T_; }
  const Datum& phi0() const { return phi0_; }
  const Datum& psiT() const { return psiT_; }
  double normalization() const { return N_; }
  NormalizationMethod normalization_method() const { return method_; }
  ProcessCase process_case() const { return classify(phi0_, psiT_); }
  /// Both data Gaussian or Dirac, so u and v have closed forms.
  bool has_closed_forms() const { return !phi0_.is_hat() && !psiT_.is_hat(); }

 private:
  ProcessSpec(std::size_t d, double T, Datum phi0, Datum psiT, double N, NormalizationMethod m)
      : d_(d), T_(T), phi0_(std::move(phi0)), psiT_(std::move(psiT)), N_(N), method_(m) {}

  std::size_t d_;
  double T_;
  Datum phi0_;
  Datum psiT_;
  double N_;
  NormalizationMethod method_;
};

/// How u and v are evaluated.
struct SolutionPath {
  enum class Kind { automatic, closed_form, spectral, quadrature };
  Kind kind = Kind::automatic;
  int truncation = 40;  ///< spectral: per-axis truncation N
  int order = 48;       ///< quadrature: points per axis / per panel

  static SolutionPath automatic() { return {}; }
  static SolutionPath closed_form() { return {Kind::closed_form, 40, 48}; }
  static SolutionPath spectral(int N = 40) { return {Kind::spectral, N, 48}; }
  static SolutionPath quadrature(int order = 48) { return {Kind::quadrature, 40, order}; }
};

/// sum_n c_n e^{-t E_n} h_n(x) over a coefficient table.
inline double spectral_evaluate(const CoefficientTable& c, std::span<const double> x, double t) {
  detail::require(x.size() == c.dim, "spectral_evaluate: dimension mismatch");
  const int N = c.truncation;
  if (c.separable) {
    double prod = 1.0;
    for (std::size_t j = 0; j < c.dim; ++j) {
      const auto h = hermite_functions(N - 1, x[j]);
      double s = 0.0;
      for (int n = N - 1; n >= 0; --n) s += c.axes[j][n] * std::exp(-t * (n + 0.5)) * h[n];
      prod *= s;
    }
    return prod;
  }
  std::vector<std::vector<double>> h(c.dim);
  for (std::size_t j = 0; j < c.dim; ++j) h[j] = hermite_functions(N - 1, x[j]);
  const auto indices = enumerate_truncation(c.dim, N);
  std::vector<double> terms(indices.size());
  for (std::size_t i = 0; i < indices.size(); ++i) {
    double v = c[i] * std::exp(-t * energy(indices[i]));
    for (std::size_t j = 0; j < c.dim; ++j) v *= h[j][indices[i][j]];
    terms[i] = v;
  }
  return detail::pairwise_sum(terms);
}

namespace detail {

/// int g(x,t,y) datum(y) dy in closed form; for Gaussian data
///   (sigma / (sinh t (sigma coth t + 1)))^{d/2}
///   * exp(-coth t |x|^2/2 + |sigma x / sinh t + a|^2 / (2 sigma (sigma coth t + 1)) - |a|^2 / (2 sigma)).
inline double closed_form_propagation(const Datum& datum, std::span<const double> x, double t) {
  if (datum.is_hat()) throw UnsupportedError("closed form requested for hat data");
  if (datum.is_dirac()) {
    const Point o(x.size(), 0.0);
    return mehler(x, t, o);
  }
  check_time(t, "forward solution");
  const double d = static_cast<double>(x.size());
  const double s = datum.sigma();
  const double ls = log_sinh(t);
  const double inv_sinh = std::exp(-ls);
  const double ct = coth(t);
  const double denom = s * ct + 1.0;
  const auto& a = datum.center();
  double cross = 0.0;
  for (std::size_t j = 0; j < x.size(); ++j) {
    const double z = s * x[j] * inv_sinh + a[j];
    cross += z * z;
  }
  const double log_pref = 0.5 * d * (std::log(s) - ls - std::log(denom));
  const double expo = -0.5 * ct * norm2(x) + cross / (2.0 * s * denom) - norm2(a) / (2.0 * s);
  return std::exp(log_pref + expo);
}

/// int g(x,t,y) datum(y) dy by quadrature (Dirac data need none).
inline double quadrature_propagation(const Datum& datum, std::span<const double> x, double t, int order) {
  if (datum.is_dirac()) {
    const Point o(x.size(), 0.0);
    return mehler(x, t, o);
  }
  const MehlerAtTime g(x.size(), t);
  RuleOptions opt;
  opt.order = order;
  opt.panels = 4;
  if (datum.is_gaussian()) apply_hint(opt, mehler_slice_form(x, t) * datum_form(datum));
  if (datum.is_hat()) {
    // Resolve the kernel width sqrt(tanh t) in y on each panel and around the rim; the
    // requested order is the ceiling.
    const double width = std::sqrt(std::tanh(t));
    const double panel = datum.kind() == Datum::Kind::hat_product ? 0.5 * datum.sigma() : 0.25 * datum.sigma();
    opt.order = std::min(order, 16 + static_cast<int>(std::ceil(4.0 * panel / width)));
    if (datum.kind() == Datum::Kind::hat_isotropic)
      opt.angular = std::clamp(static_cast<int>(std::ceil(6.0 * std::numbers::pi * datum.sigma() / width)), 32, 2048);
  }
  const QuadratureRule rule = datum_region_rule(datum, Region::full_space(x.size()), opt);
  return apply_rule(rule, [&](std::span<const double> y) { return g(x, y) * evaluate_datum(datum, y); });
}

/// x -> int g(x,t,y) datum(y) dy (datum itself at t = 0), without the factor N.
inline double propagation(const Datum& datum, std::span<const double> x, double t, const SolutionPath& path,
                          const CoefficientTable* table) {
  detail::require(x.size() == datum.dimension(), "solution: dimension mismatch");
  check_finite_point(x);
  if (t == 0.0) {
    if (datum.is_dirac()) throw ValidationError("solution: t = 0 with Dirac data is a measure, not a function");
    if (path.kind == SolutionPath::Kind::spectral)
      return table ? spectral_evaluate(*table, x, 0.0) : spectral_evaluate(unit_coefficients(datum, path.truncation), x, 0.0);
    if (path.kind == SolutionPath::Kind::closed_form && datum.is_hat())
      throw UnsupportedError("closed form requested for hat data");
    return evaluate_datum(datum, x);
  }
  switch (path.kind) {
    case SolutionPath::Kind::closed_form: return closed_form_propagation(datum, x, t);
    case SolutionPath::Kind::spectral:
      return table ? spectral_evaluate(*table, x, t) : spectral_evaluate(unit_coefficients(datum, path.truncation), x, t);
    case SolutionPath::Kind::quadrature: return quadrature_propagation(datum, x, t, path.order);
    case SolutionPath::Kind::automatic:
      return datum.is_hat() ? quadrature_propagation(datum, x, t, path.order) : closed_form_propagation(datum, x, t);
  }
  throw UnsupportedError("solution: unknown path");
}

}  // namespace detail

/// u(x,t) = N int g(x,t,y) phi0(y) dy on t in [0,T] (t > 0 for a Dirac start).
inline double forward_solution(const ProcessSpec& spec, std::span<const double> x, double t,
                               const SolutionPath& path = {}) {
  detail::require(t >= 0.0 && t <= spec.horizon(), "forward_solution: t must lie in [0, T]");
  return spec.normalization() * detail::propagation(spec.phi0(), x, t, path, nullptr);
}

/// v(x,t) = N int g(x,T-t,y) psiT(y) dy on t in [0,T] (t < T for a Dirac end).
inline double backward_solution(const ProcessSpec& spec, std::span<const double> x, double t,
                                const SolutionPath& path = {}) {
  detail::require(t >= 0.0 && t <= spec.horizon(), "backward_solution: t must lie in [0, T]");
  return spec.normalization() * detail::propagation(spec.psiT(), x, spec.horizon() - t, path, nullptr);
}

/// u or v bound to one evaluation path; spectral coefficients are computed once.
class SolutionField {
 public:
  enum class Direction { forward, backward };

  SolutionField(ProcessSpec spec, Direction dir, SolutionPath path = {})
      : spec_(std::move(spec)), dir_(dir), path_(path) {
    if (path_.kind == SolutionPath::Kind::spectral)
      table_ = unit_coefficients(dir_ == Direction::forward ? spec_.phi0() : spec_.psiT(), path_.truncation);
  }

  const ProcessSpec& spec() const { return spec_; }
  Direction direction() const { return dir_; }
  const SolutionPath& path() const { return path_; }

  double operator()(std::span<const double> x, double t) const {
    detail::require(t >= 0.0 && t <= spec_.horizon(), "SolutionField: t must lie in [0, T]");
    const Datum& datum = dir_ == Direction::forward ? spec_.phi0() : spec_.psiT();
    const double tau = dir_ == Direction::forward ? t : spec_.horizon() - t;
    return spec_.normalization() * detail::propagation(datum, x, tau, path_, table_ ? &*table_ : nullptr);
  }

 private:
  ProcessSpec spec_;
  Direction dir_;
  SolutionPath path_;
  std::optional<CoefficientTable> table_;
};

/// Central-difference residual of the equation solved by the field:
///   forward:  |d_t u - 1/2 Lap u + |x|^2/2 u|
///   backward: |d_t v + 1/2 Lap v - |x|^2/2 v|
inline double pde_residual(const SolutionField& field, std::span<const double> x, double t, double h) {
  detail::require(h > 0.0, "pde_residual: step must be positive");
  detail::require(t - h >= 0.0 && t + h <= field.spec().horizon(), "pde_residual: need t +- h inside [0, T]");
  const double u0 = field(x, t);
  const double dt = (field(x, t + h) - field(x, t - h)) / (2.0 * h);
  double lap = 0.0;
  Point y(x.begin(), x.end());
  for (std::size_t j = 0; j < y.size(); ++j) {
    y[j] = x[j] + h;
    const double up = field(y, t);
    y[j] = x[j] - h;
    const double dn = field(y, t);
    y[j] = x[j];
    lap += (up - 2.0 * u0 + dn) / (h * h);
  }
  const double pot = 0.5 * detail::norm2(x) * u0;
  if (field.direction() == SolutionField::Direction::forward) return std::abs(dt - 0.5 * lap + pot);
  return std::abs(dt + 0.5 * lap - pot);
}

}  // namespace bernstein
