#pragma once

// Galerkin truncation onto span{h_n : 0 <= n_j < N} and the large-T approximations
// obtained by keeping only the ground state h_0.

#include <cmath>
#include <cstddef>
#include <numbers>
#include <optional>
#include <span>

#include "bernstein/coefficients.hpp"
#include "bernstein/datum.hpp"
#include "bernstein/errors.hpp"
#include "bernstein/hermite.hpp"
#include "bernstein/kernel.hpp"
#include "bernstein/model.hpp"
#include "bernstein/process.hpp"
#include "bernstein/region.hpp"

namespace bernstein {

/// alpha_n = N int datum(x) h_n(x) dx (h_n(0) scaled by N for the Dirac datum).
inline double fourier_coefficient(const Datum& datum, const MultiIndex& index, double normalization) {
  return normalization * unit_fourier_coefficient(datum, index);
}

/// Coefficient tables alpha_n, beta_n on {0..N-1}^d for one process.
class GalerkinTruncation {
 public:
  /// `normalization` overrides the process constant (e.g. with the ground-state value).
  GalerkinTruncation(const ProcessSpec& spec, int N, std::optional<double> normalization = std::nullopt)
      : d_(spec.dimension()), N_(N), T_(spec.horizon()), norm_(normalization.value_or(spec.normalization())) {
    detail::require(N >= 1 && N - 1 <= kMaxHermiteDegree, "GalerkinTruncation: N out of range");
    detail::require(norm_ > 0.0, "GalerkinTruncation: normalization must be positive");
    alpha_ = unit_coefficients(spec.phi0(), N).scaled(norm_);
    beta_ = unit_coefficients(spec.psiT(), N).scaled(norm_);
    if (alpha_.separable) rescale_axes(alpha_);
    if (beta_.separable) rescale_axes(beta_);
  }

  std::size_t dimension() const { return d_; }
  int truncation() const { return N_; }
  double horizon() const { return T_; }
  double normalization() const { return norm_; }
  const CoefficientTable& alpha() const { return alpha_; }
  const CoefficientTable& beta() const { return beta_; }

 private:
  // Fold the normalization into the first axis so that the per-axis factors and
  // the flattened table describe the same coefficients.
  void rescale_axes(CoefficientTable& t) const {
    for (double& v : t.axes.front()) v *= norm_;
  }

  std::size_t d_;
  int N_;
  double T_;
  double norm_;
  CoefficientTable alpha_;
  CoefficientTable beta_;
};

/// u_N(x,t) = sum_n alpha_n e^{-t E_n} h_n(x).
inline double truncated_forward(const GalerkinTruncation& tr, std::span<const double> x, double t) {
  detail::require(t >= 0.0 && t <= tr.horizon(), "truncated_forward: t must lie in [0, T]");
  return spectral_evaluate(tr.alpha(), x, t);
}

/// v_N(x,t) = sum_n beta_n e^{-(T-t) E_n} h_n(x).
inline double truncated_backward(const GalerkinTruncation& tr, std::span<const double> x, double t) {
  detail::require(t >= 0.0 && t <= tr.horizon(), "truncated_backward: t must lie in [0, T]");
  return spectral_evaluate(tr.beta(), x, tr.horizon() - t);
}

/// sum_n alpha_n e^{-T E_n} beta_n.
inline double spectral_normalization_sum(const GalerkinTruncation& tr) {
  return spectral_pairing(tr.alpha(), tr.beta(), tr.horizon());
}

/// |sum_n alpha_n e^{-T E_n} beta_n - 1|.
inline double spectral_normalization_residual(const GalerkinTruncation& tr) {
  return std::abs(spectral_normalization_sum(tr) - 1.0);
}

struct LemmaNormalization {
  double value = 0.0;  ///< N_{0,T} = c e^{T E_0 / 2}
  double c = 0.0;      ///< (alpha_hat_0 beta_hat_0)^{-1/2}, independent of T
};

/// Ground-state normalization: the positive root of N^2 alpha_hat_0 e^{-T E_0} beta_hat_0 = 1.
inline LemmaNormalization lemma_normalization(std::size_t d, double T, const Datum& phi0, const Datum& psiT) {
  detail::require(phi0.dimension() == d && psiT.dimension() == d, "lemma_normalization: data dimension");
  detail::require(T > 0.0 && std::isfinite(T), "lemma_normalization: T must be positive");
  const MultiIndex zero = MultiIndex::zero(d);
  const double prod = unit_fourier_coefficient(phi0, zero) * unit_fourier_coefficient(psiT, zero);
  if (!(prod > 0.0)) throw NumericError("lemma_normalization: ground-state coefficients must be positive");
  LemmaNormalization out;
  out.c = 1.0 / std::sqrt(prod);
  out.value = out.c * std::exp(0.5 * T * 0.5 * static_cast<double>(d));
  return out;
}

struct Prop4Result {
  double leading = 0.0;      ///< product of the two Gaussian masses
  double error_bound = 0.0;  ///< tail bound * N_{0,T}^2 * mass(phi0) * mass(psiT)
  double total_bound = 0.0;  ///< bound on |P - leading| including the normalization mismatch
};

/// Large-T joint endpoint law for Gaussian data:
///   P(Z_0 in F0, Z_T in FT) ~ G_0(F0) G_T(FT),
/// with G the Gaussian of mean a / (1 + sigma) and per-axis variance sigma / (1 + sigma).
/// `error_bound` bounds the omitted excited-state contribution with N_{0,T}; since
/// N_{0,T}^2 / N^2 also differs from 1 by at most that amount, |P - leading| <= 2 error_bound.
inline Prop4Result prop4_joint_probability(double sigma0, double sigmaT, std::span<const double> a0,
                                           std::span<const double> aT, const Region& F0, const Region& FT,
                                           double T, std::size_t d) {
  detail::require(a0.size() == d && aT.size() == d, "prop4: center dimension");
  const Datum phi0 = Datum::gaussian(sigma0, Point(a0.begin(), a0.end()));
  const Datum psiT = Datum::gaussian(sigmaT, Point(aT.begin(), aT.end()));
  auto leading_mass = [&](double sigma, std::span<const double> a, const Region& F) {
    Point m(a.begin(), a.end());
    for (double& v : m) v /= 1.0 + sigma;
    return gaussian_region_mass(m, sigma / (1.0 + sigma), F);
  };
  Prop4Result out;
  out.leading = leading_mass(sigma0, a0, F0) * leading_mass(sigmaT, aT, FT);
  const double n0t = lemma_normalization(d, T, phi0, psiT).value;
  out.error_bound = series_tail_bound(T, d, 1) * n0t * n0t * phi0.mass() * psiT.mass();
  out.total_bound = 2.0 * out.error_bound;
  return out;
}

/// int_{FT} u_{N=1}(x,T) psi(x) dx with the ground-state normalization, which
/// reduces to int_{FT} h_0 psiT / beta_hat_0.
inline double n1_marginal_probability(const ProcessSpec& spec, const Region& FT, RuleOptions opt = {}) {
  const Datum& psi = spec.psiT();
  if (psi.is_dirac()) throw UnsupportedError("n1_marginal_probability: needs a Gaussian or hat final datum");
  detail::require(FT.dimension() == spec.dimension(), "n1_marginal_probability: dimension mismatch");
  const MultiIndex zero = MultiIndex::zero(spec.dimension());
  const double beta0 = unit_fourier_coefficient(psi, zero);
  if (psi.is_gaussian()) detail::apply_hint(opt, detail::datum_form(psi) * gaussian_datum_form(1.0, Point(spec.dimension(), 0.0)));
  const double mass = apply_rule(detail::datum_region_rule(psi, FT, opt), [&](std::span<const double> x) {
    return tensor_hermite(zero, x) * evaluate_datum(psi, x);
  });
  return mass / beta0;
}

}  // namespace bernstein
