#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "bumpscan/rng.hpp"

namespace bumpscan::arma {

/**
 * Stationary Gaussian ARMA(p, q) noise with unit innovation variance:
 *
 *   phi(B) Z_t = theta(B) zeta_t,   zeta_t ~ N(0, 1) i.i.d.,
 *   phi(z)   = 1 + sum_i ar[i-1] z^i,
 *   theta(z) = 1 + sum_i ma[i-1] z^i.
 *
 * Note the sign convention: the AR(1) recursion Z_t = rho Z_{t-1} + zeta_t
 * is ar = {-rho}. Empty vectors give white noise.
 */
struct ArmaModel {
  std::vector<double> ar;
  std::vector<double> ma;

  static ArmaModel white_noise() { return {}; }
  /// Z_t = rho Z_{t-1} + zeta_t.
  static ArmaModel ar1(double rho) { return {{-rho}, {}}; }

  std::size_t p() const noexcept { return ar.size(); }
  std::size_t q() const noexcept { return ma.size(); }
  bool is_pure_ar() const noexcept { return ma.empty(); }

  /// Full AR polynomial coefficients (1, ar...): index t holds phi_t.
  std::vector<double> ar_poly() const;

  friend bool operator==(const ArmaModel&, const ArmaModel&) = default;
};

struct ValidationReport {
  bool ok = true;
  std::vector<std::string> violations;

  explicit operator bool() const noexcept { return ok; }
};

inline constexpr double kRootTolerance = 1e-8;
inline constexpr double kCommonRootTolerance = 1e-6;

/// Root conditions: every root of phi and theta has |z| > 1 + 1e-8, and no
/// root of phi lies within 1e-6 of a root of theta. Throws InputError on
/// non-finite coefficients.
ValidationReport validate(const ArmaModel& model);

/// Throws DomainError listing the violations when validate() fails.
void require_valid(const ArmaModel& model);

/// Roots of 1 + sum c_i z^i (trailing zero coefficients are dropped).
std::vector<std::complex<double>> polynomial_roots(std::span<const double> coeffs);

/// Autocovariances gamma(0..L). truncation_tol is the relative bound on the
/// discarded tail of the psi-weight expansion that produced gamma(0..max(p,q)).
struct AutocovSeq {
  std::vector<double> values;
  double truncation_tol = 0.0;

  double operator[](std::size_t h) const { return values[h]; }
  std::size_t max_lag() const noexcept { return values.size() - 1; }
};

inline constexpr double kPsiCutoff = 1e-14;

/// MA(infinity) weights psi_0 = 1, psi_1, ... truncated once |psi_j| < cutoff
/// over a full window of max(p, 1) consecutive terms past lag max(p, q+1).
std::vector<double> psi_weights(const ArmaModel& model, double cutoff = kPsiCutoff);

/// gamma(0..max_lag) from psi weights, extended past lag max(p, q) with the
/// homogeneous recursion gamma(h) = -sum phi_i gamma(h - i).
AutocovSeq autocovariance(const ArmaModel& model, std::size_t max_lag);

/// Pure AR only: gamma(0..p) from the Yule-Walker linear system, then the
/// same recursion. Independent route used to cross-check autocovariance().
AutocovSeq autocovariance_yule_walker(const ArmaModel& model, std::size_t max_lag);

/// f(nu) = |theta(e^{-2 pi i nu})|^2 / |phi(e^{-2 pi i nu})|^2.
double spectral_density(const ArmaModel& model, double nu);

/// f(0) = ((1 + sum theta) / (1 + sum phi))^2.
double long_run_variance(const ArmaModel& model);

/// Var(Z_1 + ... + Z_n) = sum_{|h|<n} (n - |h|) gamma(h).
struct PartialSumVariance {
  double value = 0.0;
  double abs_error = 0.0;
};
PartialSumVariance partial_sum_variance(const ArmaModel& model, std::size_t n);

/**
 * Exact draws from N(0, Sigma_n) for a fixed model and length.
 *
 * Pure AR(p): the first min(p, n) values come from the stationary
 * distribution through a Cholesky factor of their autocovariance matrix,
 * then Z_t = -sum phi_i Z_{t-i} + zeta_t. White noise therefore returns the
 * raw normal stream unchanged.
 *
 * Otherwise: the Durbin-Levinson one-step predictors of the Toeplitz
 * covariance are rebuilt on the fly (O(n^2) time, O(n) memory) and
 * Z_t = prediction_t + sqrt(v_t) zeta_t.
 */
class NoiseSampler {
 public:
  NoiseSampler(const ArmaModel& model, std::size_t n);

  std::size_t size() const noexcept { return n_; }
  const ArmaModel& model() const noexcept { return model_; }

  void draw(Rng& rng, std::span<double> out) const;
  std::vector<double> draw(Rng& rng) const;

 private:
  void draw_ar(Rng& rng, std::span<double> out) const;
  void draw_levinson(Rng& rng, std::span<double> out) const;

  ArmaModel model_;
  std::size_t n_;
  std::vector<double> init_chol_;   // row-major lower factor, m0 x m0
  std::size_t init_dim_ = 0;
  std::vector<double> reflection_;  // kappa_1..kappa_{n-1}
  std::vector<double> innov_sd_;    // sqrt(v_0..v_{n-1})
};

/// One stationary path of length n; deterministic in (model, n, seed).
std::vector<double> sample_path(const ArmaModel& model, std::size_t n, std::uint64_t seed);

}  // namespace bumpscan::arma
