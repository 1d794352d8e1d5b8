#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "bumpscan/arma.hpp"

namespace bumpscan::cov {

/// Contiguous sample window; start is 1-based, covers start .. start+width-1.
struct WindowIndex {
  std::size_t start = 1;
  std::size_t width = 0;

  std::size_t end() const noexcept { return start + width - 1; }
  bool overlaps(const WindowIndex& o) const noexcept { return start <= o.end() && o.start <= end(); }
  friend bool operator==(const WindowIndex&, const WindowIndex&) = default;
};

/// Samples per bump: floor(n * lambda). A 1e-9 guard absorbs products such
/// as 0.29 * 100 = 28.999999999999996.
std::size_t window_width(std::size_t n, double lambda);

/// Disjoint blocks used by the likelihood-ratio test: min(floor(1/lambda), floor(n/w)).
std::size_t block_count(std::size_t n, double lambda);

/**
 * Symmetric positive definite Toeplitz covariance Sigma_n(i, j) = gamma(|i-j|).
 * Construction runs the Durbin recursion once and rejects matrices whose
 * reflection coefficients reach |kappa| >= 1 - 1e-12.
 */
class ToeplitzCov {
 public:
  explicit ToeplitzCov(std::vector<double> first_row);
  static ToeplitzCov from_model(const arma::ArmaModel& model, std::size_t n);

  std::size_t n() const noexcept { return gamma_.size(); }
  std::span<const double> gamma() const noexcept { return gamma_; }
  std::span<const double> reflection() const noexcept { return reflection_; }
  /// 0-based entry.
  double operator()(std::size_t i, std::size_t j) const noexcept {
    return gamma_[i > j ? i - j : j - i];
  }

 private:
  std::vector<double> gamma_;
  std::vector<double> reflection_;
};

inline constexpr double kReflectionBound = 1.0 - 1e-12;

/// 1^T Sigma 1 over any w consecutive samples: sum_{|h|<w} (w - |h|) gamma(h).
double window_variance(const ToeplitzCov& cov, std::size_t w);

/// Solves Sigma x = rhs with the Levinson recursion in O(n^2).
std::vector<double> toeplitz_solve(const ToeplitzCov& cov, std::span<const double> rhs);

/**
 * Exact precision matrix of n consecutive samples of a stationary AR(p)
 * process; symmetric, persymmetric, and zero outside 2p+1 diagonals.
 * Stored diagonal-major: diagonal k holds entries (i, i+k), i = 0..n-k-1.
 */
class BandedPrecision {
 public:
  BandedPrecision(std::size_t n, std::size_t p, std::vector<double> bands);

  std::size_t n() const noexcept { return n_; }
  std::size_t p() const noexcept { return p_; }
  /// 0-based entry; zero outside the band.
  double operator()(std::size_t i, std::size_t j) const noexcept;
  std::span<const double> diagonal(std::size_t k) const noexcept;

  /// y = P x in O(n p).
  void apply(std::span<const double> x, std::span<double> y) const;
  std::vector<double> apply(std::span<const double> x) const;

 private:
  std::size_t n_;
  std::size_t p_;
  std::vector<double> bands_;
  std::vector<std::size_t> offsets_;
};

/// Precision matrix of an AR(p) model; requires q = 0 and n > p.
BandedPrecision ar_precision(const arma::ArmaModel& model, std::size_t n);

/**
 * S_{r,m} = 1_{r,m}^T Sigma_n^{-1} 1_{r,m} for m = 1..n-r+1 (returned
 * 0-based: element m-1), by the first-block closed form and the increment
 * recursion. Requires a pure AR model, 1 <= r <= n - 2p and n >= 3p.
 */
std::vector<double> block_sums(const arma::ArmaModel& model, std::size_t n, std::size_t r);

struct SigmaTildeExtremes {
  double inf = 0.0;
  double sup = 0.0;
  std::size_t width = 0;   // r = floor(n lambda)
  std::size_t blocks = 0;  // number of disjoint blocks
};

/**
 * Min and max of the block variances sigma~_k = S_{r,(k-1)r+1} over the
 * disjoint blocks. Requires a pure AR model, 1 <= r <= n - 2p and n > 3p.
 *
 * inf is the first-block closed form. sup is S_{r,p+1} (the plateau value)
 * whenever some block start lies on the plateau p+1 <= m <= n-p-r+1, and
 * otherwise the largest block value from block_sums.
 */
SigmaTildeExtremes sigma_tilde_extremes(const arma::ArmaModel& model, std::size_t n, double lambda);

}  // namespace bumpscan::cov
