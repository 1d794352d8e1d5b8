#include "bumpscan/covtools.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "bumpscan/errors.hpp"

namespace bumpscan::cov {

namespace {

void require_pure_ar(const arma::ArmaModel& model, const char* op) {
  if (!model.is_pure_ar())
    throw UnsupportedError(std::string(op) + " requires a pure AR model (no MA part)");
}

// Range checks shared by block_sums and sigma_tilde_extremes.
void require_block_range(std::size_t n, std::size_t p, std::size_t r, bool strict_n) {
  std::ostringstream os;
  if (strict_n ? !(n > 3 * p) : !(n >= 3 * p)) {
    os << "block sums need n " << (strict_n ? ">" : ">=") << " 3p (n=" << n << ", p=" << p << ")";
    throw InputError(os.str());
  }
  if (r < 1 || r + 2 * p > n) {
    os << "block width r=" << r << " outside [1, n-2p] with n=" << n << ", p=" << p;
    throw InputError(os.str());
  }
}

// Sum_{t=lo}^{hi} phi_t with phi_t = 0 outside 0..p.
double phi_sum(std::span<const double> phi, long lo, long hi) {
  const long p = static_cast<long>(phi.size()) - 1;
  double s = 0.0;
  for (long t = std::max(lo, 0L); t <= std::min(hi, p); ++t) s += phi[static_cast<std::size_t>(t)];
  return s;
}

double square(double x) { return x * x; }

// S_{r,m+1} - S_{r,m} for 1 <= m <= n-r. Positions are 1-based.
double block_increment(std::span<const double> phi, long n, long r, long m) {
  const long p = static_cast<long>(phi.size()) - 1;
  if (r <= p) {
    if (m <= p + 1 - r) return square(phi_sum(phi, m, m + r - 1));
    if (m <= p) return square(phi_sum(phi, m, p));
    if (m <= n - p - r) return 0.0;
    // n-p-r+1 <= m <= n-p: terms phi_{n-m-t} for t = n-m-p .. r-1
    if (m <= n - p) return -square(phi_sum(phi, n - m - r + 1, p));
    return -square(phi_sum(phi, n - m - r + 1, n - m));
  }
  if (m <= p) return square(phi_sum(phi, m, p));
  if (m <= n - p - r) return 0.0;
  return -square(phi_sum(phi, n - m - r + 1, p));
}

// S_{r,1}.
double first_block_sum(std::span<const double> phi, std::size_t r) {
  const std::size_t p = phi.size() - 1;
  double partial = 0.0;
  double s = 0.0;
  for (std::size_t j = 1; j <= std::min(r, p); ++j) {
    partial += phi[j - 1];
    s += partial * partial;
  }
  if (r > p) {
    const double total = partial + phi[p];
    s += static_cast<double>(r - p) * total * total;
  }
  return s;
}

// Plateau value S_{r,p+1} - S_{r,1}.
double plateau_excess(std::span<const double> phi, std::size_t r) {
  const long p = static_cast<long>(phi.size()) - 1;
  const long rr = static_cast<long>(r);
  double s = 0.0;
  if (rr > p) {
    for (long i = 1; i <= p; ++i) s += square(phi_sum(phi, i, p));
  } else {
    for (long i = 1; i <= p - rr + 1; ++i) s += square(phi_sum(phi, i, i + rr - 1));
    for (long i = p - rr + 2; i <= p; ++i) s += square(phi_sum(phi, i, p));
  }
  return s;
}

}  // namespace

std::size_t window_width(std::size_t n, double lambda) {
  if (!(lambda > 0.0 && lambda < 1.0)) throw InputError("bump length lambda must lie in (0, 1)");
  return static_cast<std::size_t>(std::floor(static_cast<double>(n) * lambda + 1e-9));
}

std::size_t block_count(std::size_t n, double lambda) {
  const std::size_t w = window_width(n, lambda);
  if (w == 0) throw InputError("floor(n * lambda) must be at least 1");
  const auto by_lambda = static_cast<std::size_t>(std::floor(1.0 / lambda + 1e-9));
  return std::min(by_lambda, n / w);
}

// ---------------------------------------------------------------------------

ToeplitzCov::ToeplitzCov(std::vector<double> first_row) : gamma_(std::move(first_row)) {
  if (gamma_.empty()) throw InputError("Toeplitz covariance needs n >= 1");
  if (!(gamma_[0] > 0.0)) throw IllConditionedError("Toeplitz covariance: gamma(0) must be positive");
  const std::size_t n = gamma_.size();
  reflection_.reserve(n - 1);
  std::vector<double> a;
  std::vector<double> prev;
  double v = gamma_[0];
  for (std::size_t m = 1; m < n; ++m) {
    double num = gamma_[m];
    for (std::size_t k = 1; k < m; ++k) num -= a[k - 1] * gamma_[m - k];
    const double kappa = num / v;
    if (!(std::abs(kappa) < kReflectionBound)) {
      std::ostringstream os;
      os << "Toeplitz covariance not positive definite: reflection coefficient " << m << " = " << kappa;
      throw IllConditionedError(os.str());
    }
    prev = a;
    for (std::size_t k = 1; k < m; ++k) a[k - 1] = prev[k - 1] - kappa * prev[m - k - 1];
    a.push_back(kappa);
    v *= 1.0 - kappa * kappa;
    reflection_.push_back(kappa);
  }
}

ToeplitzCov ToeplitzCov::from_model(const arma::ArmaModel& model, std::size_t n) {
  if (n == 0) throw InputError("Toeplitz covariance needs n >= 1");
  return ToeplitzCov(arma::autocovariance(model, n - 1).values);
}

double window_variance(const ToeplitzCov& cov, std::size_t w) {
  if (w < 1 || w > cov.n()) {
    std::ostringstream os;
    os << "window width " << w << " outside [1, " << cov.n() << "]";
    throw InputError(os.str());
  }
  const auto g = cov.gamma();
  double s = static_cast<double>(w) * g[0];
  for (std::size_t h = 1; h < w; ++h) s += 2.0 * static_cast<double>(w - h) * g[h];
  return s;
}

std::vector<double> toeplitz_solve(const ToeplitzCov& cov, std::span<const double> rhs) {
  const std::size_t n = cov.n();
  if (rhs.size() != n) throw InputError("toeplitz_solve: rhs length does not match dimension");
  const auto g = cov.gamma();
  const double g0 = g[0];
  std::vector<double> x(n);
  x[0] = rhs[0];
  if (n == 1) {
    x[0] /= g0;
    return x;
  }

  // Levinson's algorithm on the unit-diagonal matrix with first row (1, r_1, ..).
  std::vector<double> r(n - 1);
  for (std::size_t k = 1; k < n; ++k) r[k - 1] = g[k] / g0;
  std::vector<double> y(n - 1);
  std::vector<double> tmp(n);
  y[0] = -r[0];
  double beta = 1.0;
  double alpha = -r[0];
  if (!(std::abs(alpha) < kReflectionBound))
    throw IllConditionedError("toeplitz_solve: reflection coefficient at degeneracy bound");

  for (std::size_t k = 1; k < n; ++k) {
    beta *= (1.0 - alpha * alpha);
    double dot = 0.0;
    for (std::size_t i = 0; i < k; ++i) dot += r[i] * x[k - 1 - i];
    const double mu = (rhs[k] - dot) / beta;
    for (std::size_t i = 0; i < k; ++i) tmp[i] = x[i] + mu * y[k - 1 - i];
    std::copy_n(tmp.begin(), k, x.begin());
    x[k] = mu;
    if (k < n - 1) {
      double ydot = 0.0;
      for (std::size_t i = 0; i < k; ++i) ydot += r[i] * y[k - 1 - i];
      alpha = (-r[k] - ydot) / beta;
      if (!(std::abs(alpha) < kReflectionBound))
        throw IllConditionedError("toeplitz_solve: reflection coefficient at degeneracy bound");
      for (std::size_t i = 0; i < k; ++i) tmp[i] = y[i] + alpha * y[k - 1 - i];
      std::copy_n(tmp.begin(), k, y.begin());
      y[k] = alpha;
    }
  }
  for (auto& v : x) v /= g0;
  return x;
}

// ---------------------------------------------------------------------------

BandedPrecision::BandedPrecision(std::size_t n, std::size_t p, std::vector<double> bands)
    : n_(n), p_(p), bands_(std::move(bands)) {
  offsets_.resize(p_ + 2);
  offsets_[0] = 0;
  for (std::size_t k = 0; k <= p_; ++k) offsets_[k + 1] = offsets_[k] + (k < n_ ? n_ - k : 0);
  if (bands_.size() != offsets_.back()) throw InputError("BandedPrecision: band storage has wrong size");
}

double BandedPrecision::operator()(std::size_t i, std::size_t j) const noexcept {
  const std::size_t lo = std::min(i, j);
  const std::size_t k = std::max(i, j) - lo;
  if (k > p_ || k >= n_) return 0.0;
  return bands_[offsets_[k] + lo];
}

std::span<const double> BandedPrecision::diagonal(std::size_t k) const noexcept {
  if (k > p_) return {};
  return std::span<const double>(bands_).subspan(offsets_[k], offsets_[k + 1] - offsets_[k]);
}

void BandedPrecision::apply(std::span<const double> x, std::span<double> y) const {
  if (x.size() != n_ || y.size() != n_) throw InputError("BandedPrecision::apply: length mismatch");
  const auto d0 = diagonal(0);
  for (std::size_t i = 0; i < n_; ++i) y[i] = d0[i] * x[i];
  for (std::size_t k = 1; k <= p_ && k < n_; ++k) {
    const auto dk = diagonal(k);
    for (std::size_t i = 0; i + k < n_; ++i) {
      y[i] += dk[i] * x[i + k];
      y[i + k] += dk[i] * x[i];
    }
  }
}

std::vector<double> BandedPrecision::apply(std::span<const double> x) const {
  std::vector<double> y(n_);
  apply(x, y);
  return y;
}

BandedPrecision ar_precision(const arma::ArmaModel& model, std::size_t n) {
  require_pure_ar(model, "ar_precision");
  arma::require_valid(model);
  const std::size_t p = model.p();
  if (n <= p) {
    std::ostringstream os;
    os << "ar_precision needs n > p (n=" << n << ", p=" << p << ")";
    throw InputError(os.str());
  }
  const auto phi = model.ar_poly();
  // D(k, hi) = sum_{t=0}^{min(hi, p-k)} phi_t phi_{t+k}
  auto lag_product = [&](std::size_t k, std::size_t hi) {
    double s = 0.0;
    for (std::size_t t = 0; t <= std::min(hi, p - k); ++t) s += phi[t] * phi[t + k];
    return s;
  };

  std::vector<double> bands;
  bands.reserve((p + 1) * n);
  for (std::size_t k = 0; k <= p; ++k) {
    const double full = lag_product(k, p - k);
    for (std::size_t i = 1; i + k <= n; ++i) {
      const std::size_t j = i + k;
      // Top-left corner limits t <= i-1, bottom-right corner limits t <= n-j.
      // For n >= 2p at most one limit binds; for n < 2p the corners overlap
      // and the doubly-restricted terms are removed by inclusion-exclusion.
      bands.push_back(lag_product(k, i - 1) + lag_product(k, n - j) - full);
    }
  }
  return BandedPrecision(n, p, std::move(bands));
}

std::vector<double> block_sums(const arma::ArmaModel& model, std::size_t n, std::size_t r) {
  require_pure_ar(model, "block_sums");
  const std::size_t p = model.p();
  require_block_range(n, p, r, false);
  const auto phi = model.ar_poly();

  std::vector<double> s(n - r + 1);
  s[0] = first_block_sum(phi, r);
  for (std::size_t m = 1; m + r <= n; ++m)
    s[m] = s[m - 1] + block_increment(phi, static_cast<long>(n), static_cast<long>(r), static_cast<long>(m));
  return s;
}

SigmaTildeExtremes sigma_tilde_extremes(const arma::ArmaModel& model, std::size_t n, double lambda) {
  require_pure_ar(model, "sigma_tilde_extremes");
  const std::size_t p = model.p();
  const std::size_t r = window_width(n, lambda);
  require_block_range(n, p, r, true);
  const std::size_t blocks = block_count(n, lambda);
  const auto phi = model.ar_poly();

  SigmaTildeExtremes out;
  out.width = r;
  out.blocks = blocks;
  out.inf = first_block_sum(phi, r);

  bool on_plateau = false;
  for (std::size_t k = 0; k < blocks && !on_plateau; ++k) {
    const std::size_t start = k * r + 1;
    on_plateau = start >= p + 1 && start + p + r <= n + 1;
  }
  if (on_plateau) {
    out.sup = out.inf + plateau_excess(phi, r);
  } else {
    const auto s = block_sums(model, n, r);
    out.sup = out.inf;
    for (std::size_t k = 0; k < blocks; ++k) out.sup = std::max(out.sup, s[k * r]);
  }
  return out;
}

}  // namespace bumpscan::cov
