#include "bumpscan/arma.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <sstream>

#include <Eigen/Dense>

#include "bumpscan/errors.hpp"

namespace bumpscan::arma {

namespace {

void require_finite(std::span<const double> v, const char* name) {
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!std::isfinite(v[i])) {
      std::ostringstream os;
      os << name << " coefficient " << (i + 1) << " is not finite";
      throw InputError(os.str());
    }
  }
}

double min_root_modulus(std::span<const double> coeffs) {
  double m = std::numeric_limits<double>::infinity();
  for (const auto& r : polynomial_roots(coeffs)) m = std::min(m, std::abs(r));
  return m;
}

// Extends gamma(0..base) to gamma(0..max_lag) for lags past max(p, q).
void extend_by_recursion(const ArmaModel& model, std::vector<double>& gamma, std::size_t max_lag) {
  const std::size_t start = gamma.size();
  gamma.resize(std::max(start, max_lag + 1), 0.0);
  for (std::size_t h = start; h <= max_lag; ++h) {
    double acc = 0.0;
    for (std::size_t i = 1; i <= model.p(); ++i) acc -= model.ar[i - 1] * gamma[h - i];
    gamma[h] = acc;
  }
  gamma.resize(max_lag + 1);
}

}  // namespace

std::vector<double> ArmaModel::ar_poly() const {
  std::vector<double> phi(ar.size() + 1);
  phi[0] = 1.0;
  std::copy(ar.begin(), ar.end(), phi.begin() + 1);
  return phi;
}

std::vector<std::complex<double>> polynomial_roots(std::span<const double> coeffs) {
  // coeffs are c_1..c_d of 1 + sum c_i z^i
  std::size_t degree = coeffs.size();
  while (degree > 0 && coeffs[degree - 1] == 0.0) --degree;
  if (degree == 0) return {};
  if (degree == 1) return {std::complex<double>(-1.0 / coeffs[0], 0.0)};

  // Companion matrix of the monic polynomial z^d + (c_{d-1}/c_d) z^{d-1} + ... + 1/c_d.
  const double lead = coeffs[degree - 1];
  Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(degree, degree);
  for (std::size_t i = 1; i < degree; ++i) companion(i, i - 1) = 1.0;
  for (std::size_t k = 0; k < degree; ++k) {
    const double ck = (k == 0) ? 1.0 : coeffs[k - 1];
    companion(k, degree - 1) = -ck / lead;
  }
  Eigen::EigenSolver<Eigen::MatrixXd> solver(companion, false);
  std::vector<std::complex<double>> roots(degree);
  for (std::size_t i = 0; i < degree; ++i) roots[i] = solver.eigenvalues()[i];
  return roots;
}

ValidationReport validate(const ArmaModel& model) {
  require_finite(model.ar, "ar");
  require_finite(model.ma, "ma");

  ValidationReport report;
  const auto ar_roots = polynomial_roots(model.ar);
  const auto ma_roots = polynomial_roots(model.ma);

  auto check_outside = [&](const std::vector<std::complex<double>>& roots, const char* which) {
    for (const auto& r : roots) {
      const double modulus = std::abs(r);
      if (modulus - 1.0 <= kRootTolerance) {
        std::ostringstream os;
        os.precision(10);
        if (std::abs(modulus - 1.0) <= kRootTolerance)
          os << which << " root on unit circle (|z| = " << modulus << ")";
        else
          os << which << " root inside unit circle (|z| = " << modulus << ")";
        report.violations.push_back(os.str());
      }
    }
  };
  check_outside(ar_roots, "AR");
  check_outside(ma_roots, "MA");

  for (const auto& a : ar_roots) {
    for (const auto& b : ma_roots) {
      if (std::abs(a - b) <= kCommonRootTolerance) {
        std::ostringstream os;
        os.precision(10);
        os << "AR and MA share a root near z = " << a.real() << (a.imag() < 0 ? " - " : " + ")
           << std::abs(a.imag()) << "i";
        report.violations.push_back(os.str());
      }
    }
  }
  report.ok = report.violations.empty();
  return report;
}

void require_valid(const ArmaModel& model) {
  const auto report = validate(model);
  if (report.ok) return;
  std::string msg = "invalid ARMA model: ";
  for (std::size_t i = 0; i < report.violations.size(); ++i) {
    if (i) msg += "; ";
    msg += report.violations[i];
  }
  throw DomainError(msg);
}

std::vector<double> psi_weights(const ArmaModel& model, double cutoff) {
  const std::size_t p = model.p();
  const std::size_t q = model.q();
  const std::size_t window = std::max<std::size_t>(p, 1);
  const std::size_t min_len = std::max(p, q + 1);
  constexpr std::size_t kMaxTerms = 20'000'000;

  std::vector<double> psi{1.0};
  if (p == 0) {
    psi.insert(psi.end(), model.ma.begin(), model.ma.end());
    return psi;
  }
  std::size_t small_run = 0;
  for (std::size_t j = 1; j < kMaxTerms; ++j) {
    double v = (j <= q) ? model.ma[j - 1] : 0.0;
    for (std::size_t i = 1; i <= std::min(p, j); ++i) v -= model.ar[i - 1] * psi[j - i];
    psi.push_back(v);
    small_run = (std::abs(v) < cutoff) ? small_run + 1 : 0;
    if (j >= min_len && small_run >= window) break;
  }
  return psi;
}

AutocovSeq autocovariance(const ArmaModel& model, std::size_t max_lag) {
  require_valid(model);
  const auto psi = psi_weights(model);
  const std::size_t base = std::max(model.p(), model.q());

  std::vector<double> gamma(base + 1, 0.0);
  for (std::size_t h = 0; h <= base; ++h) {
    double acc = 0.0;
    for (std::size_t j = 0; j + h < psi.size(); ++j) acc += psi[j] * psi[j + h];
    gamma[h] = acc;
  }

  // Tail bound of the discarded expansion: |psi_j| decays like r^j with
  // r = 1 / min |root of phi|, and the last retained weights are below the cutoff.
  double tol = 0.0;
  if (model.p() > 0) {
    const double r = 1.0 / min_root_modulus(model.ar);
    double abs_sum = 0.0;
    for (double v : psi) abs_sum += std::abs(v);
    const double tail = kPsiCutoff / (1.0 - r);
    tol = 2.0 * tail * (abs_sum + tail) / gamma[0];
  }

  extend_by_recursion(model, gamma, max_lag);
  return {std::move(gamma), tol};
}

AutocovSeq autocovariance_yule_walker(const ArmaModel& model, std::size_t max_lag) {
  if (!model.is_pure_ar()) throw UnsupportedError("Yule-Walker autocovariance requires a pure AR model");
  require_valid(model);
  const std::size_t p = model.p();
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(p + 1, p + 1);
  Eigen::VectorXd b = Eigen::VectorXd::Zero(p + 1);
  b(0) = 1.0;
  for (std::size_t h = 0; h <= p; ++h) {
    a(h, h) += 1.0;
    for (std::size_t i = 1; i <= p; ++i) {
      const std::size_t lag = h >= i ? h - i : i - h;
      a(h, lag) += model.ar[i - 1];
    }
  }
  const Eigen::VectorXd sol = a.fullPivLu().solve(b);
  std::vector<double> gamma(sol.data(), sol.data() + sol.size());
  extend_by_recursion(model, gamma, max_lag);
  return {std::move(gamma), 0.0};
}

double spectral_density(const ArmaModel& model, double nu) {
  require_valid(model);
  const std::complex<double> z = std::polar(1.0, -2.0 * std::numbers::pi * nu);
  auto eval = [&](const std::vector<double>& c) {
    std::complex<double> acc = 1.0;
    std::complex<double> zk = 1.0;
    for (double ck : c) {
      zk *= z;
      acc += ck * zk;
    }
    return acc;
  };
  return std::norm(eval(model.ma)) / std::norm(eval(model.ar));
}

double long_run_variance(const ArmaModel& model) {
  require_valid(model);
  double num = 1.0;
  for (double t : model.ma) num += t;
  double den = 1.0;
  for (double f : model.ar) den += f;
  const double ratio = num / den;
  return ratio * ratio;
}

PartialSumVariance partial_sum_variance(const ArmaModel& model, std::size_t n) {
  if (n == 0) throw InputError("partial_sum_variance: n must be positive");
  const auto gamma = autocovariance(model, n - 1);
  const double nn = static_cast<double>(n);
  double value = nn * gamma[0];
  double abs_weighted = nn * std::abs(gamma[0]);
  for (std::size_t h = 1; h < n; ++h) {
    const double weight = 2.0 * static_cast<double>(n - h);
    value += weight * gamma[h];
    abs_weighted += weight * std::abs(gamma[h]);
  }
  const double rounding = static_cast<double>(n) * std::numeric_limits<double>::epsilon() * abs_weighted;
  return {value, gamma.truncation_tol * abs_weighted + rounding};
}

// ---------------------------------------------------------------------------

NoiseSampler::NoiseSampler(const ArmaModel& model, std::size_t n) : model_(model), n_(n) {
  if (n == 0) throw InputError("sample length n must be at least 1");
  require_valid(model_);

  if (model_.is_pure_ar()) {
    init_dim_ = std::min(model_.p(), n_);
    if (init_dim_ == 0) return;
    const auto gamma = autocovariance(model_, init_dim_ - 1);
    const std::size_t m = init_dim_;
    init_chol_.assign(m * m, 0.0);
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t j = 0; j <= i; ++j) {
        double s = gamma[i - j];
        for (std::size_t k = 0; k < j; ++k) s -= init_chol_[i * m + k] * init_chol_[j * m + k];
        if (i == j) {
          if (s <= 0.0) throw IllConditionedError("initial AR covariance is not positive definite");
          init_chol_[i * m + i] = std::sqrt(s);
        } else {
          init_chol_[i * m + j] = s / init_chol_[j * m + j];
        }
      }
    }
    return;
  }

  // Durbin-Levinson: reflection coefficients and innovation variances.
  const auto gamma = autocovariance(model_, n_ - 1);
  reflection_.assign(n_ > 0 ? n_ - 1 : 0, 0.0);
  innov_sd_.assign(n_, 0.0);
  std::vector<double> a;  // predictor of current order, a[k-1] multiplies Z_{t-k}
  std::vector<double> prev;
  a.reserve(n_);
  double v = gamma[0];
  innov_sd_[0] = std::sqrt(v);
  for (std::size_t m = 1; m < n_; ++m) {
    double num = gamma[m];
    for (std::size_t k = 1; k < m; ++k) num -= a[k - 1] * gamma[m - k];
    const double kappa = num / v;
    if (!(std::abs(kappa) < 1.0 - 1e-12))
      throw IllConditionedError("Levinson recursion: reflection coefficient at degeneracy bound");
    prev = a;
    for (std::size_t k = 1; k < m; ++k) a[k - 1] = prev[k - 1] - kappa * prev[m - k - 1];
    a.push_back(kappa);
    v *= (1.0 - kappa * kappa);
    reflection_[m - 1] = kappa;
    innov_sd_[m] = std::sqrt(v);
  }
}

void NoiseSampler::draw(Rng& rng, std::span<double> out) const {
  if (out.size() != n_) throw InputError("NoiseSampler::draw: output length mismatch");
  if (model_.is_pure_ar())
    draw_ar(rng, out);
  else
    draw_levinson(rng, out);
}

std::vector<double> NoiseSampler::draw(Rng& rng) const {
  std::vector<double> out(n_);
  draw(rng, out);
  return out;
}

void NoiseSampler::draw_ar(Rng& rng, std::span<double> out) const {
  const std::size_t m = init_dim_;
  const std::size_t p = model_.p();
  if (m > 0) {
    std::vector<double> e(m);
    for (auto& x : e) x = rng.normal();
    for (std::size_t i = 0; i < m; ++i) {
      double s = 0.0;
      for (std::size_t k = 0; k <= i; ++k) s += init_chol_[i * m + k] * e[k];
      out[i] = s;
    }
  }
  for (std::size_t t = m; t < n_; ++t) {
    double z = rng.normal();
    for (std::size_t i = 1; i <= p; ++i) z -= model_.ar[i - 1] * out[t - i];
    out[t] = z;
  }
}

void NoiseSampler::draw_levinson(Rng& rng, std::span<double> out) const {
  std::vector<double> a;
  std::vector<double> prev;
  a.reserve(n_);
  out[0] = innov_sd_[0] * rng.normal();
  for (std::size_t t = 1; t < n_; ++t) {
    // step the predictor up to order t
    const double kappa = reflection_[t - 1];
    prev = a;
    for (std::size_t k = 1; k < t; ++k) a[k - 1] = prev[k - 1] - kappa * prev[t - k - 1];
    a.push_back(kappa);
    double pred = 0.0;
    for (std::size_t k = 1; k <= t; ++k) pred += a[k - 1] * out[t - k];
    out[t] = pred + innov_sd_[t] * rng.normal();
  }
}

std::vector<double> sample_path(const ArmaModel& model, std::size_t n, std::uint64_t seed) {
  const NoiseSampler sampler(model, n);
  Rng rng(seed);
  return sampler.draw(rng);
}

}  // namespace bumpscan::arma
