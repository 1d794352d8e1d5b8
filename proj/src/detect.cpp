#include "bumpscan/detect.hpp"

#include <charconv>
#include <cmath>
#include <numbers>
#include <sstream>

#include "bumpscan/errors.hpp"
#include "bumpscan/io.hpp"

namespace bumpscan::detect {

namespace {

// prefix[i] = y_1 + ... + y_i. Both tests take window sums as prefix
// differences so that, for identity precision, their statistics agree bit for bit.
void prefix_sums(std::span<const double> y, std::vector<double>& prefix) {
  prefix.resize(y.size() + 1);
  prefix[0] = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) prefix[i + 1] = prefix[i] + y[i];
}

std::size_t checked_width(const TestConfig& cfg) {
  if (cfg.n == 0) throw InputError("test configuration needs n >= 1");
  const std::size_t w = cov::window_width(cfg.n, cfg.lambda);
  if (w < 1 || w > cfg.n) {
    std::ostringstream os;
    os << "window width floor(n*lambda)=" << w << " outside [1, " << cfg.n << "]";
    throw InputError(os.str());
  }
  return w;
}

void require_length(std::span<const double> y, std::size_t n) {
  if (y.size() != n) {
    std::ostringstream os;
    os << "observation length " << y.size() << " does not match n=" << n;
    throw InputError(os.str());
  }
}

}  // namespace

TestKind parse_test_kind(std::string_view name) {
  if (name == "scan") return TestKind::scan;
  if (name == "disjoint") return TestKind::disjoint;
  throw InputError("unknown test kind '" + std::string(name) + "' (expected scan or disjoint)");
}

std::string_view to_string(TestKind kind) { return kind == TestKind::scan ? "scan" : "disjoint"; }

std::string to_csv_row(const TestOutcome& o) {
  std::string row = io::format_double(o.statistic);
  row += ',';
  row += io::format_double(o.threshold);
  row += o.reject ? ",1," : ",0,";
  row += std::to_string(o.argmax_window.start);
  row += ',';
  row += std::to_string(o.argmax_window.width);
  return row;
}

double threshold(double alpha, double lambda) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw InputError("significance level alpha must lie in (0, 1)");
  if (!(lambda > 0.0 && lambda < 1.0)) throw InputError("bump length lambda must lie in (0, 1)");
  return std::sqrt(2.0 * std::log(2.0 / (alpha * lambda)));
}

// ---------------------------------------------------------------------------

ScanTest::ScanTest(const TestConfig& cfg)
    : n_(cfg.n), width_(checked_width(cfg)), threshold_(detect::threshold(cfg.alpha, cfg.lambda)) {
  const auto gamma = arma::autocovariance(cfg.model, width_ - 1);
  double var = static_cast<double>(width_) * gamma[0];
  for (std::size_t h = 1; h < width_; ++h) var += 2.0 * static_cast<double>(width_ - h) * gamma[h];
  window_sd_ = std::sqrt(var);
}

TestOutcome ScanTest::operator()(std::span<const double> y) const {
  require_length(y, n_);
  thread_local std::vector<double> prefix;
  prefix_sums(y, prefix);
  double best = -1.0;
  std::size_t best_start = 1;
  for (std::size_t m = 0; m + width_ <= n_; ++m) {
    const double s = std::abs(prefix[m + width_] - prefix[m]);
    if (s > best) {
      best = s;
      best_start = m + 1;
    }
  }
  TestOutcome out;
  out.statistic = best / window_sd_;
  out.threshold = threshold_;
  out.reject = out.statistic > out.threshold;
  out.argmax_window = {best_start, width_};
  return out;
}

// ---------------------------------------------------------------------------

DisjointLrtTest::DisjointLrtTest(const TestConfig& cfg)
    : n_(cfg.n),
      width_(checked_width(cfg)),
      blocks_(cov::block_count(cfg.n, cfg.lambda)),
      threshold_(detect::threshold(cfg.alpha, cfg.lambda)) {
  sigma_tilde_.resize(blocks_);
  if (cfg.model.is_pure_ar()) {
    precision_ = cov::ar_precision(cfg.model, n_);
    const auto s = cov::block_sums(cfg.model, n_, width_);
    for (std::size_t k = 0; k < blocks_; ++k) sigma_tilde_[k] = s[k * width_];
    return;
  }
  const auto cov = cov::ToeplitzCov::from_model(cfg.model, n_);
  whitened_indicators_.reserve(blocks_);
  std::vector<double> indicator(n_, 0.0);
  for (std::size_t k = 0; k < blocks_; ++k) {
    std::fill(indicator.begin(), indicator.end(), 0.0);
    std::fill_n(indicator.begin() + static_cast<std::ptrdiff_t>(k * width_), width_, 1.0);
    auto x = cov::toeplitz_solve(cov, indicator);
    double s = 0.0;
    for (std::size_t i = k * width_; i < (k + 1) * width_; ++i) s += x[i];
    sigma_tilde_[k] = s;
    whitened_indicators_.push_back(std::move(x));
  }
}

std::vector<double> DisjointLrtTest::block_statistics(std::span<const double> y) const {
  require_length(y, n_);
  std::vector<double> stats(blocks_);
  if (precision_) {
    thread_local std::vector<double> u;
    thread_local std::vector<double> prefix;
    u.resize(n_);
    precision_->apply(y, u);
    prefix_sums(u, prefix);
    for (std::size_t k = 0; k < blocks_; ++k)
      stats[k] = (prefix[(k + 1) * width_] - prefix[k * width_]) / std::sqrt(sigma_tilde_[k]);
  } else {
    for (std::size_t k = 0; k < blocks_; ++k) {
      const auto& x = whitened_indicators_[k];
      double s = 0.0;
      for (std::size_t i = 0; i < n_; ++i) s += x[i] * y[i];
      stats[k] = s / std::sqrt(sigma_tilde_[k]);
    }
  }
  return stats;
}

TestOutcome DisjointLrtTest::operator()(std::span<const double> y) const {
  const auto stats = block_statistics(y);
  double best = -1.0;
  std::size_t best_k = 0;
  for (std::size_t k = 0; k < blocks_; ++k) {
    const double s = std::abs(stats[k]);
    if (s > best) {
      best = s;
      best_k = k;
    }
  }
  TestOutcome out;
  out.statistic = best;
  out.threshold = threshold_;
  out.reject = out.statistic > out.threshold;
  out.argmax_window = {best_k * width_ + 1, width_};
  return out;
}

// ---------------------------------------------------------------------------

namespace {
std::variant<ScanTest, DisjointLrtTest> make_test(TestKind kind, const TestConfig& cfg) {
  if (kind == TestKind::scan) return ScanTest(cfg);
  return DisjointLrtTest(cfg);
}
}  // namespace

BumpTest::BumpTest(TestKind kind, const TestConfig& cfg) : kind_(kind), impl_(make_test(kind, cfg)) {}

TestOutcome BumpTest::operator()(std::span<const double> y) const {
  return std::visit([&](const auto& t) { return t(y); }, impl_);
}

TestOutcome scan_test(std::span<const double> y, const TestConfig& cfg) { return ScanTest(cfg)(y); }

TestOutcome disjoint_lrt_test(std::span<const double> y, const TestConfig& cfg) {
  return DisjointLrtTest(cfg)(y);
}

// ---------------------------------------------------------------------------

double detection_boundary(const arma::ArmaModel& model, std::size_t n, double lambda) {
  if (!(lambda > 0.0 && lambda < 1.0)) throw InputError("bump length lambda must lie in (0, 1)");
  if (n == 0) throw InputError("n must be positive");
  const double f0 = arma::long_run_variance(model);
  return std::sqrt(-2.0 * f0 * std::log(lambda) / (static_cast<double>(n) * lambda));
}

double normal_two_sided_tail(double x) {
  if (!(x > 0.0)) return 1.0;
  return std::erfc(x / std::numbers::sqrt2);
}

double type2_bound(double delta, double inf_sigma_tilde, double c) {
  if (inf_sigma_tilde < 0.0) throw InputError("type2_bound: inf sigma~ must be nonnegative");
  return normal_two_sided_tail(delta * std::sqrt(inf_sigma_tilde) - c);
}

double default_epsilon(double alpha, double lambda) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw InputError("significance level alpha must lie in (0, 1)");
  if (!(lambda > 0.0 && lambda < 1.0)) throw InputError("bump length lambda must lie in (0, 1)");
  return (std::sqrt(std::log(2.0 / alpha)) + std::sqrt(std::log(1.0 / alpha))) / std::sqrt(-std::log(lambda));
}

BoundaryCheck boundary_condition_met(const arma::ArmaModel& model, std::size_t n, double lambda,
                                     double delta, double alpha, std::optional<double> epsilon) {
  const auto ext = cov::sigma_tilde_extremes(model, n, lambda);
  BoundaryCheck out;
  out.epsilon = epsilon.value_or(default_epsilon(alpha, lambda));
  const double rhs = std::numbers::sqrt2 * (1.0 + out.epsilon) * std::sqrt(-std::log(lambda));
  out.margin = delta * std::sqrt(ext.inf) - rhs;
  out.met = out.margin >= 0.0;
  return out;
}

}  // namespace bumpscan::detect
