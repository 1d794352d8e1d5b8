#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "bumpscan/arma.hpp"
#include "bumpscan/covtools.hpp"

namespace bumpscan::detect {

struct TestConfig {
  double alpha = 0.05;
  double lambda = 0.1;
  std::size_t n = 0;
  arma::ArmaModel model;
};

struct TestOutcome {
  double statistic = 0.0;
  double threshold = 0.0;
  bool reject = false;
  cov::WindowIndex argmax_window;
};

enum class TestKind { scan, disjoint };

TestKind parse_test_kind(std::string_view name);
std::string_view to_string(TestKind kind);

/// CSV dialect shared with the CLI: statistic,threshold,reject,argmax_start,width
inline constexpr std::string_view kOutcomeCsvHeader = "statistic,threshold,reject,argmax_start,width";
std::string to_csv_row(const TestOutcome& outcome);

/// sqrt(2 log(2 / (alpha lambda))); alpha and lambda must lie in (0, 1).
double threshold(double alpha, double lambda);

/**
 * Full scan over every window of w = floor(n lambda) consecutive samples:
 * max_m |sum_{i in window m} y_i| / sqrt(1^T Sigma_w 1). The variance
 * constant is computed once; each call is one pass over prefix sums.
 */
class ScanTest {
 public:
  explicit ScanTest(const TestConfig& cfg);

  TestOutcome operator()(std::span<const double> y) const;
  std::size_t width() const noexcept { return width_; }
  double window_sd() const noexcept { return window_sd_; }
  double threshold() const noexcept { return threshold_; }

 private:
  std::size_t n_;
  std::size_t width_;
  double window_sd_;
  double threshold_;
};

/**
 * Likelihood-ratio test over K disjoint blocks I_k = [(k-1)w+1, kw]:
 * max_k |1_{I_k}^T Sigma^{-1} y| / sqrt(sigma~_k), sigma~_k = 1_{I_k}^T Sigma^{-1} 1_{I_k}.
 *
 * Pure AR models use the banded precision matrix (O(np) per call) and the
 * block-sum recursion for sigma~_k. Models with an MA part precompute
 * x_k = Sigma^{-1} 1_{I_k} with the Levinson solver and then use x_k^T y.
 */
class DisjointLrtTest {
 public:
  explicit DisjointLrtTest(const TestConfig& cfg);

  TestOutcome operator()(std::span<const double> y) const;
  /// Per-block standardized statistics (signed).
  std::vector<double> block_statistics(std::span<const double> y) const;

  std::size_t width() const noexcept { return width_; }
  std::size_t blocks() const noexcept { return blocks_; }
  std::span<const double> sigma_tilde() const noexcept { return sigma_tilde_; }
  double threshold() const noexcept { return threshold_; }

 private:
  std::size_t n_;
  std::size_t width_;
  std::size_t blocks_;
  double threshold_;
  std::vector<double> sigma_tilde_;
  std::optional<cov::BandedPrecision> precision_;
  std::vector<std::vector<double>> whitened_indicators_;  // MA path only
};

/// Either test behind one call operator; used by the Monte Carlo engine.
class BumpTest {
 public:
  BumpTest(TestKind kind, const TestConfig& cfg);
  TestOutcome operator()(std::span<const double> y) const;
  TestKind kind() const noexcept { return kind_; }

 private:
  TestKind kind_;
  std::variant<ScanTest, DisjointLrtTest> impl_;
};

TestOutcome scan_test(std::span<const double> y, const TestConfig& cfg);
TestOutcome disjoint_lrt_test(std::span<const double> y, const TestConfig& cfg);

/// Asymptotic minimax boundary sqrt(-2 f(0) log(lambda) / (n lambda)).
double detection_boundary(const arma::ArmaModel& model, std::size_t n, double lambda);

/// P(|Z| > x) for standard normal Z; 1 for x <= 0.
double normal_two_sided_tail(double x);

/// Analytic type-II bound P(|Z| > delta sqrt(inf_sigma_tilde) - c).
double type2_bound(double delta, double inf_sigma_tilde, double c);

struct BoundaryCheck {
  bool met = false;
  double margin = 0.0;   // delta sqrt(inf sigma~) - sqrt(2)(1 + eps) sqrt(-log lambda)
  double epsilon = 0.0;  // value actually used
};

/// Smallest eps satisfying eps sqrt(-log lambda) >= sqrt(log(2/alpha)) + sqrt(log(1/alpha)).
double default_epsilon(double alpha, double lambda);

/**
 * Sufficient condition for the disjoint test's type-II error to vanish:
 * delta inf_k sqrt(sigma~_k) >= sqrt(2)(1 + eps) sqrt(-log lambda).
 * Pure AR models only; eps defaults to default_epsilon(alpha, lambda).
 */
BoundaryCheck boundary_condition_met(const arma::ArmaModel& model, std::size_t n, double lambda,
                                     double delta, double alpha,
                                     std::optional<double> epsilon = std::nullopt);

}  // namespace bumpscan::detect
