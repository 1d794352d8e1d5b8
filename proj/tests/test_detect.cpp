#include <doctest.h>

#include <cmath>

#include "bumpscan/detect.hpp"
#include "bumpscan/errors.hpp"
#include "bumpscan/mc.hpp"
#include "oracle.hpp"

using namespace bumpscan;
using arma::ArmaModel;
using detect::TestConfig;

TEST_CASE("threshold") {
  CHECK(detect::threshold(0.05, 0.1) == doctest::Approx(std::sqrt(2 * std::log(400.0))).epsilon(1e-15));
  CHECK(detect::threshold(0.05, 0.1) == doctest::Approx(3.46164).epsilon(1e-6));
  CHECK(detect::threshold(0.05, 0.025) == doctest::Approx(std::sqrt(2 * std::log(1600.0))).epsilon(1e-15));
  CHECK(detect::threshold(0.05, 0.025) == doctest::Approx(3.84126).epsilon(1e-5));
  CHECK_THROWS_AS(detect::threshold(2.0, 1.0), InputError);
  CHECK_THROWS_AS(detect::threshold(0.05, 1.0), InputError);
  CHECK_THROWS_AS(detect::threshold(0.0, 0.1), InputError);

  for (double a = 0.01; a < 0.95; a += 0.05) {
    for (double l = 0.01; l < 0.95; l += 0.05) {
      CHECK(detect::threshold(a + 0.01, l) < detect::threshold(a, l));
      CHECK(detect::threshold(a, l + 0.01) < detect::threshold(a, l));
    }
  }
}

TEST_CASE("scan_test examples") {
  const TestConfig cfg{0.05, 0.1, 100, ArmaModel::white_noise()};
  const std::vector<double> zero(100, 0.0);
  const auto z = detect::scan_test(zero, cfg);
  CHECK(z.statistic == 0.0);
  CHECK_FALSE(z.reject);
  CHECK(z.argmax_window == cov::WindowIndex{1, 10});

  std::vector<double> y(100, 0.0);
  const double c = 10.0 * z.threshold * std::sqrt(10.0) / 10.0;
  for (std::size_t i = 36; i < 46; ++i) y[i] = c;
  const auto o = detect::scan_test(y, cfg);
  CHECK(o.reject);
  CHECK(o.argmax_window.start == 37);
  CHECK(o.argmax_window.width == 10);

  CHECK_THROWS_AS(detect::scan_test(std::vector<double>(99, 0.0), cfg), InputError);
  CHECK_THROWS_AS(detect::scan_test(std::vector<double>(5, 0.0), {0.05, 0.1, 5, {}}), InputError);
}

TEST_CASE("scan and disjoint tests match dense oracles") {
  Rng rng(8);
  for (int rep = 0; rep < 10; ++rep) {
    ArmaModel m = rep == 0 ? ArmaModel::ar1(0.5) : oracle::random_stable_ar(1 + rep % 3, rng);
    if (rep % 4 == 3) m.ma = {0.35};
    const std::size_t n = rep == 0 ? 64 : 40 + rep * 2;
    const double lambda = rep == 0 ? 10.0 / 60.0 : 0.1 + 0.02 * rep;
    const TestConfig cfg{0.05, lambda, n, m};
    auto y = arma::sample_path(m, n, 100 + rep);
    y[n / 2] += 3.0;

    const auto a = detect::scan_test(y, cfg);
    const auto a_ref = oracle::scan(y, cfg);
    CHECK(std::abs(a.statistic - a_ref.statistic) < 1e-10);
    CHECK(a.argmax_window == a_ref.argmax_window);
    CHECK(a.reject == a_ref.reject);

    const auto d = detect::disjoint_lrt_test(y, cfg);
    const auto d_ref = oracle::disjoint(y, cfg);
    CHECK(std::abs(d.statistic - d_ref.statistic) < 1e-9);
    CHECK(d.argmax_window == d_ref.argmax_window);
  }
}

TEST_CASE("disjoint test: AR(1) n = 60, w = 10") {
  const TestConfig cfg{0.05, 1.0 / 6.0, 60, ArmaModel::ar1(0.5)};
  const auto y = arma::sample_path(cfg.model, 60, 77);
  CHECK(std::abs(detect::disjoint_lrt_test(y, cfg).statistic - oracle::disjoint(y, cfg).statistic) < 1e-9);
  CHECK(detect::DisjointLrtTest(cfg).blocks() == 6);
  CHECK(detect::disjoint_lrt_test(std::vector<double>(60, 0.0), cfg).statistic == 0.0);
}

TEST_CASE("white noise: disjoint block statistics are scan windows at block starts") {
  const TestConfig cfg{0.05, 0.1, 200, ArmaModel::white_noise()};
  const auto y = arma::sample_path(cfg.model, 200, 3);
  const detect::DisjointLrtTest d(cfg);
  const detect::ScanTest s(cfg);
  const auto blocks = d.block_statistics(y);
  REQUIRE(blocks.size() == 10);
  double best = 0.0;
  for (std::size_t k = 0; k < blocks.size(); ++k) {
    double sum = 0.0;
    for (std::size_t i = k * 20; i < k * 20 + 20; ++i) sum += y[i];
    CHECK(std::abs(blocks[k]) == doctest::Approx(std::abs(sum) / std::sqrt(20.0)).epsilon(1e-14));
    best = std::max(best, std::abs(blocks[k]));
  }
  CHECK(d(y).statistic == best);
  CHECK(s(y).statistic >= best);
}

TEST_CASE("property: statistics are invariant under sign flip") {
  Rng rng(12);
  for (int rep = 0; rep < 10; ++rep) {
    const auto m = oracle::random_stable_ar(1 + rep % 3, rng);
    const TestConfig cfg{0.05, 0.1, 120, m};
    auto y = arma::sample_path(m, 120, rep);
    auto neg = y;
    for (auto& v : neg) v = -v;
    CHECK(detect::scan_test(y, cfg).statistic == detect::scan_test(neg, cfg).statistic);
    CHECK(detect::disjoint_lrt_test(y, cfg).statistic == detect::disjoint_lrt_test(neg, cfg).statistic);
  }
}

TEST_CASE("property: reject iff statistic exceeds threshold") {
  const TestConfig cfg{0.05, 0.1, 100, ArmaModel::ar1(0.3)};
  for (int s = 0; s < 50; ++s) {
    auto y = arma::sample_path(cfg.model, 100, s);
    for (std::size_t i = 20; i < 30; ++i) y[i] += 0.1 * s;
    const auto a = detect::scan_test(y, cfg);
    const auto d = detect::disjoint_lrt_test(y, cfg);
    CHECK(a.reject == (a.statistic > a.threshold));
    CHECK(d.reject == (d.statistic > d.threshold));
  }
}

TEST_CASE("scan statistic noncentrality at an aligned window") {
  // With the bump on one window, that window's standardized sum is N(delta w / sd, 1).
  const auto m = ArmaModel::ar1(0.4);
  const std::size_t n = 512;
  const TestConfig cfg{0.05, 0.1, n, m};
  const detect::ScanTest test(cfg);
  const std::size_t w = test.width();
  const double delta = 0.5;
  const std::size_t start = 200;
  constexpr int trials = 4000;
  double sum = 0.0, sum2 = 0.0;
  for (int t = 0; t < trials; ++t) {
    auto y = arma::sample_path(m, n, 5000 + t);
    double s = 0.0;
    for (std::size_t i = start; i < start + w; ++i) s += y[i] + delta;
    const double z = s / test.window_sd();
    sum += z;
    sum2 += z * z;
  }
  const double mean = sum / trials;
  const double se = std::sqrt((sum2 / trials - mean * mean) / trials);
  CHECK(std::abs(mean - delta * w / test.window_sd()) < 3.0 * se);
  CHECK(sum2 / trials - mean * mean == doctest::Approx(1.0).epsilon(0.1));
}

TEST_CASE("detection boundary") {
  CHECK(detect::detection_boundary(ArmaModel::white_noise(), 829, 0.1) ==
        doctest::Approx(std::sqrt(2 * std::log(10.0) / 82.9)).epsilon(1e-14));
  CHECK(detect::detection_boundary(ArmaModel::white_noise(), 829, 0.1) == doctest::Approx(0.23570).epsilon(1e-4));
  for (double rho : {-0.6, 0.0, 0.6}) {
    CHECK(detect::detection_boundary(ArmaModel::ar1(rho), 829, 0.1) ==
          doctest::Approx(std::sqrt(2.0) / (1 - rho) * std::sqrt(std::log(10.0) / 82.9)).epsilon(1e-14));
  }
  CHECK(detect::detection_boundary({{-0.5, 0.5}, {}}, 829, 0.1) ==
        doctest::Approx(detect::detection_boundary(ArmaModel::white_noise(), 829, 0.1)).epsilon(1e-14));
}

TEST_CASE("normal tail and type-II bound") {
  CHECK(detect::type2_bound(1.0, 9.0, 3.0) == 1.0);  // argument 0
  CHECK(detect::type2_bound(1.0, 1.0, 5.0) == 1.0);
  CHECK(detect::type2_bound(43.0, 1.0, 3.0) < 1e-300);
  CHECK(detect::normal_two_sided_tail(1.959964) == doctest::Approx(0.05).epsilon(1e-6));

  // Simpson quadrature of the normal density on [0, x] as an independent oracle
  for (double x : {0.3, 1.0, 2.5, 4.0}) {
    constexpr int k = 20000;
    const double h = x / k;
    double s = 0.0;
    for (int i = 0; i <= k; ++i) {
      const double w = (i == 0 || i == k) ? 1.0 : (i % 2 ? 4.0 : 2.0);
      s += w * std::exp(-0.5 * (i * h) * (i * h));
    }
    const double inner = s * h / 3.0 / std::sqrt(2.0 * std::numbers::pi);
    CHECK(detect::normal_two_sided_tail(x) == doctest::Approx(1.0 - 2.0 * inner).epsilon(1e-10));
  }

  for (double d = 0.0; d < 2.0; d += 0.1) {
    CHECK(detect::type2_bound(d + 0.1, 10.0, 3.0) <= detect::type2_bound(d, 10.0, 3.0));
    CHECK(detect::type2_bound(1.0, d * 10 + 1, 3.0) <= detect::type2_bound(1.0, d * 10, 3.0));
    CHECK(detect::type2_bound(1.0, 10.0, d + 0.1) >= detect::type2_bound(1.0, 10.0, d));
  }
  CHECK_THROWS_AS(detect::type2_bound(1.0, -1.0, 3.0), InputError);
}

TEST_CASE("boundary condition") {
  const double lambda = 0.1;
  const double rate = std::sqrt(-std::log(lambda));
  const std::size_t w = 82;
  auto huge = detect::boundary_condition_met(ArmaModel::white_noise(), 829, lambda, 10.0 * rate / std::sqrt(w), 0.05);
  CHECK(huge.met);
  CHECK(huge.margin > 0.0);
  CHECK(huge.epsilon == doctest::Approx(detect::default_epsilon(0.05, lambda)));

  CHECK_FALSE(detect::boundary_condition_met(ArmaModel::white_noise(), 829, lambda, 0.0, 0.05).met);

  const auto m = ArmaModel::ar1(0.5);
  const double delta = detect::detection_boundary(m, 829, lambda);
  const auto edge = detect::boundary_condition_met(m, 829, lambda, delta, 0.05, 0.0);
  CHECK(edge.epsilon == 0.0);
  CHECK(std::abs(edge.margin) < 0.1 * rate);

  const double eps = detect::default_epsilon(0.05, lambda);
  CHECK(eps * rate == doctest::Approx(std::sqrt(std::log(40.0)) + std::sqrt(std::log(20.0))));
}

TEST_CASE("test kind parsing and CSV row") {
  CHECK(detect::parse_test_kind("scan") == detect::TestKind::scan);
  CHECK(detect::parse_test_kind("disjoint") == detect::TestKind::disjoint);
  CHECK_THROWS_AS(detect::parse_test_kind("other"), InputError);
  detect::TestOutcome o{1.5, 3.25, false, {4, 10}};
  CHECK(detect::to_csv_row(o) == "1.5,3.25,0,4,10");
}
