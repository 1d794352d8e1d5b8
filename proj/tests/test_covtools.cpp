#include <doctest.h>

#include <cmath>

#include "bumpscan/covtools.hpp"
#include "bumpscan/errors.hpp"
#include "oracle.hpp"

using namespace bumpscan;
using arma::ArmaModel;

namespace {

Eigen::MatrixXd dense(const cov::BandedPrecision& p) {
  Eigen::MatrixXd d(p.n(), p.n());
  for (std::size_t i = 0; i < p.n(); ++i)
    for (std::size_t j = 0; j < p.n(); ++j) d(i, j) = p(i, j);
  return d;
}

double quad_form(const Eigen::MatrixXd& a, std::size_t start, std::size_t w) {
  return a.block(start, start, w, w).sum();
}

}  // namespace

TEST_CASE("window width and block count") {
  CHECK(cov::window_width(829, 0.1) == 82);
  CHECK(cov::window_width(100, 0.29) == 29);
  CHECK(cov::window_width(5312, 0.025) == 132);
  CHECK(cov::block_count(829, 0.1) == 10);
  CHECK(cov::block_count(100, 0.3) == 3);
  // w = floor(0.7) = 0
  CHECK_THROWS_AS(cov::block_count(7, 0.1), InputError);
  CHECK(cov::block_count(23, 0.15) == 6);  // w = 3, floor(1/0.15) = 6
  CHECK(cov::block_count(25, 0.3) == 3);   // w = 7, floor(25/7) = 3
  CHECK_THROWS_AS(cov::window_width(10, 0.0), InputError);
  CHECK_THROWS_AS(cov::window_width(10, 1.0), InputError);
}

TEST_CASE("window_variance") {
  const auto wn = cov::ToeplitzCov::from_model(ArmaModel::white_noise(), 10);
  CHECK(cov::window_variance(wn, 5) == doctest::Approx(5.0));
  const auto m = ArmaModel::ar1(0.5);
  const auto c = cov::ToeplitzCov::from_model(m, 12);
  CHECK(cov::window_variance(c, 1) == c.gamma()[0]);
  const auto s = oracle::covariance(m, 12);
  for (std::size_t w : {1, 3, 7, 12}) {
    CHECK(std::abs(cov::window_variance(c, w) - quad_form(s, 0, w)) < 1e-12 * quad_form(s, 0, w));
    CHECK(std::abs(cov::window_variance(c, w) - quad_form(s, 12 - w, w)) < 1e-12 * quad_form(s, 0, w));
  }
  CHECK_THROWS_AS(cov::window_variance(c, 0), InputError);
  CHECK_THROWS_AS(cov::window_variance(c, 13), InputError);
}

TEST_CASE("ToeplitzCov rejects singular first rows") {
  CHECK_THROWS_AS(cov::ToeplitzCov({1.0, 1.0, 1.0}), IllConditionedError);
  CHECK_THROWS_AS(cov::ToeplitzCov({0.0, 0.0}), IllConditionedError);
  CHECK_NOTHROW(cov::ToeplitzCov({1.0, 0.5, 0.25}));
}

TEST_CASE("toeplitz_solve") {
  SUBCASE("identity") {
    const auto c = cov::ToeplitzCov::from_model(ArmaModel::white_noise(), 5);
    const std::vector<double> rhs{1, -2, 3, 0.5, 7};
    const auto x = cov::toeplitz_solve(c, rhs);
    for (std::size_t i = 0; i < 5; ++i) CHECK(x[i] == doctest::Approx(rhs[i]).epsilon(1e-15));
  }
  SUBCASE("AR(1) round trip") {
    const auto c = cov::ToeplitzCov::from_model(ArmaModel::ar1(0.8), 20);
    std::vector<double> rhs(20);
    for (std::size_t i = 0; i < 20; ++i) rhs[i] = c(i, 0);
    const auto x = cov::toeplitz_solve(c, rhs);
    for (std::size_t i = 0; i < 20; ++i) CHECK(std::abs(x[i] - (i == 0 ? 1.0 : 0.0)) < 1e-8);
  }
  SUBCASE("random AR(2) against dense solve") {
    Rng rng(17);
    for (int rep = 0; rep < 10; ++rep) {
      const auto m = oracle::random_stable_ar(2, rng);
      const auto c = cov::ToeplitzCov::from_model(m, 30);
      const auto rhs = oracle::gaussian_vector(30, rng);
      const Eigen::VectorXd ref = oracle::covariance(m, 30).ldlt().solve(Eigen::Map<const Eigen::VectorXd>(rhs.data(), 30));
      const auto x = cov::toeplitz_solve(c, rhs);
      for (std::size_t i = 0; i < 30; ++i) CHECK(std::abs(x[i] - ref[i]) < 1e-8 * std::max(1.0, std::abs(ref[i])));
    }
  }
  SUBCASE("residual under condition numbers up to 1e6") {
    Rng rng(23);
    for (double rho : {0.9, 0.99, 0.995}) {
      const auto m = ArmaModel::ar1(rho);
      const std::size_t n = 200;
      const auto s = oracle::covariance(m, n);
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(s);
      const double kappa = es.eigenvalues().maxCoeff() / es.eigenvalues().minCoeff();
      CHECK(kappa < 1.1e6);
      const auto c = cov::ToeplitzCov::from_model(m, n);
      const auto rhs = oracle::gaussian_vector(n, rng);
      const auto x = cov::toeplitz_solve(c, rhs);
      const Eigen::VectorXd res =
          s * Eigen::Map<const Eigen::VectorXd>(x.data(), n) - Eigen::Map<const Eigen::VectorXd>(rhs.data(), n);
      const double rhs_inf = Eigen::Map<const Eigen::VectorXd>(rhs.data(), n).cwiseAbs().maxCoeff();
      CHECK(res.cwiseAbs().maxCoeff() <= 1e-8 * rhs_inf);
    }
  }
  CHECK_THROWS_AS(cov::toeplitz_solve(cov::ToeplitzCov({1.0, 0.0}), std::vector<double>{1.0}), InputError);
}

TEST_CASE("ar_precision examples") {
  const auto wn = cov::ar_precision(ArmaModel::white_noise(), 4);
  CHECK(dense(wn).isApprox(Eigen::MatrixXd::Identity(4, 4)));

  const double rho = 0.6;
  const auto p = cov::ar_precision(ArmaModel::ar1(rho), 5);
  const double expected_diag[] = {1, 1 + rho * rho, 1 + rho * rho, 1 + rho * rho, 1};
  for (std::size_t i = 0; i < 5; ++i) {
    CHECK(p(i, i) == doctest::Approx(expected_diag[i]).epsilon(1e-15));
    if (i + 1 < 5) CHECK(p(i, i + 1) == doctest::Approx(-rho).epsilon(1e-15));
    if (i + 2 < 5) CHECK(p(i, i + 2) == 0.0);
  }
  CHECK((dense(p) * oracle::covariance(ArmaModel::ar1(rho), 5) - Eigen::MatrixXd::Identity(5, 5)).cwiseAbs().maxCoeff() <
        1e-10);

  const ArmaModel ar2{{-0.5, 0.25}, {}};
  const auto inv = oracle::inverse(oracle::covariance(ar2, 8));
  CHECK((dense(cov::ar_precision(ar2, 8)) - inv).cwiseAbs().maxCoeff() < 1e-9);

  CHECK_THROWS_AS(cov::ar_precision({{-0.5}, {0.2}}, 5), UnsupportedError);
  CHECK_THROWS_AS(cov::ar_precision(ar2, 2), InputError);
}

TEST_CASE("property: ar_precision inverts the covariance, including n < 2p") {
  Rng rng(31);
  for (std::size_t p = 1; p <= 4; ++p) {
    for (int rep = 0; rep < 8; ++rep) {
      const auto m = oracle::random_stable_ar(p, rng);
      for (std::size_t n = p + 1; n <= 3 * p + 4; ++n) {
        const auto prec = cov::ar_precision(m, n);
        const auto d = dense(prec);
        CHECK((d * oracle::covariance(m, n) - Eigen::MatrixXd::Identity(n, n)).cwiseAbs().maxCoeff() < 1e-10);
        for (std::size_t i = 0; i < n; ++i) {
          for (std::size_t j = 0; j < n; ++j) {
            CHECK(prec(i, j) == prec(j, i));
            CHECK(prec(i, j) == doctest::Approx(prec(n - 1 - j, n - 1 - i)).epsilon(1e-14));
            if ((i > j ? i - j : j - i) > p) CHECK(prec(i, j) == 0.0);
          }
        }
      }
    }
  }
}

TEST_CASE("BandedPrecision::apply matches dense product") {
  Rng rng(2);
  const auto m = oracle::random_stable_ar(3, rng);
  const auto prec = cov::ar_precision(m, 25);
  const auto x = oracle::gaussian_vector(25, rng);
  const auto y = prec.apply(x);
  const Eigen::VectorXd ref = dense(prec) * Eigen::Map<const Eigen::VectorXd>(x.data(), 25);
  for (std::size_t i = 0; i < 25; ++i) CHECK(y[i] == doctest::Approx(ref[i]).epsilon(1e-13));
}

TEST_CASE("block_sums examples") {
  for (double v : cov::block_sums(ArmaModel::white_noise(), 10, 3)) CHECK(v == doctest::Approx(3.0));

  const double rho = 0.4;
  const auto s = cov::block_sums(ArmaModel::ar1(rho), 20, 5);
  REQUIRE(s.size() == 16);
  const double first = 1.0 + 4.0 * (1 - rho) * (1 - rho);
  CHECK(s[0] == doctest::Approx(first).epsilon(1e-14));
  for (std::size_t m = 2; m <= 20 - 1 - 5 + 1; ++m) CHECK(s[m - 1] == doctest::Approx(first + rho * rho).epsilon(1e-14));
  CHECK(s.back() == doctest::Approx(first).epsilon(1e-14));

  CHECK_THROWS_AS(cov::block_sums(ArmaModel::ar1(rho), 20, 19), InputError);
  CHECK_THROWS_AS(cov::block_sums(ArmaModel::ar1(rho), 20, 0), InputError);
  CHECK_THROWS_AS(cov::block_sums({{0.1, 0.1, 0.1}, {}}, 8, 1), InputError);
  CHECK_NOTHROW(cov::block_sums({{0.1, 0.1, 0.1}, {}}, 9, 1));
  CHECK_THROWS_AS(cov::block_sums({{0.1}, {0.1}}, 20, 2), UnsupportedError);
}

TEST_CASE("property: block_sums equals the dense quadratic form, is persymmetric and plateau-shaped") {
  Rng rng(41);
  for (std::size_t p = 1; p <= 3; ++p) {
    for (int rep = 0; rep < 4; ++rep) {
      const auto m = oracle::random_stable_ar(p, rng);
      for (std::size_t n : {3 * p, 3 * p + 1, std::size_t{30}, std::size_t{47}}) {
        const auto d = dense(cov::ar_precision(m, n));
        for (std::size_t r = 1; r + 2 * p <= n; ++r) {
          const auto s = cov::block_sums(m, n, r);
          REQUIRE(s.size() == n - r + 1);
          for (std::size_t k = 0; k < s.size(); ++k) {
            CHECK(std::abs(s[k] - quad_form(d, k, r)) < 1e-10);
            CHECK(std::abs(s[k] - s[s.size() - 1 - k]) < 1e-10);
          }
          for (std::size_t mm = 1; mm < s.size(); ++mm) {
            const double step = s[mm] - s[mm - 1];  // S_{r,mm+1} - S_{r,mm}
            const std::size_t next = mm + 1;
            if (next <= p + 1) CHECK(step > -1e-10);
            else if (next <= n - p - r + 1) CHECK(std::abs(step) < 1e-10);
            else CHECK(step < 1e-10);
          }
        }
      }
    }
  }
}

TEST_CASE("sigma_tilde_extremes") {
  const auto wn = cov::sigma_tilde_extremes(ArmaModel::white_noise(), 50, 0.1);
  CHECK(wn.inf == doctest::Approx(5.0));
  CHECK(wn.sup == doctest::Approx(5.0));
  CHECK(wn.width == 5);
  CHECK(wn.blocks == 10);

  for (double rho : {-0.7, 0.3, 0.9}) {
    const auto e = cov::sigma_tilde_extremes(ArmaModel::ar1(rho), 100, 0.1);
    const double inf = 1.0 + 9.0 * (1 - rho) * (1 - rho);
    CHECK(e.inf == doctest::Approx(inf).epsilon(1e-14));
    CHECK(e.sup == doctest::Approx(inf + rho * rho).epsilon(1e-14));
  }

  const ArmaModel ar2{{-0.5, 0.25}, {}};
  const auto e = cov::sigma_tilde_extremes(ar2, 40, 0.25);
  const auto s = cov::block_sums(ar2, 40, 10);
  double lo = 1e300, hi = -1e300;
  for (std::size_t k = 0; k < e.blocks; ++k) {
    lo = std::min(lo, s[k * 10]);
    hi = std::max(hi, s[k * 10]);
  }
  CHECK(std::abs(e.inf - lo) < 1e-10);
  CHECK(std::abs(e.sup - hi) < 1e-10);

  CHECK_THROWS_AS(cov::sigma_tilde_extremes(ArmaModel::ar1(0.5), 3, 0.5), InputError);
  CHECK_THROWS_AS(cov::sigma_tilde_extremes({{0.1, 0.1}, {}}, 6, 0.2), InputError);  // n = 3p
}

TEST_CASE("sigma_tilde_extremes: consistency with n lambda / f(0)") {
  const auto m = ArmaModel::ar1(0.5);
  const auto e = cov::sigma_tilde_extremes(m, 5000, 0.02);
  CHECK(std::abs(e.inf * arma::long_run_variance(m) / (5000 * 0.02) - 1.0) < 0.05);
}
