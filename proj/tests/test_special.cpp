#include <doctest.h>

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "uramac/special.hpp"

using namespace uramac::special;

// Reference values computed with scipy 1.x (frozen).
TEST_CASE("inverse normal cdf matches reference") {
  CHECK(inv_norm_cdf(0.5) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(inv_norm_cdf(0.025) == doctest::Approx(-1.9599639845400545).epsilon(1e-12));
  CHECK(inv_norm_cdf(1e-30) == doctest::Approx(-11.464024688443613).epsilon(1e-12));
  CHECK(inv_q(std::exp2(-100.0)) == doctest::Approx(11.484540434973038).epsilon(1e-12));
  CHECK_THROWS_AS(inv_norm_cdf(0.0), std::invalid_argument);
}

TEST_CASE("log normal cdf deep tail") {
  CHECK(log_norm_cdf(-1.0) == doctest::Approx(-1.841021645009264).epsilon(1e-12));
  CHECK(log_norm_cdf(-10.0) == doctest::Approx(-53.23128515051248).epsilon(1e-10));
  CHECK(log_norm_cdf(-40.0) == doctest::Approx(-804.6084420137539).epsilon(1e-10));
  CHECK(log_norm_cdf(0.0) == doctest::Approx(std::log(0.5)).epsilon(1e-14));
}

TEST_CASE("incomplete beta matches reference") {
  CHECK(betainc(1, 127, 0.01) == doctest::Approx(0.7209579114149408).epsilon(1e-12));
  CHECK(betainc(2, 126, 0.02) == doctest::Approx(0.7239242880978705).epsilon(1e-12));
  CHECK(betainc(2, 126, 0.5) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(betainc(3.5, 7.25, 0.3) == doctest::Approx(0.45994987721650343).epsilon(1e-12));
  CHECK(betainc(1, 1, 0.42) == doctest::Approx(0.42).epsilon(1e-12));
}

TEST_CASE("upper incomplete gamma matches reference") {
  CHECK(gammaincc(128.0, 140.0) == doctest::Approx(0.1449225180824653).epsilon(1e-12));
  CHECK(gammaincc(128.0, 100.0) == doctest::Approx(0.9960053797059645).epsilon(1e-12));
  CHECK(gammaincc(30000.0, 30500.0) == doctest::Approx(0.002034323512913683).epsilon(1e-10));
  CHECK(gammaincc(0.5, 0.25) == doctest::Approx(0.47950012218695337).epsilon(1e-12));
}

TEST_CASE("noncentral chi-square saddlepoint log cdf/sf") {
  struct Case {
    double x, d, lam, logcdf, logsf;
  };
  // scipy.stats.ncx2 reference; saddlepoint is accurate to ~1e-5 relative here
  const Case cases[] = {
      {180.0, 200, 30.0, -4.640282673394575, -0.009701879439343376},
      {120.0, 200, 30.0, -19.95866981766731, -2.148126400000543e-09},
      {260.0, 200, 30.0, -0.10271138619810773, -2.326748463529958},
      {50.0, 100, 10.0, -14.51713485191674, -4.9577948090783e-07},
      {900.0, 1000, 200.0, -21.98421087032414, -2.8338609064127885e-10},
      {1500.0, 1000, 200.0, -6.521758459224239e-08, -16.545536734650728},
  };
  for (const auto& c : cases) {
    CHECK(ncx2_logcdf(c.x, c.d, c.lam) == doctest::Approx(c.logcdf).epsilon(2e-4));
    CHECK(ncx2_logsf(c.x, c.d, c.lam) == doctest::Approx(c.logsf).epsilon(2e-4));
  }
}

TEST_CASE("kolmogorov-smirnov critical values") {
  // classical two-sided asymptotic: c(0.01) ~ 1.6276/sqrt(m)
  CHECK(ks_critical(0.01, 2000) == doctest::Approx(1.6276 / std::sqrt(2000.0)).epsilon(1e-3));
  CHECK(ks_pvalue(1.6276) == doctest::Approx(0.01).epsilon(1e-3));
}

TEST_CASE("entropy and alpha helpers") {
  CHECK(h_nat(0.5) == doctest::Approx(std::numbers::ln2).epsilon(1e-14));
  CHECK(h2_bits(0.5) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(alpha_fn(1.0, 1.0) == doctest::Approx(0.0));
  CHECK(alpha_fn(0.0, 1.0) == doctest::Approx(1.0));
  CHECK(alpha_fn(0.3, 0.8) == doctest::Approx(0.31732299975358697).epsilon(1e-12));
  CHECK_THROWS_AS(alpha_fn(-0.1, 1.0), std::invalid_argument);
  // scaled_h(N, x) == N h(x/N) at moderate N
  CHECK(scaled_h(100.0, 3.0) == doctest::Approx(100.0 * h_nat(0.03)).epsilon(1e-12));
}

TEST_CASE("gauss-legendre integration") {
  const double v = integrate([](double x) { return x * x; }, 0.0, 1.0, 4);
  CHECK(v == doctest::Approx(1.0 / 3.0).epsilon(1e-13));
  const double g = integrate([](double x) { return std::exp(-x * x / 2); }, -8.0, 8.0, 32);
  CHECK(g == doctest::Approx(std::sqrt(2 * std::numbers::pi)).epsilon(1e-12));
}

TEST_CASE("logsumexp") {
  std::vector<double> v{-700.0, -700.0};
  CHECK(logsumexp(v) == doctest::Approx(-700.0 + std::log(2.0)).epsilon(1e-12));
}
