#include <doctest.h>

#include <cmath>
#include <numbers>

#include "uramac/asymptotic.hpp"
#include "uramac/rng.hpp"
#include "uramac/special.hpp"

using namespace uramac;
using asymp::AsymptoticParams;

namespace {

// direct radial-quadrature oracle for M1 * I(X; X+sqrt(tau) Z) at moderate M1
double mi_oracle(double tau, double ln_m1) {
  const double p = std::exp(-ln_m1);
  auto hY_integrand = [&](double s) {
    const double g = (1 - p) * std::exp(-s / tau) / tau +
                     p * std::exp(-s / (1 + tau)) / (1 + tau);
    const double f2d = (1 - p) * std::exp(-s / tau) / (std::numbers::pi * tau) +
                       p * std::exp(-s / (1 + tau)) / (std::numbers::pi * (1 + tau));
    return -g * std::log(f2d);
  };
  const double hY = special::integrate(hY_integrand, 0.0, 80.0 * (1 + tau), 4000);
  return (hY - std::log(std::numbers::pi * std::numbers::e * tau)) / p;
}

}  // namespace

TEST_CASE("alpha and entropy corner cases") {
  CHECK(special::alpha_fn(1, 1) == doctest::Approx(0.0));
  CHECK(special::alpha_fn(0, 1) == doctest::Approx(1.0));
  CHECK(special::h_nat(0.5) == doctest::Approx(std::numbers::ln2));
}

TEST_CASE("scaled mutual information matches the radial oracle") {
  for (double lb : {10 * std::numbers::ln2, 16 * std::numbers::ln2}) {
    for (double tau : {0.01, 0.1, 0.3, 1.0, 2.0, 10.0}) {
      const double got = asymp::scaled_mutual_information(tau, lb);
      const double ref = mi_oracle(tau, lb);
      CHECK(got == doctest::Approx(ref).epsilon(5e-6));
    }
  }
  // frozen spot values (scipy quadrature)
  CHECK(asymp::scaled_mutual_information(0.01, 16 * std::numbers::ln2) ==
        doctest::Approx(15.366542917549552).epsilon(1e-9));
  CHECK(asymp::scaled_mutual_information(2.0, 16 * std::numbers::ln2) ==
        doctest::Approx(0.4999974572161768).epsilon(1e-9));
}

TEST_CASE("monte-carlo mutual information agrees to 1e-3 nats") {
  const double lb = 10 * std::numbers::ln2;
  const double p = std::exp(-lb);
  for (double tau : {0.3, 1.0}) {
    Rng rng(61, std::uint64_t(tau * 8));
    const long N = 1000000;
    double acc = 0.0;
    for (long i = 0; i < N; ++i) {
      const bool active = rng.uniform() < p;
      const std::complex<double> x = active ? rng.cnormal(1.0) : std::complex<double>{0, 0};
      const std::complex<double> y = x + std::sqrt(tau) * rng.cnormal(1.0);
      const double lcond = -std::norm(y - x) / tau - std::log(std::numbers::pi * tau);
      const double s = std::norm(y);
      const double f0 = std::exp(-s / tau) / (std::numbers::pi * tau);
      const double f1 = std::exp(-s / (1 + tau)) / (std::numbers::pi * (1 + tau));
      acc += lcond - std::log((1 - p) * f0 + p * f1);
    }
    const double mc = acc / double(N);
    const double exact = asymp::scaled_mutual_information(tau, lb) * p;
    CHECK(std::abs(mc - exact) < 1e-3);
  }
}

TEST_CASE("replica scalar channel: threshold consistency and radius rule") {
  AsymptoticParams p{0.1, 100, 0.1};
  const auto d = asymp::replica_scalar_channel(200.0, p);
  CHECK(d.sigma2 > 0.0);
  // P{ |Y|^2 > rho } = 1/M1 at the threshold radius
  const double ln_m1 = 100 * std::numbers::ln2;
  const double pp = std::exp(-ln_m1);
  const double sf = (1 - pp) * std::exp(-d.threshold_radius / d.sigma2) +
                    pp * std::exp(-d.threshold_radius / (1 + d.sigma2));
  CHECK(std::log(sf) == doctest::Approx(-ln_m1).epsilon(1e-6));
  // posterior is monotone in |y|^2: the cutoff equals a radius test
  auto posterior = [&](double s) {
    const double f1 = std::exp(-s / (1 + d.sigma2)) / (1 + d.sigma2);
    const double f0 = std::exp(-s / d.sigma2) / d.sigma2;
    return pp * f1 / (pp * f1 + (1 - pp) * f0);
  };
  const double at = posterior(d.threshold_radius);
  CHECK(posterior(d.threshold_radius * 1.01) > at);
  CHECK(posterior(d.threshold_radius * 0.99) < at);
  // pupe = P{ |Y|^2 < rho | X != 0 }
  CHECK(d.pupe == doctest::Approx(1.0 - std::exp(-d.threshold_radius / (1 + d.sigma2)))
                      .epsilon(1e-12));
}

TEST_CASE("replica: pupe degrades as total power shrinks") {
  AsymptoticParams p{0.05, 100, 0.1};
  double prev = 0.0;
  for (double ptot : {400.0, 100.0, 25.0, 6.0}) {
    const double pe = asymp::replica_scalar_channel(ptot, p).pupe;
    CHECK(pe >= prev - 1e-12);
    prev = pe;
  }
}

TEST_CASE("theorem-4 delta2 root satisfies its equation") {
  // reproduce the internal root: -ln(1-x) - x = q
  AsymptoticParams p{0.1, 100, 0.1};
  const auto r = asymp::ach_theorem4(p);
  CHECK(r.feasible);
  // directly check the root finder through a representative q
  for (double q : {1e-6, 1e-3, 0.1, 2.0}) {
    double lo = 1e-16, hi = 1 - 1e-16;
    for (int i = 0; i < 200; ++i) {
      const double mid = 0.5 * (lo + hi);
      ((-std::log1p(-mid) - mid) >= q ? hi : lo) = mid;
    }
    const double x = 0.5 * (lo + hi);
    CHECK(-std::log1p(-x) - x == doctest::Approx(q).epsilon(1e-10));
  }
}

TEST_CASE("asymptotic curves: frozen reference points (mu=0.1, k=100)") {
  AsymptoticParams p{0.1, 100, 0.1};
  // prototype values, computed independently with scipy-based optimizers
  CHECK(asymp::conv_fano(p).energy_linear == doctest::Approx(49.51151102961572).epsilon(2e-3));
  CHECK(asymp::conv_single_user(p).energy_linear ==
        doctest::Approx(6.296701415578458).epsilon(2e-3));
  CHECK(asymp::conv_iid(p).energy_linear == doctest::Approx(136.5198129712802).epsilon(2e-3));
}

TEST_CASE("iid converse building blocks") {
  CHECK(asymp::f_fn(1.0, 0.0) == doctest::Approx(0.0));
  CHECK(asymp::v_fn(2.0, 0.0) == doctest::Approx(0.0));
  // F(1, g) = (1/4)(sqrt(4g+1) - 1)^2
  for (double g : {0.5, 3.0, 22.0})
    CHECK(asymp::f_fn(1.0, g) ==
          doctest::Approx(0.25 * std::pow(std::sqrt(4 * g + 1) - 1.0, 2)).epsilon(1e-12));
  CHECK(asymp::v_fn(10.0, 22.0) == doctest::Approx(5.346908579459506).epsilon(1e-12));
  CHECK(asymp::f_fn(10.0, 22.0) == doctest::Approx(21.889508584687725).epsilon(1e-12));
  // stability at the tiny-r end: V ~ r ln(1+gamma)
  const double r = 1e-29;
  CHECK(asymp::v_fn(r, 22.0) == doctest::Approx(r * std::log(23.0)).epsilon(1e-6));
}

TEST_CASE("converse bounds: boundary behavior") {
  // eps -> 1 - 1/M1 sends both converses to zero energy
  AsymptoticParams easy{0.1, 8, 0.99};
  CHECK(asymp::conv_fano(easy).energy_linear < asymp::conv_fano({0.1, 8, 0.1}).energy_linear);
  // single-user converse grows with M1 at fixed mu, eps
  const double e8 = asymp::conv_single_user({0.05, 8, 0.1}).energy_linear;
  const double e100 = asymp::conv_single_user({0.05, 100, 0.1}).energy_linear;
  CHECK(e100 > e8);
}

TEST_CASE("curve family ordering at a spot point") {
  AsymptoticParams p{0.12, 100, 0.1};
  const double tol = std::pow(10.0, 0.05 / 10.0);
  const double c = asymp::conv(p).energy_linear;
  const double ci = asymp::conv_iid(p).energy_linear;
  const double rep = asymp::replica_optimal(p).energy_linear;
  const double ach = asymp::ach_theorem4(p).energy_linear;
  CHECK(c <= ci * tol);
  CHECK(ci <= rep * tol);
  CHECK(rep <= ach * tol);
}

TEST_CASE("ach and converses nondecreasing in mu") {
  double prev_ach = 0.0, prev_c = 0.0;
  for (double mu : {0.05, 0.1, 0.15}) {
    AsymptoticParams p{mu, 100, 0.1};
    const double a = asymp::ach_theorem4(p).energy_linear;
    const double c = asymp::conv(p).energy_linear;
    CHECK(a >= prev_ach - 1e-9);
    CHECK(c >= prev_c - 1e-9);
    prev_ach = a;
    prev_c = c;
  }
}
