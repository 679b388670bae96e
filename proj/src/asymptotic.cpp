#include "uramac/asymptotic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "uramac/special.hpp"

namespace uramac::asymp {

using special::alpha_fn;
using special::h_nat;
using special::scaled_h;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double db(double lin) { return 10.0 * std::log10(lin); }

BoundResult make_result(double p_tot, const AsymptoticParams& p, bool feasible = true) {
  BoundResult r;
  r.feasible = feasible;
  if (!feasible) return r;
  r.energy_linear = p_tot / (p.mu * double(p.k_bits));
  r.energy_db = db(r.energy_linear);
  return r;
}

// generic geometric bisection for the smallest feasible P_tot, to 0.01 dB
template <typename Feasible>
double bisect_power(Feasible&& ok, double lo = 1e-6, double hi = 1.0) {
  while (!ok(hi)) {
    hi *= 4.0;
    if (hi > 1e300) return kInf;
  }
  while (ok(lo)) {
    lo /= 4.0;
    if (lo < 1e-300) return lo;
  }
  while (10.0 * std::log10(hi / lo) > 0.01) {
    const double mid = std::sqrt(lo * hi);
    (ok(mid) ? hi : lo) = mid;
  }
  return hi;
}

}  // namespace

// ---------------------------------------------------------------------------
// Theorem 4 achievability
// ---------------------------------------------------------------------------

namespace {

// smallest x in (0,1) with -ln(1-x) - x = q
double delta2_star(double q) {
  if (q < 1e-28) return 0.0;
  double lo = 1e-16, hi = 1.0 - 1e-16;
  auto f = [q](double x) { return -std::log1p(-x) - x - q; };
  if (f(hi) < 0) return hi;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (f(mid) >= 0 ? hi : lo) = mid;
    if (hi - lo < 1e-15) break;
  }
  return 0.5 * (lo + hi);
}

struct ThetaTerms {
  double f_theta;
  bool ok;
};

ThetaTerms theta_terms(double theta, double nu, double mu, double m1) {
  const double dstar = mu * h_nat(1.0 - nu * (1.0 - theta)) / (1.0 - mu * nu);
  const double t1 = mu / (1.0 - mu * nu) * scaled_h(m1 - 1.0, theta * nu);
  const double denom2 = 1.0 - mu * nu * (1.0 - theta);
  const double t2 = denom2 / (1.0 - mu * nu) * h_nat(theta * mu * nu / denom2);
  const double v = std::exp(-(dstar + t1 + t2));
  if (!(v > 0.0) || v >= 1.0) return {0.0, false};
  const double c = 2.0 * v / (1.0 - v);
  const double q = mu * h_nat(1.0 - nu * (1.0 - theta)) / denom2;
  const double d1 = q * (1.0 + c) + std::sqrt(q * q * (c * c + 2.0 * c) + 2.0 * q * (1.0 + c));
  const double d2 = delta2_star(q);
  if (d2 >= 1.0) return {0.0, false};
  const double f = ((1.0 + d1 * (1.0 - v)) / v - 1.0) / (1.0 - d2);
  return {f, true};
}

// P_tot at one (theta, xi); +inf if the point is infeasible.
double p_tot_point(double theta, double xi, double nu, double mu, double m1) {
  const auto tt = theta_terms(theta, nu, mu, m1);
  if (!tt.ok) return kInf;
  const double da = alpha_fn(xi, xi + nu * theta);
  if (da <= 0.0) return kInf;
  const double fhat = tt.f_theta / da;
  const double den = 1.0 - fhat * alpha_fn(xi + nu * theta, xi + 1.0 - nu * (1.0 - theta));
  if (den <= 0.0) return kInf;
  return fhat / den;
}

// sup over (theta, xi) for fixed nu; +inf when any grid point is infeasible
double sup_p_tot(double nu, double mu, double m1, double eps_prime) {
  const double th_lo = eps_prime / nu;
  if (th_lo >= 1.0) return kInf;
  const int n_theta = 256, n_xi = 64;
  double best = 0.0, best_th = th_lo, best_xi = 0.0;
  auto scan = [&](double t0, double t1s, int nt, bool full_xi, double x0, double x1s, int nx) {
    for (int i = 0; i < nt; ++i) {
      const double theta = t0 + (t1s - t0) * double(i) / double(nt - 1);
      if (theta <= th_lo || theta > 1.0) continue;
      const double xi_max = nu * (1.0 - theta);
      const double xlo = full_xi ? 0.0 : std::max(0.0, x0);
      const double xhi = full_xi ? xi_max : std::min(xi_max, x1s);
      for (int j = 0; j < nx; ++j) {
        const double xi = nx > 1 ? xlo + (xhi - xlo) * double(j) / double(nx - 1) : xlo;
        const double v = p_tot_point(theta, xi, nu, mu, m1);
        if (v > best) {
          best = v;
          best_th = theta;
          best_xi = xi;
        }
        if (v == kInf) return;
      }
    }
  };
  scan(th_lo * (1.0 + 1e-9) + 1e-12, 1.0, n_theta, true, 0, 0, n_xi);
  if (best == kInf) return kInf;
  // two refinement levels around the sup
  for (int level = 0; level < 2; ++level) {
    const double span_t = (1.0 - th_lo) / double(n_theta) / std::pow(8.0, level);
    const double span_x = nu / double(n_xi) / std::pow(8.0, level);
    scan(std::max(th_lo * (1 + 1e-9), best_th - span_t), std::min(1.0, best_th + span_t), 33,
         false, best_xi - span_x, best_xi + span_x, 17);
    if (best == kInf) return kInf;
  }
  return best;
}

}  // namespace

BoundResult ach_theorem4(const AsymptoticParams& p) {
  const double m1 = std::exp2(double(p.k_bits));
  double best = kInf;
  const int n_nu = 32;
  for (int i = 1; i <= n_nu; ++i) {
    const double nu = 1.0 - p.eps + p.eps * double(i) / double(n_nu);
    const double eps_prime = p.eps - (1.0 - nu);
    if (eps_prime <= 0.0) continue;
    best = std::min(best, sup_p_tot(nu, p.mu, m1, eps_prime));
  }
  if (best == kInf) return make_result(0.0, p, false);
  return make_result(best, p);
}

// ---------------------------------------------------------------------------
// Replica-symmetric optimal decoder
// ---------------------------------------------------------------------------

double scaled_mutual_information(double tau, double ln_m1) {
  const double p = std::exp(-ln_m1);
  const double a = -ln_m1 + std::log(tau / (1.0 + tau));
  const double tc = 25.0;
  const double vc = tc - a;

  auto psi = [p](double t) {
    const double x = std::exp(t) - p;
    if (std::abs(x) < 1e-4) return -x * x / 2.0 + x * x * x / 3.0;
    return std::log1p(x) - x;
  };

  // E0 numeric head: (1+tau) int_0^{v_end} e^{-(1+tau)v} psi(a+v) dv
  double v_end0 = vc;
  if (tau >= 2.0) v_end0 = std::min(vc, 50.0 / (1.0 + tau));
  const int panels0 = std::max(64, int(v_end0 * std::min(2.0 * (1.0 + tau), 64.0)) + 1);
  const double head0 = special::integrate(
      [&](double v) { return (1.0 + tau) * std::exp(-(1.0 + tau) * v) * psi(a + v); }, 0.0,
      v_end0, panels0);
  // analytic tail beyond t_c: psi(t) = t + log1p((1-p)e^{-t}) - e^t + p
  const double et = std::exp(-(1.0 + tau) * vc);
  double tail0 = 0.0;
  if (v_end0 == vc) {
    tail0 = et * (tc + 1.0 / (1.0 + tau)) + p * et -
            std::exp(a) * std::exp(-tau * vc) * (1.0 + tau) / tau +
            (1.0 - p) * std::exp(-a) * std::exp(-(2.0 + tau) * vc) * (1.0 + tau) / (2.0 + tau);
  }
  const double e0_over_p = (head0 + tail0) / p;

  // E1 = tau int_0^inf e^{-tau v} log1p(e^{a+v} - p) dv
  auto log1p_term = [&](double v) {
    const double t = a + v;
    if (t > 30.0) return t + std::log1p((1.0 - p) * std::exp(-t));
    return std::log1p(std::exp(t) - p);
  };
  double v_end1 = vc;
  if (tau >= 2.0) v_end1 = std::min(vc, 50.0 / tau);
  const int panels1 = std::max(64, int(v_end1 * std::min(std::max(2.0, 2.0 * tau), 64.0)) + 1);
  double e1 = special::integrate(
      [&](double v) { return tau * std::exp(-tau * v) * log1p_term(v); }, 0.0, v_end1, panels1);
  if (v_end1 == vc) {
    e1 += std::exp(-tau * vc) * (a + vc + 1.0 / tau) +
          (1.0 - p) * std::exp(-a) * tau / (1.0 + tau) * std::exp(-(1.0 + tau) * vc);
  }
  return 1.0 / tau - (1.0 - p) * e0_over_p - e1;
}

ReplicaDetail replica_scalar_channel(double p_tot, const AsymptoticParams& p) {
  const double ln_m1 = p.k_bits * std::numbers::ln2;
  auto objective = [&](double tau) {
    return (std::log(tau) + ln_m1) / p.mu + 1.0 / (tau * p_tot) +
           scaled_mutual_information(tau, ln_m1);
  };
  // fixed point tau = mu/P + mu*M1*mmse lies in [mu/P, mu(1 + 1/P)]
  const double lo = 0.5 * p.mu / p_tot;
  const double hi = 2.0 * p.mu * (1.0 + 1.0 / p_tot);
  const int grid = 300;
  std::vector<double> taus(grid), vals(grid);
  for (int i = 0; i < grid; ++i) {
    taus[i] = lo * std::pow(hi / lo, double(i) / double(grid - 1));
    vals[i] = objective(taus[i]);
  }
  int ibest = 0;
  for (int i = 1; i < grid; ++i)
    if (vals[i] < vals[ibest]) ibest = i;
  // flag near-ties between separated local minima
  bool flat = false;
  for (int i = 1; i + 1 < grid; ++i) {
    if (i == ibest) continue;
    if (vals[i] < vals[i - 1] && vals[i] < vals[i + 1] &&
        std::abs(vals[i] - vals[ibest]) < 1e-9 && std::abs(i - ibest) > 2)
      flat = true;
  }
  double tlo = taus[std::max(0, ibest - 1)], thi = taus[std::min(grid - 1, ibest + 1)];
  for (int pass = 0; pass < 2; ++pass) {
    double bt = tlo, bv = objective(tlo);
    for (int i = 1; i < 24; ++i) {
      const double t = tlo * std::pow(thi / tlo, double(i) / 23.0);
      const double v = objective(t);
      if (v < bv) {
        bv = v;
        bt = t;
      }
    }
    const double w = std::pow(thi / tlo, 1.0 / 23.0);
    tlo = bt / w;
    thi = bt * w;
  }
  ReplicaDetail d;
  d.sigma2 = std::sqrt(tlo * thi);
  d.flat_minimizer = flat;

  // threshold: P{|Y|^2 > rho} = p  (log-domain bisection in rho)
  const double s2 = d.sigma2;
  const double pp = std::exp(-ln_m1);
  auto log_sf = [&](double rho) {
    const double t1 = std::log1p(-pp) - rho / s2;
    const double t2 = -ln_m1 - rho / (1.0 + s2);
    const double m = std::max(t1, t2);
    return m + std::log(std::exp(t1 - m) + std::exp(t2 - m));
  };
  double rlo = 0.0, rhi = (s2 + 1.0) * (ln_m1 + 60.0);
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (rlo + rhi);
    (log_sf(mid) > -ln_m1 ? rlo : rhi) = mid;
  }
  d.threshold_radius = 0.5 * (rlo + rhi);
  d.pupe = -std::expm1(-d.threshold_radius / (1.0 + s2));
  return d;
}

BoundResult replica_optimal(const AsymptoticParams& p) {
  auto ok = [&](double p_tot) { return replica_scalar_channel(p_tot, p).pupe <= p.eps; };
  const double p_tot = bisect_power(ok, 1e-3, 10.0);
  if (p_tot == kInf) return make_result(0.0, p, false);
  return make_result(p_tot, p);
}

// ---------------------------------------------------------------------------
// Converses
// ---------------------------------------------------------------------------

BoundResult conv_fano(const AsymptoticParams& p) {
  if (p.k_bits < 2) throw std::invalid_argument("conv_fano: M1 > 2 required");
  const double ln_m1 = p.k_bits * std::numbers::ln2;
  const double ln_m1_minus = ln_m1 + std::log1p(-std::exp2(-double(p.k_bits)));
  auto feasible = [&](double p_tot) {
    double worst_gap = 0.0, worst_theta = 0.0;
    const int grid = 1000;
    for (int i = 0; i <= grid; ++i) {
      const double th = double(i) / grid;
      const double lhs = p.mu * th * ln_m1 - p.eps * p.mu * ln_m1_minus - p.mu * h_nat(p.eps);
      const double rhs = std::log1p(alpha_fn(1.0 - th, 1.0) * p_tot);
      if (lhs - rhs > worst_gap) {
        worst_gap = lhs - rhs;
        worst_theta = th;
      }
    }
    if (worst_gap > 0.0) return false;
    // refine around the binding theta
    for (int i = -20; i <= 20; ++i) {
      const double th = std::clamp(worst_theta + i / (20.0 * grid), 0.0, 1.0);
      const double lhs = p.mu * th * ln_m1 - p.eps * p.mu * ln_m1_minus - p.mu * h_nat(p.eps);
      const double rhs = std::log1p(alpha_fn(1.0 - th, 1.0) * p_tot);
      if (lhs > rhs) return false;
    }
    return true;
  };
  const double p_tot = bisect_power(feasible);
  return make_result(p_tot, p, p_tot != kInf);
}

BoundResult conv_single_user(const AsymptoticParams& p) {
  const double ln_m1 = p.k_bits * std::numbers::ln2;
  const double qinv = special::inv_q(std::exp(-ln_m1));
  auto pe = [&](double p_tot) {
    // 1 - E Q(Qinv - sqrt(2 P_tot g / mu)), g ~ Exp(1); the Q transition near
    // g* = Qinv^2 mu / (2 P_tot) is sharp, so the head needs fine panels
    auto f = [&](double g) {
      return std::exp(-g) * special::q_func(qinv - std::sqrt(2.0 * p_tot * g / p.mu));
    };
    const double ev = special::integrate(f, 0.0, 2.0, 1600) + special::integrate(f, 2.0, 60.0, 232);
    return 1.0 - ev;
  };
  auto feasible = [&](double p_tot) { return pe(p_tot) <= p.eps; };
  const double p_tot = bisect_power(feasible);
  return make_result(p_tot, p, p_tot != kInf);
}

double f_fn(double r, double gamma_snr) {
  const double sr = std::sqrt(r);
  const double sa = std::sqrt(gamma_snr * (sr + 1.0) * (sr + 1.0) + 1.0);
  const double sb = std::sqrt(gamma_snr * (sr - 1.0) * (sr - 1.0) + 1.0);
  const double q = 2.0 * gamma_snr * sr / (sa + sb);  // (sa - sb)/2, cancellation-free
  return q * q;
}

double v_fn(double r, double gamma_snr) {
  if (gamma_snr <= 0.0) return 0.0;
  const double f = f_fn(r, gamma_snr);
  return r * std::log1p(gamma_snr - f) + std::log1p(r * gamma_snr - f) - f / gamma_snr;
}

BoundResult conv_iid(const AsymptoticParams& p) {
  if (p.k_bits < 2) throw std::invalid_argument("conv_iid: M1 > 2 required");
  const double ln_m1 = p.k_bits * std::numbers::ln2;
  const double m1 = std::exp2(double(p.k_bits));
  const double inv_m1 = std::exp(-ln_m1);
  const double lhs = h_nat(inv_m1) - inv_m1 * h_nat(p.eps) -
                     (1.0 - inv_m1) * h_nat(p.eps / (m1 - 1.0));
  auto feasible = [&](double p_tot) {
    const double rhs =
        v_fn(1.0 / (p.mu * m1), p_tot) - inv_m1 * v_fn(1.0 / p.mu, p_tot);
    return lhs <= rhs;
  };
  const double p_tot = bisect_power(feasible);
  return make_result(p_tot, p, p_tot != kInf);
}

}  // namespace uramac::asymp
