#include "uramac/fbl.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <stdexcept>

#include "uramac/special.hpp"

namespace uramac::fbl {

using channel::ComplexSignal;
using special::ln_binom;
using special::ln_binom_huge;

double projection_energy(const ComplexSignal& y, std::span<const ComplexSignal> basis_vectors) {
  return channel::projection_energy(y, basis_vectors);
}

namespace {

// enumerate t-subsets of s0 (small t, slot scale)
void for_each_subset(std::span<const int> s0, int t, const std::function<void(std::span<const int>)>& fn) {
  std::vector<int> idx(t);
  std::vector<int> pick(t);
  const int m = int(s0.size());
  for (int i = 0; i < t; ++i) idx[i] = i;
  while (true) {
    for (int i = 0; i < t; ++i) pick[i] = s0[idx[i]];
    fn(pick);
    int i = t - 1;
    while (i >= 0 && idx[i] == m - t + i) --i;
    if (i < 0) break;
    ++idx[i];
    for (int j = i + 1; j < t; ++j) idx[j] = idx[j - 1] + 1;
  }
}

}  // namespace

double projection_G(const ComplexSignal& y, std::span<const ComplexSignal> codewords,
                    std::span<const int> s0, int t) {
  const int K2 = int(codewords.size());
  if (int(s0.size()) < t || t < 1) throw std::invalid_argument("projection_G: |S0| >= t >= 1 required");
  std::vector<char> in_s0(K2, 0);
  for (int i : s0) in_s0[i] = 1;
  std::vector<ComplexSignal> rest;
  for (int i = 0; i < K2; ++i)
    if (!in_s0[i]) rest.push_back(codewords[i]);

  const double yy = channel::energy(y);
  const double e_rest = projection_energy(y, rest);
  const double denom = yy - e_rest;
  if (denom < 1e-12 * yy) throw std::runtime_error("projection_G: degenerate geometry");

  double best = -1.0;
  for_each_subset(s0, t, [&](std::span<const int> s2) {
    std::vector<ComplexSignal> span_set = rest;
    for (int i : s2) span_set.push_back(codewords[i]);
    best = std::max(best, projection_energy(y, span_set));
  });
  const double g = (yy - best) / denom;
  return std::clamp(g, 0.0, 1.0);
}

namespace {

struct MaxGSamples {
  std::vector<double> logit;  // sorted logit(max G) samples
  double bandwidth;
};

double logit(double g) {
  const double c = std::clamp(g, 1e-12, 1.0 - 1e-12);
  return std::log(c / (1.0 - c));
}

// draws of max_{S0: |S0|=K_{1,t}} G for one t; slot-scale exhaustive union
MaxGSamples draw_max_g(const FblParams& p, int t, Rng& rng) {
  const int k1t = p.K2 - p.K1 + t;
  std::vector<int> all(p.K2);
  for (int i = 0; i < p.K2; ++i) all[i] = i;
  MaxGSamples out;
  out.logit.reserve(p.mc_samples);
  for (int s = 0; s < p.mc_samples; ++s) {
    Rng r = rng.child(0x6a09e667f3bcc909ull ^ (std::uint64_t(t) << 32) ^ std::uint64_t(s));
    auto cb = channel::generate_codebook(p.K2, p.n, p.power, p.design_power, p.kind, r);
    auto fading = channel::draw_fading(p.K2, r);
    auto y = channel::transmit(cb.codewords, fading, true, r);
    double best = 0.0;
    for_each_subset(all, k1t, [&](std::span<const int> s0) {
      best = std::max(best, projection_G(y, cb.codewords, s0, t));
    });
    out.logit.push_back(logit(best));
  }
  std::sort(out.logit.begin(), out.logit.end());
  // Silverman's rule on the logit scale
  const std::size_t m = out.logit.size();
  double mean = 0.0;
  for (double v : out.logit) mean += v;
  mean /= double(m);
  double var = 0.0;
  for (double v : out.logit) var += (v - mean) * (v - mean);
  var /= double(m - 1);
  const double iqr = out.logit[std::size_t(0.75 * m)] - out.logit[std::size_t(0.25 * m)];
  const double spread = std::min(std::sqrt(var), iqr / 1.34);
  out.bandwidth = std::max(0.9 * spread * std::pow(double(m), -0.2), 1e-6);
  return out;
}

double kde_tail(const MaxGSamples& s, double v_threshold) {
  // P{max G >= V} with Gaussian kernels on the logit scale
  const double lv = logit(v_threshold);
  double acc = 0.0;
  for (double u : s.logit) acc += special::norm_cdf((u - lv) / s.bandwidth);
  return acc / double(s.logit.size());
}

struct RateTerms {
  double r1, st;
  int nprime, k1t;
  double ln_binom_k2_k1t;
};

RateTerms rate_terms(const FblParams& p, int t) {
  RateTerms rt;
  rt.k1t = p.K2 - p.K1 + t;
  rt.nprime = p.n - p.K1 + t;
  const double lnM = p.k_bits * std::numbers::ln2;
  // M - K2 ~ M for any realistic payload
  rt.r1 = ln_binom_huge(lnM, t) / double(p.n - p.K1);
  rt.st = ln_binom(rt.nprime - 1, t - 1) / double(p.n - p.K1);
  rt.ln_binom_k2_k1t = ln_binom(p.K2, rt.k1t);
  return rt;
}

std::vector<double> log_grid(double lo, double hi, int count) {
  std::vector<double> g(count);
  const double llo = std::log(lo), lhi = std::log(hi);
  for (int i = 0; i < count; ++i) g[i] = std::exp(llo + (lhi - llo) * i / double(count - 1));
  return g;
}

}  // namespace

PtBound achievability_pt_mc(const FblParams& p, int t, Rng& rng) {
  if (p.K1 > p.K2 || t < 1 || t > p.K1) throw std::invalid_argument("achievability_pt_mc: bad t/K1/K2");
  const auto samples = draw_max_g(p, t, rng);
  const auto rt = rate_terms(p, t);
  PtBound best;
  best.value = 1.0;
  auto eval = [&](double delta) {
    const double vnt = std::exp(-(delta + rt.r1 + rt.st));
    if (!(vnt > 0.0) || vnt >= 1.0) return 1.0;
    const double term1 = std::exp(rt.ln_binom_k2_k1t - double(p.n - p.K1) * delta);
    return term1 + kde_tail(samples, vnt);
  };
  auto scan = [&](const std::vector<double>& grid) {
    for (double d : grid) {
      const double v = eval(d);
      if (v < best.value) {
        best.value = v;
        best.delta = d;
      }
    }
  };
  scan(log_grid(1e-6, 10.0, 64));
  scan(log_grid(best.delta / 3.0, best.delta * 3.0, 64));
  best.value = std::min(best.value, 1.0);
  return best;
}

PtBound achievability_pt_analytic(const FblParams& p, int t, Rng& rng) {
  if (p.kind != channel::CodebookKind::gaussian)
    throw std::invalid_argument("achievability_pt_analytic: gaussian codebook semantics required");
  const auto rt = rate_terms(p, t);
  // Fading-only statistic: min over windows of sorted Exp(1) draws. The
  // statistic is threshold-independent, so draw once and binary-search later.
  std::vector<double> stat(p.fading_samples);
  {
    std::vector<double> g(p.K2);
    for (int s = 0; s < p.fading_samples; ++s) {
      Rng r = rng.child(0xbb67ae8584caa73bull ^ (std::uint64_t(t) << 32) ^ std::uint64_t(s));
      for (auto& v : g) v = r.exponential();
      std::sort(g.begin(), g.end(), std::greater<>());
      std::vector<double> prefix(p.K2 + 1, 0.0);
      for (int i = 0; i < p.K2; ++i) prefix[i + 1] = prefix[i] + g[i];
      double best = 1e308;
      for (int i = 1; i <= p.K1 - t + 1; ++i) {
        const double num = p.design_power * (prefix[i + t - 1] - prefix[i - 1]);
        const int hi = std::min(rt.k1t - 1 + i, p.K2);
        const double den = 1.0 + p.design_power * (prefix[hi] - prefix[i + t - 1]);
        best = std::min(best, num / den);
      }
      stat[s] = best;
    }
    std::sort(stat.begin(), stat.end());
  }
  auto stat_cdf = [&](double x) {
    const auto it = std::upper_bound(stat.begin(), stat.end(), x);
    return double(it - stat.begin()) / double(stat.size());
  };

  PtBound best;
  best.value = 1.0;
  auto eval = [&](double delta, double d1, double d2) {
    const double vnt = std::exp(-(delta + rt.r1 + rt.st));
    if (!(vnt > 0.0) || vnt >= 1.0) return 1.0;
    const double c = 2.0 * vnt / (1.0 - vnt);
    const double fn = d1 + 1.0 + c * (1.0 + d1) -
                      std::sqrt(1.0 + c * (1.0 + d1)) * std::sqrt(2.0 * d1 + 1.0 + c * (1.0 + d1));
    // fn is the negative exponent; the bound uses exp(-n' f_n(d1)) with f_n >= 0
    const double expo1 = rt.ln_binom_k2_k1t - double(p.n - p.K1) * delta;
    const double expo2 = rt.ln_binom_k2_k1t - double(rt.nprime) * fn;
    const double expo3 = rt.ln_binom_k2_k1t - double(rt.nprime) * d2 * d2 / 2.0;
    const double thresh = ((1.0 + d1 * (1.0 - vnt)) / vnt - 1.0) / (1.0 - d2);
    const double pfad = stat_cdf(thresh);
    return std::exp(expo1) + std::exp(expo2) + std::exp(expo3) + pfad;
  };
  const auto dgrid = log_grid(1e-6, 10.0, 64);
  const auto d1grid = log_grid(1e-4, 100.0, 64);
  const auto d2grid = log_grid(1e-4, 0.999, 64);
  for (double d : dgrid)
    for (double d1 : d1grid)
      for (double d2 : d2grid) {
        const double v = eval(d, d1, d2);
        if (v < best.value) {
          best.value = v;
          best.delta = d;
          best.delta1 = d1;
          best.delta2 = d2;
        }
      }
  // one local refinement pass
  auto refine = [&](double base, double lo_f, double hi_f) {
    return log_grid(std::max(base * lo_f, 1e-12), base * hi_f, 16);
  };
  for (double d : refine(best.delta, 0.3, 3.0))
    for (double d1 : refine(best.delta1, 0.3, 3.0))
      for (double d2 : refine(best.delta2, 0.3, 3.0)) {
        if (d2 >= 1.0) continue;
        const double v = eval(d, d1, d2);
        if (v < best.value) {
          best.value = v;
          best.delta = d;
          best.delta1 = d1;
          best.delta2 = d2;
        }
      }
  best.value = std::min(best.value, 1.0);
  return best;
}

double p0_term(const FblParams& p) {
  const double lnM = p.k_bits * std::numbers::ln2;
  const double collisions = std::exp(ln_binom(p.K2, 2) - lnM);
  if (p.kind == channel::CodebookKind::spherical) return collisions;
  // K2 * P{ chi2(2n)/(2n) > P/P' }
  const double clip = special::chi2_sf(2.0 * p.n * p.power / p.design_power, 2.0 * p.n);
  return collisions + p.K2 * clip;
}

double achievability_pupe(const FblParams& p, std::span<const double> pt_values) {
  if (int(pt_values.size()) != p.K1) throw std::invalid_argument("achievability_pupe: need p_t for t=1..K1");
  double eps = double(p.K2 - p.K1) / double(p.K2);
  for (int t = 1; t <= p.K1; ++t) eps += double(p.K2 - p.K1 + t) * pt_values[t - 1] / double(p.K2);
  eps += p0_term(p);
  return std::clamp(eps, 0.0, 1.0);
}

double slot_pupe_bound_mc(int n1, int k_bits, int r, double slot_power, int samples, Rng& rng) {
  FblParams p;
  p.n = n1;
  p.k_bits = k_bits;
  p.K1 = p.K2 = r;
  p.power = p.design_power = slot_power;
  p.kind = channel::CodebookKind::spherical;
  p.mc_samples = samples;
  std::vector<double> pts(r);
  for (int t = 1; t <= r; ++t) pts[t - 1] = achievability_pt_mc(p, t, rng).value;
  return achievability_pupe(p, pts);
}

// ---------------------------------------------------------------------------
// Theorem 1 converse
// ---------------------------------------------------------------------------

ConverseDraws converse_draws(int n, double power, int samples, std::uint64_t seed) {
  ConverseDraws d;
  d.s_over_n.resize(samples);
  d.l_over_n.resize(samples);
  d.gains.resize(samples);
  Rng rng(seed, 0xc3a5c85c97cb3127ull);
  const double gamma_shape = (2.0 * n - 1.0) / 2.0;
  for (int i = 0; i < samples; ++i) {
    const double g = rng.exponential();
    const double b = rng.normal(0.0, std::sqrt(n / 2.0));
    const double a = b * b / double(n) + rng.gamma(gamma_shape);
    const double pg = power * g;
    d.gains[i] = g;
    d.s_over_n[i] = std::log1p(pg) + 1.0 - (pg * a - 2.0 * std::sqrt(pg) * b + n) / ((1.0 + pg) * n);
    d.l_over_n[i] =
        std::log1p(pg) - (pg * a - 2.0 * std::sqrt(pg * (1.0 + pg)) * b) / double(n) - pg;
  }
  return d;
}

double log_tail_l_given_gain(int n, double power, double gamma, double gain) {
  const double pg = power * gain;
  if (pg <= 0) return gamma <= 0.0 ? 0.0 : -std::numeric_limits<double>::infinity();
  const double lam = 2.0 * n * (1.0 + pg) / pg;
  const double x = 2.0 * n * (1.0 + std::log1p(pg) - gamma) / pg;
  return special::ncx2_logcdf(x, 2.0 * n, lam);
}

namespace {

struct TailEstimate {
  double log_tail;
  bool widened;  // estimate was not finite and had to be clamped
};

double quantile(std::vector<double> v, double q) {
  std::sort(v.begin(), v.end());
  const double idx = q * (v.size() - 1);
  const std::size_t lo = std::size_t(idx);
  const std::size_t hi = std::min(lo + 1, v.size() - 1);
  const double w = idx - double(lo);
  return v[lo] * (1 - w) + v[hi] * w;
}

TailEstimate l_tail(const ConverseDraws& d, int n, double power, double gamma) {
  int hits = 0;
  for (double l : d.l_over_n)
    if (l >= gamma) ++hits;
  if (hits >= 1000) return {std::log(double(hits) / double(d.l_over_n.size())), false};
  // conditional (exact in Z) estimate averaged over the same fading draws
  std::vector<double> logs(d.gains.size());
  for (std::size_t i = 0; i < d.gains.size(); ++i)
    logs[i] = log_tail_l_given_gain(n, power, gamma, d.gains[i]);
  const double lt = special::logsumexp(logs) - std::log(double(logs.size()));
  if (!std::isfinite(lt)) return {-2000.0, true};  // looser but valid
  return {lt, false};
}

}  // namespace

ConverseResult converse_theorem1(int n, int k_bits, int ka, double eps, int samples,
                                 std::uint64_t seed) {
  if (!(eps > 0.0 && eps < 1.0)) throw std::invalid_argument("converse_theorem1: eps outside (0,1)");
  const double target = k_bits * std::numbers::ln2;
  bool widened = false;
  auto bound_ln_m = [&](double power) {
    const auto d = converse_draws(n, power, samples, seed);
    const double gamma = quantile(d.s_over_n, eps);
    const auto tail = l_tail(d, n, power, gamma);
    widened = widened || tail.widened;
    return std::log(double(ka)) - tail.log_tail;
  };
  double lo = 1e-6, hi = 4.0;
  while (bound_ln_m(hi) < target && hi < 1e4) hi *= 2.0;
  // bisect to 0.05 dB
  while (10.0 * std::log10(hi / lo) > 0.05) {
    const double mid = std::sqrt(lo * hi);
    (bound_ln_m(mid) >= target ? hi : lo) = mid;
  }
  ConverseResult r;
  r.power = hi;
  r.min_ebno_db = channel::energy_per_bit(n, hi, k_bits).db;
  r.widened = widened;
  return r;
}

double converse_eps_at_power(int n, int k_bits, int ka, double power, int samples,
                             std::uint64_t seed) {
  const double target = k_bits * std::numbers::ln2;
  const auto d = converse_draws(n, power, samples, seed);
  auto bound_at = [&](double eps) {
    const double gamma = quantile(d.s_over_n, eps);
    const auto tail = l_tail(d, n, power, gamma);
    return std::log(double(ka)) - tail.log_tail;
  };
  double lo = 1e-9, hi = 1.0 - 1e-9;
  if (bound_at(hi) < target) return 1.0;   // even eps ~ 1 cannot carry k bits
  if (bound_at(lo) >= target) return 0.0;  // no constraint at this power
  for (int i = 0; i < 60; ++i) {
    const double mid = 0.5 * (lo + hi);
    (bound_at(mid) >= target ? hi : lo) = mid;
  }
  return hi;
}

// ---------------------------------------------------------------------------
// Reference curves
// ---------------------------------------------------------------------------

double normal_approx_pe(int k_bits, int n1, int r, double slot_power, int samples, Rng& rng) {
  if (r < 1) throw std::invalid_argument("normal_approx_pe: r >= 1");
  const double lnM = k_bits * std::numbers::ln2;
  double acc = 0.0;
  for (int s = 0; s < samples; ++s) {
    double gsum = 0.0;
    for (int i = 0; i < r; ++i) gsum += rng.exponential();
    const double x = slot_power * gsum;
    const double cap = std::log1p(x);
    const double disp = 1.0 - 1.0 / ((1.0 + x) * (1.0 + x));
    if (disp <= 0) {
      acc += cap * n1 >= lnM ? 0.0 : 1.0;
      continue;
    }
    acc += special::q_func((n1 * cap - lnM) / std::sqrt(n1 * disp));
  }
  return acc / double(samples);
}

double tin_pe(int n, int k_bits, double power, int t_users, int samples, Rng& rng) {
  const double lnM = k_bits * std::numbers::ln2;
  double acc = 0.0;
  for (int s = 0; s < samples; ++s) {
    const double g1 = rng.exponential();
    double interf = 0.0;
    for (int i = 1; i < t_users; ++i) interf += rng.exponential();
    const double x = power * g1 / (1.0 + power * interf);
    const double cap = std::log1p(x);
    const double disp = 1.0 - 1.0 / ((1.0 + x) * (1.0 + x));
    if (disp <= 0) {
      acc += cap * n >= lnM ? 0.0 : 1.0;
      continue;
    }
    acc += special::q_func((n * cap - lnM) / std::sqrt(n * disp));
  }
  return acc / double(samples);
}

double shamai_bettesh_outage(int ka, double rate_nats, double total_power) {
  // crystallized order statistics of Exp(1): j-th largest ~ -ln(j/(Ka+1))
  std::vector<double> g(ka);
  for (int j = 1; j <= ka; ++j) g[j - 1] = -std::log(double(j) / double(ka + 1));
  const double p = total_power / double(ka);
  std::vector<double> prefix(ka + 1, 0.0);
  for (int j = 0; j < ka; ++j) prefix[j + 1] = prefix[j] + g[j];
  // keep the strongest kept users; dropped users act as noise
  for (int kept = ka; kept >= 1; --kept) {
    const double noise = 1.0 + p * (prefix[ka] - prefix[kept]);
    bool ok = true;
    for (int l = 1; l <= kept; ++l) {
      // weakest l kept gains bind the symmetric point
      const double sig = p * (prefix[kept] - prefix[kept - l]);
      if (l * rate_nats > std::log1p(sig / noise) + 1e-15) {
        ok = false;
        break;
      }
    }
    if (ok) return double(ka - kept) / double(ka);
  }
  return 1.0;
}

double shamai_bettesh_min_ebno_db(int ka, int n, int k_bits, double eps) {
  const double rate = k_bits * std::numbers::ln2 / double(n);
  double lo = 1e-6, hi = 1.0;
  while (shamai_bettesh_outage(ka, rate, hi) > eps && hi < 1e12) hi *= 2.0;
  while (10.0 * std::log10(hi / lo) > 0.01) {
    const double mid = std::sqrt(lo * hi);
    (shamai_bettesh_outage(ka, rate, mid) <= eps ? hi : lo) = mid;
  }
  return channel::energy_per_bit(n, hi / double(ka), k_bits).db;
}

}  // namespace uramac::fbl
