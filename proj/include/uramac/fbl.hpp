#pragma once

#include <complex>
#include <optional>
#include <span>
#include <vector>

#include "uramac/channel.hpp"
#include "uramac/rng.hpp"

// Finite-blocklength achievability (projection decoder) and converse bounds,
// plus the normal-approximation / TIN / iterative-dropping reference curves.
namespace uramac::fbl {

struct FblParams {
  int n = 0;          // blocklength (slot length when used per slot)
  int k_bits = 0;     // payload bits; M = 2^k
  int K2 = 0;         // transmitted users
  int K1 = 0;         // decoded list size (K1 <= K2)
  double power = 0;   // P, max per-symbol power
  double design_power = 0;  // P' for gaussian codebooks
  channel::CodebookKind kind = channel::CodebookKind::spherical;
  int mc_samples = 2000;
  int fading_samples = 100000;  // for the analytic order-statistics probability
};

// Residual-energy ratio of Eq. (G definition): S0 of size K_{1,t}; the inner
// max over S2 runs over all t-subsets of S0 (exhaustive, slot scale).
double projection_G(const channel::ComplexSignal& y,
                    std::span<const channel::ComplexSignal> codewords,
                    std::span<const int> s0, int t);

// Orthonormal-basis helper (modified Gram-Schmidt with reorthogonalization).
// Returns the captured energy ||P_span V y||^2.
double projection_energy(const channel::ComplexSignal& y,
                         std::span<const channel::ComplexSignal> basis_vectors);

struct PtBound {
  double value = 1.0;
  double delta = 0.0;       // optimizing delta
  double delta1 = 0.0, delta2 = 0.0;  // analytic form only
};

// Monte-Carlo form: samples of max_{S0} G feed a Gaussian-kernel CDF on the
// logit scale; optimized over a log-spaced delta grid with one refinement.
PtBound achievability_pt_mc(const FblParams& p, int t, Rng& rng);
// Analytic form (gaussian codebooks): triple grid over (delta, delta1, delta2)
// with the fading-only probability estimated over sorted Exp(1) draws.
PtBound achievability_pt_analytic(const FblParams& p, int t, Rng& rng);

// eps <= (K2-K1)/K2 + (1/K2) sum_t K_{1,t} p_t + p0, clipped to [0,1].
double achievability_pupe(const FblParams& p, std::span<const double> pt_values);
double p0_term(const FblParams& p);

// Slot-level PUPE bound with K1 = K2 = r (spherical codebook).
double slot_pupe_bound_mc(int n1, int k_bits, int r, double slot_power, int samples, Rng& rng);

struct ConverseResult {
  double min_ebno_db = 0.0;
  double power = 0.0;
  bool widened = false;  // tail needed the conditional fallback beyond spec'd MC reach
};

// Theorem 1: minimum Eb/N0 over P such that log M <= log Ka + log(1/P{L_n >= n g_n})
// admits log M = k ln 2; S_n quantile from >= `samples` Monte-Carlo draws, the
// L_n tail via plain MC or an exact conditional noncentral-chi-square fallback.
ConverseResult converse_theorem1(int n, int k_bits, int ka, double eps, int samples,
                                 std::uint64_t seed);
// Smallest eps admitted at fixed power (for PUPE-vs-EbN0 slot curves).
double converse_eps_at_power(int n, int k_bits, int ka, double power, int samples,
                             std::uint64_t seed);

// Internal statistics, exposed for oracle tests: draws of (S_n, L_n) via the
// sufficient statistics (G, A, B) and the conditional tail given G.
struct ConverseDraws {
  std::vector<double> s_over_n, l_over_n, gains;
};
ConverseDraws converse_draws(int n, double power, int samples, std::uint64_t seed);
double log_tail_l_given_gain(int n, double power, double gamma, double gain);

// Normal approximation of slot PUPE (Eq. with C_AWGN/V_AWGN; n1 used
// consistently), Monte-Carlo over fading powers.
double normal_approx_pe(int k_bits, int n1, int r, double slot_power, int samples, Rng& rng);
// Treat-interference-as-noise PUPE at frame scale with T users total.
double tin_pe(int n, int k_bits, double power, int t_users, int samples, Rng& rng);

// Iterative least-gain dropping with crystallized order statistics; returns
// the minimum Eb/N0 (dB) such that the dropped fraction is <= eps.
double shamai_bettesh_min_ebno_db(int ka, int n, int k_bits, double eps);
double shamai_bettesh_outage(int ka, double rate_nats, double total_power);

}  // namespace uramac::fbl
