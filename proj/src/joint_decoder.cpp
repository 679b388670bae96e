#include "uramac/joint_decoder.hpp"

#include <algorithm>
#include <cmath>

#include "uramac/special.hpp"

namespace uramac::jointdec {

namespace {

constexpr double kClamp = ldpc::BpDecoder::kLlrClamp;

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-std::clamp(x, -40.0, 40.0))); }

gm::GaussianMixture fading_prior() { return gm::single(0.0, 0.5); }

}  // namespace

SlotDecoder::SlotDecoder(const ldpc::ParityCheckMatrix& h, JointDecoderConfig cfg)
    : h_(h), cfg_(std::move(cfg)), bp_(h) {
  if (cfg_.T < 1 || cfg_.attempts < 1) throw std::invalid_argument("SlotDecoder: T and attempts must be >= 1");
  if (cfg_.subset_size < 1 || cfg_.subset_size > h.n())
    throw std::invalid_argument("SlotDecoder: subset_size outside [1, n1]");
  if (cfg_.known_fading && int(cfg_.known_fading->size()) < cfg_.T)
    throw std::invalid_argument("SlotDecoder: known_fading needs one coefficient per branch");
}

gm::GaussianMixture SlotDecoder::msg1_functional_to_fading(
    int node, int user, const std::vector<UserBranchState>& states, std::complex<double> y,
    bool imag_part, double symbol_power) const {
  const double sp = std::sqrt(symbol_power);
  // pdf of one real part of sum_{j!=u} H_j x_j + z
  gm::GaussianMixture interf = gm::single(0.0, 0.5);  // noise, N(0,1/2) per part
  for (int j = 0; j < int(states.size()); ++j) {
    if (j == user) continue;
    const auto& f = imag_part ? states[j].fading_im : states[j].fading_re;
    const double pj = sigmoid(states[j].llrs[node]);
    interf = gm::reduce(gm::convolve(interf, gm::mix_binary(f, pj, sp)), cfg_.gm);
  }
  // H_u x_u = y - interference
  const double ypart = imag_part ? y.imag() : y.real();
  gm::GaussianMixture hx = gm::affine(interf, -1.0, ypart);
  // branch on the user's own bit and rescale to get H_u
  const double pu = sigmoid(states[user].llrs[node]);
  return gm::reduce(gm::mix_binary(hx, pu, 1.0 / sp), cfg_.gm);
}

gm::GaussianMixture SlotDecoder::msg2_fading_to_functional(
    const std::vector<gm::GaussianMixture>& incoming) const {
  if (incoming.empty()) throw std::invalid_argument("msg2: no incoming messages");
  gm::GaussianMixture q = incoming[0];
  for (std::size_t i = 1; i < incoming.size(); ++i) {
    try {
      q = gm::reduce(gm::multiply(q, incoming[i]), cfg_.gm);
    } catch (const gm::DegenerateProduct&) {
      return fading_prior();
    }
  }
  return q;
}

double SlotDecoder::msg3_functional_to_llr(
    int node, int user, const std::vector<std::vector<std::complex<double>>>& fading_samples,
    const std::vector<UserBranchState>& states, std::complex<double> y,
    double symbol_power) const {
  const int T = int(states.size());
  const double sp = std::sqrt(symbol_power);
  const int S = int(fading_samples.size());
  const int npat = 1 << (T - 1);

  // per-pattern log prior from the other users' current LLRs
  std::array<double, 64> lp_bit0, lp_bit1;
  int oi = 0;
  for (int j = 0; j < T; ++j) {
    if (j == user) continue;
    const double p = sigmoid(states[j].llrs[node]);
    lp_bit0[oi] = std::log(std::max(p, 1e-300));
    lp_bit1[oi] = std::log(std::max(1.0 - p, 1e-300));
    ++oi;
  }

  double max_p = -1e308, max_m = -1e308;
  static thread_local std::vector<double> acc_p, acc_m;
  acc_p.clear();
  acc_m.clear();
  for (int s = 0; s < S; ++s) {
    const auto& hs = fading_samples[s];
    for (int pat = 0; pat < npat; ++pat) {
      std::complex<double> others{0.0, 0.0};
      double lpw = 0.0;
      int b = 0;
      for (int j = 0; j < T; ++j) {
        if (j == user) continue;
        if (pat >> b & 1) {
          others -= sp * hs[j];
          lpw += lp_bit1[b];
        } else {
          others += sp * hs[j];
          lpw += lp_bit0[b];
        }
        ++b;
      }
      const std::complex<double> own = sp * hs[user];
      acc_p.push_back(-std::norm(y - (others + own)) + lpw);
      acc_m.push_back(-std::norm(y - (others - own)) + lpw);
      max_p = std::max(max_p, acc_p.back());
      max_m = std::max(max_m, acc_m.back());
    }
  }
  return special::logsumexp(acc_p) - special::logsumexp(acc_m);
}

SlotDecodeResult SlotDecoder::decode_slot(const channel::ComplexSignal& received,
                                          double symbol_power, Rng& rng) {
  const int n = h_.n();
  if (int(received.size()) != n) throw std::invalid_argument("decode_slot: received length != n1");
  const int T = cfg_.T;

  SlotDecodeResult result;
  std::vector<std::vector<std::uint8_t>> found;
  const double yy = channel::energy(received);
  double min_drop = cfg_.claim_min_energy_drop;
  if (min_drop < 0.0) min_drop = std::min(0.5, 14.0 / std::max(1, n - T));

  std::vector<int> node_order;
  std::vector<gm::GaussianMixture> incoming;
  std::vector<std::vector<std::complex<double>>> samples(cfg_.gm.sample_count);
  std::vector<double> llr_in(n);

  for (int att = 0; att < cfg_.attempts; ++att) {
    Rng arng = rng.child(0x9e3779b9u * std::uint64_t(att + 1));
    AttemptOutcome outcome;

    std::vector<UserBranchState> states(T);
    for (int u = 0; u < T; ++u) {
      states[u].llrs.assign(n, 0.0);
      if (cfg_.known_fading) {
        const auto h = (*cfg_.known_fading)[u];
        states[u].fading_re = gm::single(h.real(), 1e-12);
        states[u].fading_im = gm::single(h.imag(), 1e-12);
      } else {
        states[u].fading_re = fading_prior();
        states[u].fading_im = fading_prior();
      }
    }

    for (int io = 0; io < cfg_.outer_iters; ++io) {
      bool all_converged = true;
      for (int u = 0; u < T; ++u) {
        // messages 1+2: fading update from a random node subset
        if (!cfg_.known_fading) {
          arng.choose(n, cfg_.subset_size, node_order);
          for (int part = 0; part < 2; ++part) {
            incoming.clear();
            for (int i : node_order)
              incoming.push_back(
                  msg1_functional_to_fading(i, u, states, received[i], part == 1, symbol_power));
            auto q = msg2_fading_to_functional(incoming);
            (part == 1 ? states[u].fading_im : states[u].fading_re) = std::move(q);
          }
        }
        if (states[u].decoded) continue;
        all_converged = false;

        // sample fading jointly for the expectation in message 3
        for (int s = 0; s < cfg_.gm.sample_count; ++s) {
          samples[s].resize(T);
          for (int j = 0; j < T; ++j)
            samples[s][j] = {gm::sample(states[j].fading_re, arng),
                             gm::sample(states[j].fading_im, arng)};
        }
        for (int i = 0; i < n; ++i)
          llr_in[i] = std::clamp(
              msg3_functional_to_llr(i, u, samples, states, received[i], symbol_power), -kClamp,
              kClamp);

        // message 4: inner LDPC iterations
        auto dec = bp_.decode(llr_in, cfg_.inner_iters, cfg_.variant);
        states[u].llrs = dec.post_llrs;
        if (!dec.converged) {
          states[u].candidate.reset();
          continue;
        }
        if (cfg_.confirm_claims &&
            (!states[u].candidate || *states[u].candidate != dec.bits)) {
          states[u].candidate = dec.bits;
          continue;
        }

        const bool duplicate = std::any_of(states.begin(), states.end(), [&](const auto& st) {
          return st.decoded && *st.decoded == dec.bits;
        });
        bool rejected = false;
        if (!duplicate) {
          // claim validation: the candidate must explain a significant share
          // of the energy left over by the codewords claimed so far
          std::vector<channel::ComplexSignal> claimed;
          for (const auto& st : states)
            if (st.decoded) claimed.push_back(ldpc::bpsk_map(*st.decoded, symbol_power));
          const double base = channel::projection_energy(received, claimed);
          claimed.push_back(ldpc::bpsk_map(dec.bits, symbol_power));
          const double with = channel::projection_energy(received, claimed);
          const double drop = (with - base) / std::max(yy - base, 1e-12);
          rejected = drop < min_drop;
        }
        if (duplicate || rejected) {
          // restart with a jittered prior and keep exploring
          outcome.duplicate_restarts += duplicate;
          outcome.rejected_claims += rejected;
          states[u].candidate.reset();
          states[u].llrs.assign(n, 0.0);
          if (!cfg_.known_fading) {
            states[u].fading_re = gm::single(arng.normal(0.0, std::sqrt(0.5)), 0.5);
            states[u].fading_im = gm::single(arng.normal(0.0, std::sqrt(0.5)), 0.5);
          }
          continue;
        }
        states[u].candidate.reset();
        states[u].decoded = dec.bits;
        ++outcome.converged_branches;
        for (int i = 0; i < n; ++i) states[u].llrs[i] = dec.bits[i] ? -kClamp : kClamp;
      }
      if (all_converged) break;
    }

    for (auto& st : states) {
      if (!st.decoded) continue;
      if (std::find(found.begin(), found.end(), *st.decoded) == found.end())
        found.push_back(*st.decoded);
    }
    result.per_attempt.push_back(outcome);
  }

  // Backward elimination on the union: a word claimed for a user in one
  // attempt and superseded by the true word in another contributes nothing
  // once the rest of the list spans the signal.
  bool removed = true;
  while (removed && found.size() > 0) {
    removed = false;
    std::vector<channel::ComplexSignal> sigs;
    for (const auto& cw : found) sigs.push_back(ldpc::bpsk_map(cw, symbol_power));
    const double e_all = channel::projection_energy(received, sigs);
    double worst = 1e300;
    std::size_t worst_i = 0;
    for (std::size_t i = 0; i < found.size(); ++i) {
      std::vector<channel::ComplexSignal> rest;
      for (std::size_t j = 0; j < found.size(); ++j)
        if (j != i) rest.push_back(sigs[j]);
      const double e_rest = channel::projection_energy(received, rest);
      const double loo = (e_all - e_rest) / std::max(yy - e_rest, 1e-12);
      if (loo < worst) {
        worst = loo;
        worst_i = i;
      }
    }
    if (worst < min_drop) {
      found.erase(found.begin() + worst_i);
      removed = true;
    }
  }

  result.codeword_list = std::move(found);
  return result;
}

}  // namespace uramac::jointdec
