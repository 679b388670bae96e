#include "uramac/aloha.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <stdexcept>

#include "uramac/fbl.hpp"
#include "uramac/special.hpp"

namespace uramac::aloha {

Message draw_message(int k_bits, Rng& rng) {
  if (k_bits < 1 || k_bits > 128) throw std::invalid_argument("draw_message: k outside [1,128]");
  Message m{0, 0};
  m[0] = rng.bits();
  m[1] = rng.bits();
  if (k_bits < 64) {
    m[0] &= (1ull << k_bits) - 1;
    m[1] = 0;
  } else if (k_bits < 128) {
    m[1] &= (1ull << (k_bits - 64)) - 1;
  }
  return m;
}

std::vector<int> assign_slots(int ka, int L, Rng& rng) {
  if (L < 1) throw std::invalid_argument("assign_slots: L >= 1");
  std::vector<int> s(ka);
  for (auto& v : s) v = int(rng.below(std::uint64_t(L)));
  return s;
}

bool FrameResult::any_false_alarm() const {
  return std::any_of(slots.begin(), slots.end(),
                     [](const SlotTally& t) { return t.false_alarms > 0; });
}

LdpcSlotRunner::LdpcSlotRunner(const ldpc::ParityCheckMatrix& h, jointdec::JointDecoderConfig cfg,
                               DecoderMode mode)
    : h_(h), encoder_(h), cfg_(std::move(cfg)), mode_(mode) {
  if (encoder_.k() > 128) throw std::invalid_argument("LdpcSlotRunner: k > 128 unsupported");
}

std::vector<Message> LdpcSlotRunner::run_slot(std::span<const Message> messages,
                                              double slot_power, Rng& rng) {
  const int r = int(messages.size());
  const int k = encoder_.k();
  std::vector<channel::ComplexSignal> signals(r);
  for (int u = 0; u < r; ++u) {
    std::vector<std::uint8_t> bits(k);
    for (int b = 0; b < k; ++b) bits[b] = (messages[u][b >> 6] >> (b & 63)) & 1;
    signals[u] = ldpc::bpsk_map(encoder_.encode(bits), slot_power);
  }
  auto fading = channel::draw_fading(r, rng);
  auto y = r > 0 ? channel::transmit(signals, fading, true, rng)
                 : channel::transmit({}, channel::FadingDraw{}, true, rng);
  if (y.empty()) {  // empty slot is pure noise of slot length
    y.resize(h_.n());
    for (auto& v : y) v = rng.cnormal(1.0);
  }

  jointdec::JointDecoderConfig cfg = cfg_;
  if (mode_ != DecoderMode::blind) cfg.T = std::max(1, r);
  if (mode_ == DecoderMode::known_fading) {
    cfg.known_fading = fading.coefficients;
    cfg.known_fading->resize(std::max(1, r), {0.0, 0.0});
  }
  jointdec::SlotDecoder dec(h_, cfg);
  auto result = dec.decode_slot(y, slot_power, rng);

  std::vector<Message> out;
  for (const auto& cw : result.codeword_list) {
    auto bits = encoder_.extract_message(cw);
    Message m{0, 0};
    for (int b = 0; b < k; ++b)
      if (bits[b]) m[b >> 6] |= 1ull << (b & 63);
    out.push_back(m);
  }
  return out;
}

GenieStubRunner::GenieStubRunner(int T, std::vector<double> pe_by_r)
    : T_(T), pe_(std::move(pe_by_r)) {}

std::vector<Message> GenieStubRunner::run_slot(std::span<const Message> messages,
                                               double /*slot_power*/, Rng& rng) {
  const int r = int(messages.size());
  if (r == 0 || r > T_) return {};
  std::vector<Message> out;
  for (const auto& m : messages) {
    const double pe = pe_.empty() ? 0.0 : pe_[std::min<std::size_t>(r - 1, pe_.size() - 1)];
    if (rng.uniform() >= pe) out.push_back(m);
  }
  // a genie decoder never claims codewords that were not sent; duplicates
  // (colliding users) appear once in the list
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

FrameResult run_frame(const FrameConfig& cfg, SlotRunner& runner, Rng& rng) {
  if (cfg.n1() < 1) throw std::invalid_argument("run_frame: n1 >= 1 required");
  std::vector<Message> msgs(cfg.ka);
  for (auto& m : msgs) m = draw_message(cfg.k_bits, rng);
  const auto slot_of = assign_slots(cfg.ka, cfg.L, rng);

  std::map<Message, int> count;
  for (const auto& m : msgs) ++count[m];

  FrameResult res;
  res.slots.resize(cfg.L);
  for (int s = 0; s < cfg.L; ++s) {
    std::vector<Message> in_slot;
    for (int u = 0; u < cfg.ka; ++u)
      if (slot_of[u] == s) in_slot.push_back(msgs[u]);
    Rng srng = rng.child(0x100000001b3ull * std::uint64_t(s + 1));
    auto list = runner.run_slot(in_slot, cfg.slot_power(), srng);
    std::sort(list.begin(), list.end());
    list.erase(std::unique(list.begin(), list.end()), list.end());

    SlotTally& tally = res.slots[s];
    tally.r = int(in_slot.size());
    std::vector<Message> uniq = in_slot;
    std::sort(uniq.begin(), uniq.end());
    uniq.erase(std::unique(uniq.begin(), uniq.end()), uniq.end());
    int decoded_true = 0;
    for (const auto& m : uniq)
      if (std::binary_search(list.begin(), list.end(), m)) ++decoded_true;
    tally.false_alarms = int(list.size()) - decoded_true;
    for (const auto& m : in_slot) {
      const bool hit = std::binary_search(list.begin(), list.end(), m);
      tally.hits += hit;
      tally.misses += !hit;
      const bool collided = count[m] > 1;
      if (!hit || collided) ++res.user_errors;
      if (collided) ++res.collided_users;
    }
  }
  return res;
}

namespace {

// log pmf of Binomial(count, 1/L) at r, safe for L = 1
double log_binom_pmf(int count, int L, int r) {
  if (L == 1) return r == count ? 0.0 : -std::numeric_limits<double>::infinity();
  return special::ln_binom(count, r) - r * std::log(double(L)) +
         (count - r) * std::log1p(-1.0 / L);
}

}  // namespace

double epsilon_t_genie(int ka, int L, int T, int k_bits, std::span<const double> pe_genie) {
  if (int(pe_genie.size()) < std::min(T, ka)) throw std::invalid_argument("epsilon_t_genie: pe table too short");
  double sum = 0.0;
  for (int r = 1; r <= std::min(T, ka); ++r) {
    const double pe = pe_genie[r - 1];
    sum += (1.0 - pe) * std::exp(log_binom_pmf(ka - 1, L, r - 1));
  }
  const double collision = std::exp(std::log(double(ka)) - k_bits * std::numbers::ln2);
  return std::clamp(1.0 - sum + collision, 0.0, 1.0);
}

double epsilon_t_blind(int ka, int L, int T, int k_bits, std::span<const double> pe,
                       std::span<const double> qe) {
  if (int(pe.size()) < std::min(T, ka)) throw std::invalid_argument("epsilon_t_blind: pe table too short");
  if (qe.empty()) throw std::invalid_argument("epsilon_t_blind: qe table empty");
  double sum = 0.0;
  for (int r = 1; r <= std::min(T, ka); ++r)
    sum += (1.0 - pe[r - 1]) * std::exp(log_binom_pmf(ka - 1, L, r - 1));
  const double collision = std::exp(std::log(double(ka)) - k_bits * std::numbers::ln2);
  // q = L * sum_r Binom(ka, 1/L)(r) * Q_e(r), tail mass conservatively at Q_e = 1
  double q = 0.0, cum = 0.0;
  for (int r = 0; r <= ka; ++r) {
    const double pmf = std::exp(log_binom_pmf(ka, L, r));
    if (pmf < 1e-15 && r > ka / L) {
      q += (1.0 - cum);  // everything further out, at Q_e = 1
      break;
    }
    cum += pmf;
    const double qer = qe[std::min<std::size_t>(r, qe.size() - 1)];
    q += pmf * qer;
  }
  q *= double(L);
  return std::clamp(1.0 - sum + collision + q, 0.0, 1.0);
}

OperatingPoint optimize_operating_point(int n, int k_bits, int ka, int T, double target_eps,
                                        bool genie, int mc_samples, std::uint64_t seed) {
  // candidate L values: one per distinct slot length n1 = floor(n/L)
  std::vector<int> candidates;
  int last_n1 = -1;
  for (int L = 1; L <= n / 16; ++L) {
    const int n1 = n / L;
    if (n1 == last_n1) continue;
    last_n1 = n1;
    candidates.push_back(L);
  }
  const std::vector<double> qe_zero{0.0};

  OperatingPoint best;
  best.feasible = false;
  for (int L : candidates) {
    const int n1 = n / L;
    auto eps_at = [&](double ebno_db) {
      const double power = channel::ebno_db_to_power(n, ebno_db, k_bits);
      std::vector<double> pe(std::min(T, ka));
      for (int r = 1; r <= std::min(T, ka); ++r) {
        Rng rng(seed, 0x5deece66dull ^ (std::uint64_t(L) << 32) ^ (std::uint64_t(r) << 16));
        pe[r - 1] = fbl::normal_approx_pe(k_bits, n1, r, double(L) * power, mc_samples, rng);
      }
      return genie ? epsilon_t_genie(ka, L, T, k_bits, pe)
                   : epsilon_t_blind(ka, L, T, k_bits, pe, qe_zero);
    };
    // coarse 1 dB scan, then 0.1 dB refinement
    const double hi_db = best.feasible ? best.ebno_db : 40.0;
    double coarse = std::numeric_limits<double>::quiet_NaN();
    for (double e = -2.0; e <= hi_db + 1.0; e += 1.0) {
      if (eps_at(e) <= target_eps) {
        coarse = e;
        break;
      }
    }
    if (std::isnan(coarse)) continue;
    double fine = coarse;
    for (double e = coarse - 1.0; e <= coarse + 1e-9; e += 0.1) {
      if (eps_at(e) <= target_eps) {
        fine = e;
        break;
      }
    }
    if (!best.feasible || fine < best.ebno_db) {
      best.feasible = true;
      best.ebno_db = fine;
      best.L = L;
      best.power = channel::ebno_db_to_power(n, fine, k_bits);
    }
  }
  return best;
}

}  // namespace uramac::aloha
