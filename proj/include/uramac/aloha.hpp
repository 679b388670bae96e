#pragma once

#include <array>
#include <memory>
#include <span>
#include <vector>

#include "uramac/joint_decoder.hpp"
#include "uramac/ldpc.hpp"
#include "uramac/rng.hpp"

// T-fold ALOHA framing, PUPE accounting and (L, P) operating-point search.
// Payloads are k <= 128 bits; the codebook size is M = 2^k.
namespace uramac::aloha {

using Message = std::array<std::uint64_t, 2>;

Message draw_message(int k_bits, Rng& rng);

struct FrameConfig {
  int n = 0;       // frame length
  int L = 1;       // slot count
  int ka = 0;      // active users
  int T = 1;       // decodable collision order
  int k_bits = 0;  // payload bits
  double power = 0.0;  // P per frame symbol; slots run at L*P
  int n1() const { return n / L; }
  double slot_power() const { return double(L) * power; }
};

// iid uniform slot choice per user
std::vector<int> assign_slots(int ka, int L, Rng& rng);

struct SlotTally {
  int r = 0;
  int hits = 0;
  int misses = 0;
  int false_alarms = 0;
};

struct FrameResult {
  int user_errors = 0;  // miss-or-collision events, Def. 1
  int collided_users = 0;
  std::vector<SlotTally> slots;
  double pupe(int ka) const { return ka > 0 ? double(user_errors) / ka : 0.0; }
  bool any_false_alarm() const;
};

// One slot end-to-end: the runner owns channel simulation and decoding.
class SlotRunner {
 public:
  virtual ~SlotRunner() = default;
  virtual std::vector<Message> run_slot(std::span<const Message> messages, double slot_power,
                                        Rng& rng) = 0;
};

enum class DecoderMode { blind, known_count, known_fading };

// Real pipeline: LDPC encode, BPSK, fading channel, alternating-BP decoding.
class LdpcSlotRunner : public SlotRunner {
 public:
  LdpcSlotRunner(const ldpc::ParityCheckMatrix& h, jointdec::JointDecoderConfig cfg,
                 DecoderMode mode);
  std::vector<Message> run_slot(std::span<const Message> messages, double slot_power,
                                Rng& rng) override;

 private:
  const ldpc::ParityCheckMatrix& h_;
  ldpc::Encoder encoder_;
  jointdec::JointDecoderConfig cfg_;
  DecoderMode mode_;
};

// Genie stub: knows r; each message decoded independently w.p. 1 - pe[r]
// (r <= T), nothing decoded for r > T. pe[0] corresponds to r = 1.
class GenieStubRunner : public SlotRunner {
 public:
  GenieStubRunner(int T, std::vector<double> pe_by_r);
  static GenieStubRunner perfect(int T) { return GenieStubRunner(T, {}); }
  std::vector<Message> run_slot(std::span<const Message> messages, double slot_power,
                                Rng& rng) override;

 private:
  int T_;
  std::vector<double> pe_;  // empty = perfect
};

FrameResult run_frame(const FrameConfig& cfg, SlotRunner& runner, Rng& rng);

// Closed-form PUPE bounds. pe_genie[r-1] is the slot error probability at
// occupancy r (r = 1..T); qe[r] the oversize probability at occupancy r
// (r = 0..; the last entry extends to larger r).
double epsilon_t_genie(int ka, int L, int T, int k_bits, std::span<const double> pe_genie);
double epsilon_t_blind(int ka, int L, int T, int k_bits, std::span<const double> pe,
                       std::span<const double> qe);

struct OperatingPoint {
  int L = 1;
  double power = 0.0;  // per frame symbol
  double ebno_db = 0.0;
  bool feasible = false;
};

// Grid search over L (distinct floor(n/L)) and P (0.1 dB steps), using the
// normal-approximation slot error model; genie or blind accounting.
OperatingPoint optimize_operating_point(int n, int k_bits, int ka, int T, double target_eps,
                                        bool genie, int mc_samples, std::uint64_t seed);

}  // namespace uramac::aloha
