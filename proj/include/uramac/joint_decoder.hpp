#pragma once

#include <array>
#include <optional>
#include <vector>

#include "uramac/channel.hpp"
#include "uramac/gm.hpp"
#include "uramac/ldpc.hpp"

// Alternating BP joint decoder: sequential per-user decoding over the four
// message types with Gaussian-mixture fading posteriors, plus blind detection
// via repeated randomized attempts.
namespace uramac::jointdec {

struct JointDecoderConfig {
  int T = 4;               // max users decodable per slot
  int outer_iters = 25;    // I_O
  int inner_iters = 50;    // I_I (LDPC)
  int attempts = 4;        // independent restarts, union of converged words
  int subset_size = 32;    // functional-node messages multiplied per outer iteration
  gm::GmConfig gm;
  ldpc::BpVariant variant = ldpc::BpVariant::sum_product;
  // A converged codeword is claimed only if adding it to the span of already
  // claimed codewords captures at least this fraction of the residual energy
  // (junk words capture ~1/n1). Negative = auto: min(0.5, 14/(n1 - T)).
  double claim_min_energy_drop = -1.0;
  // Claim only after the same codeword re-emerges on the next visit; spurious
  // convergences are unstable under message-3 resampling.
  bool confirm_claims = true;
  // Test hook: ground-truth fading injection ("known H" curves). When set,
  // fading posteriors are pinned to the truth and never updated.
  std::optional<std::vector<std::complex<double>>> known_fading;
};

struct AttemptOutcome {
  int converged_branches = 0;
  int duplicate_restarts = 0;
  int rejected_claims = 0;
};

struct SlotDecodeResult {
  std::vector<std::vector<std::uint8_t>> codeword_list;  // unique, syndrome-checked
  std::vector<AttemptOutcome> per_attempt;
  int estimated_user_count() const { return int(codeword_list.size()); }
};

struct UserBranchState {
  std::vector<double> llrs;                 // one per symbol, init 0
  gm::GaussianMixture fading_re, fading_im; // init N(0, 1/2)
  std::optional<std::vector<std::uint8_t>> decoded;
  // convergence candidate awaiting confirmation on the next visit
  std::optional<std::vector<std::uint8_t>> candidate;
};

class SlotDecoder {
 public:
  SlotDecoder(const ldpc::ParityCheckMatrix& h, JointDecoderConfig cfg);

  SlotDecodeResult decode_slot(const channel::ComplexSignal& received, double symbol_power,
                               Rng& rng);

  // Exposed for unit tests against grid/closed-form oracles.
  gm::GaussianMixture msg1_functional_to_fading(int node, int user,
                                                const std::vector<UserBranchState>& states,
                                                std::complex<double> y, bool imag_part,
                                                double symbol_power) const;
  gm::GaussianMixture msg2_fading_to_functional(const std::vector<gm::GaussianMixture>& incoming) const;
  double msg3_functional_to_llr(int node, int user,
                                const std::vector<std::vector<std::complex<double>>>& fading_samples,
                                const std::vector<UserBranchState>& states,
                                std::complex<double> y, double symbol_power) const;

  const JointDecoderConfig& config() const { return cfg_; }

 private:
  const ldpc::ParityCheckMatrix& h_;
  JointDecoderConfig cfg_;
  ldpc::BpDecoder bp_;
};

}  // namespace uramac::jointdec
