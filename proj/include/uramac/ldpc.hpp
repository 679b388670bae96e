#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "uramac/channel.hpp"

// Binary LDPC codes: alist IO, systematic encoding, BPSK mapping and
// flooding-schedule BP decoding.
//
// LLR convention used throughout the project: positive LLR favors bit 0,
// i.e. the +sqrt(P) symbol. bpsk_map sends 0 -> +sqrt(P), 1 -> -sqrt(P).
namespace uramac::ldpc {

class ParityCheckMatrix {
 public:
  ParityCheckMatrix(int n, std::vector<std::vector<int>> row_cols);

  int n() const { return n_; }
  int m() const { return int(rows_.size()); }
  const std::vector<int>& row(int j) const { return rows_[j]; }
  const std::vector<int>& col(int v) const { return cols_[v]; }
  const std::vector<std::vector<int>>& rows() const { return rows_; }

  bool syndrome_ok(std::span<const std::uint8_t> bits) const;

  static ParityCheckMatrix load_alist(const std::filesystem::path& file);
  void save_alist(const std::filesystem::path& file) const;

 private:
  int n_;
  std::vector<std::vector<int>> rows_;  // check -> variables
  std::vector<std::vector<int>> cols_;  // variable -> checks
};

// Systematic encoder built by GF(2) elimination. Throws std::runtime_error if
// the matrix rank leaves fewer than n - m free positions (k infeasible).
class Encoder {
 public:
  explicit Encoder(const ParityCheckMatrix& h);

  int n() const { return n_; }
  int k() const { return int(message_positions_.size()); }
  const std::vector<int>& message_positions() const { return message_positions_; }

  std::vector<std::uint8_t> encode(std::span<const std::uint8_t> message) const;
  std::vector<std::uint8_t> extract_message(std::span<const std::uint8_t> codeword) const;

 private:
  int n_;
  std::vector<int> message_positions_;           // free columns
  std::vector<int> parity_positions_;            // pivot columns
  std::vector<std::vector<std::uint64_t>> parity_masks_;  // per parity bit, over message words
};

channel::ComplexSignal bpsk_map(std::span<const std::uint8_t> bits, double power);

enum class BpVariant { sum_product, min_sum };

struct DecodeOutcome {
  std::vector<std::uint8_t> bits;
  bool converged = false;
  int iterations_used = 0;
  std::vector<double> post_llrs;  // clamped posterior LLRs, reused by the joint decoder
};

// One decoder instance per thread; owns its message buffers.
class BpDecoder {
 public:
  explicit BpDecoder(const ParityCheckMatrix& h);

  DecodeOutcome decode(std::span<const double> llr, int max_iters,
                       BpVariant variant = BpVariant::sum_product, bool early_exit = true);

  static constexpr double kLlrClamp = 30.0;

 private:
  const ParityCheckMatrix& h_;
  // CSR-style edge layout
  std::vector<int> row_offset_, edge_col_;
  std::vector<double> r_msg_, q_msg_, fwd_, bwd_;
  std::vector<double> post_;
};

}  // namespace uramac::ldpc
