#include "uramac/ldpc.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <stdexcept>

namespace uramac::ldpc {

ParityCheckMatrix::ParityCheckMatrix(int n, std::vector<std::vector<int>> row_cols)
    : n_(n), rows_(std::move(row_cols)) {
  if (n_ <= 0 || rows_.empty()) throw std::invalid_argument("ParityCheckMatrix: empty");
  cols_.resize(n_);
  for (int j = 0; j < int(rows_.size()); ++j) {
    if (rows_[j].empty()) throw std::invalid_argument("ParityCheckMatrix: empty row");
    for (int v : rows_[j]) {
      if (v < 0 || v >= n_) throw std::invalid_argument("ParityCheckMatrix: column out of range");
      cols_[v].push_back(j);
    }
  }
  for (const auto& c : cols_)
    if (c.empty()) throw std::invalid_argument("ParityCheckMatrix: empty column");
}

bool ParityCheckMatrix::syndrome_ok(std::span<const std::uint8_t> bits) const {
  if (int(bits.size()) != n_) throw std::invalid_argument("syndrome_ok: length mismatch");
  for (const auto& r : rows_) {
    std::uint8_t s = 0;
    for (int v : r) s ^= bits[v];
    if (s) return false;
  }
  return true;
}

ParityCheckMatrix ParityCheckMatrix::load_alist(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw std::runtime_error("alist: cannot open " + file.string());
  auto next_int = [&in, &file]() {
    long long v;
    if (!(in >> v)) throw std::runtime_error("alist: truncated file " + file.string());
    return v;
  };
  const int n = int(next_int()), m = int(next_int());
  if (n <= 0 || m <= 0) throw std::runtime_error("alist: bad dimensions");
  const int cmax = int(next_int()), rmax = int(next_int());
  std::vector<int> cdeg(n), rdeg(m);
  for (auto& d : cdeg) d = int(next_int());
  for (auto& d : rdeg) d = int(next_int());
  for (int d : cdeg)
    if (d <= 0 || d > cmax) throw std::runtime_error("alist: inconsistent column degree");
  for (int d : rdeg)
    if (d <= 0 || d > rmax) throw std::runtime_error("alist: inconsistent row degree");
  std::vector<std::vector<int>> cols(n), rows(m);
  // Entry lists may be zero-padded to cmax/rmax or tight; detect by count.
  std::vector<long long> toks;
  long long v;
  while (in >> v) toks.push_back(v);
  std::size_t need_padded = std::size_t(n) * cmax + std::size_t(m) * rmax;
  std::size_t need_tight = 0;
  for (int d : cdeg) need_tight += d;
  for (int d : rdeg) need_tight += d;
  bool padded;
  if (toks.size() == need_padded)
    padded = true;
  else if (toks.size() == need_tight)
    padded = false;
  else
    throw std::runtime_error("alist: unexpected entry count in " + file.string());
  std::size_t pos = 0;
  for (int c = 0; c < n; ++c) {
    const int lim = padded ? cmax : cdeg[c];
    for (int t = 0; t < lim; ++t) {
      const long long e = toks[pos++];
      if (t < cdeg[c]) {
        if (e < 1 || e > m) throw std::runtime_error("alist: row index out of range");
        cols[c].push_back(int(e - 1));
      } else if (e != 0) {
        throw std::runtime_error("alist: nonzero padding");
      }
    }
  }
  for (int r = 0; r < m; ++r) {
    const int lim = padded ? rmax : rdeg[r];
    for (int t = 0; t < lim; ++t) {
      const long long e = toks[pos++];
      if (t < rdeg[r]) {
        if (e < 1 || e > n) throw std::runtime_error("alist: column index out of range");
        rows[r].push_back(int(e - 1));
      } else if (e != 0) {
        throw std::runtime_error("alist: nonzero padding");
      }
    }
  }
  // cross-check the two adjacency lists
  std::vector<std::vector<int>> rows_from_cols(m);
  for (int c = 0; c < n; ++c)
    for (int r : cols[c]) rows_from_cols[r].push_back(c);
  for (int r = 0; r < m; ++r) {
    auto a = rows[r], b = rows_from_cols[r];
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    if (a != b) throw std::runtime_error("alist: row/column lists disagree");
  }
  return ParityCheckMatrix(n, std::move(rows));
}

void ParityCheckMatrix::save_alist(const std::filesystem::path& file) const {
  std::ofstream out(file);
  if (!out) throw std::runtime_error("alist: cannot write " + file.string());
  const int m = int(rows_.size());
  std::size_t cmax = 0, rmax = 0;
  for (const auto& c : cols_) cmax = std::max(cmax, c.size());
  for (const auto& r : rows_) rmax = std::max(rmax, r.size());
  out << n_ << " " << m << "\n" << cmax << " " << rmax << "\n";
  for (int c = 0; c < n_; ++c) out << cols_[c].size() << (c + 1 < n_ ? " " : "\n");
  for (int r = 0; r < m; ++r) out << rows_[r].size() << (r + 1 < m ? " " : "\n");
  for (const auto& c : cols_) {
    for (std::size_t t = 0; t < cmax; ++t)
      out << (t < c.size() ? c[t] + 1 : 0) << (t + 1 < cmax ? " " : "\n");
  }
  for (const auto& r : rows_) {
    for (std::size_t t = 0; t < rmax; ++t)
      out << (t < r.size() ? r[t] + 1 : 0) << (t + 1 < rmax ? " " : "\n");
  }
}

Encoder::Encoder(const ParityCheckMatrix& h) : n_(h.n()) {
  const int m = h.m();
  const int words = (n_ + 63) / 64;
  std::vector<std::vector<std::uint64_t>> rows(m, std::vector<std::uint64_t>(words, 0));
  for (int j = 0; j < m; ++j)
    for (int v : h.row(j)) rows[j][v >> 6] ^= 1ull << (v & 63);
  // Gaussian elimination, tracking pivot columns.
  std::vector<int> pivot_of_row(m, -1);
  int r = 0;
  for (int c = 0; c < n_ && r < m; ++c) {
    int pr = -1;
    for (int i = r; i < m; ++i)
      if (rows[i][c >> 6] >> (c & 63) & 1) {
        pr = i;
        break;
      }
    if (pr < 0) continue;
    std::swap(rows[r], rows[pr]);
    for (int i = 0; i < m; ++i) {
      if (i != r && (rows[i][c >> 6] >> (c & 63) & 1))
        for (int w = 0; w < words; ++w) rows[i][w] ^= rows[r][w];
    }
    pivot_of_row[r] = c;
    ++r;
  }
  const int rank = r;
  std::vector<char> is_pivot(n_, 0);
  for (int i = 0; i < rank; ++i) {
    parity_positions_.push_back(pivot_of_row[i]);
    is_pivot[pivot_of_row[i]] = 1;
  }
  for (int c = 0; c < n_; ++c)
    if (!is_pivot[c]) message_positions_.push_back(c);
  if (int(message_positions_.size()) != n_ - m)
    throw std::runtime_error("Encoder: rank-deficient parity matrix, k infeasible");
  // Row i of the reduced system: pivot bit = xor of message bits it touches.
  const int k = int(message_positions_.size());
  const int kwords = (k + 63) / 64;
  parity_masks_.assign(rank, std::vector<std::uint64_t>(kwords, 0));
  std::vector<int> msg_index(n_, -1);
  for (int i = 0; i < k; ++i) msg_index[message_positions_[i]] = i;
  for (int i = 0; i < rank; ++i)
    for (int c = 0; c < n_; ++c)
      if (msg_index[c] >= 0 && (rows[i][c >> 6] >> (c & 63) & 1)) {
        const int b = msg_index[c];
        parity_masks_[i][b >> 6] ^= 1ull << (b & 63);
      }
}

std::vector<std::uint8_t> Encoder::encode(std::span<const std::uint8_t> message) const {
  if (int(message.size()) != k()) throw std::invalid_argument("encode: message length mismatch");
  const int kwords = (k() + 63) / 64;
  std::vector<std::uint64_t> mw(kwords, 0);
  for (int i = 0; i < k(); ++i)
    if (message[i]) mw[i >> 6] ^= 1ull << (i & 63);
  std::vector<std::uint8_t> cw(n_, 0);
  for (int i = 0; i < k(); ++i) cw[message_positions_[i]] = message[i];
  for (std::size_t p = 0; p < parity_positions_.size(); ++p) {
    std::uint64_t acc = 0;
    for (int w = 0; w < kwords; ++w) acc ^= parity_masks_[p][w] & mw[w];
    cw[parity_positions_[p]] = std::uint8_t(std::popcount(acc) & 1);
  }
  return cw;
}

std::vector<std::uint8_t> Encoder::extract_message(std::span<const std::uint8_t> codeword) const {
  if (int(codeword.size()) != n_) throw std::invalid_argument("extract_message: length mismatch");
  std::vector<std::uint8_t> msg(k());
  for (int i = 0; i < k(); ++i) msg[i] = codeword[message_positions_[i]];
  return msg;
}

channel::ComplexSignal bpsk_map(std::span<const std::uint8_t> bits, double power) {
  const double a = std::sqrt(power);
  channel::ComplexSignal s(bits.size());
  for (std::size_t i = 0; i < bits.size(); ++i) s[i] = {bits[i] ? -a : a, 0.0};
  return s;
}

BpDecoder::BpDecoder(const ParityCheckMatrix& h) : h_(h) {
  row_offset_.reserve(h.m() + 1);
  row_offset_.push_back(0);
  for (int j = 0; j < h.m(); ++j) {
    for (int v : h.row(j)) edge_col_.push_back(v);
    row_offset_.push_back(int(edge_col_.size()));
  }
  r_msg_.resize(edge_col_.size());
  q_msg_.resize(edge_col_.size());
  std::size_t dmax = 0;
  for (int j = 0; j < h.m(); ++j) dmax = std::max(dmax, h.row(j).size());
  fwd_.resize(dmax + 1);
  bwd_.resize(dmax + 1);
  post_.resize(h.n());
}

DecodeOutcome BpDecoder::decode(std::span<const double> llr, int max_iters, BpVariant variant,
                                bool early_exit) {
  if (int(llr.size()) != h_.n()) throw std::invalid_argument("bp_decode: LLR length mismatch");
  if (max_iters < 1) throw std::invalid_argument("bp_decode: max_iters must be >= 1");
  const int n = h_.n(), m = h_.m();
  std::fill(r_msg_.begin(), r_msg_.end(), 0.0);
  for (int i = 0; i < n; ++i) post_[i] = std::clamp(llr[i], -kLlrClamp, kLlrClamp);

  DecodeOutcome out;
  out.bits.resize(n);
  auto hard_ok = [&]() {
    for (int i = 0; i < n; ++i) out.bits[i] = post_[i] < 0 ? 1 : 0;
    return h_.syndrome_ok(out.bits);
  };
  int used = 0;
  bool converged = false;
  for (int it = 0; it < max_iters && !converged; ++it) {
    ++used;
    for (int j = 0; j < m; ++j) {
      const int lo = row_offset_[j], hi = row_offset_[j + 1], deg = hi - lo;
      if (variant == BpVariant::sum_product) {
        // forward/backward products of tanh(q/2)
        fwd_[0] = 1.0;
        for (int e = 0; e < deg; ++e) {
          const double q = std::clamp(post_[edge_col_[lo + e]] - r_msg_[lo + e], -kLlrClamp, kLlrClamp);
          q_msg_[lo + e] = std::tanh(0.5 * q);
          fwd_[e + 1] = fwd_[e] * q_msg_[lo + e];
        }
        bwd_[deg] = 1.0;
        for (int e = deg - 1; e >= 0; --e) bwd_[e] = bwd_[e + 1] * q_msg_[lo + e];
        for (int e = 0; e < deg; ++e) {
          double t = fwd_[e] * bwd_[e + 1];
          t = std::clamp(t, -0.999999999999999, 0.999999999999999);
          r_msg_[lo + e] = 2.0 * std::atanh(t);
        }
      } else {
        double min1 = 1e308, min2 = 1e308;
        int argmin = -1, sign = 0;
        for (int e = 0; e < deg; ++e) {
          const double q = post_[edge_col_[lo + e]] - r_msg_[lo + e];
          q_msg_[lo + e] = q;
          const double a = std::abs(q);
          if (q < 0) sign ^= 1;
          if (a < min1) {
            min2 = min1;
            min1 = a;
            argmin = e;
          } else if (a < min2) {
            min2 = a;
          }
        }
        for (int e = 0; e < deg; ++e) {
          const int s = sign ^ (q_msg_[lo + e] < 0 ? 1 : 0);
          const double mag = (e == argmin) ? min2 : min1;
          r_msg_[lo + e] = (s ? -1.0 : 1.0) * mag;
        }
      }
    }
    for (int i = 0; i < n; ++i) post_[i] = std::clamp(llr[i], -kLlrClamp, kLlrClamp);
    for (int j = 0; j < m; ++j)
      for (int e = row_offset_[j]; e < row_offset_[j + 1]; ++e) post_[edge_col_[e]] += r_msg_[e];
    for (int i = 0; i < n; ++i) post_[i] = std::clamp(post_[i], -kLlrClamp, kLlrClamp);
    converged = hard_ok() && (early_exit || it + 1 == max_iters);
  }
  if (!early_exit) converged = hard_ok();
  out.converged = converged;
  out.iterations_used = used;
  out.post_llrs = post_;
  return out;
}

}  // namespace uramac::ldpc
