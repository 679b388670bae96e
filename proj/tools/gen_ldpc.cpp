// Progressive-edge-growth LDPC constructor for the shipped parity matrices.
// Regular variable degree; each edge goes to the most distant check (BFS on
// the current graph), ties broken by the lowest check degree.
#include <algorithm>
#include <cstdio>
#include <queue>
#include <string>
#include <vector>

#include "uramac/ldpc.hpp"
#include "uramac/rng.hpp"

namespace {

std::vector<std::vector<int>> peg(int n, int m, int dv, std::uint64_t seed) {
  uramac::Rng rng(seed, 0);
  std::vector<std::vector<int>> rows(m), cols(n);
  std::vector<int> deg(m, 0);
  std::vector<int> order(n);
  for (int i = 0; i < n; ++i) order[i] = i;
  for (int i = n - 1; i > 0; --i) std::swap(order[i], order[rng.below(i + 1)]);

  std::vector<int> dist(m);
  std::vector<char> vseen(n);
  for (int v : order) {
    for (int e = 0; e < dv; ++e) {
      // BFS over the bipartite graph from variable v
      std::fill(dist.begin(), dist.end(), -1);
      std::fill(vseen.begin(), vseen.end(), 0);
      vseen[v] = 1;
      std::queue<int> qc;
      for (int c : cols[v])
        if (dist[c] < 0) {
          dist[c] = 0;
          qc.push(c);
        }
      while (!qc.empty()) {
        const int c = qc.front();
        qc.pop();
        for (int v2 : rows[c]) {
          if (vseen[v2]) continue;
          vseen[v2] = 1;
          for (int c2 : cols[v2])
            if (dist[c2] < 0) {
              dist[c2] = dist[c] + 1;
              qc.push(c2);
            }
        }
      }
      int far = -2;  // prefer unreached checks (dist -1 treated as infinity)
      for (int c = 0; c < m; ++c) {
        const int d = dist[c] < 0 ? 1 << 28 : dist[c];
        far = std::max(far, d);
      }
      int best = -1;
      for (int c = 0; c < m; ++c) {
        const int d = dist[c] < 0 ? 1 << 28 : dist[c];
        if (d != far) continue;
        if (std::find(rows[c].begin(), rows[c].end(), v) != rows[c].end()) continue;
        if (best < 0 || deg[c] < deg[best]) best = c;
      }
      if (best < 0) continue;  // pathological; variable keeps a lower degree
      rows[best].push_back(v);
      cols[v].push_back(best);
      ++deg[best];
    }
  }
  return rows;
}

// Under BPSK with an unknown complex gain, (h, x) and (-h, complement x) give
// the same received law, so codewords near the complement of a transmitted
// word become undetectable sign-flip errors. With every check degree odd, a
// word within d of any complement needs d >= m / dv_max flips to satisfy the
// all-ones syndrome, which pushes those words far away.
void make_all_rows_odd(std::vector<std::vector<int>>& rows, int n) {
  std::vector<int> coldeg(n, 0);
  for (const auto& r : rows)
    for (int v : r) ++coldeg[v];
  for (auto& r : rows) {
    if (r.size() % 2 == 1) continue;
    int best = -1;
    for (int v = 0; v < n; ++v) {
      if (std::find(r.begin(), r.end(), v) != r.end()) continue;
      if (best < 0 || coldeg[v] < coldeg[best]) best = v;
    }
    r.push_back(best);
    ++coldeg[best];
  }
}

bool complement_free(const std::vector<std::vector<int>>& rows) {
  for (const auto& r : rows)
    if (r.size() % 2 == 0) return false;
  return true;
}

bool full_rank_k(const std::vector<std::vector<int>>& rows, int n) {
  try {
    uramac::ldpc::ParityCheckMatrix h(n, rows);
    uramac::ldpc::Encoder enc(h);
    return enc.k() == n - h.m();
  } catch (...) {
    return false;
  }
}

}  // namespace

int main(int argc, char** argv) {
  if (argc != 5 && argc != 6) {
    std::fprintf(stderr, "usage: gen_ldpc <n> <m> <dv> <out.alist> [seed]\n");
    return 1;
  }
  const int n = std::atoi(argv[1]);
  const int m = std::atoi(argv[2]);
  const int dv = std::atoi(argv[3]);
  const std::string out = argv[4];
  std::uint64_t seed = argc == 6 ? std::strtoull(argv[5], nullptr, 10) : 1;

  for (int attempt = 0; attempt < 64; ++attempt) {
    auto rows = peg(n, m, dv, seed + attempt);
    make_all_rows_odd(rows, n);
    if (!complement_free(rows)) continue;
    if (!full_rank_k(rows, n)) continue;
    uramac::ldpc::ParityCheckMatrix h(n, rows);
    std::vector<std::uint8_t> ones(n, 1);
    if (h.syndrome_ok(ones)) continue;  // all-ones must not be a codeword
    h.save_alist(out);
    std::printf("wrote %s: n=%d m=%d dv=%d seed=%llu\n", out.c_str(), n, m, dv,
                (unsigned long long)(seed + attempt));
    return 0;
  }
  std::fprintf(stderr, "gen_ldpc: no full-rank construction found\n");
  return 1;
}
