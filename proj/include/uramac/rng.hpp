#pragma once

#include <complex>
#include <cstdint>
#include <random>
#include <vector>

namespace uramac {

// (seed, stream_id) identifies an independent substream; the same pair always
// reproduces the same draws. Trials/slots/attempts get distinct stream ids.
struct RngStream {
  std::uint64_t seed = 0;
  std::uint64_t stream_id = 0;
};

class Rng {
 public:
  explicit Rng(RngStream s);
  Rng(std::uint64_t seed, std::uint64_t stream_id) : Rng(RngStream{seed, stream_id}) {}

  std::uint64_t bits() { return eng_(); }
  double uniform();                       // [0,1)
  double normal();                        // N(0,1), Box-Muller
  double normal(double mean, double sd) { return mean + sd * normal(); }
  double exponential() { return -std::log1p(-uniform()); }  // mean 1
  double gamma(double shape);                               // Gamma(shape, 1)
  std::complex<double> cnormal(double var = 1.0);           // CN(0,var)
  std::uint64_t below(std::uint64_t n);   // uniform in [0,n)
  // Fisher-Yates shuffle of [0,n) indices into out (first `take` entries valid).
  void choose(int n, int take, std::vector<int>& out);

  // Derive an independent child stream (e.g. per attempt inside a trial).
  Rng child(std::uint64_t tag) const { return Rng(base_.seed, mix_ ^ tag); }

 private:
  RngStream base_;
  std::uint64_t mix_;
  std::mt19937_64 eng_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace uramac
