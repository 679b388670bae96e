#include "uramac/rng.hpp"

#include <cmath>
#include <numbers>
#include <vector>

namespace uramac {

namespace {

std::uint64_t splitmix64(std::uint64_t& x) {
  x += 0x9e3779b97f4a7c15ull;
  std::uint64_t z = x;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

}  // namespace

Rng::Rng(RngStream s) : base_(s) {
  std::uint64_t x = s.seed;
  std::uint64_t a = splitmix64(x);
  x ^= s.stream_id * 0xda942042e4dd58b5ull + 0x2545f4914f6cdd1dull;
  std::uint64_t b = splitmix64(x);
  mix_ = a ^ (b + 0x9e3779b97f4a7c15ull);
  std::seed_seq seq{std::uint32_t(a), std::uint32_t(a >> 32), std::uint32_t(b),
                    std::uint32_t(b >> 32)};
  eng_.seed(seq);
}

double Rng::uniform() { return double(eng_() >> 11) * 0x1.0p-53; }

double Rng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u1 = uniform();
  while (u1 <= 0.0) u1 = uniform();
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double th = 2.0 * std::numbers::pi * u2;
  spare_ = r * std::sin(th);
  has_spare_ = true;
  return r * std::cos(th);
}

double Rng::gamma(double shape) {
  std::gamma_distribution<double> dist(shape, 1.0);
  return dist(eng_);
}

std::complex<double> Rng::cnormal(double var) {
  const double sd = std::sqrt(var / 2);
  return {sd * normal(), sd * normal()};
}

std::uint64_t Rng::below(std::uint64_t n) {
  // rejection to avoid modulo bias
  const std::uint64_t limit = n * (~0ull / n);
  std::uint64_t v = eng_();
  while (v >= limit) v = eng_();
  return v % n;
}

void Rng::choose(int n, int take, std::vector<int>& out) {
  out.resize(n);
  for (int i = 0; i < n; ++i) out[i] = i;
  const int stop = take < n ? take : n;
  for (int i = 0; i < stop; ++i) {
    const int j = i + int(below(std::uint64_t(n - i)));
    std::swap(out[i], out[j]);
  }
  out.resize(stop);
}

}  // namespace uramac
