#include "uramac/channel.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace uramac::channel {

double energy(const ComplexSignal& s) {
  double e = 0.0;
  for (const auto& v : s) e += std::norm(v);
  return e;
}

std::vector<double> FadingDraw::powers() const {
  std::vector<double> p(coefficients.size());
  for (std::size_t i = 0; i < p.size(); ++i) p[i] = std::norm(coefficients[i]);
  return p;
}

FadingDraw draw_fading(int count, Rng& rng) {
  FadingDraw d;
  d.coefficients.resize(count);
  for (auto& h : d.coefficients) h = rng.cnormal(1.0);
  return d;
}

Codebook generate_codebook(int M, int n1, double power, double design_power,
                           CodebookKind kind, Rng& rng) {
  if (M <= 0 || n1 <= 0) throw std::invalid_argument("generate_codebook: M and n1 must be positive");
  if (kind == CodebookKind::gaussian) {
    if (!(design_power > 0) || design_power > power)
      throw std::invalid_argument("generate_codebook: need 0 < P' <= P for gaussian");
  } else if (design_power != power) {
    throw std::invalid_argument("generate_codebook: spherical requires P' = P");
  }
  Codebook cb{{}, power, design_power, kind, 0};
  cb.codewords.resize(M);
  const double cap = double(n1) * power;
  for (auto& c : cb.codewords) {
    c.resize(n1);
    for (auto& v : c) v = rng.cnormal(design_power);
    if (kind == CodebookKind::spherical) {
      const double scale = std::sqrt(cap / energy(c));
      for (auto& v : c) v *= scale;
    } else if (energy(c) > cap) {
      for (auto& v : c) v = 0.0;  // clipped user sends nothing
      ++cb.clipped_count;
    }
  }
  return cb;
}

ComplexSignal transmit(std::span<const ComplexSignal> codewords, const FadingDraw& fading,
                       bool noise_on, Rng& rng) {
  if (codewords.size() != fading.coefficients.size())
    throw std::invalid_argument("transmit: one fading coefficient per codeword required");
  std::size_t n = 0;
  for (const auto& c : codewords) {
    if (n == 0) n = c.size();
    if (c.size() != n) throw std::invalid_argument("transmit: codeword length mismatch");
  }
  ComplexSignal y(n, {0.0, 0.0});
  for (std::size_t u = 0; u < codewords.size(); ++u) {
    const auto h = fading.coefficients[u];
    for (std::size_t i = 0; i < n; ++i) y[i] += h * codewords[u][i];
  }
  if (noise_on)
    for (auto& v : y) v += rng.cnormal(1.0);
  return y;
}

EbN0 energy_per_bit(int n, double power, int k) {
  if (n <= 0 || k <= 0) throw std::invalid_argument("energy_per_bit: n and k must be positive");
  if (power < 0) throw std::invalid_argument("energy_per_bit: negative power");
  const double lin = double(n) * power / double(k);
  const double db = lin > 0 ? 10.0 * std::log10(lin) : -std::numeric_limits<double>::infinity();
  return {lin, db};
}

double ebno_db_to_power(int n, double ebno_db, int k) {
  return double(k) * std::pow(10.0, ebno_db / 10.0) / double(n);
}

double projection_energy(const ComplexSignal& y, std::span<const ComplexSignal> basis_vectors) {
  if (basis_vectors.empty()) return 0.0;
  const std::size_t n = y.size();
  std::vector<ComplexSignal> q;
  q.reserve(basis_vectors.size());
  for (const auto& v : basis_vectors) {
    ComplexSignal w = v;
    for (int pass = 0; pass < 2; ++pass) {
      for (const auto& b : q) {
        std::complex<double> dot{0, 0};
        for (std::size_t i = 0; i < n; ++i) dot += std::conj(b[i]) * w[i];
        for (std::size_t i = 0; i < n; ++i) w[i] -= dot * b[i];
      }
    }
    const double e = energy(w);
    if (e < 1e-24) continue;  // dependent vector spans nothing new
    const double inv = 1.0 / std::sqrt(e);
    for (auto& x : w) x *= inv;
    q.push_back(std::move(w));
  }
  double captured = 0.0;
  for (const auto& b : q) {
    std::complex<double> dot{0, 0};
    for (std::size_t i = 0; i < n; ++i) dot += std::conj(b[i]) * y[i];
    captured += std::norm(dot);
  }
  return captured;
}

}  // namespace uramac::channel
