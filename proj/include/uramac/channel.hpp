#pragma once

#include <complex>
#include <span>
#include <vector>

#include "uramac/rng.hpp"

// Complex-baseband model of the quasi-static Rayleigh-fading random-access
// channel: codebooks, fading draws, superposition, energy accounting.
namespace uramac::channel {

using ComplexSignal = std::vector<std::complex<double>>;

double energy(const ComplexSignal& s);

struct FadingDraw {
  std::vector<std::complex<double>> coefficients;  // iid CN(0,1)
  std::vector<double> powers() const;              // |H_i|^2
};

FadingDraw draw_fading(int count, Rng& rng);

enum class CodebookKind { gaussian, spherical };

struct Codebook {
  std::vector<ComplexSignal> codewords;
  double power_budget;   // P: per-symbol max (||c||^2 <= n P)
  double design_power;   // P': generation variance per symbol
  CodebookKind kind;
  int clipped_count = 0; // gaussian codewords replaced by zero
};

// Gaussian: iid CN(0, P') entries, clipped codewords stored as all-zero.
// Spherical: uniform on the complex shell ||c||^2 = n1 * power exactly.
Codebook generate_codebook(int M, int n1, double power, double design_power,
                           CodebookKind kind, Rng& rng);

// Y = sum_i H_i X_i + Z, Z iid CN(0,1) when noise_on.
ComplexSignal transmit(std::span<const ComplexSignal> codewords, const FadingDraw& fading,
                       bool noise_on, Rng& rng);

struct EbN0 {
  double linear;
  double db;
};

// nP/k; the zero-power point reports -inf dB.
EbN0 energy_per_bit(int n, double power, int k);
double ebno_db_to_power(int n, double ebno_db, int k);

// ||P_span(V) y||^2 by modified Gram-Schmidt with one reorthogonalization pass.
double projection_energy(const ComplexSignal& y, std::span<const ComplexSignal> basis_vectors);

}  // namespace uramac::channel
