#pragma once

#include <stdexcept>
#include <utility>
#include <vector>

#include "uramac/rng.hpp"

// One-dimensional Gaussian mixtures for fading-coefficient posteriors.
// Weights live in the log domain; normalize() makes them sum to one.
namespace uramac::gm {

struct GaussianComponent {
  double log_weight;
  double mean;
  double var;  // > 0
};

struct GaussianMixture {
  std::vector<GaussianComponent> comps;
  bool normalized = false;

  int size() const { return int(comps.size()); }
  double pdf(double x) const;
  double log_pdf(double x) const;
};

struct GmConfig {
  int max_components = 500;       // hard cap after merge
  double merge_distance = 1.0;    // d = (mu1-mu2)^2 / sigma1^2 threshold
  double prune_cum_weight = 1e-3; // max cumulative weight dropped at prune
  int sample_count = 20;
};

struct DegenerateProduct : std::runtime_error {
  DegenerateProduct() : std::runtime_error("gm: product carries no weight") {}
};

GaussianMixture make(std::vector<GaussianComponent> comps);
GaussianMixture single(double mean, double var);
GaussianMixture normalize(GaussianMixture a);

GaussianMixture convolve(const GaussianMixture& a, const GaussianMixture& b);
GaussianMixture multiply(const GaussianMixture& a, const GaussianMixture& b);  // throws DegenerateProduct
GaussianMixture affine(const GaussianMixture& a, double scale, double shift);
// 2v components: +scale branch weighted p_plus, -scale branch weighted 1-p_plus.
GaussianMixture mix_binary(const GaussianMixture& a, double p_plus, double scale);

GaussianMixture prune(GaussianMixture a, const GmConfig& cfg);
GaussianMixture merge(GaussianMixture a, const GmConfig& cfg);
inline GaussianMixture reduce(GaussianMixture a, const GmConfig& cfg) {
  return merge(prune(std::move(a), cfg), cfg);
}

std::pair<double, double> moments(const GaussianMixture& a);  // mean, variance
double sample(const GaussianMixture& a, Rng& rng);
std::vector<double> sample(const GaussianMixture& a, int count, Rng& rng);

}  // namespace uramac::gm
