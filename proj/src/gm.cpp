#include "uramac/gm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "uramac/special.hpp"

namespace uramac::gm {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double total_log_weight(const GaussianMixture& a) {
  double m = kNegInf;
  for (const auto& c : a.comps) m = std::max(m, c.log_weight);
  if (!std::isfinite(m)) return m;
  double s = 0.0;
  for (const auto& c : a.comps) s += std::exp(c.log_weight - m);
  return m + std::log(s);
}
}  // namespace

double GaussianMixture::pdf(double x) const {
  double acc = 0.0;
  for (const auto& c : comps)
    acc += std::exp(c.log_weight - 0.5 * (x - c.mean) * (x - c.mean) / c.var) /
           std::sqrt(2 * std::numbers::pi * c.var);
  return acc;
}

double GaussianMixture::log_pdf(double x) const {
  double m = kNegInf;
  for (const auto& c : comps) {
    const double lv = c.log_weight - 0.5 * (x - c.mean) * (x - c.mean) / c.var -
                      0.5 * std::log(2 * std::numbers::pi * c.var);
    m = std::max(m, lv);
  }
  if (!std::isfinite(m)) return kNegInf;
  double s = 0.0;
  for (const auto& c : comps)
    s += std::exp(c.log_weight - 0.5 * (x - c.mean) * (x - c.mean) / c.var -
                  0.5 * std::log(2 * std::numbers::pi * c.var) - m);
  return m + std::log(s);
}

GaussianMixture make(std::vector<GaussianComponent> comps) {
  if (comps.empty()) throw std::invalid_argument("gm: empty mixture");
  for (const auto& c : comps)
    if (!(c.var > 0) || !std::isfinite(c.log_weight))
      throw std::invalid_argument("gm: bad component");
  return normalize(GaussianMixture{std::move(comps), false});
}

GaussianMixture single(double mean, double var) {
  return {{{0.0, mean, var}}, true};
}

GaussianMixture normalize(GaussianMixture a) {
  const double tot = total_log_weight(a);
  if (!std::isfinite(tot)) throw DegenerateProduct();
  for (auto& c : a.comps) c.log_weight -= tot;
  a.normalized = true;
  return a;
}

GaussianMixture convolve(const GaussianMixture& a, const GaussianMixture& b) {
  GaussianMixture out;
  out.comps.reserve(a.comps.size() * b.comps.size());
  for (const auto& ca : a.comps)
    for (const auto& cb : b.comps)
      out.comps.push_back({ca.log_weight + cb.log_weight, ca.mean + cb.mean, ca.var + cb.var});
  out.normalized = a.normalized && b.normalized;
  return out;
}

GaussianMixture multiply(const GaussianMixture& a, const GaussianMixture& b) {
  GaussianMixture out;
  out.comps.reserve(a.comps.size() * b.comps.size());
  for (const auto& ca : a.comps)
    for (const auto& cb : b.comps) {
      const double s = ca.var + cb.var;
      const double lw = ca.log_weight + cb.log_weight -
                        0.5 * std::log(2 * std::numbers::pi * s) -
                        (ca.mean - cb.mean) * (ca.mean - cb.mean) / (2 * s);
      const double v = ca.var * cb.var / s;
      const double mu = v * (ca.mean / ca.var + cb.mean / cb.var);
      out.comps.push_back({lw, mu, v});
    }
  return normalize(std::move(out));
}

GaussianMixture affine(const GaussianMixture& a, double scale, double shift) {
  if (scale == 0.0) throw std::invalid_argument("gm::affine: zero scale");
  GaussianMixture out = a;
  for (auto& c : out.comps) {
    c.mean = scale * c.mean + shift;
    c.var = scale * scale * c.var;
  }
  return out;
}

GaussianMixture mix_binary(const GaussianMixture& a, double p_plus, double scale) {
  if (p_plus < 0 || p_plus > 1) throw std::invalid_argument("gm::mix_binary: bad probability");
  const double lp = p_plus > 0 ? std::log(p_plus) : kNegInf;
  const double lm = p_plus < 1 ? std::log1p(-p_plus) : kNegInf;
  GaussianMixture out;
  out.comps.reserve(2 * a.comps.size());
  for (const auto& c : a.comps)
    if (std::isfinite(lp))
      out.comps.push_back({c.log_weight + lp, scale * c.mean, scale * scale * c.var});
  for (const auto& c : a.comps)
    if (std::isfinite(lm))
      out.comps.push_back({c.log_weight + lm, -scale * c.mean, scale * scale * c.var});
  out.normalized = a.normalized;
  return out;
}

GaussianMixture prune(GaussianMixture a, const GmConfig& cfg) {
  if (!a.normalized) a = normalize(std::move(a));
  if (a.comps.size() <= 1 || cfg.prune_cum_weight <= 0) return a;
  std::sort(a.comps.begin(), a.comps.end(),
            [](const auto& x, const auto& y) { return x.log_weight < y.log_weight; });
  double cum = 0.0;
  std::size_t drop = 0;
  while (drop + 1 < a.comps.size()) {
    const double next = cum + std::exp(a.comps[drop].log_weight);
    if (next >= cfg.prune_cum_weight) break;
    cum = next;
    ++drop;
  }
  a.comps.erase(a.comps.begin(), a.comps.begin() + drop);
  return normalize(std::move(a));
}

GaussianMixture merge(GaussianMixture a, const GmConfig& cfg) {
  if (!a.normalized) a = normalize(std::move(a));
  std::sort(a.comps.begin(), a.comps.end(),
            [](const auto& x, const auto& y) { return x.log_weight > y.log_weight; });
  const std::size_t n = a.comps.size();
  std::vector<char> used(n, 0);
  std::vector<GaussianComponent> out;
  out.reserve(n);
  std::vector<std::size_t> list;
  for (std::size_t i = 0; i < n; ++i) {
    if (used[i]) continue;
    used[i] = 1;
    list.clear();
    list.push_back(i);
    const double mu_i = a.comps[i].mean, var_i = a.comps[i].var;
    for (std::size_t j = i + 1; j < n; ++j) {
      if (used[j]) continue;
      const double d = (mu_i - a.comps[j].mean) * (mu_i - a.comps[j].mean) / var_i;
      if (d <= cfg.merge_distance) {
        used[j] = 1;
        list.push_back(j);
      }
    }
    if (list.size() == 1) {
      out.push_back(a.comps[i]);
      continue;
    }
    // moment matching on the merge list
    double wmax = kNegInf;
    for (auto j : list) wmax = std::max(wmax, a.comps[j].log_weight);
    double wsum = 0.0, msum = 0.0;
    for (auto j : list) {
      const double w = std::exp(a.comps[j].log_weight - wmax);
      wsum += w;
      msum += w * a.comps[j].mean;
    }
    const double mu = msum / wsum;
    double vsum = 0.0;
    for (auto j : list) {
      const double w = std::exp(a.comps[j].log_weight - wmax);
      vsum += w * (a.comps[j].var + (a.comps[j].mean - mu) * (a.comps[j].mean - mu));
    }
    out.push_back({wmax + std::log(wsum), mu, vsum / wsum});
  }
  std::sort(out.begin(), out.end(),
            [](const auto& x, const auto& y) { return x.log_weight > y.log_weight; });
  if (int(out.size()) > cfg.max_components) out.resize(cfg.max_components);
  return normalize(GaussianMixture{std::move(out), false});
}

std::pair<double, double> moments(const GaussianMixture& a) {
  double mean = 0.0;
  for (const auto& c : a.comps) mean += std::exp(c.log_weight) * c.mean;
  double var = 0.0;
  for (const auto& c : a.comps)
    var += std::exp(c.log_weight) * (c.var + (c.mean - mean) * (c.mean - mean));
  return {mean, var};
}

double sample(const GaussianMixture& a, Rng& rng) {
  double u = rng.uniform();
  std::size_t pick = a.comps.size() - 1;
  for (std::size_t i = 0; i < a.comps.size(); ++i) {
    u -= std::exp(a.comps[i].log_weight);
    if (u <= 0) {
      pick = i;
      break;
    }
  }
  return rng.normal(a.comps[pick].mean, std::sqrt(a.comps[pick].var));
}

std::vector<double> sample(const GaussianMixture& a, int count, Rng& rng) {
  std::vector<double> out(count);
  for (int i = 0; i < count; ++i) out[i] = sample(a, rng);
  return out;
}

}  // namespace uramac::gm
