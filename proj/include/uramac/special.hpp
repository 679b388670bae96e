#pragma once

#include <cstddef>
#include <vector>

// Scalar special functions used by the bound evaluators. Everything works in
// natural log unless the name says otherwise.
namespace uramac::special {

// Gaussian Q function and friends.
double q_func(double x);            // P{N(0,1) > x}
double norm_cdf(double x);
double log_norm_cdf(double x);      // accurate for x << -8
double inv_norm_cdf(double p);      // Wichura AS241; p in (0,1)
inline double inv_q(double p) { return -inv_norm_cdf(p); }

// log of binomial coefficients. ln_binom_huge takes ln(N) for N too large to
// represent and uses ln C(N,k) ~ k ln N - ln k!.
double ln_binom(double n, double k);
double ln_binom_huge(double ln_n, int k);

// Regularized incomplete beta I_x(a,b); CDF of Beta(a,b).
double betainc(double a, double b, double x);
// Regularized upper incomplete gamma Q(a,x); chi2 tail: P{chi2(2a*..)}.
double gammaincc(double a, double x);
inline double chi2_sf(double x, double dof) { return gammaincc(dof / 2, x / 2); }

// Noncentral chi-square log CDF / log SF, saddlepoint (Barndorff-Nielsen r*).
// Relative error on the log scale is ~1e-5 for dof >= 100.
double ncx2_logcdf(double x, double dof, double noncentrality);
double ncx2_logsf(double x, double dof, double noncentrality);

// Kolmogorov-Smirnov: asymptotic p-value of sqrt(m)*D and the critical
// statistic at significance alpha for sample size m.
double ks_pvalue(double sqrt_m_times_d);
double ks_critical(double alpha, std::size_t m);

// Entropy / rate helpers.
double h_nat(double p);                       // -p ln p - (1-p) ln(1-p)
double h2_bits(double p);
double scaled_h(double big_n, double x);      // N * h(x/N), stable for huge N
double alpha_fn(double a, double b);          // a ln a - b ln b + b - a

// Fixed-order Gauss-Legendre nodes/weights on [-1,1].
struct QuadRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};
const QuadRule& gauss_legendre(int order);    // cached; order in {8,16,32,64}
// Integrate f on [a,b] with a composite rule of `panels` panels.
template <typename F>
double integrate(F&& f, double a, double b, int panels, int order = 16) {
  const QuadRule& q = gauss_legendre(order);
  double total = 0.0;
  const double h = (b - a) / panels;
  for (int p = 0; p < panels; ++p) {
    const double lo = a + p * h;
    double acc = 0.0;
    for (std::size_t i = 0; i < q.nodes.size(); ++i)
      acc += q.weights[i] * f(lo + 0.5 * h * (q.nodes[i] + 1.0));
    total += acc * 0.5 * h;
  }
  return total;
}

double logsumexp(const double* vals, std::size_t count);
double logsumexp(const std::vector<double>& vals);

}  // namespace uramac::special
