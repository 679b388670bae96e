#pragma once

#include <vector>

// Asymptotic energy-per-bit curves in the many-user limit K_a = mu * n: the
// projection-decoder achievability, the replica-symmetric optimal-decoder
// prediction, and the Fano / single-user / iid-codebook converses.
namespace uramac::asymp {

struct AsymptoticParams {
  double mu = 0.05;  // user density K_a / n, in (0,1)
  int k_bits = 100;  // log2 M1, payload per user
  double eps = 0.1;  // target PUPE
};

struct BoundResult {
  double energy_linear = 0.0;  // P_tot / (mu * k)
  double energy_db = 0.0;
  bool feasible = true;
};

struct AsymptoticPoint {
  double mu;
  double energy_db;
};

// Theorem-4 achievability: sup over (theta, xi), minimized over the decoded
// fraction nu in (1-eps, 1].
BoundResult ach_theorem4(const AsymptoticParams& p);

// Replica-symmetric optimal decoder on the equivalent scalar channel.
struct ReplicaDetail {
  double sigma2 = 0.0;
  double pupe = 1.0;
  double threshold_radius = 0.0;  // |y|^2 cutoff of the posterior test
  bool flat_minimizer = false;    // objective flat within 1e-9 between separated minima
};
BoundResult replica_optimal(const AsymptoticParams& p);
ReplicaDetail replica_scalar_channel(double p_tot, const AsymptoticParams& p);
// M1 * I(X; X + sqrt(tau) Z) for X = CN(0,1) w.p. 1/M1 else 0 (nats).
double scaled_mutual_information(double tau, double ln_m1);

BoundResult conv_fano(const AsymptoticParams& p);
BoundResult conv_single_user(const AsymptoticParams& p);
inline BoundResult conv(const AsymptoticParams& p) {
  const BoundResult a = conv_fano(p), b = conv_single_user(p);
  return a.energy_linear >= b.energy_linear ? a : b;
}
BoundResult conv_iid(const AsymptoticParams& p);

// Replica-MI building block of the iid converse (exact V and F functions).
double v_fn(double r, double gamma_snr);
double f_fn(double r, double gamma_snr);

}  // namespace uramac::asymp
