#pragma once

#include <cmath>
#include <stdexcept>

namespace akelab {

/// Inputs for the computational-side advantage bound. Advantage terms for
/// the reduction adversaries are supplied by the caller; collision rates can
/// come from kem_collision_estimate.
struct PqcBoundParams {
    double n_sessions = 0;
    double n_parties = 0;
    double kdf_queries = 0;
    double delta_eph = 0;
    double delta_stat = 0;
    double adv_cpa_eph = 0;    // passive advantage against the ephemeral KEM
    double adv_cca_stat = 0;   // active advantage against the static KEM (matched sessions)
    double adv_cca_stat2 = 0;  // active advantage against the static KEM (unmatched sessions)
    double adv_mac_pqc = 0;    // one-time forgery advantage against the PQC MAC
    double mu_encaps = 0;
    double mu_secret = 0;
    double len_eph_bits = 256;
    double len_stat_bits = 256;
};

/// Closed-form advantage bound for a computationally bounded adversary, in
/// terms of the component KEM/MAC advantages, decapsulation failure rates,
/// collision rates, and derivation-query count.
inline double pqc_bound(const PqcBoundParams& p) {
    double ns = p.n_sessions, np = p.n_parties, qh = p.kdf_queries;
    double inv_sqrt_eph = std::exp2(-p.len_eph_bits / 2.0);
    double inv_sqrt_stat = std::exp2(-p.len_stat_bits / 2.0);
    double term1 = 2.0 * ns * ns * (p.delta_eph + p.adv_cpa_eph + 2.0 * qh * inv_sqrt_eph);
    double term2 = 2.0 * ns * ns * np * (p.delta_stat + p.adv_cca_stat + 2.0 * qh * inv_sqrt_stat);
    double term3 = 2.0 * ns * p.mu_encaps;
    double term4 = 8.0 * ns * np *
                   (p.delta_stat + p.adv_cca_stat2 + ns * ns * p.mu_secret +
                    ns * 2.0 * qh * inv_sqrt_stat + ns * p.adv_mac_pqc);
    return term1 + term2 + term3 + term4;
}

/// Advantage bound for an unbounded adversary when QKD is sound: driven by
/// decapsulation failures and the one-time MAC forgery bound.
inline double qkd_bound(double n_sessions, double delta_stat, double delta_eph,
                        double adv_mac_qkd) {
    return 2.0 * n_sessions * (n_sessions * (2.0 * delta_stat + delta_eph) + adv_mac_qkd);
}

/// Honest matched sessions disagree on the key with probability at most
/// delta_eph + 2*delta_stat (one ephemeral and two static decapsulations).
inline double correctness_bound(double delta_eph, double delta_stat) {
    return delta_eph + 2.0 * delta_stat;
}

} // namespace akelab
