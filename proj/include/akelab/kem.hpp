#pragma once

#include <algorithm>
#include <stdexcept>
#include <string>
#include "akelab/bytes.hpp"
#include "akelab/rng.hpp"
#include "akelab/sha256.hpp"

namespace akelab {

/// Functional mock KEM. Secret keys are uniform, public keys are a fixed
/// public expansion of the secret key, and the encapsulated secret is a
/// public mix of (pk, ciphertext). It offers no hardness whatsoever; it
/// exists so that protocol logic, games, and attacks run deterministically
/// at desk scale. Decapsulation failures are injected at rate fail_prob and
/// surface as a wrong (resampled) key rather than an error symbol, which is
/// how correctness is measured.
struct KemScheme {
    std::string name = "mock";
    size_t key_bits = 256;
    size_t pk_bits = 256;
    size_t sk_bits = 256;
    size_t ct_bits = 256;
    double fail_prob = 0.0;

    void validate() const {
        auto mult8 = [](size_t b) { return b > 0 && b % 8 == 0; };
        if (!mult8(key_bits) || !mult8(pk_bits) || !mult8(sk_bits) || !mult8(ct_bits))
            throw std::invalid_argument("KemScheme: lengths must be positive multiples of 8");
        if (fail_prob < 0.0 || fail_prob > 1.0)
            throw std::invalid_argument("KemScheme: fail_prob out of range");
    }

    size_t key_len() const { return key_bits / 8; }
    size_t pk_len() const { return pk_bits / 8; }
    size_t sk_len() const { return sk_bits / 8; }
    size_t ct_len() const { return ct_bits / 8; }
};

struct KemKeyPair {
    Bytes pk;
    Bytes sk;
};

inline Bytes kem_expand_pk(const KemScheme& scheme, const Bytes& sk) {
    return tagged_expand("EXPAND", {sk}, scheme.pk_len());
}

inline KemKeyPair kem_keygen(const KemScheme& scheme, Rng& rng) {
    scheme.validate();
    Bytes sk = rng.bytes(scheme.sk_len());
    return {kem_expand_pk(scheme, sk), sk};
}

inline std::pair<Bytes, Bytes> kem_encaps(const KemScheme& scheme, const Bytes& pk, Rng& rng) {
    if (pk.size() != scheme.pk_len())
        throw std::invalid_argument("kem_encaps: public key length mismatch");
    Bytes ct = rng.bytes(scheme.ct_len());
    Bytes key = tagged_expand("KEMMIX", {pk, ct}, scheme.key_len());
    return {ct, key};
}

/// The mock KEM's encapsulated secret is a public function of (pk, ct);
/// anyone can recompute it. Attacks that assume a broken KEM use this.
inline Bytes kem_public_recompute(const KemScheme& scheme, const Bytes& pk, const Bytes& ct) {
    return tagged_expand("KEMMIX", {pk, ct}, scheme.key_len());
}

inline Bytes kem_decaps(const KemScheme& scheme, const Bytes& sk, const Bytes& ct, Rng& rng) {
    if (sk.size() != scheme.sk_len())
        throw std::invalid_argument("kem_decaps: secret key length mismatch");
    if (ct.size() != scheme.ct_len())
        throw std::invalid_argument("kem_decaps: ciphertext length mismatch");
    Bytes key = tagged_expand("KEMMIX", {kem_expand_pk(scheme, sk), ct}, scheme.key_len());
    if (rng.bernoulli(scheme.fail_prob)) return rng.bytes(scheme.key_len());
    return key;
}

/// Empirical pairwise collision rates over `trials` independent draws:
/// public keys across keypairs, and ciphertexts / encapsulated secrets
/// across encapsulations under one keypair.
struct KemCollisionEstimate {
    double mu_keygen;
    double mu_encaps;
    double mu_secret;
};

namespace detail {

inline double pair_collision_rate(std::vector<Bytes>& samples) {
    std::sort(samples.begin(), samples.end());
    size_t n = samples.size();
    uint64_t colliding_pairs = 0;
    size_t run = 1;
    for (size_t i = 1; i <= n; ++i) {
        if (i < n && samples[i] == samples[i - 1]) {
            ++run;
        } else {
            colliding_pairs += uint64_t(run) * (run - 1) / 2;
            run = 1;
        }
    }
    double total_pairs = double(n) * double(n - 1) / 2.0;
    return double(colliding_pairs) / total_pairs;
}

} // namespace detail

inline KemCollisionEstimate kem_collision_estimate(const KemScheme& scheme, size_t trials,
                                                   Rng& rng) {
    if (trials < 2) throw std::invalid_argument("kem_collision_estimate: trials must be >= 2");
    std::vector<Bytes> pks, cts, keys;
    pks.reserve(trials);
    cts.reserve(trials);
    keys.reserve(trials);
    for (size_t i = 0; i < trials; ++i) pks.push_back(kem_keygen(scheme, rng).pk);
    KemKeyPair pair = kem_keygen(scheme, rng);
    for (size_t i = 0; i < trials; ++i) {
        auto [ct, key] = kem_encaps(scheme, pair.pk, rng);
        cts.push_back(std::move(ct));
        keys.push_back(std::move(key));
    }
    return {detail::pair_collision_rate(pks), detail::pair_collision_rate(cts),
            detail::pair_collision_rate(keys)};
}

} // namespace akelab
