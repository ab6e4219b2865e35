#pragma once

#include <map>
#include <stdexcept>
#include "akelab/bytes.hpp"
#include "akelab/rng.hpp"
#include "akelab/sha256.hpp"

namespace akelab {

enum class KdfMode {
    KeyedHash, ///< deterministic tagged-hash derivation
    LazyTable, ///< lazily sampled random function; used by the games
};

/// Three-input key derivation for the handshake. In LazyTable mode the
/// function is a fresh uniform table sampled on demand from its own seeded
/// stream, and query_count tracks how many evaluations were attributed to
/// the adversary (protocol-internal evaluations are not counted). One game
/// instance owns one Kdf; there is no internal locking.
class Kdf {
public:
    Kdf(KdfMode mode, size_t out_bits, uint64_t seed = 0)
        : mode_(mode), out_bits_(out_bits), rng_(seed) {
        if (out_bits == 0 || out_bits % 8 != 0)
            throw std::invalid_argument("Kdf: out_bits must be a positive multiple of 8");
    }

    Bytes eval(const Bytes& k_b, const Bytes& k_a, const Bytes& k_e,
               bool attribute_to_adversary) {
        if (attribute_to_adversary) ++query_count_;
        if (mode_ == KdfMode::KeyedHash)
            return tagged_expand("KDF", {k_b, k_a, k_e}, out_bits_ / 8);
        Bytes input = encode_tuple({k_b, k_a, k_e});
        auto it = table_.find(input);
        if (it == table_.end())
            it = table_.emplace(std::move(input), rng_.bytes(out_bits_ / 8)).first;
        return it->second;
    }

    uint64_t query_count() const { return query_count_; }
    size_t out_bits() const { return out_bits_; }
    KdfMode mode() const { return mode_; }

private:
    KdfMode mode_;
    size_t out_bits_;
    uint64_t query_count_ = 0;
    std::map<Bytes, Bytes> table_;
    Rng rng_;
};

} // namespace akelab
