#pragma once

#include <cstdint>
#include "akelab/bytes.hpp"

namespace akelab {

/// Deterministic 64-bit-seeded generator (splitmix64). Every random choice in
/// the library flows through one of these; there is no ambient entropy.
/// Each owner keeps its own instance, so streams never interleave across
/// threads or game instances.
class Rng {
public:
    explicit Rng(uint64_t seed) : state_(seed) {}

    uint64_t next_u64() {
        state_ += 0x9E3779B97F4A7C15ULL;
        uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    Bytes bytes(size_t n) {
        Bytes out(n);
        size_t i = 0;
        while (i < n) {
            uint64_t w = next_u64();
            for (int k = 0; k < 8 && i < n; ++k, ++i) out[i] = uint8_t(w >> (8 * k));
        }
        return out;
    }

    /// Uniform in [0, bound). bound must be > 0.
    uint64_t below(uint64_t bound) {
        // Rejection sampling keeps the distribution exactly uniform.
        uint64_t limit = bound * (UINT64_MAX / bound);
        uint64_t v;
        do { v = next_u64(); } while (v >= limit);
        return v % bound;
    }

    /// Uniform double in [0, 1) with 53-bit precision.
    double uniform() { return double(next_u64() >> 11) * 0x1.0p-53; }

    /// True with probability p. p = 0 never fires, p = 1 always fires.
    bool bernoulli(double p) { return uniform() < p; }

    /// Forks an independent stream; the parent stream is not advanced.
    Rng derive(uint64_t salt) const {
        Rng tmp(state_ ^ (salt * 0xD6E8FEB86659FD93ULL + 0xA5A5A5A5A5A5A5A5ULL));
        return Rng(tmp.next_u64());
    }

private:
    uint64_t state_;
};

} // namespace akelab
