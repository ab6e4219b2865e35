#pragma once

#include <cstdint>
#include <stdexcept>
#include "akelab/bytes.hpp"

namespace akelab {

// Binary field arithmetic for the polynomial MACs. Elements are polynomials
// over GF(2) in standard basis: bit i holds the coefficient of x^i.

/// GF(2^8) modulo x^8 + x^4 + x^3 + x + 1.
struct Gf8 {
    using Elem = uint8_t;
    static constexpr size_t bits = 8;
    static constexpr size_t bytes = 1;

    static Elem add(Elem a, Elem b) { return a ^ b; }

    static Elem mul(Elem a, Elem b) {
        uint8_t r = 0;
        for (int i = 7; i >= 0; --i) {
            uint8_t carry = r & 0x80;
            r = uint8_t(r << 1);
            if (carry) r ^= 0x1B; // x^8 = x^4 + x^3 + x + 1
            if ((b >> i) & 1) r ^= a;
        }
        return r;
    }

    static Elem from_bytes(const uint8_t* p) { return *p; }
    static void to_bytes(Elem e, uint8_t* p) { *p = e; }
    static Elem from_u64(uint64_t v) { return Elem(v & 0xFF); }
};

/// GF(2^128) modulo x^128 + x^7 + x^2 + x + 1. Stored as (hi, lo) with bit 0
/// of lo the constant coefficient; serialized big-endian.
struct Gf128 {
    struct Elem {
        uint64_t hi = 0, lo = 0;
        friend bool operator==(const Elem&, const Elem&) = default;
    };
    static constexpr size_t bits = 128;
    static constexpr size_t bytes = 16;

    static Elem add(Elem a, Elem b) { return {a.hi ^ b.hi, a.lo ^ b.lo}; }

    static Elem mul(Elem a, Elem b) {
        Elem r{};
        for (int i = 127; i >= 0; --i) {
            // r := r * x, reducing x^128 to x^7 + x^2 + x + 1
            uint64_t carry = r.hi >> 63;
            r.hi = (r.hi << 1) | (r.lo >> 63);
            r.lo <<= 1;
            if (carry) r.lo ^= 0x87;
            bool bit = i >= 64 ? ((b.hi >> (i - 64)) & 1) : ((b.lo >> i) & 1);
            if (bit) { r.hi ^= a.hi; r.lo ^= a.lo; }
        }
        return r;
    }

    static Elem from_bytes(const uint8_t* p) {
        Elem e{};
        for (int i = 0; i < 8; ++i) e.hi = (e.hi << 8) | p[i];
        for (int i = 8; i < 16; ++i) e.lo = (e.lo << 8) | p[i];
        return e;
    }

    static void to_bytes(Elem e, uint8_t* p) {
        for (int i = 0; i < 8; ++i) p[i] = uint8_t(e.hi >> (56 - 8 * i));
        for (int i = 0; i < 8; ++i) p[8 + i] = uint8_t(e.lo >> (56 - 8 * i));
    }

    static Elem from_u64(uint64_t v) { return {0, v}; }
};

} // namespace akelab
