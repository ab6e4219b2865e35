#pragma once

#include <stdexcept>
#include <string>
#include "akelab/bytes.hpp"
#include "akelab/gf2.hpp"
#include "akelab/sha256.hpp"

namespace akelab {

enum class MacKind { CarterWegman, KeyedHash };

/// Canonical MAC description. Tag generation is deterministic and
/// verification recomputes the tag and compares.
struct MacScheme {
    MacKind kind = MacKind::CarterWegman;
    size_t field_bits = 128; // CarterWegman only
    size_t key_bits = 256;
    size_t tag_bits = 128;

    static MacScheme carter_wegman(size_t field_bits) {
        if (field_bits != 8 && field_bits != 128)
            throw std::invalid_argument("carter_wegman: unsupported field size");
        return MacScheme{MacKind::CarterWegman, field_bits, 2 * field_bits, field_bits};
    }

    static MacScheme keyed_hash(size_t key_bits = 256, size_t tag_bits = 128) {
        return MacScheme{MacKind::KeyedHash, 0, key_bits, tag_bits};
    }

    size_t key_len() const { return key_bits / 8; }
    size_t tag_len() const { return tag_bits / 8; }
};

namespace detail {

// Polynomial evaluation b + sum_i m_i * a^(L+2-i) over the message blocks
// m_1..m_L (zero-padded) followed by one block encoding the bit length.
template <typename F>
Bytes cw_tag(const Bytes& key, const Bytes& msg) {
    typename F::Elem a = F::from_bytes(key.data());
    typename F::Elem b = F::from_bytes(key.data() + F::bytes);
    typename F::Elem acc{};
    size_t blocks = msg.size() / F::bytes + (msg.size() % F::bytes != 0);
    for (size_t i = 0; i < blocks; ++i) {
        uint8_t block[F::bytes] = {0};
        size_t off = i * F::bytes;
        size_t take = std::min(F::bytes, msg.size() - off);
        for (size_t k = 0; k < take; ++k) block[k] = msg[off + k];
        acc = F::mul(F::add(acc, F::from_bytes(block)), a);
    }
    typename F::Elem len_block = F::from_u64(uint64_t(msg.size()) * 8);
    acc = F::mul(F::add(acc, len_block), a);
    acc = F::add(acc, b);
    Bytes tag(F::bytes);
    F::to_bytes(acc, tag.data());
    return tag;
}

} // namespace detail

inline Bytes mac_tag(const MacScheme& scheme, const Bytes& key, const Bytes& msg) {
    if (key.size() != scheme.key_len())
        throw std::invalid_argument("mac_tag: key length mismatch");
    switch (scheme.kind) {
    case MacKind::CarterWegman:
        return scheme.field_bits == 8 ? detail::cw_tag<Gf8>(key, msg)
                                      : detail::cw_tag<Gf128>(key, msg);
    case MacKind::KeyedHash: {
        Bytes full = tagged_expand("MACPQC", {key, msg}, scheme.tag_len());
        return full;
    }
    }
    throw std::logic_error("mac_tag: unknown kind");
}

inline bool mac_verify(const MacScheme& scheme, const Bytes& key, const Bytes& msg,
                       const Bytes& tag) {
    Bytes expect = mac_tag(scheme, key, msg);
    if (expect.size() != tag.size()) return false;
    uint8_t diff = 0;
    for (size_t i = 0; i < tag.size(); ++i) diff |= uint8_t(expect[i] ^ tag[i]);
    return diff == 0;
}

/// Two-key MACs assembled from an inner scheme. These are the candidate
/// instantiations for a MAC whose key is split between two sources; the
/// first three have algebraic structure that a key-substituting adversary
/// can exploit, the fourth hashes the joint key.
enum class CombinedMacKind { Concat, XorAgg, CwSum, HashKeyed };

struct CombinedMacScheme {
    CombinedMacKind kind;
    MacScheme inner;

    size_t tag_len() const {
        return kind == CombinedMacKind::Concat ? 2 * inner.tag_len() : inner.tag_len();
    }
};

inline Bytes combined_mac_tag(const CombinedMacScheme& scheme, const Bytes& k1,
                              const Bytes& k2, const Bytes& msg) {
    if (k1.size() != scheme.inner.key_len() || k2.size() != scheme.inner.key_len())
        throw std::invalid_argument("combined_mac_tag: key length mismatch");
    switch (scheme.kind) {
    case CombinedMacKind::Concat: {
        Bytes tag = mac_tag(scheme.inner, k1, msg);
        append(tag, mac_tag(scheme.inner, k2, msg));
        return tag;
    }
    case CombinedMacKind::XorAgg:
        return xor_bytes(mac_tag(scheme.inner, k1, msg), mac_tag(scheme.inner, k2, msg));
    case CombinedMacKind::CwSum: {
        if (scheme.inner.kind != MacKind::CarterWegman)
            throw std::invalid_argument("CwSum requires a Carter-Wegman inner MAC");
        // Single evaluation under the key sum (a1+a2, b1+b2); field addition
        // is XOR, so the key sum is the XOR of the packed keys.
        return mac_tag(scheme.inner, xor_bytes(k1, k2), msg);
    }
    case CombinedMacKind::HashKeyed: {
        if (scheme.inner.kind != MacKind::KeyedHash)
            throw std::invalid_argument("HashKeyed requires a keyed-hash inner MAC");
        MacScheme joint = MacScheme::keyed_hash(2 * scheme.inner.key_bits, scheme.inner.tag_bits);
        Bytes joint_key = k1;
        append(joint_key, k2);
        return mac_tag(joint, joint_key, msg);
    }
    }
    throw std::logic_error("combined_mac_tag: unknown kind");
}

inline bool combined_mac_verify(const CombinedMacScheme& scheme, const Bytes& k1,
                                const Bytes& k2, const Bytes& msg, const Bytes& tag) {
    Bytes expect = combined_mac_tag(scheme, k1, k2, msg);
    if (expect.size() != tag.size()) return false;
    uint8_t diff = 0;
    for (size_t i = 0; i < tag.size(); ++i) diff |= uint8_t(expect[i] ^ tag[i]);
    return diff == 0;
}

} // namespace akelab
