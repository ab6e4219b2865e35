#pragma once

#include <stdexcept>
#include "akelab/kem.hpp"
#include "akelab/mac.hpp"

namespace akelab {

/// The pluggable primitives one protocol instance runs with. Key lengths are
/// system parameters: both derived keys split as (MAC key || session-key
/// share), and the two shares must have the session-key length so their XOR
/// is well-typed.
struct PrimitiveSuite {
    KemScheme kem_stat;
    KemScheme kem_eph;
    MacScheme mac_qkd = MacScheme::carter_wegman(128);
    MacScheme mac_pqc = MacScheme::keyed_hash(256, 128);
    size_t qkd_key_bits = 512;
    size_t pqc_key_bits = 512;
    size_t sess_key_bits = 256;

    void validate() const {
        kem_stat.validate();
        kem_eph.validate();
        if (qkd_key_bits != mac_qkd.key_bits + sess_key_bits)
            throw std::invalid_argument("suite: qkd key must split into MAC key and session share");
        if (pqc_key_bits != mac_pqc.key_bits + sess_key_bits)
            throw std::invalid_argument("suite: pqc key must split into MAC key and session share");
        if (sess_key_bits == 0 || sess_key_bits % 8 != 0)
            throw std::invalid_argument("suite: session key length must be a positive multiple of 8");
    }

    size_t sess_key_len() const { return sess_key_bits / 8; }
};

inline PrimitiveSuite default_suite(double delta_stat = 0.0, double delta_eph = 0.0) {
    PrimitiveSuite s;
    s.kem_stat = KemScheme{"mock-stat", 256, 256, 256, 256, delta_stat};
    s.kem_eph = KemScheme{"mock-eph", 256, 256, 256, 256, delta_eph};
    return s;
}

/// Suite with 8-bit ciphertexts and ephemeral public keys, so first-message
/// collisions across sessions are likely. Used to drive the duplicated-
/// session traces that need two byte-identical initial messages.
inline PrimitiveSuite tiny_message_suite() {
    PrimitiveSuite s;
    s.kem_stat = KemScheme{"tiny-stat", 256, 256, 256, 8, 0.0};
    s.kem_eph = KemScheme{"tiny-eph", 256, 8, 256, 256, 0.0};
    return s;
}

} // namespace akelab
