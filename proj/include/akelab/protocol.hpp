#pragma once

#include <functional>
#include <optional>
#include "akelab/bytes.hpp"
#include "akelab/kdf.hpp"
#include "akelab/kem.hpp"
#include "akelab/mac.hpp"
#include "akelab/qkd_oracle.hpp"
#include "akelab/suite.hpp"

namespace akelab {

/// FullNested authenticates the transcript with the QKD-keyed MAC first and
/// covers that tag with the PQC-keyed MAC. SwappedMacOrder nests the other
/// way around, NoMac sends no tags at all; both exist to demonstrate the
/// attacks they admit.
enum class ProtocolVariant { FullNested, NoMac, SwappedMacOrder };

inline const char* to_string(ProtocolVariant v) {
    switch (v) {
    case ProtocolVariant::FullNested: return "full_nested";
    case ProtocolVariant::NoMac: return "no_mac";
    case ProtocolVariant::SwappedMacOrder: return "swapped_mac_order";
    }
    return "?";
}

struct MessageOne {
    Bytes ct_static; // encapsulation to the responder's static key
    Bytes pk_eph;
};

struct MessageTwo {
    Bytes ct_static; // encapsulation to the initiator's static key
    Bytes ct_eph;
    KeyId kid = 0;
    Bytes tag1;
    Bytes tag2;
};

/// Initiator keeps (k_b, sk_e, m1) between the two flows; erased on exit.
struct InitiatorState {
    Bytes k_b;
    Bytes sk_eph;
    Bytes m1;
};

inline Bytes encode_m1(const MessageOne& m) {
    return encode_tuple({m.ct_static, m.pk_eph});
}

inline std::optional<MessageOne> parse_m1(const PrimitiveSuite& suite, const Bytes& data) {
    FieldReader r(data);
    auto ct = r.next_exact(suite.kem_stat.ct_len());
    auto pk = r.next_exact(suite.kem_eph.pk_len());
    if (!ct || !pk || !r.done()) return std::nullopt;
    return MessageOne{std::move(*ct), std::move(*pk)};
}

inline Bytes encode_m2(const MessageTwo& m) {
    return encode_tuple({m.ct_static, m.ct_eph, be64(m.kid), m.tag1, m.tag2});
}

inline std::pair<size_t, size_t> tag_lengths(const PrimitiveSuite& suite, ProtocolVariant v) {
    switch (v) {
    case ProtocolVariant::FullNested: return {suite.mac_qkd.tag_len(), suite.mac_pqc.tag_len()};
    case ProtocolVariant::SwappedMacOrder:
        return {suite.mac_pqc.tag_len(), suite.mac_qkd.tag_len()};
    case ProtocolVariant::NoMac: return {0, 0};
    }
    return {0, 0};
}

inline std::optional<MessageTwo> parse_m2(const PrimitiveSuite& suite, ProtocolVariant v,
                                          const Bytes& data) {
    auto [len1, len2] = tag_lengths(suite, v);
    FieldReader r(data);
    auto ct_a = r.next_exact(suite.kem_stat.ct_len());
    auto ct_e = r.next_exact(suite.kem_eph.ct_len());
    auto kid = r.next_exact(8);
    auto tag1 = r.next_exact(len1);
    auto tag2 = r.next_exact(len2);
    if (!ct_a || !ct_e || !kid || !tag1 || !tag2 || !r.done()) return std::nullopt;
    uint64_t kid_val = 0;
    for (uint8_t b : *kid) kid_val = (kid_val << 8) | b;
    return MessageTwo{std::move(*ct_a), std::move(*ct_e), kid_val, std::move(*tag1),
                      std::move(*tag2)};
}

/// t = (m1, (c_a, c_e, kid)); the tags are excluded by construction.
inline Bytes transcript(const Bytes& m1, const Bytes& ct_a, const Bytes& ct_e, KeyId kid) {
    Bytes inner = encode_tuple({ct_a, ct_e, be64(kid)});
    return encode_tuple({m1, inner});
}

struct CombineResult {
    Bytes k_sess;
    Bytes tag1;
    Bytes tag2;
};

/// Splits both keys into (MAC key || session share), XORs the shares into
/// the session key, and computes the nested tags over the transcript and the
/// (initiator, responder) identities.
inline CombineResult combine(const PrimitiveSuite& suite, ProtocolVariant variant,
                             PartyId initiator, PartyId responder, const Bytes& t,
                             const Bytes& k_qkd, const Bytes& k_pqc) {
    if (k_qkd.size() * 8 != suite.qkd_key_bits || k_pqc.size() * 8 != suite.pqc_key_bits)
        throw std::invalid_argument("combine: key length mismatch");
    size_t qkd_mac_len = suite.mac_qkd.key_len();
    size_t pqc_mac_len = suite.mac_pqc.key_len();
    Bytes k_qkd_m(k_qkd.begin(), k_qkd.begin() + long(qkd_mac_len));
    Bytes k_qkd_s(k_qkd.begin() + long(qkd_mac_len), k_qkd.end());
    Bytes k_pqc_m(k_pqc.begin(), k_pqc.begin() + long(pqc_mac_len));
    Bytes k_pqc_s(k_pqc.begin() + long(pqc_mac_len), k_pqc.end());

    CombineResult out;
    out.k_sess = xor_bytes(k_qkd_s, k_pqc_s);
    if (variant == ProtocolVariant::NoMac) return out;

    Bytes ids = encode_tuple({t, be32(initiator), be32(responder)});
    const MacScheme& inner = variant == ProtocolVariant::FullNested ? suite.mac_qkd : suite.mac_pqc;
    const Bytes& inner_key = variant == ProtocolVariant::FullNested ? k_qkd_m : k_pqc_m;
    const MacScheme& outer = variant == ProtocolVariant::FullNested ? suite.mac_pqc : suite.mac_qkd;
    const Bytes& outer_key = variant == ProtocolVariant::FullNested ? k_pqc_m : k_qkd_m;
    out.tag1 = mac_tag(inner, inner_key, ids);
    Bytes ids_with_tag = encode_tuple({t, out.tag1, be32(initiator), be32(responder)});
    out.tag2 = mac_tag(outer, outer_key, ids_with_tag);
    return out;
}

/// QKD access handles, bound to a calling session by the environment.
using QkdGetKey = std::function<std::pair<KeyId, Bytes>(size_t key_bits)>;
using QkdGetKeyWithId = std::function<std::optional<Bytes>(KeyId kid)>;

struct InitResult {
    Bytes m1;
    InitiatorState state;
};

inline InitResult protocol_init(const PrimitiveSuite& suite, const Bytes& pk_peer, Rng& rng) {
    auto [ct_b, k_b] = kem_encaps(suite.kem_stat, pk_peer, rng);
    KemKeyPair eph = kem_keygen(suite.kem_eph, rng);
    Bytes m1 = encode_m1(MessageOne{ct_b, eph.pk});
    return {m1, InitiatorState{std::move(k_b), std::move(eph.sk), m1}};
}

struct ResponderResult {
    Bytes m2;
    Bytes k_sess;
};

/// Responder flow: decapsulate the initiator's static encapsulation, run the
/// two fresh encapsulations, derive the PQC key, draw a QKD key, and accept
/// immediately with the combined session key.
inline std::optional<ResponderResult> protocol_send_m1(
    const PrimitiveSuite& suite, ProtocolVariant variant, PartyId self, const Bytes& sk_self,
    PartyId peer, const Bytes& pk_peer, const Bytes& m1_bytes, const QkdGetKey& qkd_get,
    Kdf& kdf, Rng& rng) {
    auto m1 = parse_m1(suite, m1_bytes);
    if (!m1) return std::nullopt;
    Bytes k_b = kem_decaps(suite.kem_stat, sk_self, m1->ct_static, rng);
    auto [ct_a, k_a] = kem_encaps(suite.kem_stat, pk_peer, rng);
    auto [ct_e, k_e] = kem_encaps(suite.kem_eph, m1->pk_eph, rng);
    Bytes k_pqc = kdf.eval(k_b, k_a, k_e, false);
    auto [kid, k_qkd] = qkd_get(suite.qkd_key_bits);
    Bytes t = transcript(m1_bytes, ct_a, ct_e, kid);
    // The responder is i_R; the initiator identity comes first.
    CombineResult c = combine(suite, variant, peer, self, t, k_qkd, k_pqc);
    Bytes m2 = encode_m2(MessageTwo{ct_a, ct_e, kid, c.tag1, c.tag2});
    return ResponderResult{std::move(m2), std::move(c.k_sess)};
}

/// Initiator completion: decapsulate both responder encapsulations, derive
/// the PQC key, fetch the QKD key named by the message (aborting when it is
/// not deliverable), recompute the tags, and accept only on tag match.
inline std::optional<Bytes> protocol_send_m2(const PrimitiveSuite& suite,
                                             ProtocolVariant variant, PartyId self,
                                             const Bytes& sk_self, PartyId peer,
                                             const InitiatorState& state, const Bytes& m2_bytes,
                                             const QkdGetKeyWithId& qkd_get_by_id, Kdf& kdf,
                                             Rng& rng) {
    auto m2 = parse_m2(suite, variant, m2_bytes);
    if (!m2) return std::nullopt;
    Bytes k_a = kem_decaps(suite.kem_stat, sk_self, m2->ct_static, rng);
    Bytes k_e = kem_decaps(suite.kem_eph, state.sk_eph, m2->ct_eph, rng);
    Bytes k_pqc = kdf.eval(state.k_b, k_a, k_e, false);
    auto k_qkd = qkd_get_by_id(m2->kid);
    if (!k_qkd) return std::nullopt;
    Bytes t = transcript(state.m1, m2->ct_static, m2->ct_eph, m2->kid);
    CombineResult c = combine(suite, variant, self, peer, t, *k_qkd, k_pqc);
    if (variant != ProtocolVariant::NoMac) {
        if (c.tag1 != m2->tag1 || c.tag2 != m2->tag2) return std::nullopt;
    }
    return c.k_sess;
}

/// One honest two-party run against a caller-supplied oracle. Used by the
/// correctness Monte-Carlo and a handful of tests.
struct HonestRunResult {
    bool responder_accepted = false;
    bool initiator_accepted = false;
    Bytes responder_key;
    Bytes initiator_key;
};

inline HonestRunResult honest_run(const PrimitiveSuite& suite, ProtocolVariant variant,
                                  QkdOracle& oracle, Kdf& kdf, Rng& rng,
                                  SessionId initiator_sid = 1, SessionId responder_sid = 2) {
    KemKeyPair alice = kem_keygen(suite.kem_stat, rng);
    KemKeyPair bob = kem_keygen(suite.kem_stat, rng);
    SessionDirectory directory = [&](SessionId sid) -> std::optional<PartyPair> {
        if (sid == initiator_sid) return PartyPair{1, 2};
        if (sid == responder_sid) return PartyPair{2, 1};
        return std::nullopt;
    };
    HonestRunResult out;
    InitResult init = protocol_init(suite, bob.pk, rng);
    auto resp = protocol_send_m1(
        suite, variant, 2, bob.sk, 1, alice.pk, init.m1,
        [&](size_t bits) { return oracle.get_key(responder_sid, bits, rng); }, kdf, rng);
    if (!resp) return out;
    out.responder_accepted = true;
    out.responder_key = resp->k_sess;
    auto key = protocol_send_m2(
        suite, variant, 1, alice.sk, 2, init.state, resp->m2,
        [&](KeyId kid) { return oracle.get_key_with_id(initiator_sid, kid, directory); }, kdf,
        rng);
    if (!key) return out;
    out.initiator_accepted = true;
    out.initiator_key = *key;
    return out;
}

} // namespace akelab
