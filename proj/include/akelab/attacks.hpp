#pragma once

#include <string>
#include <vector>
#include "akelab/game.hpp"
#include "akelab/security_games.hpp"

namespace akelab {

enum class AttackVerdict {
    KeyRecovered,
    Abort,
    NonMatchingAccept,
    ForgeryAccepted,
    GatedZero,
    Completed,
};

inline const char* to_string(AttackVerdict v) {
    switch (v) {
    case AttackVerdict::KeyRecovered: return "key_recovered";
    case AttackVerdict::Abort: return "abort";
    case AttackVerdict::NonMatchingAccept: return "non_matching_accept";
    case AttackVerdict::ForgeryAccepted: return "forgery_accepted";
    case AttackVerdict::GatedZero: return "gated_zero";
    case AttackVerdict::Completed: return "completed";
    }
    return "?";
}

namespace detail {

inline Bytes tail(const Bytes& b, size_t n) {
    return Bytes(b.end() - long(n), b.end());
}

inline Bytes or_zero(const std::optional<Bytes>& b, size_t n) {
    return b ? *b : Bytes(n, 0);
}

} // namespace detail

// ---------------------------------------------------------------------------
// Dependent-key attack: swap the QKD key ids of two concurrent sessions
// ---------------------------------------------------------------------------

/// How the attacker learns the three key shares it combines. RevealOnly uses
/// session-key reveals on the three non-matching sessions; LeakQkd trades two
/// of the reveals for QKD leaks; BreakPqc recomputes the handshake keys of
/// the breakable mock KEM from public data plus one reveal.
enum class DependentKeyPower { RevealOnly, LeakQkd, BreakPqc };

/// Runs the id-swap man-in-the-middle across two initiator/responder pairs
/// and tries to reconstruct the test session key from material the game
/// still considers fair. Returns the guess; observations land in the fields.
class DependentKeyScript {
public:
    DependentKeyPower power = DependentKeyPower::RevealOnly;
    bool full_message_swap = false;

    SessionId test_sid = 0;
    bool test_completed = false;
    Bytes recovered;
    std::optional<Bytes> test_output;

    int operator()(GameEnv& env) {
        const PrimitiveSuite& suite = env.suite();
        ProtocolVariant pv = env.protocol_variant();
        size_t sess_len = suite.sess_key_len();

        SessionId a_star = env.est(1, 2, Role::Initiator);
        SessionId a_other = env.est(1, 2, Role::Initiator);
        SessionId b_first = env.est(2, 1, Role::Responder);
        SessionId b_second = env.est(2, 1, Role::Responder);
        test_sid = a_star;

        auto m1 = env.send_init(a_star);
        auto m1_other = env.send_init(a_other);
        auto m2 = env.send_m1(b_first, *m1);
        auto m2_other = env.send_m1(b_second, *m1_other);

        auto parsed = parse_m2(suite, pv, *m2);
        auto parsed_other = parse_m2(suite, pv, *m2_other);
        KeyId kid_first = parsed->kid;
        KeyId kid_second = parsed_other->kid;

        std::optional<Bytes> leaked_first, leaked_second;
        if (power == DependentKeyPower::LeakQkd) {
            leaked_first = env.qkd_leak(kid_first);
            leaked_second = env.qkd_leak(kid_second);
        }

        Bytes to_star, to_other;
        if (full_message_swap) {
            to_star = *m2_other;
            to_other = *m2;
        } else {
            std::swap(parsed->kid, parsed_other->kid);
            to_star = encode_m2(*parsed);
            to_other = encode_m2(*parsed_other);
        }
        env.send_m2(a_star, to_star);
        env.send_m2(a_other, to_other);
        test_completed = env.is_completed(a_star);
        test_output = env.test(a_star);

        switch (power) {
        case DependentKeyPower::RevealOnly: {
            Bytes k_other = detail::or_zero(env.reveal(a_other), sess_len);
            Bytes k_b1 = detail::or_zero(env.reveal(b_first), sess_len);
            Bytes k_b2 = detail::or_zero(env.reveal(b_second), sess_len);
            recovered = xor_bytes(xor_bytes(k_other, k_b1), k_b2);
            break;
        }
        case DependentKeyPower::LeakQkd: {
            // share of the first responder plus both QKD session-key shares
            Bytes k_b1 = detail::or_zero(env.reveal(b_first), sess_len);
            Bytes q1 = detail::tail(detail::or_zero(leaked_first, suite.qkd_key_bits / 8), sess_len);
            Bytes q2 = detail::tail(detail::or_zero(leaked_second, suite.qkd_key_bits / 8), sess_len);
            recovered = xor_bytes(xor_bytes(k_b1, q1), q2);
            break;
        }
        case DependentKeyPower::BreakPqc: {
            // The mock KEM leaks its secrets to anyone holding (pk, ct).
            auto pqc_share = [&](const Bytes& m1_bytes, const Bytes& m2_bytes) {
                auto one = parse_m1(suite, m1_bytes);
                auto two = parse_m2(suite, pv, m2_bytes);
                Bytes k_b = kem_public_recompute(suite.kem_stat, env.public_key(2), one->ct_static);
                Bytes k_a = kem_public_recompute(suite.kem_stat, env.public_key(1), two->ct_static);
                Bytes k_e = kem_public_recompute(suite.kem_eph, one->pk_eph, two->ct_eph);
                return detail::tail(env.kdf_eval(k_b, k_a, k_e), sess_len);
            };
            Bytes p1 = pqc_share(*m1, *m2);
            Bytes p2 = pqc_share(*m1_other, *m2_other);
            Bytes k_b2 = detail::or_zero(env.reveal(b_second), sess_len);
            // k_b2 = p2 + q2; the test key is p1 + q2.
            recovered = xor_bytes(p1, xor_bytes(p2, k_b2));
            break;
        }
        }
        return test_output && *test_output == recovered ? 0 : 1;
    }
};

struct DependentKeyReport {
    AttackVerdict verdict = AttackVerdict::Completed;
    bool identity_exact = false;
    bool matches_empty = false;
    bool gate_fired = false;
    std::vector<TraceEvent> trace;
    std::vector<SessionSummary> sessions;
};

inline DependentKeyReport dependent_key_report(ProtocolVariant pv, GameVariant gv,
                                               DependentKeyPower power, bool full_swap,
                                               uint64_t seed,
                                               const PrimitiveSuite& suite = default_suite()) {
    GameConfig cfg;
    cfg.variant = gv;
    cfg.protocol = pv;
    cfg.suite = suite;
    GameEnv env(cfg, 0, seed);
    DependentKeyScript script;
    script.power = power;
    script.full_message_swap = full_swap;
    script(env);

    DependentKeyReport report;
    auto matches = find_matches(env, script.test_sid);
    report.matches_empty = matches.empty();
    report.gate_fired = gate_fires(gv, env, matches);
    auto real_key = env.session_key(script.test_sid);
    report.identity_exact = real_key && *real_key == script.recovered;
    if (!script.test_completed)
        report.verdict = AttackVerdict::Abort;
    else if (report.identity_exact && report.matches_empty)
        report.verdict = AttackVerdict::KeyRecovered;
    else
        report.verdict = AttackVerdict::Completed;
    report.trace = env.trace();
    report.sessions = session_summaries(env);
    return report;
}

inline Adversary make_dependent_key_adversary(DependentKeyPower power = DependentKeyPower::RevealOnly,
                                              bool full_swap = false) {
    return [power, full_swap](GameEnv& env) {
        DependentKeyScript script;
        script.power = power;
        script.full_message_swap = full_swap;
        return script(env);
    };
}

// ---------------------------------------------------------------------------
// Nesting-order attack: corrupt the QKD MAC key slot and re-tag in transit
// ---------------------------------------------------------------------------

enum class OverrideTiming { BeforeDelivery, AfterDelivery };

/// Leaks the responder's QKD key, replaces its MAC half (keeping the session
/// share, so both sides still derive the same key), and swaps the QKD tag in
/// the second message for one under the planted key. When the QKD MAC is the
/// outer MAC this yields two accepting, non-matching sessions with one key.
class NestingOrderScript {
public:
    OverrideTiming timing = OverrideTiming::BeforeDelivery;

    SessionId initiator_sid = 0, responder_sid = 0;
    bool initiator_accepted = false;
    std::optional<Bytes> test_output;
    std::optional<Bytes> revealed_peer_key;

    int operator()(GameEnv& env) {
        const PrimitiveSuite& suite = env.suite();
        ProtocolVariant pv = env.protocol_variant();
        initiator_sid = env.est(1, 2, Role::Initiator);
        responder_sid = env.est(2, 1, Role::Responder);
        auto m1 = env.send_init(initiator_sid);
        auto m2 = env.send_m1(responder_sid, *m1);
        auto parsed = parse_m2(suite, pv, *m2);

        Bytes delivered = *m2;
        if (timing == OverrideTiming::BeforeDelivery) {
            delivered = retagged(env, *m1, *parsed);
            env.send_m2(initiator_sid, delivered);
        } else {
            env.send_m2(initiator_sid, delivered);
            // The key was already consumed; planting now changes nothing.
            env.qkd_leak(parsed->kid);
            env.qkd_override(parsed->kid, env.adversary_rng().bytes(suite.qkd_key_bits / 8));
        }
        initiator_accepted = env.is_completed(initiator_sid);
        test_output = env.test(initiator_sid);
        revealed_peer_key = env.reveal(responder_sid);
        return test_output && revealed_peer_key && *test_output == *revealed_peer_key ? 0 : 1;
    }

private:
    Bytes retagged(GameEnv& env, const Bytes& m1, const MessageTwo& m2) {
        const PrimitiveSuite& suite = env.suite();
        ProtocolVariant pv = env.protocol_variant();
        size_t mac_len = suite.mac_qkd.key_len();

        auto leaked = env.qkd_leak(m2.kid);
        if (!leaked) return encode_m2(m2);
        Bytes planted = env.adversary_rng().bytes(mac_len);
        append(planted, detail::tail(*leaked, leaked->size() - mac_len)); // keep the share
        env.qkd_override(m2.kid, planted);

        if (pv == ProtocolVariant::NoMac) return encode_m2(m2);
        Bytes planted_mac(planted.begin(), planted.begin() + long(mac_len));
        Bytes t = transcript(m1, m2.ct_static, m2.ct_eph, m2.kid);
        MessageTwo out = m2;
        if (pv == ProtocolVariant::SwappedMacOrder) {
            // QKD tag is the outer one and covers the untouched inner tag.
            Bytes msg = encode_tuple({t, m2.tag1, be32(1), be32(2)});
            out.tag2 = mac_tag(suite.mac_qkd, planted_mac, msg);
        } else {
            // QKD tag is the inner one; the stale outer tag stays in place.
            Bytes msg = encode_tuple({t, be32(1), be32(2)});
            out.tag1 = mac_tag(suite.mac_qkd, planted_mac, msg);
        }
        return encode_m2(out);
    }
};

struct NestingOrderReport {
    AttackVerdict verdict = AttackVerdict::Completed;
    bool both_accepted = false;
    bool keys_equal = false;
    bool non_matching = false;
    bool gate_fired = false;
    std::vector<TraceEvent> trace;
    std::vector<SessionSummary> sessions;
};

inline NestingOrderReport nesting_order_report(ProtocolVariant pv, GameVariant gv,
                                               OverrideTiming timing, uint64_t seed,
                                               const PrimitiveSuite& suite = default_suite()) {
    GameConfig cfg;
    cfg.variant = gv;
    cfg.protocol = pv;
    cfg.suite = suite;
    GameEnv env(cfg, 0, seed);
    NestingOrderScript script;
    script.timing = timing;
    script(env);

    NestingOrderReport report;
    auto ki = env.session_key(script.initiator_sid);
    auto kr = env.session_key(script.responder_sid);
    report.both_accepted = ki.has_value() && kr.has_value();
    report.keys_equal = report.both_accepted && *ki == *kr;
    auto matches = find_matches(env, script.initiator_sid);
    report.non_matching = matches.empty();
    report.gate_fired = gate_fires(gv, env, matches);
    if (!script.initiator_accepted)
        report.verdict = AttackVerdict::Abort;
    else if (report.both_accepted && report.keys_equal && report.non_matching)
        report.verdict = AttackVerdict::NonMatchingAccept;
    else
        report.verdict = AttackVerdict::Completed;
    report.trace = env.trace();
    report.sessions = session_summaries(env);
    return report;
}

inline Adversary make_nesting_order_adversary(OverrideTiming timing = OverrideTiming::BeforeDelivery) {
    return [timing](GameEnv& env) {
        NestingOrderScript script;
        script.timing = timing;
        return script(env);
    };
}

// ---------------------------------------------------------------------------
// State-reveal impersonation: the attack the StAA predicate exists to gate
// ---------------------------------------------------------------------------

enum class QkdAttackPower { LeakKey, None };

/// Reveals the initiator's pending state after the first flow, leaks the QKD
/// key a decoy responder drew, and completes the handshake itself. Without
/// the QKD leak the tags cannot be produced and the initiator rejects.
class StateRevealScript {
public:
    QkdAttackPower qkd_power = QkdAttackPower::LeakKey;

    SessionId test_sid = 0, decoy_sid = 0;
    bool test_completed = false;
    Bytes computed_key;
    std::optional<Bytes> test_output;

    int operator()(GameEnv& env) {
        const PrimitiveSuite& suite = env.suite();
        ProtocolVariant pv = env.protocol_variant();
        Rng& rng = env.adversary_rng();

        test_sid = env.est(1, 2, Role::Initiator);
        auto m1 = env.send_init(test_sid);
        SessionState state = env.reveal_state(test_sid);
        const InitiatorState* pending = std::get_if<InitiatorState>(&state);

        // A decoy responder run makes the oracle issue a deliverable key id.
        decoy_sid = env.est(2, 1, Role::Responder);
        auto m2_decoy = env.send_m1(decoy_sid, *m1);
        auto decoy = parse_m2(suite, pv, *m2_decoy);
        KeyId kid = decoy->kid;

        auto m1_parsed = parse_m1(suite, *m1);
        auto [ct_a, k_a] = kem_encaps(suite.kem_stat, env.public_key(1), rng);
        auto [ct_e, k_e] = kem_encaps(suite.kem_eph, m1_parsed->pk_eph, rng);
        Bytes k_pqc = env.kdf_eval(pending->k_b, k_a, k_e);

        Bytes k_qkd(suite.qkd_key_bits / 8, 0);
        if (qkd_power == QkdAttackPower::LeakKey) {
            if (auto leaked = env.qkd_leak(kid)) k_qkd = *leaked;
        }
        Bytes t = transcript(*m1, ct_a, ct_e, kid);
        CombineResult c = combine(suite, pv, 1, 2, t, k_qkd, k_pqc);
        computed_key = c.k_sess;
        env.send_m2(test_sid, encode_m2(MessageTwo{ct_a, ct_e, kid, c.tag1, c.tag2}));
        test_completed = env.is_completed(test_sid);
        test_output = env.test(test_sid);
        return test_output && *test_output == computed_key ? 0 : 1;
    }
};

struct StateRevealReport {
    AttackVerdict verdict = AttackVerdict::Completed;
    bool key_matches = false;
    bool matches_empty = false;
    bool gate_fired = false;
    std::vector<TraceEvent> trace;
    std::vector<SessionSummary> sessions;
};

inline StateRevealReport state_reveal_report(GameVariant gv, QkdAttackPower power,
                                             uint64_t seed,
                                             const PrimitiveSuite& suite = default_suite()) {
    GameConfig cfg;
    cfg.variant = gv;
    cfg.protocol = ProtocolVariant::FullNested;
    cfg.suite = suite;
    GameEnv env(cfg, 0, seed);
    StateRevealScript script;
    script.qkd_power = power;
    script(env);

    StateRevealReport report;
    auto matches = find_matches(env, script.test_sid);
    report.matches_empty = matches.empty();
    report.gate_fired = gate_fires(gv, env, matches);
    auto real = env.session_key(script.test_sid);
    report.key_matches = real && *real == script.computed_key;
    if (!script.test_completed)
        report.verdict = AttackVerdict::Abort;
    else if (report.key_matches)
        report.verdict = report.gate_fired ? AttackVerdict::GatedZero : AttackVerdict::KeyRecovered;
    report.trace = env.trace();
    report.sessions = session_summaries(env);
    return report;
}

inline Adversary make_state_reveal_adversary(QkdAttackPower power = QkdAttackPower::LeakKey) {
    return [power](GameEnv& env) {
        StateRevealScript script;
        script.qkd_power = power;
        return script(env);
    };
}

// ---------------------------------------------------------------------------
// Combined-MAC forgeries
// ---------------------------------------------------------------------------

struct RobustBreakReport {
    CombinedMacKind kind;
    size_t field_bits;
    double success_rate = 0.0;
    AttackVerdict verdict = AttackVerdict::Completed;
};

/// Runs one structural break adversary against its own combined scheme.
inline RobustBreakReport robust_break_report(CombinedMacKind kind, size_t field_bits,
                                             size_t trials, uint64_t seed) {
    MacScheme inner = MacScheme::carter_wegman(field_bits);
    CombinedMacScheme scheme{kind, inner};
    RobustAdversaryFactory factory = break_factory_for(kind, inner);
    double rate = success_rate(
        [&](uint64_t s) {
            auto adversary = factory();
            return play_robust_ot_sufcma(scheme, *adversary, s);
        },
        trials, seed);
    return {kind, field_bits, rate,
            rate == 1.0 ? AttackVerdict::ForgeryAccepted : AttackVerdict::Completed};
}

/// Runs all three break recipes against the hashed-joint-key scheme; returns
/// the highest observed success rate (expected: zero).
inline double hash_keyed_resistance_rate(size_t trials, uint64_t seed) {
    MacScheme inner = MacScheme::keyed_hash();
    CombinedMacScheme scheme{CombinedMacKind::HashKeyed, inner};
    double worst = 0.0;
    int salt = 1;
    for (CombinedMacKind recipe :
         {CombinedMacKind::Concat, CombinedMacKind::XorAgg, CombinedMacKind::CwSum}) {
        RobustAdversaryFactory factory = break_factory_for(recipe, inner);
        double rate = success_rate(
            [&](uint64_t s) {
                auto adversary = factory();
                return play_robust_ot_sufcma(scheme, *adversary, s);
            },
            trials, seed + uint64_t(salt++));
        worst = std::max(worst, rate);
    }
    return worst;
}

} // namespace akelab
