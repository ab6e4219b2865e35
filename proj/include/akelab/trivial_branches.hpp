#pragma once

#include <map>
#include <string>
#include <vector>
#include "akelab/attacks.hpp"
#include "akelab/game.hpp"

namespace akelab {

/// One scripted trace plus the expected/observed value of each gating
/// predicate on it.
struct BranchCheck {
    std::string name;
    bool expected_pqc = false, actual_pqc = false;
    bool expected_attack = false, actual_attack = false;
    bool expected_qkd = false, actual_qkd = false;

    bool pass() const {
        return expected_pqc == actual_pqc && expected_attack == actual_attack &&
               expected_qkd == actual_qkd;
    }
};

namespace detail {

inline BranchCheck evaluate(std::string name, GameEnv& env, bool exp_pqc, bool exp_attack,
                            bool exp_qkd) {
    auto matches = find_matches(env, env.test_sid());
    BranchCheck check;
    check.name = std::move(name);
    check.expected_pqc = exp_pqc;
    check.actual_pqc = trivial_pqc(env, matches);
    check.expected_attack = exp_attack;
    check.actual_attack = attack_pqc(env, matches);
    check.expected_qkd = exp_qkd;
    check.actual_qkd = trivial_qkd(env, matches);
    return check;
}

struct HonestPair {
    SessionId initiator = 0;
    SessionId responder = 0;
};

inline HonestPair run_honest_pair(GameEnv& env) {
    HonestPair p;
    p.initiator = env.est(1, 2, Role::Initiator);
    p.responder = env.est(2, 1, Role::Responder);
    auto m1 = env.send_init(p.initiator);
    auto m2 = env.send_m1(p.responder, *m1);
    env.send_m2(p.initiator, *m2);
    return p;
}

struct CollisionTrace {
    SessionId responder = 0;
    SessionId first_initiator = 0;
    SessionId second_initiator = 0;
    KeyId kid = 0;
    bool found = false;
};

/// Drives initiator sessions until two of them emit byte-identical first
/// messages (the tiny-message suite makes that a birthday event), then runs
/// one responder against that message and delivers its reply to both.
/// With replant_key set, the key id is planted again between the two
/// deliveries so the second initiator completes as well.
inline CollisionTrace run_collision_trace(GameEnv& env, bool replant_key,
                                          size_t max_attempts = 3000) {
    CollisionTrace trace;
    std::map<Bytes, SessionId> seen;
    for (size_t i = 0; i < max_attempts && !trace.found; ++i) {
        SessionId sid = env.est(1, 2, Role::Initiator);
        auto m1 = env.send_init(sid);
        auto [it, fresh] = seen.try_emplace(*m1, sid);
        if (!fresh) {
            trace.first_initiator = it->second;
            trace.second_initiator = sid;
            trace.found = true;
        }
    }
    if (!trace.found) return trace;
    Bytes m1 = *env.session(trace.first_initiator)->sent;
    trace.responder = env.est(2, 1, Role::Responder);
    auto m2 = env.send_m1(trace.responder, m1);
    trace.kid = parse_m2(env.suite(), env.protocol_variant(), *m2)->kid;
    env.send_m2(trace.first_initiator, *m2);
    if (replant_key)
        env.qkd_override(trace.kid, env.adversary_rng().bytes(env.suite().qkd_key_bits / 8));
    env.send_m2(trace.second_initiator, *m2);
    return trace;
}

inline GameConfig tiny_config() {
    GameConfig cfg;
    cfg.protocol = ProtocolVariant::NoMac;
    cfg.suite = tiny_message_suite();
    return cfg;
}

} // namespace detail

/// One scripted trace per reachable predicate branch, each annotated with
/// the expected truth value of all three predicates. The multiple-completed-
/// matches reward of the QKD predicate is exercised on an installed state,
/// since no oracle trace can deliver one honest key twice.
inline std::vector<BranchCheck> run_trivial_branch_suite(uint64_t seed) {
    std::vector<BranchCheck> out;
    GameConfig cfg; // FullNested, IndStAaPqc

    {
        GameEnv env(cfg, 0, seed);
        out.push_back(detail::evaluate("no_test_query", env, true, true, true));
    }
    {
        GameEnv env(cfg, 0, seed + 1);
        SessionId sid = env.est(1, 2, Role::Initiator);
        env.send_init(sid);
        env.test(sid);
        out.push_back(detail::evaluate("test_incomplete", env, true, true, true));
    }
    {
        GameEnv env(cfg, 0, seed + 2);
        auto pair = detail::run_honest_pair(env);
        env.test(pair.initiator);
        env.reveal(pair.initiator);
        out.push_back(detail::evaluate("test_revealed", env, true, true, true));
    }
    {
        GameEnv env(cfg, 0, seed + 3);
        auto pair = detail::run_honest_pair(env);
        env.test(pair.initiator);
        env.corrupt(1);
        env.reveal_state(pair.initiator);
        out.push_back(detail::evaluate("owner_corrupt_and_state_revealed", env, true, true, false));
    }
    {
        GameEnv env(detail::tiny_config(), 0, seed + 4);
        auto trace = detail::run_collision_trace(env, false);
        if (trace.found) env.test(trace.responder);
        out.push_back(detail::evaluate("two_matches_clean", env, false, false, false));
    }
    {
        GameEnv env(detail::tiny_config(), 0, seed + 5);
        auto trace = detail::run_collision_trace(env, false);
        if (trace.found) {
            env.test(trace.responder);
            env.reveal(trace.first_initiator); // the completed one
        }
        out.push_back(detail::evaluate("two_matches_one_revealed", env, false, false, true));
    }
    {
        // Impersonation of a corrupted peer: complete the responder side with
        // the corrupted static key and a leaked QKD key.
        GameEnv env(cfg, 0, seed + 6);
        Rng& rng = env.adversary_rng();
        const PrimitiveSuite& suite = env.suite();
        SessionId sid = env.est(1, 2, Role::Initiator);
        auto m1 = env.send_init(sid);
        Bytes sk2 = env.corrupt(2);
        SessionId decoy = env.est(2, 1, Role::Responder);
        auto m2_decoy = env.send_m1(decoy, *m1);
        KeyId kid = parse_m2(suite, cfg.protocol, *m2_decoy)->kid;
        auto m1p = parse_m1(suite, *m1);
        Bytes k_b = kem_decaps(suite.kem_stat, sk2, m1p->ct_static, rng);
        auto [ct_a, k_a] = kem_encaps(suite.kem_stat, env.public_key(1), rng);
        auto [ct_e, k_e] = kem_encaps(suite.kem_eph, m1p->pk_eph, rng);
        Bytes k_pqc = env.kdf_eval(k_b, k_a, k_e);
        Bytes k_qkd = *env.qkd_leak(kid);
        Bytes t = transcript(*m1, ct_a, ct_e, kid);
        CombineResult c = combine(suite, cfg.protocol, 1, 2, t, k_qkd, k_pqc);
        env.send_m2(sid, encode_m2(MessageTwo{ct_a, ct_e, kid, c.tag1, c.tag2}));
        env.test(sid);
        out.push_back(detail::evaluate("no_match_peer_corrupted", env, true, true, true));
    }
    {
        GameEnv env(cfg, 0, seed + 7);
        StateRevealScript script;
        script(env);
        out.push_back(detail::evaluate("no_match_state_revealed", env, false, true, true));
    }
    {
        GameEnv env(cfg, 0, seed + 8);
        auto pair = detail::run_honest_pair(env);
        env.test(pair.initiator);
        env.reveal(pair.responder);
        out.push_back(detail::evaluate("single_match_revealed", env, true, true, true));
    }
    {
        GameEnv env(cfg, 0, seed + 9);
        auto pair = detail::run_honest_pair(env);
        env.test(pair.initiator);
        env.corrupt(2);
        env.reveal_state(pair.responder);
        out.push_back(
            detail::evaluate("single_match_owner_corrupt_state_revealed", env, true, true, false));
    }
    {
        GameEnv env(cfg, 0, seed + 10);
        auto pair = detail::run_honest_pair(env);
        env.test(pair.initiator);
        out.push_back(detail::evaluate("clean_honest", env, false, false, false));
    }
    {
        GameEnv env(cfg, 0, seed + 11);
        auto pair = detail::run_honest_pair(env);
        env.test(pair.initiator);
        env.qkd_leak(1); // flag transition survives the earlier delivery
        out.push_back(detail::evaluate("honest_run_qkd_key_leaked", env, false, false, true));
    }
    {
        GameEnv env(detail::tiny_config(), 0, seed + 12);
        auto trace = detail::run_collision_trace(env, true);
        if (trace.found) {
            env.test(trace.responder);
            env.reveal(trace.first_initiator);
        }
        // Both matches completed, but only through a planted key: the QKD
        // predicate refuses the reward, the PQC predicate grants it.
        out.push_back(detail::evaluate("override_double_delivery", env, false, false, true));
    }
    {
        // Reward branch on an installed state: two completed matches and an
        // honest key issued to the test session.
        GameEnv env(cfg, 0, seed + 13);
        Rng rng(seed + 13);
        Bytes m1 = rng.bytes(8), m2 = rng.bytes(8), key = rng.bytes(32);
        SessionId test = env.install_session(
            Session{2, 1, Role::Responder, m2, m1, SessionAccepted{}, key, false, false});
        SessionId match1 = env.install_session(
            Session{1, 2, Role::Initiator, m1, m2, SessionAccepted{}, key, false, false});
        env.install_session(
            Session{1, 2, Role::Initiator, m1, m2, SessionAccepted{}, key, false, false});
        env.oracle().get_key(test, 512, rng);
        env.test(test);
        env.reveal(match1);
        out.push_back(detail::evaluate("two_completed_matches_honest_kid", env, false, false, false));
    }
    {
        // Planting a key before it is issued: the fresh-sample branch of the
        // key request is skipped and the run is honest but QKD-corrupt.
        GameEnv env(cfg, 0, seed + 14);
        env.qkd_override(1, env.adversary_rng().bytes(64));
        auto pair = detail::run_honest_pair(env);
        env.test(pair.initiator);
        out.push_back(detail::evaluate("preplanted_key_honest_run", env, false, false, true));
    }
    return out;
}

/// Guard-line checks for the key-delivery oracle, one named check per guard.
inline std::vector<std::pair<std::string, bool>> qkd_guard_checks(uint64_t seed) {
    std::vector<std::pair<std::string, bool>> out;
    Rng rng(seed);
    SessionDirectory dir = [](SessionId sid) -> std::optional<PartyPair> {
        if (sid == 1) return PartyPair{1, 2};
        if (sid == 2) return PartyPair{2, 1};
        if (sid == 3) return PartyPair{3, 1};
        return std::nullopt;
    };

    QkdOracle oracle;
    auto [kid, key] = oracle.get_key(2, 128, rng);
    out.push_back({"get_key_samples_fresh", oracle.flag(kid) == QkdKeyFlag::Honest});
    out.push_back({"delivery_party_mismatch",
                   !oracle.get_key_with_id(3, kid, dir).has_value() && oracle.key_present(kid)});
    out.push_back({"delivery_unknown_kid", !oracle.get_key_with_id(1, 99, dir).has_value()});
    out.push_back({"delivery_ok_then_erased", oracle.get_key_with_id(1, kid, dir) == key &&
                                                  !oracle.key_present(kid)});
    out.push_back({"delivery_erased_kid", !oracle.get_key_with_id(1, kid, dir).has_value()});
    out.push_back({"leak_after_delivery_empty_but_flagged",
                   !oracle.leak(kid).has_value() && oracle.flag(kid) == QkdKeyFlag::Leaked});

    QkdOracle oracle2;
    oracle2.override_key(1, Bytes{1});
    oracle2.override_key(1, Bytes{2});
    auto [kid2, key2] = oracle2.get_key(2, 8, rng);
    out.push_back({"preplanted_guard_skips_sampling",
                   kid2 == 1 && key2 == Bytes{2} && oracle2.flag(1) == QkdKeyFlag::Corrupt});
    auto leaked = oracle2.leak(1);
    out.push_back({"leak_keeps_corrupt_flag",
                   leaked == Bytes{2} && oracle2.flag(1) == QkdKeyFlag::Corrupt});
    auto [kid3, key3] = oracle2.get_key(2, 8, rng);
    out.push_back({"fresh_branch_after_planted", kid3 == 2 && oracle2.flag(2) == QkdKeyFlag::Honest});
    return out;
}

} // namespace akelab
