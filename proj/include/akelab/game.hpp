#pragma once

#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>
#include "akelab/bytes.hpp"
#include "akelab/kdf.hpp"
#include "akelab/protocol.hpp"
#include "akelab/qkd_oracle.hpp"
#include "akelab/suite.hpp"

namespace akelab {

enum class Role { Initiator, Responder };

/// Which predicate gates the game output: direct triviality, triviality plus
/// the known state-reveal impersonation, or the QKD-side triviality.
enum class GameVariant { IndAaPqc, IndStAaPqc, IndAaQkd };

inline const char* to_string(GameVariant v) {
    switch (v) {
    case GameVariant::IndAaPqc: return "ind-aa-pqc";
    case GameVariant::IndStAaPqc: return "ind-staa-pqc";
    case GameVariant::IndAaQkd: return "ind-aa-qkd";
    }
    return "?";
}

struct SessionAccepted {};
struct SessionRejected {};

/// Unset until the first protocol step; an initiator in flight holds its
/// secrets; accepted/rejected sessions hold only the sentinel (erasure).
using SessionState = std::variant<std::monostate, InitiatorState, SessionAccepted, SessionRejected>;

struct Session {
    PartyId owner = 0;
    PartyId peer = 0;
    Role role = Role::Initiator;
    std::optional<Bytes> sent;
    std::optional<Bytes> received;
    SessionState state;
    std::optional<Bytes> skey;
    bool revealed = false;
    bool revealed_state = false;
};

struct TraceEvent {
    std::string op;
    std::vector<std::pair<std::string, std::string>> fields;
    friend bool operator==(const TraceEvent&, const TraceEvent&) = default;
};

struct GameConfig {
    GameVariant variant = GameVariant::IndStAaPqc;
    ProtocolVariant protocol = ProtocolVariant::FullNested;
    PrimitiveSuite suite = default_suite();
    PartyId n_parties = 2;
};

/// The execution environment one adversary drives: party keys, the session
/// registry, the QKD oracle, and the query surface. Single-threaded per
/// instance; independent instances are independent.
class GameEnv {
public:
    GameEnv(const GameConfig& cfg, int challenge_bit, uint64_t seed)
        : cfg_(cfg), b_(challenge_bit), rng_(0), adv_rng_(0),
          kdf_(KdfMode::LazyTable, cfg.suite.pqc_key_bits, 0) {
        cfg_.suite.validate();
        if (cfg_.n_parties < 1) throw std::invalid_argument("game: need at least one party");
        Rng root(seed);
        rng_ = Rng(root.next_u64());
        adv_rng_ = Rng(root.next_u64());
        kdf_ = Kdf(KdfMode::LazyTable, cfg_.suite.pqc_key_bits, root.next_u64());
        for (PartyId i = 1; i <= cfg_.n_parties; ++i)
            party_keys_.push_back(kem_keygen(cfg_.suite.kem_stat, rng_));
        corrupted_.assign(cfg_.n_parties + 1, false);
    }

    const GameConfig& config() const { return cfg_; }
    const PrimitiveSuite& suite() const { return cfg_.suite; }
    ProtocolVariant protocol_variant() const { return cfg_.protocol; }
    PartyId n_parties() const { return cfg_.n_parties; }
    const Bytes& public_key(PartyId i) const { return party_keys_.at(i - 1).pk; }
    Rng& adversary_rng() { return adv_rng_; }
    SessionId sid_counter() const { return SessionId(sessions_.size()); }
    SessionId test_sid() const { return sid_star_; }
    const std::vector<TraceEvent>& trace() const { return trace_; }
    QkdOracle& oracle() { return oracle_; }
    const QkdOracle& oracle() const { return oracle_; }
    uint64_t kdf_queries() const { return kdf_.query_count(); }

    const Session* session(SessionId sid) const {
        if (sid == 0 || sid > sessions_.size()) return nullptr;
        return &sessions_[sid - 1];
    }

    // --- adversary queries -------------------------------------------------

    SessionId est(PartyId i, PartyId j, Role role) {
        if (i < 1 || i > cfg_.n_parties || j < 1 || j > cfg_.n_parties)
            throw std::invalid_argument("est: party index out of range");
        sessions_.push_back(Session{i, j, role, {}, {}, {}, {}, false, false});
        SessionId sid = sessions_.size();
        record("est", {{"owner", std::to_string(i)},
                       {"peer", std::to_string(j)},
                       {"role", role == Role::Initiator ? "initiator" : "responder"},
                       {"sid", std::to_string(sid)}});
        return sid;
    }

    /// Starts an initiator session; rejects wrong roles and reuse.
    std::optional<Bytes> send_init(SessionId sid) {
        Session* s = mutable_session(sid);
        if (!s || s->role != Role::Initiator || !std::holds_alternative<std::monostate>(s->state)) {
            record("send_init", {{"sid", std::to_string(sid)}, {"result", "abort"}});
            return std::nullopt;
        }
        InitResult init = protocol_init(cfg_.suite, public_key(s->peer), rng_);
        s->sent = init.m1;
        s->state = std::move(init.state);
        record("send_init", {{"sid", std::to_string(sid)}, {"m1", to_hex(*s->sent)}});
        return s->sent;
    }

    /// Delivers m1 to a responder session, which completes immediately on
    /// success. A protocol abort leaves the session Rejected with no output.
    std::optional<Bytes> send_m1(SessionId sid, const Bytes& m1) {
        Session* s = mutable_session(sid);
        if (!s || s->role != Role::Responder || !std::holds_alternative<std::monostate>(s->state)) {
            record("send_m1", {{"sid", std::to_string(sid)}, {"result", "abort"}});
            return std::nullopt;
        }
        s->received = m1;
        auto out = protocol_send_m1(
            cfg_.suite, cfg_.protocol, s->owner, party_keys_[s->owner - 1].sk, s->peer,
            public_key(s->peer), m1,
            [&](size_t bits) { return oracle_.get_key(sid, bits, rng_); }, kdf_, rng_);
        if (!out) {
            s->state = SessionRejected{};
            record("send_m1", {{"sid", std::to_string(sid)}, {"result", "reject"}});
            return std::nullopt;
        }
        s->sent = out->m2;
        s->skey = out->k_sess;
        s->state = SessionAccepted{};
        record("send_m1", {{"sid", std::to_string(sid)}, {"m2", to_hex(*s->sent)}});
        return s->sent;
    }

    /// Delivers m2 to an initiator session. Acceptance stores the session
    /// key; any protocol abort (parse, missing QKD key, tag mismatch, or a
    /// session with no pending state) rejects. The pending state is erased
    /// either way.
    void send_m2(SessionId sid, const Bytes& m2) {
        Session* s = mutable_session(sid);
        if (!s || s->role != Role::Initiator) {
            record("send_m2", {{"sid", std::to_string(sid)}, {"result", "abort"}});
            return;
        }
        s->received = m2;
        const InitiatorState* st = std::get_if<InitiatorState>(&s->state);
        std::optional<Bytes> key;
        if (st) {
            key = protocol_send_m2(
                cfg_.suite, cfg_.protocol, s->owner, party_keys_[s->owner - 1].sk, s->peer, *st,
                m2, [&](KeyId kid) { return oracle_.get_key_with_id(sid, kid, directory()); },
                kdf_, rng_);
        }
        if (!key) {
            s->state = SessionRejected{};
            record("send_m2", {{"sid", std::to_string(sid)}, {"result", "reject"}});
            return;
        }
        s->skey = *key;
        s->state = SessionAccepted{};
        record("send_m2", {{"sid", std::to_string(sid)}, {"result", "accept"}});
    }

    /// Real-or-random challenge for one session of the adversary's choosing;
    /// only the first query takes effect. An incomplete test session yields a
    /// zero-length key in the real world (the incomplete gate fires anyway).
    std::optional<Bytes> test(SessionId sid) {
        if (sid == 0 || sid_star_ != 0) {
            record("test", {{"sid", std::to_string(sid)}, {"result", "ignored"}});
            return std::nullopt;
        }
        sid_star_ = sid;
        const Session* s = session(sid);
        Bytes k0 = s && s->skey ? *s->skey : Bytes{};
        Bytes k1 = rng_.bytes(cfg_.suite.sess_key_len());
        Bytes out = b_ == 0 ? k0 : k1;
        record("test", {{"sid", std::to_string(sid)}, {"key", to_hex(out)}});
        return out;
    }

    std::optional<Bytes> reveal(SessionId sid) {
        Session* s = mutable_session(sid);
        if (!s) {
            record("reveal", {{"sid", std::to_string(sid)}, {"result", "unknown"}});
            return std::nullopt;
        }
        s->revealed = true;
        record("reveal", {{"sid", std::to_string(sid)},
                          {"key", s->skey ? to_hex(*s->skey) : "null"}});
        return s->skey;
    }

    const Bytes& corrupt(PartyId i) {
        if (i < 1 || i > cfg_.n_parties)
            throw std::invalid_argument("corrupt: party index out of range");
        corrupted_[i] = true;
        record("corrupt", {{"party", std::to_string(i)}});
        return party_keys_[i - 1].sk;
    }

    /// The state as the adversary sees it: pending initiator secrets, or the
    /// Accept/Reject sentinel after erasure.
    SessionState reveal_state(SessionId sid) {
        Session* s = mutable_session(sid);
        if (!s) {
            record("reveal_state", {{"sid", std::to_string(sid)}, {"result", "unknown"}});
            return std::monostate{};
        }
        s->revealed_state = true;
        record("reveal_state", {{"sid", std::to_string(sid)}});
        return s->state;
    }

    std::optional<Bytes> qkd_leak(KeyId kid) {
        auto out = oracle_.leak(kid);
        record("qkd_leak",
               {{"kid", std::to_string(kid)}, {"key", out ? to_hex(*out) : "null"}});
        return out;
    }

    void qkd_override(KeyId kid, Bytes k) {
        record("qkd_override", {{"kid", std::to_string(kid)}, {"key", to_hex(k)}});
        oracle_.override_key(kid, std::move(k));
    }

    std::pair<std::optional<SessionId>, std::vector<SessionId>> qkd_key_holders(KeyId kid) {
        auto out = oracle_.key_holders(kid);
        record("qkd_key_holders", {{"kid", std::to_string(kid)}});
        return out;
    }

    /// Adversary-attributed derivation query; counts toward the query total.
    Bytes kdf_eval(const Bytes& k_b, const Bytes& k_a, const Bytes& k_e) {
        Bytes out = kdf_.eval(k_b, k_a, k_e, true);
        record("kdf", {{"out", to_hex(out)}});
        return out;
    }

    // --- bookkeeping used by predicates and verdicts ------------------------

    bool is_corrupted(PartyId i) const { return i >= 1 && i <= cfg_.n_parties && corrupted_[i]; }
    bool is_revealed(SessionId sid) const {
        const Session* s = session(sid);
        return s && s->revealed;
    }
    bool is_state_revealed(SessionId sid) const {
        const Session* s = session(sid);
        return s && s->revealed_state;
    }
    bool is_completed(SessionId sid) const {
        const Session* s = session(sid);
        return s && s->skey.has_value();
    }
    std::optional<Bytes> session_key(SessionId sid) const {
        const Session* s = session(sid);
        return s ? s->skey : std::nullopt;
    }

    SessionDirectory directory() const {
        return [this](SessionId sid) -> std::optional<PartyPair> {
            const Session* s = session(sid);
            if (!s) return std::nullopt;
            return PartyPair{s->owner, s->peer};
        };
    }

    // Test hook: install a session record directly. Exists so predicate unit
    // tests can evaluate states that no oracle trace reaches.
    SessionId install_session(Session s) {
        sessions_.push_back(std::move(s));
        return sessions_.size();
    }

private:
    Session* mutable_session(SessionId sid) {
        if (sid == 0 || sid > sessions_.size()) return nullptr;
        return &sessions_[sid - 1];
    }

    void record(std::string op, std::vector<std::pair<std::string, std::string>> fields) {
        trace_.push_back(TraceEvent{std::move(op), std::move(fields)});
    }

    GameConfig cfg_;
    int b_;
    Rng rng_;
    Rng adv_rng_;
    Kdf kdf_;
    QkdOracle oracle_;
    std::vector<KemKeyPair> party_keys_;
    std::vector<bool> corrupted_;
    std::vector<Session> sessions_;
    SessionId sid_star_ = 0;
    std::vector<TraceEvent> trace_;
};

/// Sessions matching `sid`: reversed (owner, peer), equal transcripts in the
/// crossed direction, and opposite roles.
inline std::vector<SessionId> find_matches(const GameEnv& env, SessionId sid_star) {
    std::vector<SessionId> out;
    const Session* star = env.session(sid_star);
    if (!star) return out;
    for (SessionId sid = 1; sid <= env.sid_counter(); ++sid) {
        const Session* s = env.session(sid);
        if (s->owner == star->peer && s->peer == star->owner && s->received == star->sent &&
            s->sent == star->received && s->role != star->role)
            out.push_back(sid);
    }
    return out;
}

inline std::vector<SessionId> completed(const GameEnv& env, const std::vector<SessionId>& sids) {
    std::vector<SessionId> out;
    for (SessionId sid : sids)
        if (env.is_completed(sid)) out.push_back(sid);
    return out;
}

/// Attacks no protocol can survive: unfinished or directly revealed test
/// session, a fully compromised test session, or a compromised unique match.
/// More than one matching session is rewarded, an absent match is trivial
/// only when the peer was corrupted.
inline bool trivial_pqc(const GameEnv& env, const std::vector<SessionId>& matches) {
    SessionId sid_star = env.test_sid();
    if (!env.is_completed(sid_star)) return true;
    if (env.is_revealed(sid_star)) return true;
    const Session* star = env.session(sid_star);
    if (env.is_corrupted(star->owner) && env.is_state_revealed(sid_star)) return true;
    if (matches.size() > 1) return false;
    if (matches.empty()) return env.is_corrupted(star->peer);
    SessionId m = matches.front();
    const Session* ms = env.session(m);
    return env.is_revealed(m) || (env.is_corrupted(ms->owner) && env.is_state_revealed(m));
}

/// trivial_pqc plus the known impersonation that combines a state reveal of
/// an unmatched test session with broken QKD.
inline bool attack_pqc(const GameEnv& env, const std::vector<SessionId>& matches) {
    if (trivial_pqc(env, matches)) return true;
    return matches.empty() && env.is_state_revealed(env.test_sid());
}

/// QKD-side triviality: security is only expected when some honest QKD key
/// was issued to or delivered to the test session, the test session key was
/// not revealed, and a unique completed match was not revealed either.
inline bool trivial_qkd(const GameEnv& env, const std::vector<SessionId>& matches) {
    SessionId sid_star = env.test_sid();
    if (!env.is_completed(sid_star)) return true;
    if (env.is_revealed(sid_star)) return true;
    std::vector<SessionId> complete = completed(env, matches);
    if (complete.size() == 1 && env.is_revealed(complete.front())) return true;
    const QkdOracle& oracle = env.oracle();
    for (KeyId kid = 1; kid <= oracle.kid_counter(); ++kid) {
        if (oracle.flag(kid) != QkdKeyFlag::Honest) continue;
        bool sent_here = oracle.sent_sid(kid) == sid_star;
        const auto& recv = oracle.recv_sids(kid);
        bool sole_receiver = recv.size() == 1 && recv.front() == sid_star;
        if (sent_here || sole_receiver) return false;
    }
    return true;
}

inline bool gate_fires(GameVariant variant, const GameEnv& env,
                       const std::vector<SessionId>& matches) {
    switch (variant) {
    case GameVariant::IndAaPqc: return trivial_pqc(env, matches);
    case GameVariant::IndStAaPqc: return attack_pqc(env, matches);
    case GameVariant::IndAaQkd: return trivial_qkd(env, matches);
    }
    return true;
}

/// Flat per-session view for trace exports.
struct SessionSummary {
    SessionId sid = 0;
    PartyId owner = 0;
    PartyId peer = 0;
    Role role = Role::Initiator;
    std::optional<Bytes> sent;
    std::optional<Bytes> received;
    bool accepted = false;
    std::optional<Bytes> key;
};

inline std::vector<SessionSummary> session_summaries(const GameEnv& env) {
    std::vector<SessionSummary> out;
    for (SessionId sid = 1; sid <= env.sid_counter(); ++sid) {
        const Session* s = env.session(sid);
        out.push_back(SessionSummary{sid, s->owner, s->peer, s->role, s->sent, s->received,
                                     s->skey.has_value(), s->skey});
    }
    return out;
}

struct GameOutcome {
    int challenge_bit = 0;
    int guess = 0;
    int gated_output = 0;
    std::vector<SessionId> matches;
    bool predicate_fired = false;
    uint64_t kdf_queries = 0;
    uint64_t n_sessions = 0;
    PartyId n_parties = 0;
    std::string diagnostic;
};

/// A strategy drives the oracle surface and returns its guess for the
/// challenge bit. Strategies must be pure in (env, adversary rng) so runs
/// replay exactly.
using Adversary = std::function<int(GameEnv&)>;

inline GameOutcome run_game(const GameConfig& cfg, const Adversary& adversary, int challenge_bit,
                            uint64_t seed) {
    GameEnv env(cfg, challenge_bit, seed);
    GameOutcome out;
    out.challenge_bit = challenge_bit;
    out.n_parties = cfg.n_parties;
    try {
        out.guess = adversary(env);
    } catch (const std::exception& e) {
        out.guess = 0;
        out.diagnostic = e.what();
    }
    out.matches = find_matches(env, env.test_sid());
    out.predicate_fired = gate_fires(cfg.variant, env, out.matches);
    out.gated_output = out.predicate_fired ? 0 : out.guess;
    out.kdf_queries = env.kdf_queries();
    out.n_sessions = env.sid_counter();
    return out;
}

/// |Pr[output 1 | b=0] - Pr[output 1 | b=1]| over paired seeded trials.
inline double advantage_estimate(const GameConfig& cfg, const Adversary& adversary,
                                 size_t trials, uint64_t seed) {
    if (trials < 1) throw std::invalid_argument("advantage_estimate: trials must be >= 1");
    Rng root(seed);
    size_t ones0 = 0, ones1 = 0;
    for (size_t t = 0; t < trials; ++t) {
        uint64_t trial_seed = root.next_u64();
        ones0 += size_t(run_game(cfg, adversary, 0, trial_seed).gated_output);
        ones1 += size_t(run_game(cfg, adversary, 1, trial_seed).gated_output);
    }
    double d = (double(ones0) - double(ones1)) / double(trials);
    return d < 0 ? -d : d;
}

} // namespace akelab
