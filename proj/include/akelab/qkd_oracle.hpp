#pragma once

#include <functional>
#include <optional>
#include <stdexcept>
#include <unordered_map>
#include <vector>
#include "akelab/bytes.hpp"
#include "akelab/rng.hpp"

namespace akelab {

using SessionId = uint64_t;
using KeyId = uint64_t;
using PartyId = uint32_t;

/// Which parties a session binds: (owner, peer).
struct PartyPair {
    PartyId owner;
    PartyId peer;
    friend bool operator==(const PartyPair&, const PartyPair&) = default;
};

/// Resolves a session id to its (owner, peer); the oracle itself does not
/// store the session registry, it is handed a lookup by its environment.
using SessionDirectory = std::function<std::optional<PartyPair>(SessionId)>;

enum class QkdKeyFlag { Honest, Leaked, Corrupt };

/// Ideal QKD key-delivery functionality. Honest callers fetch fresh keys by
/// sender session (get_key) and retrieve them once by key id on the peer side
/// (get_key_with_id); delivery erases the stored key. The adversary-facing
/// calls (leak, override_key, key_holders) model compromised QKD: reading a
/// key, planting a key, and observing which sessions held it.
///
/// One owner per instance; the environment serializes calls.
class QkdOracle {
public:
    KeyId kid_counter() const { return kidctr_; }

    /// Issues the next key id to session `sid` and returns a fresh uniform
    /// key of `key_bits` bits, unless a key was planted for that id earlier,
    /// in which case the planted key is handed out unchanged.
    std::pair<KeyId, Bytes> get_key(SessionId sid, size_t key_bits, Rng& rng) {
        if (key_bits == 0 || key_bits % 8 != 0)
            throw std::invalid_argument("get_key: key_bits must be a positive multiple of 8");
        ++kidctr_;
        sent_sid_[kidctr_] = sid;
        if (!key_.count(kidctr_)) {
            key_[kidctr_] = rng.bytes(key_bits / 8);
            flag_[kidctr_] = QkdKeyFlag::Honest;
        }
        return {kidctr_, key_[kidctr_]};
    }

    /// Delivers key `kid` to session `sid` if the requesting session's
    /// (owner, peer) is the reverse of the issuing session's pair and the
    /// key is still present. A delivered key is erased.
    std::optional<Bytes> get_key_with_id(SessionId sid, KeyId kid,
                                         const SessionDirectory& directory) {
        auto sent = sent_sid_.find(kid);
        if (sent == sent_sid_.end()) return std::nullopt;
        auto issuer = directory(sent->second);
        auto caller = directory(sid);
        if (!issuer || !caller) return std::nullopt;
        if (!(issuer->owner == caller->peer && issuer->peer == caller->owner))
            return std::nullopt;
        auto it = key_.find(kid);
        if (it == key_.end()) return std::nullopt;
        recv_sids_[kid].push_back(sid);
        Bytes k = std::move(it->second);
        key_.erase(it);
        return k;
    }

    /// Reveals key `kid` to the adversary; an honest key becomes leaked.
    /// Returns nothing when the key was already delivered (erased) or never
    /// existed.
    std::optional<Bytes> leak(KeyId kid) {
        auto f = flag_.find(kid);
        if (f != flag_.end() && f->second == QkdKeyFlag::Honest)
            f->second = QkdKeyFlag::Leaked;
        auto it = key_.find(kid);
        if (it == key_.end()) return std::nullopt;
        return it->second;
    }

    /// Plants key `kid` := k. Works on future ids as well, so an adversary
    /// can seed a key before it is issued.
    void override_key(KeyId kid, Bytes k) {
        key_[kid] = std::move(k);
        flag_[kid] = QkdKeyFlag::Corrupt;
    }

    /// (issuing session, delivered-to sessions); public information.
    std::pair<std::optional<SessionId>, std::vector<SessionId>> key_holders(KeyId kid) const {
        std::optional<SessionId> sent;
        if (auto it = sent_sid_.find(kid); it != sent_sid_.end()) sent = it->second;
        std::vector<SessionId> recv;
        if (auto it = recv_sids_.find(kid); it != recv_sids_.end()) recv = it->second;
        return {sent, recv};
    }

    std::optional<QkdKeyFlag> flag(KeyId kid) const {
        auto it = flag_.find(kid);
        if (it == flag_.end()) return std::nullopt;
        return it->second;
    }

    bool key_present(KeyId kid) const { return key_.count(kid) != 0; }

    std::optional<SessionId> sent_sid(KeyId kid) const {
        auto it = sent_sid_.find(kid);
        if (it == sent_sid_.end()) return std::nullopt;
        return it->second;
    }

    const std::vector<SessionId>& recv_sids(KeyId kid) const {
        static const std::vector<SessionId> empty;
        auto it = recv_sids_.find(kid);
        return it == recv_sids_.end() ? empty : it->second;
    }

private:
    KeyId kidctr_ = 0;
    std::unordered_map<KeyId, Bytes> key_;
    std::unordered_map<KeyId, QkdKeyFlag> flag_;
    std::unordered_map<KeyId, SessionId> sent_sid_;
    std::unordered_map<KeyId, std::vector<SessionId>> recv_sids_;
};

} // namespace akelab
