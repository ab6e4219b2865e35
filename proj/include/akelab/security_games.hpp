#pragma once

#include <functional>
#include <memory>
#include <optional>
#include "akelab/bytes.hpp"
#include "akelab/kem.hpp"
#include "akelab/mac.hpp"
#include "akelab/rng.hpp"

namespace akelab {

// ---------------------------------------------------------------------------
// KEM indistinguishability games
// ---------------------------------------------------------------------------

/// Adapter giving the mock KEM the shape the harnesses expect. Any type with
/// keygen/encaps/decaps/key_len works, so combined KEMs plug in as well.
struct MockKem {
    KemScheme scheme;
    KemKeyPair keygen(Rng& rng) const { return kem_keygen(scheme, rng); }
    std::pair<Bytes, Bytes> encaps(const Bytes& pk, Rng& rng) const {
        return kem_encaps(scheme, pk, rng);
    }
    Bytes decaps(const Bytes& sk, const Bytes& ct, Rng& rng) const {
        return kem_decaps(scheme, sk, ct, rng);
    }
    size_t key_len() const { return scheme.key_len(); }
};

/// Two mock KEMs whose keys are added bitwise. The classic structural
/// counterexample: passively fine, trivially malleable under decapsulation
/// queries because the halves never bind to each other.
struct XorCombinedKem {
    KemScheme first;
    KemScheme second;

    KemKeyPair keygen(Rng& rng) const {
        KemKeyPair a = kem_keygen(first, rng);
        KemKeyPair b = kem_keygen(second, rng);
        Bytes pk = a.pk, sk = a.sk;
        append(pk, b.pk);
        append(sk, b.sk);
        return {pk, sk};
    }

    std::pair<Bytes, Bytes> encaps(const Bytes& pk, Rng& rng) const {
        auto [pk1, pk2] = split_pk(pk);
        auto [c1, k1] = kem_encaps(first, pk1, rng);
        auto [c2, k2] = kem_encaps(second, pk2, rng);
        Bytes ct = c1;
        append(ct, c2);
        return {ct, xor_bytes(k1, k2)};
    }

    Bytes decaps(const Bytes& sk, const Bytes& ct, Rng& rng) const {
        Bytes sk1(sk.begin(), sk.begin() + long(first.sk_len()));
        Bytes sk2(sk.begin() + long(first.sk_len()), sk.end());
        Bytes c1(ct.begin(), ct.begin() + long(first.ct_len()));
        Bytes c2(ct.begin() + long(first.ct_len()), ct.end());
        return xor_bytes(kem_decaps(first, sk1, c1, rng), kem_decaps(second, sk2, c2, rng));
    }

    size_t key_len() const { return first.key_len(); }

    std::pair<Bytes, Bytes> split_pk(const Bytes& pk) const {
        return {Bytes(pk.begin(), pk.begin() + long(first.pk_len())),
                Bytes(pk.begin() + long(first.pk_len()), pk.end())};
    }
};

/// Decapsulation oracle that refuses the challenge ciphertext.
template <typename K>
class DecapsOracle {
public:
    DecapsOracle(const K& kem, const Bytes& sk, const Bytes& challenge, Rng& rng)
        : kem_(kem), sk_(sk), challenge_(challenge), rng_(rng) {}

    std::optional<Bytes> operator()(const Bytes& ct) {
        if (ct == challenge_) return std::nullopt;
        return kem_.decaps(sk_, ct, rng_);
    }

private:
    const K& kem_;
    const Bytes& sk_;
    const Bytes& challenge_;
    Rng& rng_;
};

/// Passive game: the adversary sees (pk, challenge, key-or-random).
template <typename K, typename A>
int play_ind_cpa(const K& kem, A&& adversary, int b, uint64_t seed) {
    Rng rng(seed);
    KemKeyPair kp = kem.keygen(rng);
    auto [ct, k0] = kem.encaps(kp.pk, rng);
    Bytes k1 = rng.bytes(kem.key_len());
    return adversary(kp.pk, ct, b == 0 ? k0 : k1);
}

/// Active game: as above plus a decapsulation oracle minus the challenge.
template <typename K, typename A>
int play_ind_cca(const K& kem, A&& adversary, int b, uint64_t seed) {
    Rng rng(seed);
    KemKeyPair kp = kem.keygen(rng);
    auto [ct, k0] = kem.encaps(kp.pk, rng);
    Bytes k1 = rng.bytes(kem.key_len());
    DecapsOracle<K> oracle(kem, kp.sk, ct, rng);
    return adversary(kp.pk, ct, b == 0 ? k0 : k1, oracle);
}

// ---------------------------------------------------------------------------
// MAC forgery games
// ---------------------------------------------------------------------------

/// One-time strong forgery: see one tag, produce a different valid pair.
struct OtForgeryAdversary {
    virtual ~OtForgeryAdversary() = default;
    virtual Bytes choose_message(Rng& rng) = 0;
    virtual std::pair<Bytes, Bytes> forge(const Bytes& msg, const Bytes& tag, Rng& rng) = 0;
};

inline bool play_ot_sufcma(const MacScheme& scheme, OtForgeryAdversary& adversary,
                           uint64_t seed) {
    Rng root(seed);
    Rng game_rng(root.next_u64());
    Rng adv_rng(root.next_u64());
    Bytes key = game_rng.bytes(scheme.key_len());
    Bytes msg = adversary.choose_message(adv_rng);
    Bytes tag = mac_tag(scheme, key, msg);
    auto [msg2, tag2] = adversary.forge(msg, tag, adv_rng);
    if (msg2 == msg && tag2 == tag) return false;
    return mac_verify(scheme, key, msg2, tag2);
}

/// Two-key forgery game where the adversary picks one key slot, supplies its
/// value for tag generation, and may swap in a different value for
/// verification. A forgery on the same message under the swapped key counts.
struct RobustChoice {
    Bytes message;
    int slot = 2; // 1 = first key, 2 = second key
    Bytes key;
};

struct RobustForgery {
    Bytes message;
    Bytes tag;
    Bytes key;
};

struct RobustOtAdversary {
    virtual ~RobustOtAdversary() = default;
    virtual RobustChoice choose(Rng& rng) = 0;
    virtual RobustForgery forge(const Bytes& challenge_tag, Rng& rng) = 0;
};

inline bool play_robust_ot_sufcma(const CombinedMacScheme& scheme, RobustOtAdversary& adversary,
                                  uint64_t seed) {
    Rng root(seed);
    Rng game_rng(root.next_u64());
    Rng adv_rng(root.next_u64());
    size_t key_len = scheme.inner.key_len();
    Bytes k1 = game_rng.bytes(key_len);
    Bytes k2 = game_rng.bytes(key_len);

    RobustChoice choice = adversary.choose(adv_rng);
    if (choice.key.size() != key_len || (choice.slot != 1 && choice.slot != 2)) return false;
    const Bytes& tag_k1 = choice.slot == 1 ? choice.key : k1;
    const Bytes& tag_k2 = choice.slot == 2 ? choice.key : k2;
    Bytes challenge_tag = combined_mac_tag(scheme, tag_k1, tag_k2, choice.message);

    RobustForgery forgery = adversary.forge(challenge_tag, adv_rng);
    if (forgery.key.size() != key_len) return false;
    const Bytes& ver_k1 = choice.slot == 1 ? forgery.key : k1;
    const Bytes& ver_k2 = choice.slot == 2 ? forgery.key : k2;
    if (forgery.message == choice.message && forgery.tag == challenge_tag) return false;
    return combined_mac_verify(scheme, ver_k1, ver_k2, forgery.message, forgery.tag);
}

// ---------------------------------------------------------------------------
// The three structural break adversaries
// ---------------------------------------------------------------------------

namespace detail {

inline Bytes sample_distinct_key(Rng& rng, const Bytes& avoid) {
    Bytes k;
    do { k = rng.bytes(avoid.size()); } while (k == avoid);
    return k;
}

} // namespace detail

/// Against tag concatenation: re-tag the second half under a replaced key.
class ConcatBreak : public RobustOtAdversary {
public:
    explicit ConcatBreak(MacScheme inner) : inner_(inner) {}

    RobustChoice choose(Rng& rng) override {
        msg_ = rng.bytes(8);
        key_ = rng.bytes(inner_.key_len());
        return {msg_, 2, key_};
    }

    RobustForgery forge(const Bytes& challenge_tag, Rng& rng) override {
        size_t half = challenge_tag.size() / 2;
        Bytes tag1(challenge_tag.begin(), challenge_tag.begin() + long(half));
        Bytes old_tag2 = mac_tag(inner_, key_, msg_);
        Bytes new_key, new_tag2;
        do { // a colliding replacement tag would not count as a forgery
            new_key = detail::sample_distinct_key(rng, key_);
            new_tag2 = mac_tag(inner_, new_key, msg_);
        } while (new_tag2 == old_tag2);
        Bytes tag = tag1;
        append(tag, new_tag2);
        return {msg_, tag, new_key};
    }

private:
    MacScheme inner_;
    Bytes msg_, key_;
};

/// Against tag aggregation: shift the aggregate by the tag difference.
class XorAggBreak : public RobustOtAdversary {
public:
    explicit XorAggBreak(MacScheme inner) : inner_(inner) {}

    RobustChoice choose(Rng& rng) override {
        msg_ = rng.bytes(8);
        key_ = rng.bytes(inner_.key_len());
        return {msg_, 2, key_};
    }

    RobustForgery forge(const Bytes& challenge_tag, Rng& rng) override {
        Bytes old_tag2 = mac_tag(inner_, key_, msg_);
        Bytes new_key, new_tag2;
        do {
            new_key = detail::sample_distinct_key(rng, key_);
            new_tag2 = mac_tag(inner_, new_key, msg_);
        } while (new_tag2 == old_tag2);
        Bytes tag = challenge_tag;
        for (size_t i = 0; i < tag.size() && i < old_tag2.size(); ++i)
            tag[i] ^= uint8_t(old_tag2[i] ^ new_tag2[i]);
        return {msg_, tag, new_key};
    }

private:
    MacScheme inner_;
    Bytes msg_, key_;
};

/// Against the single summed polynomial key: changing the offset half of a
/// key shifts the tag by exactly that difference.
class OffsetShiftBreak : public RobustOtAdversary {
public:
    explicit OffsetShiftBreak(MacScheme inner) : inner_(inner) {}

    RobustChoice choose(Rng& rng) override {
        msg_ = rng.bytes(8);
        key_ = rng.bytes(inner_.key_len());
        return {msg_, 2, key_};
    }

    RobustForgery forge(const Bytes& challenge_tag, Rng& rng) override {
        size_t half = key_.size() / 2;
        Bytes new_key = key_;
        do {
            Bytes offset = rng.bytes(key_.size() - half);
            std::copy(offset.begin(), offset.end(), new_key.begin() + long(half));
        } while (new_key == key_);
        Bytes tag = challenge_tag;
        for (size_t i = 0; i + half < key_.size() && i < tag.size(); ++i)
            tag[i] ^= uint8_t(key_[half + i] ^ new_key[half + i]);
        return {msg_, tag, new_key};
    }

private:
    MacScheme inner_;
    Bytes msg_, key_;
};

using RobustAdversaryFactory = std::function<std::unique_ptr<RobustOtAdversary>()>;

inline RobustAdversaryFactory break_factory_for(CombinedMacKind kind, MacScheme inner) {
    switch (kind) {
    case CombinedMacKind::Concat:
        return [inner] { return std::make_unique<ConcatBreak>(inner); };
    case CombinedMacKind::XorAgg:
        return [inner] { return std::make_unique<XorAggBreak>(inner); };
    case CombinedMacKind::CwSum:
        return [inner] { return std::make_unique<OffsetShiftBreak>(inner); };
    case CombinedMacKind::HashKeyed:
        throw std::invalid_argument("no structural break exists for the hashed joint key");
    }
    throw std::logic_error("unknown combined MAC kind");
}

// ---------------------------------------------------------------------------
// Empirical estimators
// ---------------------------------------------------------------------------

/// Success frequency of a boolean per-seed experiment.
template <typename Trial>
double success_rate(Trial&& trial, size_t trials, uint64_t seed) {
    if (trials < 1) throw std::invalid_argument("success_rate: trials must be >= 1");
    Rng root(seed);
    size_t wins = 0;
    for (size_t t = 0; t < trials; ++t)
        if (trial(root.next_u64())) ++wins;
    return double(wins) / double(trials);
}

/// |Pr[run(0) = 1] - Pr[run(1) = 1]| over paired seeds.
template <typename Run>
double distinguishing_advantage(Run&& run, size_t trials, uint64_t seed) {
    if (trials < 1) throw std::invalid_argument("distinguishing_advantage: trials must be >= 1");
    Rng root(seed);
    long diff = 0;
    for (size_t t = 0; t < trials; ++t) {
        uint64_t s = root.next_u64();
        diff += run(0, s) - run(1, s);
    }
    double d = double(diff) / double(trials);
    return d < 0 ? -d : d;
}

} // namespace akelab
