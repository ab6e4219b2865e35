#include "doctest.h"

#include <cmath>
#include "akelab/security_games.hpp"

using namespace akelab;

namespace {
KemScheme mock() { return KemScheme{"m", 256, 256, 256, 256, 0.0}; }
}

TEST_CASE("passive kem game: null adversary has zero advantage") {
    MockKem kem{mock()};
    auto constant = [](const Bytes&, const Bytes&, const Bytes&) { return 0; };
    double adv = distinguishing_advantage(
        [&](int b, uint64_t s) { return play_ind_cpa(kem, constant, b, s); }, 200, 1);
    CHECK(adv == 0.0);
}

TEST_CASE("passive kem game: the mock kem is breakable by design") {
    MockKem kem{mock()};
    auto whitebox = [&](const Bytes& pk, const Bytes& ct, const Bytes& key) {
        return key == kem_public_recompute(kem.scheme, pk, ct) ? 0 : 1;
    };
    double adv = distinguishing_advantage(
        [&](int b, uint64_t s) { return play_ind_cpa(kem, whitebox, b, s); }, 200, 2);
    CHECK(adv == 1.0);
}

TEST_CASE("paired seeds give the same challenge in both worlds") {
    MockKem kem{mock()};
    Bytes pk0, pk1, ct0, ct1, k0, k1;
    auto capture0 = [&](const Bytes& pk, const Bytes& ct, const Bytes& k) {
        pk0 = pk; ct0 = ct; k0 = k;
        return 0;
    };
    auto capture1 = [&](const Bytes& pk, const Bytes& ct, const Bytes& k) {
        pk1 = pk; ct1 = ct; k1 = k;
        return 0;
    };
    play_ind_cpa(kem, capture0, 0, 99);
    play_ind_cpa(kem, capture1, 1, 99);
    CHECK(pk0 == pk1);
    CHECK(ct0 == ct1);
    CHECK(k0 != k1);
}

TEST_CASE("active kem game refuses the challenge decapsulation") {
    MockKem kem{mock()};
    auto prober = [&](const Bytes&, const Bytes& ct, const Bytes&, DecapsOracle<MockKem>& dec) {
        CHECK(!dec(ct).has_value()); // exact challenge: refused
        Bytes other = ct;
        other[0] ^= 1;
        CHECK(dec(other).has_value());
        return 0;
    };
    play_ind_cca(kem, prober, 0, 3);
}

TEST_CASE("cross-query recovery against the xor-combined kem") {
    XorCombinedKem kem{mock(), mock()};
    auto mix_and_match = [&](const Bytes& pk, const Bytes& ct, const Bytes& key,
                             DecapsOracle<XorCombinedKem>& dec) {
        Rng local(7);
        auto [pk1, pk2] = kem.split_pk(pk);
        size_t ct1len = kem.first.ct_len();
        Bytes c1_star(ct.begin(), ct.begin() + long(ct1len));
        Bytes c2_star(ct.begin() + long(ct1len), ct.end());
        auto [c1, k1] = kem_encaps(kem.first, pk1, local);
        auto [c2, k2] = kem_encaps(kem.second, pk2, local);
        // (fresh c1, challenge c2) and (challenge c1, fresh c2)
        Bytes q1 = c1, q2 = c1_star;
        append(q1, c2_star);
        append(q2, c2);
        Bytes r1 = *dec(q1); // k1 ^ k2*
        Bytes r2 = *dec(q2); // k1* ^ k2
        Bytes recovered = xor_bytes(xor_bytes(r1, k1), xor_bytes(r2, k2));
        return recovered == key ? 0 : 1;
    };
    double adv = distinguishing_advantage(
        [&](int b, uint64_t s) { return play_ind_cca(kem, mix_and_match, b, s); }, 100, 4);
    CHECK(adv == 1.0);
}

namespace {

struct ReplayForger : OtForgeryAdversary {
    Bytes choose_message(Rng& rng) override { return rng.bytes(4); }
    std::pair<Bytes, Bytes> forge(const Bytes& m, const Bytes& tag, Rng&) override {
        return {m, tag};
    }
};

struct RandomTagForger : OtForgeryAdversary {
    Bytes choose_message(Rng& rng) override { return rng.bytes(1); }
    std::pair<Bytes, Bytes> forge(const Bytes& m, const Bytes&, Rng& rng) override {
        Bytes m2;
        do { m2 = rng.bytes(1); } while (m2 == m);
        return {m2, rng.bytes(1)};
    }
};

struct SameTagFreshMessageForger : OtForgeryAdversary {
    Bytes choose_message(Rng& rng) override { return rng.bytes(16); }
    std::pair<Bytes, Bytes> forge(const Bytes& m, const Bytes& tag, Rng& rng) override {
        Bytes m2;
        do { m2 = rng.bytes(16); } while (m2 == m);
        return {m2, tag};
    }
};

} // namespace

TEST_CASE("one-time forgery game basics") {
    MacScheme tiny = MacScheme::carter_wegman(8);
    ReplayForger replay;
    for (uint64_t s = 0; s < 50; ++s) CHECK(!play_ot_sufcma(tiny, replay, s));

    // Random tag against the tiny field: succeeds at the field rate.
    RandomTagForger random_forger;
    double rate = success_rate(
        [&](uint64_t s) { return play_ot_sufcma(tiny, random_forger, s); }, 10000, 5);
    double sigma = std::sqrt((1.0 / 256) * (255.0 / 256) / 10000);
    CHECK(rate > 1.0 / 256 - 3 * sigma);
    CHECK(rate < 1.0 / 256 + 3 * sigma);

    // Replaying the tag on a fresh message at full field width never works.
    MacScheme full = MacScheme::carter_wegman(128);
    SameTagFreshMessageForger stale;
    double rate_full =
        success_rate([&](uint64_t s) { return play_ot_sufcma(full, stale, s); }, 200, 6);
    CHECK(rate_full == 0.0);
}

TEST_CASE("the three structural breaks win always, on both fields") {
    for (size_t field_bits : {size_t(8), size_t(128)}) {
        MacScheme inner = MacScheme::carter_wegman(field_bits);
        for (CombinedMacKind kind :
             {CombinedMacKind::Concat, CombinedMacKind::XorAgg, CombinedMacKind::CwSum}) {
            CombinedMacScheme scheme{kind, inner};
            auto factory = break_factory_for(kind, inner);
            double rate = success_rate(
                [&](uint64_t s) {
                    auto adversary = factory();
                    return play_robust_ot_sufcma(scheme, *adversary, s);
                },
                100, 7);
            INFO("kind ", int(kind), " field ", field_bits);
            CHECK(rate == 1.0);
        }
    }
}

TEST_CASE("the hashed joint key resists the same three recipes") {
    MacScheme inner = MacScheme::keyed_hash();
    CombinedMacScheme scheme{CombinedMacKind::HashKeyed, inner};
    for (CombinedMacKind recipe :
         {CombinedMacKind::Concat, CombinedMacKind::XorAgg, CombinedMacKind::CwSum}) {
        auto factory = break_factory_for(recipe, inner);
        double rate = success_rate(
            [&](uint64_t s) {
                auto adversary = factory();
                return play_robust_ot_sufcma(scheme, *adversary, s);
            },
            100, 8);
        CHECK(rate == 0.0);
    }
}

namespace {

struct MalformedKeyAdversary : RobustOtAdversary {
    RobustChoice choose(Rng& rng) override {
        return {rng.bytes(4), 2, rng.bytes(3)}; // wrong key length
    }
    RobustForgery forge(const Bytes& tag, Rng& rng) override { return {rng.bytes(4), tag, rng.bytes(3)}; }
};

} // namespace

TEST_CASE("a query-free active adversary reduces to the passive game") {
    MockKem kem{mock()};
    auto passive_judge = [&](const Bytes& pk, const Bytes& ct, const Bytes& key) {
        return key == kem_public_recompute(kem.scheme, pk, ct) ? 0 : 1;
    };
    for (uint64_t s = 1; s <= 20; ++s) {
        for (int b : {0, 1}) {
            int via_cpa = play_ind_cpa(kem, passive_judge, b, s);
            int via_cca = play_ind_cca(
                kem,
                [&](const Bytes& pk, const Bytes& ct, const Bytes& key, DecapsOracle<MockKem>&) {
                    return passive_judge(pk, ct, key);
                },
                b, s);
            CHECK(via_cpa == via_cca);
        }
    }
}

TEST_CASE("forgery games are pure in (adversary, seed)") {
    MacScheme tiny = MacScheme::carter_wegman(8);
    RandomTagForger forger_a, forger_b;
    for (uint64_t s = 1; s <= 50; ++s)
        CHECK(play_ot_sufcma(tiny, forger_a, s) == play_ot_sufcma(tiny, forger_b, s));
    CombinedMacScheme scheme{CombinedMacKind::XorAgg, tiny};
    for (uint64_t s = 1; s <= 50; ++s) {
        XorAggBreak a(tiny), b(tiny);
        CHECK(play_robust_ot_sufcma(scheme, a, s) == play_robust_ot_sufcma(scheme, b, s));
    }
}

TEST_CASE("malformed adversary keys lose the robust game") {
    CombinedMacScheme scheme{CombinedMacKind::XorAgg, MacScheme::carter_wegman(8)};
    MalformedKeyAdversary bad;
    CHECK(!play_robust_ot_sufcma(scheme, bad, 1));
}

TEST_CASE("the adversary may control the first slot too") {
    // Symmetric variant of the concat break, controlling slot 1.
    struct Slot1Break : RobustOtAdversary {
        MacScheme inner = MacScheme::carter_wegman(8);
        Bytes msg, key;
        RobustChoice choose(Rng& rng) override {
            msg = rng.bytes(4);
            key = rng.bytes(inner.key_len());
            return {msg, 1, key};
        }
        RobustForgery forge(const Bytes& challenge, Rng& rng) override {
            size_t half = challenge.size() / 2;
            Bytes tag2(challenge.begin() + long(half), challenge.end());
            Bytes old_tag1 = mac_tag(inner, key, msg);
            Bytes new_key, new_tag1;
            do {
                do { new_key = rng.bytes(inner.key_len()); } while (new_key == key);
                new_tag1 = mac_tag(inner, new_key, msg);
            } while (new_tag1 == old_tag1);
            Bytes tag = new_tag1;
            append(tag, tag2);
            return {msg, tag, new_key};
        }
    };
    CombinedMacScheme scheme{CombinedMacKind::Concat, MacScheme::carter_wegman(8)};
    double rate = success_rate(
        [&](uint64_t s) {
            Slot1Break adversary;
            return play_robust_ot_sufcma(scheme, adversary, s);
        },
        100, 9);
    CHECK(rate == 1.0);
}
