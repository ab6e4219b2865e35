#include "doctest.h"

#include "akelab/attacks.hpp"
#include "akelab/trivial_branches.hpp"

using namespace akelab;

TEST_CASE("id-swap attack recovers the key on the untagged variant") {
    for (auto power :
         {DependentKeyPower::RevealOnly, DependentKeyPower::LeakQkd, DependentKeyPower::BreakPqc}) {
        for (uint64_t seed = 1; seed <= 5; ++seed) {
            auto report = dependent_key_report(ProtocolVariant::NoMac, GameVariant::IndStAaPqc,
                                               power, false, seed);
            INFO("power ", int(power), " seed ", seed);
            REQUIRE(report.verdict == AttackVerdict::KeyRecovered);
            REQUIRE(report.identity_exact);
            REQUIRE(report.matches_empty);
            REQUIRE(!report.gate_fired);
        }
    }
}

TEST_CASE("id-swap reveals stay fair under the qkd game when pqc is broken") {
    auto report = dependent_key_report(ProtocolVariant::NoMac, GameVariant::IndAaQkd,
                                       DependentKeyPower::BreakPqc, false, 3);
    CHECK(report.verdict == AttackVerdict::KeyRecovered);
    CHECK(!report.gate_fired); // the test session's QKD key stayed honest
}

TEST_CASE("id-swap aborts against the nested tags") {
    for (uint64_t seed = 1; seed <= 5; ++seed) {
        auto nested = dependent_key_report(ProtocolVariant::FullNested, GameVariant::IndStAaPqc,
                                           DependentKeyPower::RevealOnly, false, seed);
        CHECK(nested.verdict == AttackVerdict::Abort);
        auto wholesale = dependent_key_report(ProtocolVariant::FullNested, GameVariant::IndStAaPqc,
                                              DependentKeyPower::RevealOnly, true, seed);
        CHECK(wholesale.verdict == AttackVerdict::Abort);
        auto swapped = dependent_key_report(ProtocolVariant::SwappedMacOrder,
                                            GameVariant::IndStAaPqc,
                                            DependentKeyPower::RevealOnly, false, seed);
        CHECK(swapped.verdict == AttackVerdict::Abort);
    }
}

TEST_CASE("id-swap advantage is one on the untagged variant, zero on the nested one") {
    GameConfig cfg;
    cfg.variant = GameVariant::IndStAaPqc;
    cfg.protocol = ProtocolVariant::NoMac;
    double adv = advantage_estimate(cfg, make_dependent_key_adversary(), 30, 11);
    CHECK(adv == 1.0);
    cfg.protocol = ProtocolVariant::FullNested;
    double adv_nested = advantage_estimate(cfg, make_dependent_key_adversary(), 30, 12);
    CHECK(adv_nested == 0.0);
}

TEST_CASE("mac-order attack yields equal keys in non-matching accepted sessions") {
    for (uint64_t seed = 1; seed <= 5; ++seed) {
        auto report = nesting_order_report(ProtocolVariant::SwappedMacOrder,
                                           GameVariant::IndStAaPqc,
                                           OverrideTiming::BeforeDelivery, seed);
        REQUIRE(report.verdict == AttackVerdict::NonMatchingAccept);
        REQUIRE(report.both_accepted);
        REQUIRE(report.keys_equal);
        REQUIRE(report.non_matching);
        REQUIRE(!report.gate_fired); // revealing the non-matching peer is fair
    }
}

TEST_CASE("mac-order attack fails against the proper nesting") {
    for (uint64_t seed = 1; seed <= 5; ++seed) {
        auto report = nesting_order_report(ProtocolVariant::FullNested, GameVariant::IndStAaPqc,
                                           OverrideTiming::BeforeDelivery, seed);
        CHECK(report.verdict == AttackVerdict::Abort);
    }
}

TEST_CASE("mac-order attack is inert after delivery or without tags") {
    auto late = nesting_order_report(ProtocolVariant::SwappedMacOrder, GameVariant::IndStAaPqc,
                                     OverrideTiming::AfterDelivery, 4);
    CHECK(late.verdict == AttackVerdict::Completed);
    CHECK(late.keys_equal);
    CHECK(!late.non_matching); // honest delivery: the sessions still match

    auto untagged = nesting_order_report(ProtocolVariant::NoMac, GameVariant::IndStAaPqc,
                                         OverrideTiming::BeforeDelivery, 5);
    CHECK(untagged.verdict == AttackVerdict::Completed);
    CHECK(untagged.keys_equal);
    CHECK(!untagged.non_matching); // nothing to re-tag, the message is unchanged
}

TEST_CASE("mac-order advantage against the swapped order") {
    GameConfig cfg;
    cfg.variant = GameVariant::IndStAaPqc;
    cfg.protocol = ProtocolVariant::SwappedMacOrder;
    CHECK(advantage_estimate(cfg, make_nesting_order_adversary(), 30, 13) == 1.0);
    cfg.protocol = ProtocolVariant::FullNested;
    CHECK(advantage_estimate(cfg, make_nesting_order_adversary(), 30, 14) == 0.0);
}

TEST_CASE("state-reveal impersonation is gated exactly where intended") {
    for (uint64_t seed = 1; seed <= 5; ++seed) {
        auto strict = state_reveal_report(GameVariant::IndStAaPqc, QkdAttackPower::LeakKey, seed);
        REQUIRE(strict.verdict == AttackVerdict::GatedZero);
        REQUIRE(strict.key_matches);
        REQUIRE(strict.matches_empty);

        auto lax = state_reveal_report(GameVariant::IndAaPqc, QkdAttackPower::LeakKey, seed);
        REQUIRE(lax.verdict == AttackVerdict::KeyRecovered);
        REQUIRE(!lax.gate_fired);
    }
}

TEST_CASE("state-reveal verdicts hold across a 100-seed sweep") {
    for (uint64_t seed = 1; seed <= 100; ++seed) {
        REQUIRE(state_reveal_report(GameVariant::IndStAaPqc, QkdAttackPower::LeakKey, seed)
                    .verdict == AttackVerdict::GatedZero);
    }
}

TEST_CASE("state-reveal impersonation needs the qkd leak") {
    auto report = state_reveal_report(GameVariant::IndAaQkd, QkdAttackPower::None, 6);
    CHECK(report.verdict == AttackVerdict::Abort);
    CHECK(!report.key_matches);
}

TEST_CASE("state-reveal advantages across the three games") {
    auto adv_of = [](GameVariant gv, QkdAttackPower power, uint64_t seed) {
        GameConfig cfg;
        cfg.variant = gv;
        cfg.protocol = ProtocolVariant::FullNested;
        return advantage_estimate(cfg, make_state_reveal_adversary(power), 30, seed);
    };
    CHECK(adv_of(GameVariant::IndStAaPqc, QkdAttackPower::LeakKey, 21) == 0.0); // gated
    CHECK(adv_of(GameVariant::IndAaPqc, QkdAttackPower::LeakKey, 22) == 1.0);   // wins
    CHECK(adv_of(GameVariant::IndAaQkd, QkdAttackPower::None, 23) == 0.0);      // cannot finish
    CHECK(adv_of(GameVariant::IndAaQkd, QkdAttackPower::LeakKey, 24) == 0.0);   // leak is trivial here
}

TEST_CASE("combined-mac breaks win every trial and spare the hashed key") {
    for (size_t field : {size_t(8), size_t(128)}) {
        for (CombinedMacKind kind :
             {CombinedMacKind::Concat, CombinedMacKind::XorAgg, CombinedMacKind::CwSum}) {
            auto report = robust_break_report(kind, field, 50, 31);
            INFO("kind ", int(kind), " field ", field);
            CHECK(report.verdict == AttackVerdict::ForgeryAccepted);
            CHECK(report.success_rate == 1.0);
        }
    }
    CHECK(hash_keyed_resistance_rate(50, 32) == 0.0);
}

TEST_CASE("every predicate branch is reachable and evaluates as annotated") {
    auto checks = run_trivial_branch_suite(1000);
    CHECK(checks.size() >= 14);
    for (const auto& check : checks) {
        INFO(check.name, ": pqc ", check.actual_pqc, "/", check.expected_pqc, " attack ",
             check.actual_attack, "/", check.expected_attack, " qkd ", check.actual_qkd, "/",
             check.expected_qkd);
        CHECK(check.pass());
    }
}

TEST_CASE("qkd oracle guard lines") {
    for (auto& [name, ok] : qkd_guard_checks(77)) {
        INFO(name);
        CHECK(ok);
    }
}

TEST_CASE("attack runs are reproducible seed by seed") {
    auto a = dependent_key_report(ProtocolVariant::NoMac, GameVariant::IndStAaPqc,
                                  DependentKeyPower::RevealOnly, false, 42);
    auto b = dependent_key_report(ProtocolVariant::NoMac, GameVariant::IndStAaPqc,
                                  DependentKeyPower::RevealOnly, false, 42);
    CHECK(a.trace == b.trace);
    CHECK(a.verdict == b.verdict);
}
