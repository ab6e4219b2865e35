#include "doctest.h"

#include <cmath>
#include "akelab/bounds.hpp"
#include "akelab/rng.hpp"

using namespace akelab;

TEST_CASE("bounds vanish on zero inputs") {
    PqcBoundParams zero;
    zero.len_eph_bits = 256;
    zero.len_stat_bits = 256;
    CHECK(pqc_bound(zero) == 0.0);
    PqcBoundParams one_session = zero;
    one_session.n_sessions = 1;
    one_session.n_parties = 1;
    CHECK(pqc_bound(one_session) == 0.0);
    CHECK(qkd_bound(0, 0, 0, 0) == 0.0);
    CHECK(correctness_bound(0, 0) == 0.0);
}

TEST_CASE("closed-form spot values") {
    CHECK(qkd_bound(1, 0, 0, 0.5) == doctest::Approx(1.0));
    CHECK(qkd_bound(10, 1e-6, 1e-6, 0) == doctest::Approx(6e-4));
    CHECK(correctness_bound(0.01, 0.02) == doctest::Approx(0.05));
    CHECK(correctness_bound(1.0, 0.0) == doctest::Approx(1.0));
}

// Term-by-term evaluation at extended precision, written independently of
// the shipped formula (sums of explicitly named addends, exp2l/sqrtl).
static long double ref_pqc_bound(const PqcBoundParams& p) {
    long double ns = p.n_sessions, np = p.n_parties, qh = p.kdf_queries;
    long double root_eph = sqrtl(exp2l((long double)p.len_eph_bits));
    long double root_stat = sqrtl(exp2l((long double)p.len_stat_bits));
    long double a = (long double)p.delta_eph + (long double)p.adv_cpa_eph + 2.0L * qh / root_eph;
    long double b =
        (long double)p.delta_stat + (long double)p.adv_cca_stat + 2.0L * qh / root_stat;
    long double c = (long double)p.delta_stat + (long double)p.adv_cca_stat2 +
                    ns * ns * (long double)p.mu_secret + ns * (2.0L * qh / root_stat) +
                    ns * (long double)p.adv_mac_pqc;
    return 2.0L * ns * ns * a + 2.0L * ns * ns * np * b + 2.0L * ns * (long double)p.mu_encaps +
           8.0L * ns * np * c;
}

static long double ref_qkd_bound(long double ns, long double ds, long double de,
                                 long double adv) {
    return 2.0L * ns * (ns * (2.0L * ds + de) + adv);
}

TEST_CASE("bound evaluators agree with the extended-precision reference") {
    Rng rng(2718);
    for (int i = 0; i < 1000; ++i) {
        PqcBoundParams p;
        p.n_sessions = double(rng.below(1000000));
        p.n_parties = double(1 + rng.below(1000));
        p.kdf_queries = double(rng.below(uint64_t(1) << 40));
        p.delta_eph = rng.uniform();
        p.delta_stat = rng.uniform();
        p.adv_cpa_eph = rng.uniform();
        p.adv_cca_stat = rng.uniform();
        p.adv_cca_stat2 = rng.uniform();
        p.adv_mac_pqc = rng.uniform();
        p.mu_encaps = rng.uniform();
        p.mu_secret = rng.uniform();
        p.len_eph_bits = double(8 * (1 + rng.below(64)));
        p.len_stat_bits = double(8 * (1 + rng.below(64)));

        long double reference = ref_pqc_bound(p);
        double got = pqc_bound(p);
        long double rel = fabsl((long double)got - reference) / reference;
        REQUIRE(rel < 1e-12);

        long double qref = ref_qkd_bound(p.n_sessions, p.delta_stat, p.delta_eph, p.adv_mac_pqc);
        double qgot = qkd_bound(p.n_sessions, p.delta_stat, p.delta_eph, p.adv_mac_pqc);
        if (qref > 0) REQUIRE(fabsl((long double)qgot - qref) / qref < 1e-12);
    }
}

TEST_CASE("worked example") {
    PqcBoundParams p;
    p.n_sessions = 2;
    p.n_parties = 3;
    p.kdf_queries = 16;
    p.delta_eph = std::exp2(-64);
    p.delta_stat = std::exp2(-64);
    p.len_eph_bits = 256;
    p.len_stat_bits = 256;
    double got = pqc_bound(p);
    long double want = ref_pqc_bound(p);
    CHECK(std::fabs(got - double(want)) / double(want) < 1e-12);
    CHECK(got > 0.0);
}
