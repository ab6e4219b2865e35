// Batch driver: replay the scripted attacks, measure correctness, evaluate
// the closed-form bounds, and serve the key-delivery oracle over a local
// JSON-lines socket. Every command is deterministic in its explicit seeds.

#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cmath>
#include <csignal>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "akelab/attacks.hpp"
#include "akelab/bounds.hpp"
#include "akelab/qkd_service.hpp"
#include "akelab/trivial_branches.hpp"

using namespace akelab;
using ordered_json = nlohmann::ordered_json;

namespace {

constexpr int kReportSchema = 1;

ordered_json trace_to_json(const std::vector<TraceEvent>& trace) {
    ordered_json out = ordered_json::array();
    for (const TraceEvent& ev : trace) {
        ordered_json entry;
        entry["op"] = ev.op;
        for (const auto& [k, v] : ev.fields) entry[k] = v;
        out.push_back(std::move(entry));
    }
    return out;
}

ordered_json sessions_to_json(const std::vector<SessionSummary>& sessions) {
    ordered_json out = ordered_json::array();
    for (const SessionSummary& s : sessions) {
        ordered_json entry;
        entry["sid"] = s.sid;
        entry["role"] = s.role == Role::Initiator ? "initiator" : "responder";
        entry["owner"] = s.owner;
        entry["peer"] = s.peer;
        ordered_json messages;
        messages["sent"] = s.sent ? ordered_json(to_hex(*s.sent)) : ordered_json(nullptr);
        messages["received"] =
            s.received ? ordered_json(to_hex(*s.received)) : ordered_json(nullptr);
        entry["messages"] = std::move(messages);
        entry["accepted"] = s.accepted;
        if (s.key) entry["key"] = to_hex(*s.key);
        out.push_back(std::move(entry));
    }
    return out;
}

std::vector<uint64_t> parse_seeds(const std::string& spec) {
    std::vector<uint64_t> seeds;
    if (auto dots = spec.find(".."); dots != std::string::npos) {
        uint64_t lo = std::stoull(spec.substr(0, dots));
        uint64_t hi = std::stoull(spec.substr(dots + 2));
        if (hi < lo) throw CLI::ValidationError("--seeds", "range is reversed");
        if (hi - lo > 1000000) throw CLI::ValidationError("--seeds", "range too large");
        for (uint64_t s = lo; s <= hi; ++s) seeds.push_back(s);
        return seeds;
    }
    size_t pos = 0;
    while (pos < spec.size()) {
        size_t comma = spec.find(',', pos);
        if (comma == std::string::npos) comma = spec.size();
        seeds.push_back(std::stoull(spec.substr(pos, comma - pos)));
        pos = comma + 1;
    }
    if (seeds.empty()) throw CLI::ValidationError("--seeds", "no seeds given");
    return seeds;
}

ProtocolVariant parse_variant(const std::string& name) {
    if (name == "full_nested") return ProtocolVariant::FullNested;
    if (name == "no_mac") return ProtocolVariant::NoMac;
    if (name == "swapped_mac_order") return ProtocolVariant::SwappedMacOrder;
    throw CLI::ValidationError("--variant", "unknown variant: " + name);
}

GameVariant parse_game(const std::string& name) {
    if (name == "ind-aa-pqc") return GameVariant::IndAaPqc;
    if (name == "ind-staa-pqc") return GameVariant::IndStAaPqc;
    if (name == "ind-aa-qkd") return GameVariant::IndAaQkd;
    throw CLI::ValidationError("--game", "unknown game: " + name);
}

void emit(const ordered_json& report, const std::string& out_path) {
    std::string text = report.dump(2) + "\n";
    if (out_path.empty() || out_path == "-") {
        std::cout << text;
        return;
    }
    std::ofstream file(out_path, std::ios::binary | std::ios::trunc);
    if (!file) throw std::runtime_error("cannot open output file: " + out_path);
    file << text;
}

struct ScenarioResult {
    AttackVerdict verdict;
    std::vector<TraceEvent> trace;
    std::vector<SessionSummary> sessions;
};

struct AttackEntry {
    std::function<ScenarioResult(ProtocolVariant, GameVariant, const PrimitiveSuite&, uint64_t)> run;
    std::function<AttackVerdict(ProtocolVariant, GameVariant)> expected;
    std::function<Adversary()> adversary; // null when no game adversary exists
};

ScenarioResult run_honest(ProtocolVariant pv, GameVariant gv, const PrimitiveSuite& suite,
                          uint64_t seed) {
    GameConfig cfg;
    cfg.variant = gv;
    cfg.protocol = pv;
    cfg.suite = suite;
    GameEnv env(cfg, 0, seed);
    SessionId a = env.est(1, 2, Role::Initiator);
    SessionId b = env.est(2, 1, Role::Responder);
    auto m1 = env.send_init(a);
    auto m2 = m1 ? env.send_m1(b, *m1) : std::nullopt;
    if (m2) env.send_m2(a, *m2);
    env.test(a);
    bool ok = env.is_completed(a) && env.is_completed(b) &&
              env.session_key(a) == env.session_key(b) &&
              find_matches(env, a).size() == 1;
    return {ok ? AttackVerdict::Completed : AttackVerdict::Abort, env.trace(),
            session_summaries(env)};
}

std::map<std::string, AttackEntry> attack_registry() {
    std::map<std::string, AttackEntry> reg;

    auto dependent = [](DependentKeyPower power) {
        return AttackEntry{
            [power](ProtocolVariant pv, GameVariant gv, const PrimitiveSuite& suite,
                    uint64_t seed) {
                auto report = dependent_key_report(pv, gv, power, false, seed, suite);
                return ScenarioResult{report.verdict, std::move(report.trace),
                                      std::move(report.sessions)};
            },
            [](ProtocolVariant pv, GameVariant) {
                return pv == ProtocolVariant::NoMac ? AttackVerdict::KeyRecovered
                                                    : AttackVerdict::Abort;
            },
            [power] { return make_dependent_key_adversary(power); }};
    };
    reg["dependent_key"] = dependent(DependentKeyPower::RevealOnly);
    reg["dependent_key_qkd_leak"] = dependent(DependentKeyPower::LeakQkd);
    reg["dependent_key_pqc_break"] = dependent(DependentKeyPower::BreakPqc);

    reg["nesting_order"] = AttackEntry{
        [](ProtocolVariant pv, GameVariant gv, const PrimitiveSuite& suite, uint64_t seed) {
            auto report = nesting_order_report(pv, gv, OverrideTiming::BeforeDelivery, seed, suite);
            return ScenarioResult{report.verdict, std::move(report.trace),
                                  std::move(report.sessions)};
        },
        [](ProtocolVariant pv, GameVariant) {
            switch (pv) {
            case ProtocolVariant::SwappedMacOrder: return AttackVerdict::NonMatchingAccept;
            case ProtocolVariant::FullNested: return AttackVerdict::Abort;
            case ProtocolVariant::NoMac: return AttackVerdict::Completed;
            }
            return AttackVerdict::Completed;
        },
        [] { return make_nesting_order_adversary(); }};

    reg["state_reveal"] = AttackEntry{
        [](ProtocolVariant, GameVariant gv, const PrimitiveSuite& suite, uint64_t seed) {
            auto report = state_reveal_report(gv, QkdAttackPower::LeakKey, seed, suite);
            return ScenarioResult{report.verdict, std::move(report.trace),
                                  std::move(report.sessions)};
        },
        [](ProtocolVariant, GameVariant gv) {
            return gv == GameVariant::IndAaPqc ? AttackVerdict::KeyRecovered
                                               : AttackVerdict::GatedZero;
        },
        [] { return make_state_reveal_adversary(); }};

    auto robust = [](CombinedMacKind kind) {
        return AttackEntry{
            [kind](ProtocolVariant, GameVariant, const PrimitiveSuite&, uint64_t seed) {
                auto report = robust_break_report(kind, 128, 1, seed);
                return ScenarioResult{report.verdict, {}, {}};
            },
            [](ProtocolVariant, GameVariant) { return AttackVerdict::ForgeryAccepted; },
            nullptr};
    };
    reg["robust_mac_concat"] = robust(CombinedMacKind::Concat);
    reg["robust_mac_xor"] = robust(CombinedMacKind::XorAgg);
    reg["robust_mac_cwsum"] = robust(CombinedMacKind::CwSum);

    reg["honest"] = AttackEntry{
        [](ProtocolVariant pv, GameVariant gv, const PrimitiveSuite& suite, uint64_t seed) {
            return run_honest(pv, gv, suite, seed);
        },
        [](ProtocolVariant, GameVariant) { return AttackVerdict::Completed; },
        nullptr};
    return reg;
}

int cmd_run(const std::string& attack_name, const std::string& variant_name,
            const std::string& game_name, const std::string& seeds_spec, double delta_eph,
            double delta_stat, size_t advantage_trials, bool include_trace,
            const std::string& out_path) {
    auto registry = attack_registry();
    auto it = registry.find(attack_name);
    if (it == registry.end()) {
        std::cerr << "unknown attack: " << attack_name << "\n";
        return 2;
    }
    ProtocolVariant pv = parse_variant(variant_name);
    GameVariant gv = parse_game(game_name);
    std::vector<uint64_t> seeds = parse_seeds(seeds_spec);
    PrimitiveSuite suite = default_suite(delta_stat, delta_eph);

    ordered_json report;
    report["schema"] = kReportSchema;
    report["command"] = "run";
    report["scenario"] = {{"attack", attack_name},
                          {"variant", variant_name},
                          {"game", game_name},
                          {"delta_eph", delta_eph},
                          {"delta_stat", delta_stat}};
    ordered_json results = ordered_json::array();
    bool all_pass = true;
    for (uint64_t seed : seeds) {
        ScenarioResult res = it->second.run(pv, gv, suite, seed);
        AttackVerdict expected = it->second.expected(pv, gv);
        bool pass = res.verdict == expected;
        all_pass = all_pass && pass;
        ordered_json entry;
        entry["seed"] = seed;
        entry["verdict"] = to_string(res.verdict);
        entry["expected"] = to_string(expected);
        entry["pass"] = pass;
        if (include_trace) {
            entry["trace"] = trace_to_json(res.trace);
            entry["sessions"] = sessions_to_json(res.sessions);
        }
        results.push_back(std::move(entry));
    }
    report["results"] = std::move(results);
    if (attack_name.rfind("robust_mac_", 0) == 0) {
        size_t wins = 0;
        for (const auto& entry : report["results"])
            if (entry["verdict"] == "forgery_accepted") ++wins;
        double rate = double(wins) / double(seeds.size());
        double ci95 = 1.96 * std::sqrt(rate * (1.0 - rate) / double(seeds.size()));
        std::string scheme = attack_name.substr(std::string("robust_mac_").size());
        report["forgery_summary"] = {{"game", "robust-ot-sufcma"},
                                     {"scheme", scheme},
                                     {"trials", seeds.size()},
                                     {"success_rate", rate},
                                     {"ci95", ci95}};
    }
    if (advantage_trials > 0 && it->second.adversary) {
        GameConfig cfg;
        cfg.variant = gv;
        cfg.protocol = pv;
        cfg.suite = suite;
        report["advantage"] =
            advantage_estimate(cfg, it->second.adversary(), advantage_trials, seeds.front());
        report["advantage_trials"] = advantage_trials;
    }
    report["all_pass"] = all_pass;
    emit(report, out_path);
    return all_pass ? 0 : 1;
}

int cmd_correctness(double delta_eph, double delta_stat, size_t runs, uint64_t seed,
                    const std::string& out_path) {
    PrimitiveSuite suite = default_suite(delta_stat, delta_eph);
    QkdOracle oracle;
    Kdf kdf(KdfMode::LazyTable, suite.pqc_key_bits, seed ^ 0x9e3779b9);
    Rng rng(seed);
    size_t bad = 0;
    for (size_t i = 0; i < runs; ++i) {
        HonestRunResult r = honest_run(suite, ProtocolVariant::FullNested, oracle, kdf, rng,
                                       SessionId(2 * i + 1), SessionId(2 * i + 2));
        if (!r.initiator_accepted || r.initiator_key != r.responder_key) ++bad;
    }
    double rate = double(bad) / double(runs);
    double bound = correctness_bound(delta_eph, delta_stat);
    double sigma = std::sqrt(bound * (1.0 - bound) / double(runs));
    bool pass = rate <= bound + 3.0 * sigma;

    ordered_json report;
    report["schema"] = kReportSchema;
    report["command"] = "correctness";
    report["delta_eph"] = delta_eph;
    report["delta_stat"] = delta_stat;
    report["runs"] = runs;
    report["seed"] = seed;
    report["mismatch_or_abort_rate"] = rate;
    report["bound"] = bound;
    report["tolerance_3sigma"] = 3.0 * sigma;
    report["pass"] = pass;
    emit(report, out_path);
    return pass ? 0 : 1;
}

int cmd_bounds(double sessions, double parties, double kdf_queries, double delta_eph,
               double delta_stat, double adv_kem, double adv_mac, double mu_encaps,
               double mu_secret, double len_eph, double len_stat, const std::string& out_path) {
    PqcBoundParams p;
    p.n_sessions = sessions;
    p.n_parties = parties;
    p.kdf_queries = kdf_queries;
    p.delta_eph = delta_eph;
    p.delta_stat = delta_stat;
    p.adv_cpa_eph = adv_kem;
    p.adv_cca_stat = adv_kem;
    p.adv_cca_stat2 = adv_kem;
    p.adv_mac_pqc = adv_mac;
    p.mu_encaps = mu_encaps;
    p.mu_secret = mu_secret;
    p.len_eph_bits = len_eph;
    p.len_stat_bits = len_stat;
    double pqc = pqc_bound(p);
    double qkd = qkd_bound(sessions, delta_stat, delta_eph, adv_mac);

    ordered_json report;
    report["schema"] = kReportSchema;
    report["command"] = "bounds";
    report["params"] = {{"sessions", sessions},   {"parties", parties},
                        {"kdf_queries", kdf_queries}, {"delta_eph", delta_eph},
                        {"delta_stat", delta_stat},   {"adv_kem", adv_kem},
                        {"adv_mac", adv_mac},         {"mu_encaps", mu_encaps},
                        {"mu_secret", mu_secret},     {"len_eph", len_eph},
                        {"len_stat", len_stat}};
    report["pqc_bound"] = pqc;
    report["pqc_vacuous"] = pqc > 1.0;
    report["qkd_bound"] = qkd;
    report["qkd_vacuous"] = qkd > 1.0;
    report["correctness_bound"] = correctness_bound(delta_eph, delta_stat);
    emit(report, out_path);
    return 0;
}

int cmd_qkd_serve(const std::string& addr, uint64_t seed) {
    std::string host = "127.0.0.1";
    std::string port_str = addr;
    if (auto colon = addr.rfind(':'); colon != std::string::npos) {
        host = addr.substr(0, colon);
        port_str = addr.substr(colon + 1);
    }
    int port = std::stoi(port_str);

    int listener = ::socket(AF_INET, SOCK_STREAM, 0);
    if (listener < 0) {
        std::cerr << "socket: " << std::strerror(errno) << "\n";
        return 1;
    }
    int one = 1;
    ::setsockopt(listener, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
    sockaddr_in bind_addr{};
    bind_addr.sin_family = AF_INET;
    bind_addr.sin_port = htons(uint16_t(port));
    if (::inet_pton(AF_INET, host.c_str(), &bind_addr.sin_addr) != 1) {
        std::cerr << "bad address: " << host << "\n";
        ::close(listener);
        return 2;
    }
    if (::bind(listener, reinterpret_cast<sockaddr*>(&bind_addr), sizeof(bind_addr)) < 0 ||
        ::listen(listener, 1) < 0) {
        std::cerr << "bind/listen: " << std::strerror(errno) << "\n";
        ::close(listener);
        return 1;
    }
    ::signal(SIGPIPE, SIG_IGN);
    QkdService service(seed);
    std::cerr << "serving qkd oracle on " << host << ":" << port << " (one connection at a time)\n";
    for (;;) {
        int conn = ::accept(listener, nullptr, nullptr);
        if (conn < 0) continue;
        serve_stream(service, conn);
        ::close(conn);
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"desk-scale laboratory for a QKD-bound triple-KEM key exchange"};
    app.require_subcommand(1);

    std::string attack = "dependent_key", variant = "no_mac", game = "ind-staa-pqc";
    std::string seeds = "1..10", out;
    double delta_eph = 0.0, delta_stat = 0.0;
    size_t advantage_trials = 0;
    bool include_trace = false;

    CLI::App* run = app.add_subcommand("run", "replay an attack scenario and check its verdict");
    run->add_option("--attack", attack, "scenario name (see README) or 'honest'");
    run->add_option("--variant", variant, "full_nested | no_mac | swapped_mac_order");
    run->add_option("--game", game, "ind-aa-pqc | ind-staa-pqc | ind-aa-qkd");
    run->add_option("--seeds", seeds, "comma list or inclusive range lo..hi");
    run->add_option("--delta-eph", delta_eph, "ephemeral decapsulation failure rate");
    run->add_option("--delta-stat", delta_stat, "static decapsulation failure rate");
    run->add_option("--advantage-trials", advantage_trials,
                    "also estimate the distinguishing advantage over this many paired trials");
    run->add_flag("--trace", include_trace, "embed the oracle trace per seed");
    run->add_option("--out", out, "report path (default: stdout)");

    size_t runs = 10000;
    uint64_t seed = 1;
    CLI::App* correctness =
        app.add_subcommand("correctness", "honest-run key mismatch rate vs the closed-form bound");
    correctness->add_option("--delta-eph", delta_eph, "ephemeral decapsulation failure rate");
    correctness->add_option("--delta-stat", delta_stat, "static decapsulation failure rate");
    correctness->add_option("--runs", runs, "number of honest runs");
    correctness->add_option("--seed", seed, "base seed");
    correctness->add_option("--out", out, "report path (default: stdout)");

    double sessions = 0, parties = 1, kdf_queries = 0, adv_kem = 0, adv_mac = 0;
    double mu_encaps = 0, mu_secret = 0, len_eph = 256, len_stat = 256;
    CLI::App* bounds = app.add_subcommand("bounds", "evaluate the closed-form advantage bounds");
    bounds->add_option("--sessions", sessions, "number of sessions");
    bounds->add_option("--parties", parties, "number of parties");
    bounds->add_option("--kdf-queries", kdf_queries, "adversary derivation queries");
    bounds->add_option("--delta-eph", delta_eph, "ephemeral decapsulation failure rate");
    bounds->add_option("--delta-stat", delta_stat, "static decapsulation failure rate");
    bounds->add_option("--adv-kem", adv_kem, "assumed KEM distinguishing advantage");
    bounds->add_option("--adv-mac", adv_mac, "assumed one-time MAC forgery advantage");
    bounds->add_option("--mu-encaps", mu_encaps, "ciphertext collision rate");
    bounds->add_option("--mu-secret", mu_secret, "encapsulated-secret collision rate");
    bounds->add_option("--len-eph", len_eph, "ephemeral KEM key bits");
    bounds->add_option("--len-stat", len_stat, "static KEM key bits");
    bounds->add_option("--out", out, "report path (default: stdout)");

    std::string serve_addr = "127.0.0.1:7040";
    CLI::App* serve = app.add_subcommand("qkd-serve", "serve the oracle over JSON lines");
    serve->add_option("--serve-addr", serve_addr, "host:port to bind");
    serve->add_option("--seed", seed, "oracle randomness seed");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return e.get_exit_code() == 0 ? 0 : 2;
    }

    try {
        if (run->parsed())
            return cmd_run(attack, variant, game, seeds, delta_eph, delta_stat, advantage_trials,
                           include_trace, out);
        if (correctness->parsed()) return cmd_correctness(delta_eph, delta_stat, runs, seed, out);
        if (bounds->parsed())
            return cmd_bounds(sessions, parties, kdf_queries, delta_eph, delta_stat, adv_kem,
                              adv_mac, mu_encaps, mu_secret, len_eph, len_stat, out);
        if (serve->parsed()) return cmd_qkd_serve(serve_addr, seed);
    } catch (const CLI::ValidationError& e) {
        std::cerr << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}
