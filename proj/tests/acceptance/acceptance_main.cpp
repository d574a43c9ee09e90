// Acceptance suite: one line per criterion, PASS / FAIL / BLOCKED.
//
// Criteria that need the public benchmark files read them from
//   MEANRANK_WN18RR_DIR     (40943 entities, 11 relations)
//   MEANRANK_FB15K237_DIR   (14541 entities, 237 relations)
// in the dataset directory layout the CLI uses. Without them those
// criteria report BLOCKED.
//
// Exit status: 0 all passed, 1 any failure, 77 no failure but something blocked.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "fixtures.hpp"
#include "meanrank/bench.hpp"
#include "meanrank/evaluation.hpp"
#include "meanrank/kernels.hpp"
#include "meanrank/pipeline.hpp"
#include "oracles.hpp"

using namespace meanrank;
namespace fs = std::filesystem;

namespace {

enum class Status { pass, fail, blocked };

struct Outcome {
    Status status;
    std::string detail;
};

std::string format(const char* fmt, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, fmt, args...);
    return buf;
}

std::vector<kernels::Isa> supported_isas() {
    std::vector<kernels::Isa> out;
    for (auto isa : {kernels::Isa::scalar, kernels::Isa::avx2}) {
        if (kernels::cpu_supports(isa)) out.push_back(isa);
    }
    return out;
}

std::optional<fs::path> env_dir(const char* name) {
    const char* value = std::getenv(name);
    if (!value || !*value) return std::nullopt;
    return fs::path(value);
}

// --- oracle equivalence -----------------------------------------------------

Outcome oracle_equivalence() {
    const auto start = std::chrono::steady_clock::now();
    std::mt19937_64 engine(1);
    std::size_t mismatches = 0;
    for (int instance = 0; instance < 200; ++instance) {
        const std::size_t n = 1 + engine() % 50, lmax = 1 + engine() % 6, v = 5 + engine() % 60;
        const auto rows = support::random_rows(engine, n, lmax, v);
        const EntityCatalog catalog(rows, v);
        const auto values = support::random_table(engine, catalog.max_length(), v);
        const auto expect = support::brute_force_scores(rows, values, v);
        for (auto isa : supported_isas()) {
            kernels::set_active_isa(isa);
            mismatches += score_entities(LogitTable(0, catalog.max_length(), v, values), catalog).scores != expect;
        }
    }
    kernels::set_active_isa(supported_isas().back());

    double worst_p = 1.0;
    std::uniform_int_distribution<int> level(0, 3);
    for (int instance = 0; instance < 10; ++instance) {
        const std::size_t n = 2 + instance % 9;  // 2..10 entities
        std::vector<double> s(n);
        for (auto& x : s) x = level(engine) * 1.5;
        std::vector<bool> candidate(n, true);
        std::vector<EntityId> excluded;
        if (n >= 4 && instance % 2 == 0) {
            candidate[n - 1] = false;
            excluded.push_back(static_cast<EntityId>(n - 1));
        }
        const CandidateSet candidates(n, excluded);
        const auto gold = static_cast<EntityId>(instance % (n - excluded.size()));
        std::map<std::uint64_t, std::uint64_t> library, oracle;
        for (std::uint64_t draw = 0; draw < 100000; ++draw) {
            ++library[rank_gold(ScoreVector{draw, s}, candidates, gold, TieBreakRng(instance)).rank];
            ++oracle[support::noise_sorted_rank(s, candidate, gold, engine)];
        }
        worst_p = std::min(worst_p, support::chi_square_homogeneity_p(library, oracle));
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool ok = mismatches == 0 && worst_p > 0.01 && seconds < 60;
    return {ok ? Status::pass : Status::fail,
            format("200 score instances x %zu kernels, %zu mismatches; 10 rank instances x 100k draws, min chi-square "
                   "p = %.4f (> 0.01); %.1f s (< 60 s)",
                   supported_isas().size(), mismatches, worst_p, seconds)};
}

// --- protocol soundness -----------------------------------------------------

Outcome protocol_soundness() {
    // (i, r, i + k_r mod N): every (h, r) and (r, t) has one completion, so
    // filtering removes nothing and each query has N candidates.
    constexpr std::size_t n = 1000;
    const std::vector<std::size_t> shift{1, 7, 31};
    std::vector<std::string> names;
    for (std::size_t i = 0; i < n; ++i) names.push_back("node" + std::to_string(i));
    std::vector<Triple> train, test;
    for (std::size_t r = 0; r < shift.size(); ++r) {
        for (std::size_t i = 0; i < n; ++i) {
            const Triple t{static_cast<EntityId>(i), static_cast<RelationId>(r), static_cast<EntityId>((i + shift[r]) % n)};
            (r + 1 < shift.size() ? train : test).push_back(t);
        }
    }
    const KnowledgeGraph kg(support::named_entities(names), support::named_relations({"next", "skip", "jump"}),
                            train, {}, test);
    const Engine engine = make_engine(kg, {});
    const auto queries = standard_queries(kg.test());
    const auto source = make_builtin_scorer(BuiltinScorer::constant, kg, engine.catalog);
    EvalSettings settings;
    settings.seeds = {0, 1, 2, 3, 4};
    const auto run = evaluate_queries(kg, engine.catalog, queries, *source, settings);

    bool all_full = true;
    for (const auto& r : run.ranks[0]) all_full &= r.candidate_count == n;
    const double q = static_cast<double>(queries.size()), seeds = 5.0, c = static_cast<double>(n);
    const double mr_sd = std::sqrt((c * c - 1) / 12 / q) / std::sqrt(seeds);
    const double p1 = 1 / c;
    const double mp1_sd = std::sqrt(p1 * (1 - p1) / q) / std::sqrt(seeds);
    const double mr_dev = std::abs(run.report.mean.mr - (c + 1) / 2);
    const double mp1_dev = std::abs(run.report.mean.mp1 - p1);
    const bool ok = all_full && mr_dev <= 3 * mr_sd && mp1_dev <= 3 * mp1_sd && run.report.mean.mrr < 0.5;
    return {ok ? Status::pass : Status::fail,
            format("%zu queries x 5 seeds, all %zu candidates: %s; MR %.2f (500.5 +- %.2f); MP@1 %.5f (0.001 +- "
                   "%.5f); MRR %.5f",
                   queries.size(), n, all_full ? "yes" : "no", run.report.mean.mr, 3 * mr_sd, run.report.mean.mp1,
                   3 * mp1_sd, run.report.mean.mrr)};
}

// --- random baseline --------------------------------------------------------

struct BaselineResult {
    double mr, mr_sd, mrr, seconds;
    std::size_t entities, queries;
};

// Random scorer, unseen-entity protocol (split rebuilt for each of 5 seeds).
BaselineResult random_baseline(const KnowledgeGraph& kg) {
    const auto start = std::chrono::steady_clock::now();
    const Engine engine = make_engine(kg, {});
    EvalSettings settings;
    settings.seeds = {0, 1, 2, 3, 4};
    const auto run = evaluate_with_resplit(kg, engine, BuiltinScorer::random, SplitSpec{}, SplitName::test, settings);
    std::size_t queries = 0;
    for (const auto& r : run.ranks) queries += r.size();
    return {run.report.mean.mr, run.report.stddev.mr, run.report.mean.mrr,
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count(), kg.entity_count(),
            queries};
}

Outcome random_baseline_real() {
    const auto dir = env_dir("MEANRANK_WN18RR_DIR");
    if (!dir) return {Status::blocked, "WN18RR files not available (set MEANRANK_WN18RR_DIR)"};
    const auto r = random_baseline(load_dataset_directory(*dir));
    const bool ok = r.mr >= 19800 && r.mr <= 21200 && r.mrr < 0.002 && r.seconds < 600;
    return {ok ? Status::pass : Status::fail,
            format("%zu entities, %zu queries over 5 seeds: MR %.2f +- %.2f (in [19800, 21200]); MRR %.5f (< 0.002); "
                   "%.0f s (< 600 s)",
                   r.entities, r.queries, r.mr, r.mr_sd, r.mrr, r.seconds)};
}

// Same protocol on a synthetic graph of the same entity count; informational.
std::string random_baseline_standin() {
    std::mt19937_64 engine(40943);
    const auto kg = support::random_kg(engine, 40943, 11, 93003);
    const auto r = random_baseline(kg);
    return format("synthetic 40943-entity graph, %zu queries over 5 seeds: MR %.2f +- %.2f, MRR %.5f, %.0f s",
                  r.queries, r.mr, r.mr_sd, r.mrr, r.seconds);
}

// --- dataset fidelity -------------------------------------------------------

Outcome dataset_fidelity() {
    const std::vector<std::pair<std::string, std::string>> synsets{
        {"dog.n.01", "dog noun 1"}, {"mediator.n.01", "mediator noun 1"}, {"hot_dog.n.02", "hot dog noun 2"}};
    const std::vector<std::pair<std::string, std::string>> relations{
        {"_member_of_domain_usage", "member of domain usage"},
        {"_hypernym", "hypernym"},
        {"/people/person/nationality", "people person nationality"}};
    std::size_t wrong = 0;
    for (const auto& [raw, want] : synsets) wrong += clean_synset(raw) != want;
    for (const auto& [raw, want] : relations) wrong += clean_relation(raw) != want;
    std::string detail = format("%zu/6 cleaning examples verbatim", 6 - wrong);
    if (wrong > 0) return {Status::fail, detail};

    struct Expected {
        const char* env;
        const char* name;
        std::size_t entities, relations;
    };
    bool blocked = false, ok = true;
    for (const Expected& e : {Expected{"MEANRANK_WN18RR_DIR", "WN18RR", 40943, 11},
                              Expected{"MEANRANK_FB15K237_DIR", "FB15k-237", 14541, 237}}) {
        const auto dir = env_dir(e.env);
        if (!dir) {
            detail += format("; %s not available (set %s)", e.name, e.env);
            blocked = true;
            continue;
        }
        const auto kg = load_dataset_directory(*dir);
        const bool match = kg.entity_count() == e.entities && kg.relation_count() == e.relations;
        ok &= match;
        detail += format("; %s %zu/%zu (expected %zu/%zu)", e.name, kg.entity_count(), kg.relation_count(), e.entities,
                         e.relations);
    }
    return {!ok ? Status::fail : blocked ? Status::blocked : Status::pass, detail};
}

// --- padding invariants -----------------------------------------------------

Outcome padding_invariants() {
    std::mt19937_64 engine(7);
    const auto isas = supported_isas();
    std::size_t pad_failures = 0, fairness_failures = 0;
    for (std::size_t c = 0; c < 10000; ++c) {
        kernels::set_active_isa(isas[c % isas.size()]);
        const std::size_t n = 1 + engine() % 40, lmax = 1 + engine() % 6, v = 5 + engine() % 60;
        const auto rows = support::random_rows(engine, n, lmax, v);
        const EntityCatalog narrow(rows, v);
        const EntityCatalog wide(rows, v, narrow.max_length() + 1 + engine() % 6);
        auto values = support::random_table(engine, narrow.max_length(), v);
        const auto base = score_entities(LogitTable(0, narrow.max_length(), v, values), narrow);
        const auto extra = support::random_table(engine, wide.max_length() - narrow.max_length(), v);
        values.insert(values.end(), extra.begin(), extra.end());
        pad_failures += score_entities(LogitTable(0, wide.max_length(), v, values), wide).scores != base.scores;
    }
    for (std::size_t c = 0; c < 10000; ++c) {
        kernels::set_active_isa(isas[c % isas.size()]);
        const std::size_t k = 1 + engine() % 8, v = 5 + engine() % 60, reps = 2 + engine() % 3;
        const auto row = support::random_rows(engine, 1, k, v)[0];
        std::vector<TokenId> repeated;
        for (std::size_t r = 0; r < reps; ++r) repeated.insert(repeated.end(), row.begin(), row.begin() + row.size());
        const EntityCatalog catalog({row, repeated}, v);
        // Position-uniform table on a 2^-12 grid, so every partial sum is exact.
        std::vector<float> per_token(v);
        for (auto& x : per_token) x = static_cast<float>(static_cast<std::int64_t>(engine() % 262144) - 131072) / 4096.0f;
        LogitTable table(0, catalog.max_length(), v);
        for (std::size_t j = 0; j < catalog.max_length(); ++j) {
            for (std::size_t t = 0; t < v; ++t) table.at(j, static_cast<TokenId>(t)) = per_token[t];
        }
        const auto s = score_entities(table, catalog).scores;
        fairness_failures += s[0] != s[1];
    }
    kernels::set_active_isa(isas.back());
    const bool ok = pad_failures == 0 && fairness_failures == 0;
    return {ok ? Status::pass : Status::fail,
            format("pad-invariance 10000 cases, %zu failures; length fairness 10000 cases, %zu failures", pad_failures,
                   fairness_failures)};
}

// --- unseen split -----------------------------------------------------------

Outcome unseen_split() {
    std::mt19937_64 engine(11);
    std::size_t failures = 0, query_failures = 0;
    std::string first;
    for (int trial = 0; trial < 1000; ++trial) {
        const std::size_t entities = 10 + engine() % 60, relations = 1 + engine() % 4;
        const auto kg = support::random_kg(engine, entities, relations, entities * (1 + engine() % 4));
        std::uniform_real_distribution<double> fraction(0.1, 0.3);
        const double vf = fraction(engine), tf = fraction(engine);
        const auto split = make_unseen_split(kg, SplitSpec{engine(), vf, tf});
        const auto check = support::check_unseen_partition(kg, split);
        if (!check.ok) {
            ++failures;
            if (first.empty()) first = check.failure;
        }
        for (auto which : {SplitName::valid, SplitName::test}) {
            const auto& held = which == SplitName::valid ? split.unseen()->is_valid_entity : split.unseen()->is_test_entity;
            for (const auto& q : unseen_queries(split, which)) query_failures += !held[q.gold()];
        }
    }
    const bool ok = failures == 0 && query_failures == 0;
    return {ok ? Status::pass : Status::fail,
            format("1000 random graphs, %zu partition failures%s%s; %zu queries asking for a seen entity", failures,
                   first.empty() ? "" : ": ", first.c_str(), query_failures)};
}

// --- bench ------------------------------------------------------------------

Outcome bench_flatness() {
    const auto start = std::chrono::steady_clock::now();
    std::string detail;
    bool ok = true;
    for (auto isa : supported_isas()) {
        kernels::set_active_isa(isa);
        BenchConfig config;
        config.entity_counts = {1'000, 100'000};
        config.min_seconds = 1.0;
        const auto rows = run_bench(config);
        const double small = rows[0].per_entity_ns, large = rows[1].per_entity_ns;
        const double ratio = std::max(small, large) / std::min(small, large);
        ok &= ratio <= 5.0;
        detail += format("%s%s: %.2f ns/entity at 1k, %.2f at 100k, ratio %.2f", detail.empty() ? "" : "; ",
                         std::string(kernels::to_string(isa)).c_str(), small, large, ratio);
    }
    kernels::set_active_isa(supported_isas().back());
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    ok &= seconds < 300;
    return {ok ? Status::pass : Status::fail, detail + format(" (<= 5); %.0f s", seconds)};
}

// Scoring cost against L_max at fixed N; informational.
std::string bench_lmax_scaling() {
    BenchConfig config;
    config.entity_counts = {100'000};
    config.min_seconds = 0.5;
    config.l_max = 8;
    const auto single = run_bench(config).at(0);
    const double base = single.seconds / static_cast<double>(single.queries);
    config.l_max = 16;
    const auto doubled = run_bench(config).at(0);
    const double ratio = doubled.seconds / static_cast<double>(doubled.queries) / base;
    return format("N=100k, time per query at L_max 16 vs 8: %.2fx", ratio);
}

}  // namespace

int main() {
    const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
        {"oracle-equivalence", oracle_equivalence},  {"protocol-soundness", protocol_soundness},
        {"random-baseline", random_baseline_real},   {"dataset-fidelity", dataset_fidelity},
        {"padding-invariants", padding_invariants},  {"unseen-split", unseen_split},
        {"bench-flat-per-entity", bench_flatness},
    };
    bool failed = false, blocked = false;
    for (const auto& [name, check] : criteria) {
        Outcome outcome;
        try {
            outcome = check();
        } catch (const std::exception& e) {
            outcome = {Status::fail, std::string("exception: ") + e.what()};
        }
        const char* tag = outcome.status == Status::pass ? "PASS" : outcome.status == Status::fail ? "FAIL" : "BLOCKED";
        std::printf("%-7s %-22s %s\n", tag, name, outcome.detail.c_str());
        std::fflush(stdout);
        failed |= outcome.status == Status::fail;
        blocked |= outcome.status == Status::blocked;
        if (std::string(name) == "random-baseline" && outcome.status == Status::blocked) {
            std::printf("%-7s %-22s %s\n", "INFO", name, random_baseline_standin().c_str());
            std::fflush(stdout);
        }
        if (std::string(name) == "bench-flat-per-entity") {
            std::printf("%-7s %-22s %s\n", "INFO", name, bench_lmax_scaling().c_str());
        }
    }
    return failed ? 1 : blocked ? 77 : 0;
}
