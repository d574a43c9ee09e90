#include "meanrank/bench.hpp"

#include <chrono>
#include <cstdio>
#include <ostream>
#include <random>
#include <string>

#include "meanrank/evaluation.hpp"
#include "meanrank/rng.hpp"
#include "meanrank/scoring.hpp"
#include "meanrank/tokenizer.hpp"

namespace meanrank {

namespace {

EntityCatalog synthetic_catalog(std::size_t n, std::size_t l_max, std::size_t vocab, std::mt19937_64& engine) {
    std::vector<std::vector<TokenId>> rows(n);
    const auto first_token = static_cast<std::uint64_t>(Vocabulary::reserved_count);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t length = i == 0 ? l_max : 1 + uniform_below(engine, l_max);
        rows[i].resize(length);
        for (auto& t : rows[i]) t = static_cast<TokenId>(first_token + uniform_below(engine, vocab - first_token));
    }
    return EntityCatalog(rows, vocab);
}

}  // namespace

std::vector<BenchRow> run_bench(const BenchConfig& config) {
    std::vector<BenchRow> rows;
    if (config.queries == 0) return rows;
    using clock = std::chrono::steady_clock;

    for (std::size_t n : config.entity_counts) {
        if (n == 0) continue;
        std::mt19937_64 engine(derive_seed(config.seed, n, StreamSalt::random_scorer));
        const EntityCatalog catalog = synthetic_catalog(n, config.l_max, config.vocab, engine);

        constexpr std::size_t table_count = 4;
        std::vector<LogitTable> tables;
        for (std::size_t k = 0; k < table_count; ++k) {
            LogitTable table(k, config.l_max, config.vocab);
            for (float& v : table.values()) v = static_cast<float>(uniform_unit(engine) * 40.0);
            tables.push_back(std::move(table));
        }
        const CandidateSet candidates(n, n > 1 ? std::vector<EntityId>{static_cast<EntityId>(n / 2)}
                                               : std::vector<EntityId>{});
        const TieBreakRng rng(config.seed);
        ScoreVector scores{0, std::vector<double>(n)};

        // Warm-up pass outside the timed region.
        score_entities_into(tables[0].view(), catalog, scores.scores);

        std::size_t done = 0;
        double elapsed = 0;
        volatile std::uint64_t sink = 0;
        while (done < config.queries || elapsed < config.min_seconds) {
            const LogitTable& table = tables[done % table_count];
            auto gold = static_cast<EntityId>((done * 7919) % n);
            if (!candidates.contains(gold)) gold = static_cast<EntityId>((gold + 1) % n);
            const auto start = clock::now();
            scores.query_id = table.query_id();
            score_entities_into(table.view(), catalog, scores.scores);
            sink = sink + rank_gold(scores, candidates, gold, rng).rank;
            elapsed += std::chrono::duration<double>(clock::now() - start).count();
            ++done;
        }

        BenchRow row;
        row.entities = n;
        row.l_max = config.l_max;
        row.vocab = config.vocab;
        row.queries = done;
        row.seconds = elapsed;
        row.per_entity_ns = elapsed * 1e9 / (static_cast<double>(done) * static_cast<double>(n));
        row.isa = kernels::active_isa();
        rows.push_back(row);
    }
    return rows;
}

void write_bench_csv(std::ostream& out, const std::vector<BenchRow>& rows) {
    out << "entities,l_max,vocab,queries,seconds,per_entity_ns,kernel\n";
    for (const auto& r : rows) {
        out << r.entities << ',' << r.l_max << ',' << r.vocab << ',' << r.queries << ',' << r.seconds << ','
            << r.per_entity_ns << ',' << kernels::to_string(r.isa) << '\n';
    }
}

void write_bench_table(std::ostream& out, const std::vector<BenchRow>& rows) {
    char line[160];
    std::snprintf(line, sizeof line, "%12s %6s %8s %9s %12s %16s %8s\n", "entities", "l_max", "vocab", "queries",
                  "seconds", "ns/entity", "kernel");
    out << line;
    for (const auto& r : rows) {
        std::snprintf(line, sizeof line, "%12zu %6zu %8zu %9zu %12.4f %16.3f %8s\n", r.entities, r.l_max, r.vocab,
                      r.queries, r.seconds, r.per_entity_ns, std::string(kernels::to_string(r.isa)).c_str());
        out << line;
    }
}

}  // namespace meanrank
