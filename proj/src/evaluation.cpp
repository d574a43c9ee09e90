#include "meanrank/evaluation.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <stdexcept>
#include <thread>
#include <unordered_map>

#include "meanrank/error.hpp"
#include "meanrank/kernels.hpp"
#include "meanrank/mlmt.hpp"

namespace meanrank {

CandidateSet::CandidateSet(std::size_t universe, std::vector<EntityId> excluded)
    : universe_(universe), excluded_(std::move(excluded)) {
    std::sort(excluded_.begin(), excluded_.end());
    excluded_.erase(std::unique(excluded_.begin(), excluded_.end()), excluded_.end());
    if (!excluded_.empty() && excluded_.back() >= universe_) throw std::invalid_argument("excluded id out of range");
}

bool CandidateSet::contains(EntityId e) const {
    return e < universe_ && !std::binary_search(excluded_.begin(), excluded_.end(), e);
}

CandidateSet filtered_candidates(const KnowledgeGraph& kg, const Query& query) {
    const Triple& t = query.triple;
    const auto completions =
        query.direction == Direction::predict_tail ? kg.known_tails(t.head, t.rel) : kg.known_heads(t.rel, t.tail);
    std::vector<EntityId> excluded;
    excluded.reserve(completions.size());
    const EntityId gold = query.gold();
    for (EntityId e : completions) {
        if (e != gold) excluded.push_back(e);
    }
    return CandidateSet(kg.entity_count(), std::move(excluded));
}

RankResult rank_gold(const ScoreVector& scores, const CandidateSet& candidates, EntityId gold,
                     const TieBreakRng& rng) {
    if (scores.scores.size() != candidates.universe()) {
        throw std::invalid_argument("score vector and candidate set cover different catalogs");
    }
    if (!candidates.contains(gold)) {
        throw std::logic_error("gold entity " + std::to_string(gold) + " is not a candidate of query " +
                               std::to_string(scores.query_id));
    }
    const double pivot = scores.scores[gold];
    auto counts = kernels::count_against(scores.scores.data(), scores.scores.size(), pivot);
    for (EntityId e : candidates.excluded()) {
        const double s = scores.scores[e];
        counts.greater -= s > pivot;
        counts.equal -= s == pivot;
    }
    const std::uint64_t ties = counts.equal - 1;  // minus gold itself
    auto stream = rng.stream(scores.query_id);
    const std::uint64_t offset = uniform_below(stream, ties + 1);
    return RankResult{scores.query_id, gold, 1 + counts.greater + offset, candidates.size()};
}

Metrics compute_metrics(std::span<const RankResult> results) {
    if (results.empty()) throw InputError("no ranked queries to aggregate");
    Metrics m;
    m.queries = results.size();
    for (const auto& r : results) {
        const auto rank = static_cast<double>(r.rank);
        m.mrr += 1.0 / rank;
        m.mr += rank;
        m.mp1 += r.rank <= 1;
        m.mp3 += r.rank <= 3;
        m.mp10 += r.rank <= 10;
    }
    const auto n = static_cast<double>(results.size());
    m.mrr /= n;
    m.mr /= n;
    m.mp1 /= n;
    m.mp3 /= n;
    m.mp10 /= n;
    return m;
}

EvalReport aggregate_seeds(std::span<const std::uint64_t> seeds, std::span<const Metrics> per_seed) {
    if (per_seed.empty() || seeds.size() != per_seed.size()) {
        throw InputError("need one metrics record per seed and at least one seed");
    }
    EvalReport report;
    report.seeds.assign(seeds.begin(), seeds.end());
    report.per_seed.assign(per_seed.begin(), per_seed.end());
    report.query_count = per_seed.front().queries;

    const auto n = static_cast<double>(per_seed.size());
    auto fields = [](Metrics& m) { return std::array<double*, 5>{&m.mrr, &m.mr, &m.mp1, &m.mp3, &m.mp10}; };
    for (auto m : per_seed) {
        auto src = fields(m);
        auto dst = fields(report.mean);
        for (std::size_t k = 0; k < src.size(); ++k) *dst[k] += *src[k] / n;
    }
    for (auto m : per_seed) {
        auto src = fields(m);
        auto mean = fields(report.mean);
        auto dst = fields(report.stddev);
        for (std::size_t k = 0; k < src.size(); ++k) *dst[k] += (*src[k] - *mean[k]) * (*src[k] - *mean[k]) / n;
    }
    for (double* v : fields(report.stddev)) *v = std::sqrt(*v);
    report.mean.queries = report.stddev.queries = report.query_count;
    return report;
}

nlohmann::json to_json(const Metrics& m) {
    return {{"MRR", m.mrr}, {"MR", m.mr}, {"MP@1", m.mp1}, {"MP@3", m.mp3}, {"MP@10", m.mp10}};
}

nlohmann::json to_json(const EvalReport& report) {
    nlohmann::json per_seed = nlohmann::json::array();
    for (std::size_t s = 0; s < report.seeds.size(); ++s) {
        auto entry = to_json(report.per_seed[s]);
        entry["seed"] = report.seeds[s];
        per_seed.push_back(std::move(entry));
    }
    return {{"queries", report.query_count},
            {"seeds", report.seeds},
            {"mean", to_json(report.mean)},
            {"std", to_json(report.stddev)},
            {"per_seed", std::move(per_seed)}};
}

std::vector<ScoredEntity> top_candidates(std::span<const double> scores, const CandidateSet& candidates,
                                         std::size_t k) {
    std::vector<ScoredEntity> all;
    all.reserve(candidates.size());
    for (std::size_t e = 0; e < scores.size(); ++e) {
        if (candidates.contains(static_cast<EntityId>(e))) all.push_back({static_cast<EntityId>(e), scores[e]});
    }
    auto better = [](const ScoredEntity& a, const ScoredEntity& b) {
        return a.score != b.score ? a.score > b.score : a.entity < b.entity;
    };
    k = std::min(k, all.size());
    std::partial_sort(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(k), all.end(), better);
    all.resize(k);
    return all;
}

EvalMode parse_eval_mode(std::string_view text) {
    if (text == "standard") return EvalMode::standard;
    if (text == "unseen") return EvalMode::unseen;
    throw InputError("unknown mode '" + std::string(text) + "' (expected standard or unseen)");
}

namespace {

template <typename Fn>
void parallel_for(std::size_t count, std::size_t threads, Fn&& fn) {
    threads = std::max<std::size_t>(1, std::min(threads, count));
    if (threads == 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (std::size_t t = 0; t < threads; ++t) {
        pool.emplace_back([&] {
            try {
                for (std::size_t i = next.fetch_add(1); i < count; i = next.fetch_add(1)) fn(i);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
                next.store(count);
            }
        });
    }
    for (auto& th : pool) th.join();
    if (failure) std::rethrow_exception(failure);
}

// Ranks one query under every seed. When `source` is given and
// seed-dependent the table is regenerated per seed; otherwise `fixed` is
// scored once.
struct QueryEvaluator {
    const KnowledgeGraph& kg;
    const EntityCatalog& catalog;
    const EvalSettings& settings;
    EvalRun& run;

    void evaluate(std::size_t index, const Query& query, const TableSource* source, const LogitView* fixed) const {
        const CandidateSet candidates =
            settings.filtered ? filtered_candidates(kg, query) : CandidateSet::all(kg.entity_count());
        ScoreVector scores{query.id, std::vector<double>(catalog.size())};
        std::vector<float> scratch;
        bool scored = false;
        for (std::size_t s = 0; s < settings.seeds.size(); ++s) {
            const std::uint64_t seed = settings.seeds[s];
            if (!scored || (source && source->seed_dependent())) {
                const LogitView table = fixed ? *fixed : source->table_for(query, seed, scratch);
                if (table.query_id != query.id) throw std::logic_error("table source returned another query");
                score_entities_into(table, catalog, scores.scores);
                scored = true;
            }
            run.ranks[s][index] = rank_gold(scores, candidates, query.gold(), TieBreakRng(seed));
            if (s == 0 && settings.dump_topk > 0) {
                run.traces[index] = QueryTrace{query, run.ranks[0][index],
                                               top_candidates(scores.scores, candidates, settings.dump_topk)};
            }
        }
    }
};

void prepare_run(EvalRun& run, std::size_t query_count, const EvalSettings& settings) {
    if (settings.seeds.empty()) throw InputError("at least one seed is required");
    run.ranks.assign(settings.seeds.size(), std::vector<RankResult>(query_count));
    if (settings.dump_topk > 0) run.traces.assign(query_count, QueryTrace{});
}

void finish_run(EvalRun& run, const EvalSettings& settings) {
    std::vector<Metrics> per_seed;
    per_seed.reserve(run.ranks.size());
    for (const auto& ranks : run.ranks) per_seed.push_back(compute_metrics(ranks));
    run.report = aggregate_seeds(settings.seeds, per_seed);
}

}  // namespace

EvalRun evaluate_queries(const KnowledgeGraph& kg, const EntityCatalog& catalog, std::span<const Query> queries,
                         const TableSource& source, const EvalSettings& settings) {
    EvalRun run;
    prepare_run(run, queries.size(), settings);
    const QueryEvaluator evaluator{kg, catalog, settings, run};
    parallel_for(queries.size(), settings.threads,
                 [&](std::size_t q) { evaluator.evaluate(q, queries[q], &source, nullptr); });
    finish_run(run, settings);
    return run;
}

EvalRun evaluate_logit_file(const KnowledgeGraph& kg, const EntityCatalog& catalog, std::span<const Query> queries,
                            const std::filesystem::path& mlmt_path, const EvalSettings& settings) {
    EvalRun run;
    prepare_run(run, queries.size(), settings);

    std::unordered_map<std::uint64_t, std::size_t> index_of;
    index_of.reserve(queries.size());
    for (std::size_t q = 0; q < queries.size(); ++q) index_of.emplace(queries[q].id, q);
    std::vector<bool> seen(queries.size(), false);

    MlmtReader reader(mlmt_path, MlmtDims{static_cast<std::uint32_t>(catalog.vocab_size()),
                                          static_cast<std::uint32_t>(catalog.max_length())});
    const QueryEvaluator evaluator{kg, catalog, settings, run};
    const std::size_t batch_size = std::max<std::size_t>(16, settings.threads * 4);
    std::vector<LogitTable> batch;
    std::vector<std::size_t> batch_index;
    bool more = true;
    while (more) {
        batch.clear();
        batch_index.clear();
        LogitTable table;
        while (batch.size() < batch_size && (more = reader.next(table))) {
            auto it = index_of.find(table.query_id());
            if (it == index_of.end()) {
                throw InputError("logit table for query " + std::to_string(table.query_id()) +
                                 " which is not part of this evaluation");
            }
            if (seen[it->second]) throw InputError("duplicate logit table for query " + std::to_string(table.query_id()));
            seen[it->second] = true;
            batch_index.push_back(it->second);
            batch.push_back(std::move(table));
        }
        parallel_for(batch.size(), settings.threads, [&](std::size_t b) {
            const LogitView view = batch[b].view();
            evaluator.evaluate(batch_index[b], queries[batch_index[b]], nullptr, &view);
        });
    }
    const auto missing = static_cast<std::size_t>(std::count(seen.begin(), seen.end(), false));
    if (missing > 0) {
        throw InputError(mlmt_path.string() + " lacks logit tables for " + std::to_string(missing) + " of " +
                         std::to_string(queries.size()) + " queries");
    }
    finish_run(run, settings);
    return run;
}

}  // namespace meanrank
