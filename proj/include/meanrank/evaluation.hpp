#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "meanrank/kg_data.hpp"
#include "meanrank/prompt.hpp"
#include "meanrank/rng.hpp"
#include "meanrank/scoring.hpp"

namespace meanrank {

// The candidate set of a query, stored as the (sorted) entities removed
// from the full catalog. The gold entity is never removed.
class CandidateSet {
public:
    CandidateSet(std::size_t universe, std::vector<EntityId> excluded);

    static CandidateSet all(std::size_t universe) { return CandidateSet(universe, {}); }

    std::size_t size() const noexcept { return universe_ - excluded_.size(); }
    std::size_t universe() const noexcept { return universe_; }
    bool contains(EntityId e) const;
    std::span<const EntityId> excluded() const noexcept { return excluded_; }

private:
    std::size_t universe_;
    std::vector<EntityId> excluded_;
};

// Filtered setting: every other entity completing the queried side into a
// triple known in train, valid or test is removed.
CandidateSet filtered_candidates(const KnowledgeGraph& kg, const Query& query);

struct RankResult {
    std::uint64_t query_id = 0;
    EntityId gold = 0;
    std::uint64_t rank = 0;
    std::uint64_t candidate_count = 0;

    friend bool operator==(const RankResult&, const RankResult&) = default;
};

/// Rank of `gold` among `candidates`, highest score first.
///
/// rank = 1 + #{higher-scoring candidates} + u, with u uniform on
/// {0, ..., #{other candidates with exactly the gold score}} drawn from the
/// (seed, query id) stream. Throws std::logic_error if gold is filtered out.
RankResult rank_gold(const ScoreVector& scores, const CandidateSet& candidates, EntityId gold,
                     const TieBreakRng& rng);

struct Metrics {
    double mrr = 0, mr = 0, mp1 = 0, mp3 = 0, mp10 = 0;
    std::size_t queries = 0;
};

// Throws InputError on an empty list.
Metrics compute_metrics(std::span<const RankResult> results);

struct EvalReport {
    std::vector<std::uint64_t> seeds;
    std::vector<Metrics> per_seed;
    Metrics mean;
    Metrics stddev;  // population standard deviation across seeds
    std::size_t query_count = 0;
};

EvalReport aggregate_seeds(std::span<const std::uint64_t> seeds, std::span<const Metrics> per_seed);
nlohmann::json to_json(const Metrics& m);
nlohmann::json to_json(const EvalReport& report);

// Best-scoring candidates of one query, for inspection dumps.
struct ScoredEntity {
    EntityId entity = 0;
    double score = 0;
};
// Highest score first, ties by entity id.
std::vector<ScoredEntity> top_candidates(std::span<const double> scores, const CandidateSet& candidates,
                                         std::size_t k);

enum class EvalMode { standard, unseen };
EvalMode parse_eval_mode(std::string_view text);

struct EvalSettings {
    std::vector<std::uint64_t> seeds{0};
    std::size_t threads = 1;
    std::size_t dump_topk = 0;  // 0: no top-k lists
    bool filtered = true;
};

struct QueryTrace {
    Query query;
    RankResult first_seed_rank;
    std::vector<ScoredEntity> top;
};

struct EvalRun {
    EvalReport report;
    // ranks[s][q]: seed s, query q (in the order queries were given).
    std::vector<std::vector<RankResult>> ranks;
    std::vector<QueryTrace> traces;  // only when dump_topk > 0
};

// Scores every query once per table (once per seed when the source is
// seed-dependent) and ranks its gold entity under every seed. Queries are
// processed in parallel; results do not depend on the thread count.
EvalRun evaluate_queries(const KnowledgeGraph& kg, const EntityCatalog& catalog, std::span<const Query> queries,
                         const TableSource& source, const EvalSettings& settings);

// Same over logit tables read from an MLMT file. Every query needs exactly
// one table and every table must belong to a query.
EvalRun evaluate_logit_file(const KnowledgeGraph& kg, const EntityCatalog& catalog, std::span<const Query> queries,
                            const std::filesystem::path& mlmt_path, const EvalSettings& settings);

}  // namespace meanrank
