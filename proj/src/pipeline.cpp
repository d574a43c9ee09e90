#include "meanrank/pipeline.hpp"

#include <cstdio>
#include <ostream>
#include <set>

#include "json.hpp"
#include "meanrank/error.hpp"

namespace meanrank {

Engine make_engine(const KnowledgeGraph& kg, const TokenizerOptions& options) {
    if (options.catalog) {
        if (!options.vocab) throw InputError("an external catalog needs its vocabulary file (--vocab)");
        Vocabulary vocab = Vocabulary::load(*options.vocab);
        EntityCatalog catalog = load_catalog_jsonl(*options.catalog, kg.entity_count(), vocab);
        std::unique_ptr<Tokenizer> tokenizer;
        if (options.strings) {
            tokenizer = std::make_unique<PretokenizedTokenizer>(PretokenizedTokenizer::load(vocab, *options.strings));
        } else {
            tokenizer = std::make_unique<PretokenizedTokenizer>(std::move(vocab),
                                                                std::unordered_map<std::string, std::vector<TokenId>>{});
        }
        return Engine{std::move(tokenizer), std::move(catalog)};
    }
    if (options.strings) throw InputError("pretokenized strings are only used together with --catalog");
    Vocabulary vocab = options.vocab ? Vocabulary::load(*options.vocab) : build_word_vocabulary(kg);
    auto tokenizer = std::make_unique<GreedyTokenizer>(std::move(vocab));
    EntityCatalog catalog = build_catalog(*tokenizer, kg.entities());
    return Engine{std::move(tokenizer), std::move(catalog)};
}

std::vector<Query> select_queries(const KnowledgeGraph& kg, SplitName split, EvalMode mode) {
    return mode == EvalMode::standard ? standard_queries(kg.split(split)) : unseen_queries(kg, split);
}

void write_strings_jsonl(std::ostream& out, const KnowledgeGraph& kg, const Tokenizer& tokenizer) {
    std::set<std::string> strings;
    for (const auto& e : kg.entities()) {
        strings.insert(e.surface);
        if (!e.definition.empty()) strings.insert(e.definition);
    }
    for (const auto& r : kg.relations()) strings.insert(r.surface);
    for (const auto& s : strings) {
        nlohmann::json record{{"text", s}, {"token_ids", tokenizer.encode(s)}};
        out << record.dump() << '\n';
    }
}

void write_prompts_jsonl(std::ostream& out, const KnowledgeGraph& kg, const Engine& engine,
                         std::span<const Query> queries, const PromptOptions& options) {
    for (const Query& q : queries) {
        const Prompt p = build_prompt(kg, engine.catalog, *engine.tokenizer, q, options);
        nlohmann::json record{
            {"query_id", q.id},
            {"direction", to_string(q.direction)},
            {"triple",
             {kg.entity(q.triple.head).key, kg.relation(q.triple.rel).key, kg.entity(q.triple.tail).key}},
            {"gold", q.gold()},
            {"token_ids", p.tokens},
            {"mask_start", p.mask_start},
            {"mask_length", p.mask_length},
        };
        out << record.dump() << '\n';
    }
}

void write_ranks_csv(std::ostream& out, std::span<const RankResult> ranks) {
    out << "query_id,gold,rank,candidate_count\n";
    for (const auto& r : ranks) out << r.query_id << ',' << r.gold << ',' << r.rank << ',' << r.candidate_count << '\n';
}

void write_topk_dump(std::ostream& out, const KnowledgeGraph& kg, const Engine& engine,
                     std::span<const QueryTrace> traces, const PromptOptions& options) {
    const Vocabulary& vocab = engine.vocabulary();
    auto entity_text = [&](EntityId e) { return render_tokens(vocab, engine.catalog.row(e)); };
    char score[32];
    for (const QueryTrace& trace : traces) {
        std::string prompt;
        try {
            prompt = render_prompt(vocab, build_prompt(kg, engine.catalog, *engine.tokenizer, trace.query, options));
        } catch (const InputError& e) {
            prompt = std::string("(unavailable: ") + e.what() + ")";
        }
        out << "Query " << trace.query.id << " (" << to_string(trace.query.direction) << ")\n";
        out << "Prompt : " << prompt << '\n';
        out << "Correct answer : " << entity_text(trace.query.gold()) << " \t Answer rank "
            << trace.first_seed_rank.rank << '\n';
        for (std::size_t k = 0; k < trace.top.size(); ++k) {
            std::snprintf(score, sizeof score, "%.4f", trace.top[k].score);
            out << "Rank " << k + 1 << "\t Score " << score << "\t : " << entity_text(trace.top[k].entity) << '\n';
        }
        out << '\n';
    }
}

EvalRun evaluate_with_resplit(const KnowledgeGraph& kg, const Engine& engine, BuiltinScorer scorer,
                              const SplitSpec& fractions, SplitName split, const EvalSettings& settings) {
    if (settings.seeds.empty()) throw InputError("at least one seed is required");
    EvalRun combined;
    std::vector<Metrics> per_seed;
    for (std::uint64_t seed : settings.seeds) {
        SplitSpec spec = fractions;
        spec.seed = seed;
        const KnowledgeGraph resplit = make_unseen_split(kg, spec);
        const auto queries = unseen_queries(resplit, split);
        const auto source = make_builtin_scorer(scorer, resplit, engine.catalog);
        EvalSettings one = settings;
        one.seeds = {seed};
        EvalRun run = evaluate_queries(resplit, engine.catalog, queries, *source, one);
        per_seed.push_back(run.report.per_seed.front());
        combined.ranks.push_back(std::move(run.ranks.front()));
        if (combined.traces.empty()) combined.traces = std::move(run.traces);
    }
    combined.report = aggregate_seeds(settings.seeds, per_seed);
    return combined;
}

}  // namespace meanrank
