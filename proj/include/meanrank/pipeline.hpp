#pragma once

#include <filesystem>
#include <iosfwd>
#include <memory>
#include <optional>
#include <vector>

#include "meanrank/evaluation.hpp"
#include "meanrank/kg_data.hpp"
#include "meanrank/prompt.hpp"
#include "meanrank/scoring.hpp"
#include "meanrank/tokenizer.hpp"

namespace meanrank {

// Where token ids come from. With `catalog` set the engine runs in external
// mode: vocabulary and entity rows are taken verbatim from the model side
// and other strings resolve through `strings` (pretokenized JSON-lines).
// Otherwise the built-in greedy tokenizer runs over `vocab`, or over a
// word vocabulary built from the dataset when no vocabulary is given.
struct TokenizerOptions {
    std::optional<std::filesystem::path> vocab;
    std::optional<std::filesystem::path> catalog;
    std::optional<std::filesystem::path> strings;
};

struct Engine {
    std::unique_ptr<Tokenizer> tokenizer;
    EntityCatalog catalog;

    const Vocabulary& vocabulary() const noexcept { return tokenizer->vocabulary(); }
};

Engine make_engine(const KnowledgeGraph& kg, const TokenizerOptions& options);

std::vector<Query> select_queries(const KnowledgeGraph& kg, SplitName split, EvalMode mode);

// Every distinct surface, definition and relation string with its ids.
void write_strings_jsonl(std::ostream& out, const KnowledgeGraph& kg, const Tokenizer& tokenizer);

// {query_id, direction, triple, gold, token_ids, mask_start, mask_length}
void write_prompts_jsonl(std::ostream& out, const KnowledgeGraph& kg, const Engine& engine,
                         std::span<const Query> queries, const PromptOptions& options);

// query_id,gold,rank,candidate_count
void write_ranks_csv(std::ostream& out, std::span<const RankResult> ranks);

// Prompt, gold answer with its rank, then the best candidates with scores.
void write_topk_dump(std::ostream& out, const KnowledgeGraph& kg, const Engine& engine,
                     std::span<const QueryTrace> traces, const PromptOptions& options);

// Unseen-entity evaluation with a fresh entity split per seed (tie-breaks
// use the same seed). Tables come from a built-in scorer rebuilt on each
// split's training triples.
EvalRun evaluate_with_resplit(const KnowledgeGraph& kg, const Engine& engine, BuiltinScorer scorer,
                              const SplitSpec& fractions, SplitName split, const EvalSettings& settings);

}  // namespace meanrank
