#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "meanrank/kg_data.hpp"
#include "meanrank/tokenizer.hpp"

namespace meanrank {

enum class Direction : std::uint8_t { predict_head = 0, predict_tail = 1 };

std::string_view to_string(Direction d) noexcept;
Direction parse_direction(std::string_view text);

struct Query {
    Triple triple;
    Direction direction = Direction::predict_tail;
    std::uint64_t id = 0;

    EntityId gold() const noexcept { return direction == Direction::predict_head ? triple.head : triple.tail; }
    EntityId known() const noexcept { return direction == Direction::predict_head ? triple.tail : triple.head; }
};

// Bijective in (triple, direction) for head/tail ids below 2^26 and
// relation ids below 2^11; throws InputError outside that range.
std::uint64_t query_id(const Triple& triple, Direction direction);
Query make_query(const Triple& triple, Direction direction);

// Tail then head prediction for every triple, in triple order.
std::vector<Query> standard_queries(std::span<const Triple> triples);

// Unseen-entity evaluation: only sides holding a held-out entity are
// queried (validation entities for the valid split, test entities for the
// test split). A triple with both sides held out yields two queries.
std::vector<Query> unseen_queries(const KnowledgeGraph& kg, SplitName split);

struct Prompt {
    std::vector<TokenId> tokens;
    std::size_t mask_start = 0;
    std::size_t mask_length = 0;
};

struct PromptOptions {
    std::size_t max_seq_len = 512;
    bool pad_to_max = true;
};

/// Builds the model input for one query.
///
/// predict-tail: <s> head-surface head-definition relation <mask>*L </s> <pad>*
/// predict-head: <s> <mask>*L relation tail-surface tail-definition </s> <pad>*
///
/// L is the catalog width, so every query masks the same number of
/// positions. When the sequence would exceed max_seq_len the known entity's
/// definition is cut from its end; if it still does not fit, InputError.
Prompt build_prompt(const KnowledgeGraph& kg, const EntityCatalog& catalog, const Tokenizer& tokenizer,
                    const Query& query, const PromptOptions& options = {});

// Debug rendering in the <s>...<mask>...</s><pad> style: reserved tokens
// are spelled out and glued to their neighbours, ordinary tokens detokenized.
std::string render_tokens(const Vocabulary& vocab, std::span<const TokenId> ids);
inline std::string render_prompt(const Vocabulary& vocab, const Prompt& prompt) {
    return render_tokens(vocab, prompt.tokens);
}

// Inverse of render_tokens: reserved markers become their ids, the text
// between them goes through the tokenizer.
std::vector<TokenId> parse_rendered(const Tokenizer& tokenizer, std::string_view rendered);

}  // namespace meanrank
