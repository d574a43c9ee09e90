#include "meanrank/prompt.hpp"

#include <array>

#include "meanrank/error.hpp"
#include "meanrank/rng.hpp"

namespace meanrank {

std::string_view to_string(Direction d) noexcept {
    return d == Direction::predict_head ? "head" : "tail";
}

Direction parse_direction(std::string_view text) {
    if (text == "head") return Direction::predict_head;
    if (text == "tail") return Direction::predict_tail;
    throw InputError("unknown direction '" + std::string(text) + "' (expected head or tail)");
}

std::uint64_t query_id(const Triple& triple, Direction direction) {
    constexpr std::uint64_t entity_limit = 1ULL << 26;
    constexpr std::uint64_t relation_limit = 1ULL << 11;
    if (triple.head >= entity_limit || triple.tail >= entity_limit || triple.rel >= relation_limit) {
        throw InputError("triple ids exceed the query id packing range");
    }
    const std::uint64_t packed = (static_cast<std::uint64_t>(triple.head) << 38) |
                                 (static_cast<std::uint64_t>(triple.tail) << 12) |
                                 (static_cast<std::uint64_t>(triple.rel) << 1) |
                                 static_cast<std::uint64_t>(direction);
    // splitmix64 is a bijection on 64-bit words, so distinct packings stay distinct.
    return splitmix64(packed);
}

Query make_query(const Triple& triple, Direction direction) {
    return Query{triple, direction, query_id(triple, direction)};
}

std::vector<Query> standard_queries(std::span<const Triple> triples) {
    std::vector<Query> out;
    out.reserve(triples.size() * 2);
    for (const Triple& t : triples) {
        out.push_back(make_query(t, Direction::predict_tail));
        out.push_back(make_query(t, Direction::predict_head));
    }
    return out;
}

std::vector<Query> unseen_queries(const KnowledgeGraph& kg, SplitName split) {
    if (!kg.unseen()) throw InputError("dataset has no unseen-entity split");
    if (split == SplitName::train) throw InputError("unseen-entity mode evaluates the valid or test split");
    const auto& held_out = split == SplitName::valid ? kg.unseen()->is_valid_entity : kg.unseen()->is_test_entity;
    std::vector<Query> out;
    for (const Triple& t : kg.split(split)) {
        if (held_out[t.tail]) out.push_back(make_query(t, Direction::predict_tail));
        if (held_out[t.head]) out.push_back(make_query(t, Direction::predict_head));
    }
    return out;
}

Prompt build_prompt(const KnowledgeGraph& kg, const EntityCatalog& catalog, const Tokenizer& tokenizer,
                    const Query& query, const PromptOptions& options) {
    const Entity& known = kg.entity(query.known());
    const auto surface = catalog.tokens(known.id);
    const auto relation = tokenizer.encode(kg.relation(query.triple.rel).surface);
    auto definition = tokenizer.encode(known.definition);
    const std::size_t width = catalog.max_length();

    const std::size_t fixed = 2 + surface.size() + relation.size() + width;
    if (fixed > options.max_seq_len) {
        throw InputError("query " + std::to_string(query.id) + " (" + known.key + ", " +
                         kg.relation(query.triple.rel).key + ", " + std::string(to_string(query.direction)) +
                         ") needs " + std::to_string(fixed) + " tokens without its definition; max_seq_len is " +
                         std::to_string(options.max_seq_len));
    }
    if (fixed + definition.size() > options.max_seq_len) definition.resize(options.max_seq_len - fixed);

    Prompt prompt;
    auto& out = prompt.tokens;
    out.reserve(options.pad_to_max ? options.max_seq_len : fixed + definition.size());
    out.push_back(Vocabulary::bos);
    auto append = [&](auto&& ids) { out.insert(out.end(), ids.begin(), ids.end()); };
    auto append_mask = [&] {
        prompt.mask_start = out.size();
        prompt.mask_length = width;
        out.insert(out.end(), width, Vocabulary::mask);
    };
    if (query.direction == Direction::predict_tail) {
        append(surface);
        append(definition);
        append(relation);
        append_mask();
    } else {
        append_mask();
        append(relation);
        append(surface);
        append(definition);
    }
    out.push_back(Vocabulary::eos);
    if (options.pad_to_max) out.resize(options.max_seq_len, Vocabulary::pad);
    return prompt;
}

std::string render_tokens(const Vocabulary& vocab, std::span<const TokenId> ids) {
    std::string out;
    std::size_t i = 0;
    while (i < ids.size()) {
        if (Vocabulary::is_reserved(ids[i])) {
            out.append(vocab.token(ids[i]));
            ++i;
            continue;
        }
        std::size_t end = i;
        while (end < ids.size() && !Vocabulary::is_reserved(ids[end])) ++end;
        out.append(detokenize(vocab, ids.subspan(i, end - i)));
        i = end;
    }
    return out;
}

std::vector<TokenId> parse_rendered(const Tokenizer& tokenizer, std::string_view rendered) {
    const Vocabulary& vocab = tokenizer.vocabulary();
    const std::array<TokenId, 4> reserved{Vocabulary::bos, Vocabulary::eos, Vocabulary::mask, Vocabulary::pad};
    std::vector<TokenId> out;
    std::size_t text_start = 0, pos = 0;
    auto flush_text = [&](std::size_t end) {
        auto ids = tokenizer.encode(rendered.substr(text_start, end - text_start));
        out.insert(out.end(), ids.begin(), ids.end());
    };
    while (pos < rendered.size()) {
        bool hit = false;
        for (TokenId id : reserved) {
            const std::string& marker = vocab.token(id);
            if (!marker.empty() && rendered.substr(pos, marker.size()) == marker) {
                flush_text(pos);
                out.push_back(id);
                pos += marker.size();
                text_start = pos;
                hit = true;
                break;
            }
        }
        if (!hit) ++pos;
    }
    flush_text(rendered.size());
    return out;
}

}  // namespace meanrank
