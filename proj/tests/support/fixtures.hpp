#pragma once

#include <random>
#include <string>
#include <vector>

#include "meanrank/kg_data.hpp"
#include "meanrank/tokenizer.hpp"

namespace meanrank::support {

inline std::vector<Entity> named_entities(const std::vector<std::string>& surfaces,
                                          const std::vector<std::string>& definitions = {}) {
    std::vector<Entity> out;
    for (std::size_t i = 0; i < surfaces.size(); ++i) {
        out.push_back(Entity{static_cast<EntityId>(i), "e" + std::to_string(i), surfaces[i], surfaces[i],
                             i < definitions.size() ? definitions[i] : std::string{}});
    }
    return out;
}

inline std::vector<Relation> named_relations(const std::vector<std::string>& surfaces) {
    std::vector<Relation> out;
    for (std::size_t i = 0; i < surfaces.size(); ++i) {
        out.push_back(Relation{static_cast<RelationId>(i), "r" + std::to_string(i), surfaces[i]});
    }
    return out;
}

// Entities "E0".."E{n-1}", relations "R0".., triples drawn uniformly and
// deduplicated; the first `train_share` of them train, the rest split
// between valid and test.
inline KnowledgeGraph random_kg(std::mt19937_64& engine, std::size_t entities, std::size_t relations,
                                std::size_t triples) {
    std::vector<std::string> names, rel_names;
    for (std::size_t i = 0; i < entities; ++i) names.push_back("E" + std::to_string(i));
    for (std::size_t i = 0; i < relations; ++i) rel_names.push_back("R" + std::to_string(i));
    std::uniform_int_distribution<std::uint32_t> pick_e(0, static_cast<std::uint32_t>(entities - 1));
    std::uniform_int_distribution<std::uint32_t> pick_r(0, static_cast<std::uint32_t>(relations - 1));
    std::vector<Triple> all;
    for (std::size_t k = 0; k < triples; ++k) all.push_back(Triple{pick_e(engine), pick_r(engine), pick_e(engine)});
    std::sort(all.begin(), all.end());
    all.erase(std::unique(all.begin(), all.end()), all.end());
    std::shuffle(all.begin(), all.end(), engine);
    const std::size_t train_end = all.size() * 8 / 10, valid_end = all.size() * 9 / 10;
    return KnowledgeGraph(named_entities(names), named_relations(rel_names),
                          std::vector<Triple>(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(train_end)),
                          std::vector<Triple>(all.begin() + static_cast<std::ptrdiff_t>(train_end),
                                              all.begin() + static_cast<std::ptrdiff_t>(valid_end)),
                          std::vector<Triple>(all.begin() + static_cast<std::ptrdiff_t>(valid_end), all.end()));
}

// Rows of non-pad token ids in [reserved_count, vocab).
inline std::vector<std::vector<TokenId>> random_rows(std::mt19937_64& engine, std::size_t n, std::size_t max_len,
                                                     std::size_t vocab) {
    std::uniform_int_distribution<std::size_t> len(1, max_len);
    std::uniform_int_distribution<TokenId> tok(static_cast<TokenId>(Vocabulary::reserved_count),
                                               static_cast<TokenId>(vocab - 1));
    std::vector<std::vector<TokenId>> rows(n);
    for (auto& row : rows) {
        row.resize(len(engine));
        for (auto& t : row) t = tok(engine);
    }
    return rows;
}

inline std::vector<float> random_table(std::mt19937_64& engine, std::size_t positions, std::size_t vocab,
                                       float lo = -50.0f, float hi = 50.0f) {
    std::uniform_real_distribution<float> value(lo, hi);
    std::vector<float> table(positions * vocab);
    for (auto& v : table) v = value(engine);
    return table;
}

}  // namespace meanrank::support
