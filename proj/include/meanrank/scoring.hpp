#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string_view>
#include <vector>

#include "meanrank/kg_data.hpp"
#include "meanrank/prompt.hpp"
#include "meanrank/tokenizer.hpp"

namespace meanrank {

// Non-owning view of one query's logit table: rows are masked positions,
// columns token ids.
struct LogitView {
    std::uint64_t query_id = 0;
    std::size_t positions = 0;
    std::size_t vocab = 0;
    std::span<const float> values;

    float at(std::size_t position, TokenId token) const {
        return values[position * vocab + static_cast<std::size_t>(token)];
    }
};

class LogitTable {
public:
    LogitTable() = default;
    LogitTable(std::uint64_t query_id, std::size_t positions, std::size_t vocab)
        : query_id_(query_id), positions_(positions), vocab_(vocab), values_(positions * vocab, 0.0f) {}
    LogitTable(std::uint64_t query_id, std::size_t positions, std::size_t vocab, std::vector<float> values);

    std::uint64_t query_id() const noexcept { return query_id_; }
    std::size_t positions() const noexcept { return positions_; }
    std::size_t vocab() const noexcept { return vocab_; }

    std::span<float> values() noexcept { return values_; }
    std::span<const float> values() const noexcept { return values_; }
    float& at(std::size_t position, TokenId token) {
        return values_[position * vocab_ + static_cast<std::size_t>(token)];
    }
    float at(std::size_t position, TokenId token) const {
        return values_[position * vocab_ + static_cast<std::size_t>(token)];
    }

    LogitView view() const noexcept { return LogitView{query_id_, positions_, vocab_, values_}; }

    friend bool operator==(const LogitTable&, const LogitTable&) = default;

private:
    std::uint64_t query_id_ = 0;
    std::size_t positions_ = 0;
    std::size_t vocab_ = 0;
    std::vector<float> values_;
};

struct ScoreVector {
    std::uint64_t query_id = 0;
    std::vector<double> scores;  // indexed by entity id
};

// Mean of the table entries picked out by each entity's non-pad tokens,
// accumulated in double. Throws DimensionError when the table does not
// match (catalog width, catalog vocabulary size).
ScoreVector score_entities(const LogitView& table, const EntityCatalog& catalog);
inline ScoreVector score_entities(const LogitTable& table, const EntityCatalog& catalog) {
    return score_entities(table.view(), catalog);
}
// Same, into caller storage of catalog.size() doubles.
void score_entities_into(const LogitView& table, const EntityCatalog& catalog, std::span<double> out);

// Produces the logit table for a query. `scratch` is caller-owned storage a
// source may fill and return a view into.
class TableSource {
public:
    virtual ~TableSource() = default;
    virtual LogitView table_for(const Query& query, std::uint64_t seed, std::vector<float>& scratch) const = 0;
    // True when tables differ between seeds.
    virtual bool seed_dependent() const noexcept { return false; }
};

enum class BuiltinScorer {
    constant,   // all-zero tables
    frequency,  // log(1 + count of token at position over training entities)
    random      // iid uniform [0, 1) cells drawn from (seed, query id)
};

std::string_view to_string(BuiltinScorer kind) noexcept;
BuiltinScorer parse_builtin_scorer(std::string_view name);

std::unique_ptr<TableSource> make_builtin_scorer(BuiltinScorer kind, const KnowledgeGraph& kg,
                                                 const EntityCatalog& catalog);

}  // namespace meanrank
