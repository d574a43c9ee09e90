#include "meanrank/scoring.hpp"

#include <cmath>
#include <random>

#include "meanrank/error.hpp"
#include "meanrank/kernels.hpp"
#include "meanrank/rng.hpp"

namespace meanrank {

LogitTable::LogitTable(std::uint64_t query_id, std::size_t positions, std::size_t vocab, std::vector<float> values)
    : query_id_(query_id), positions_(positions), vocab_(vocab), values_(std::move(values)) {
    if (values_.size() != positions_ * vocab_) {
        throw DimensionError("logit table holds " + std::to_string(values_.size()) + " values, expected " +
                             std::to_string(positions_) + " x " + std::to_string(vocab_));
    }
}

void score_entities_into(const LogitView& table, const EntityCatalog& catalog, std::span<double> out) {
    if (table.positions != catalog.max_length() || table.vocab != catalog.vocab_size() ||
        table.values.size() != table.positions * table.vocab) {
        throw DimensionError("logit table is " + std::to_string(table.positions) + " x " +
                             std::to_string(table.vocab) + " but the catalog needs " +
                             std::to_string(catalog.max_length()) + " x " + std::to_string(catalog.vocab_size()));
    }
    if (out.size() != catalog.size()) throw std::invalid_argument("score buffer size differs from catalog size");
    const kernels::GatherInput in{table.values.data(),  table.vocab,    catalog.position_major().data(),
                                  catalog.lengths().data(), catalog.size(), catalog.max_length()};
    kernels::mean_gather(in, out.data());
}

ScoreVector score_entities(const LogitView& table, const EntityCatalog& catalog) {
    ScoreVector result{table.query_id, std::vector<double>(catalog.size())};
    score_entities_into(table, catalog, result.scores);
    return result;
}

namespace {

class ConstantSource final : public TableSource {
public:
    explicit ConstantSource(const EntityCatalog& catalog)
        : width_(catalog.max_length()), vocab_(catalog.vocab_size()), zeros_(width_ * vocab_, 0.0f) {}

    LogitView table_for(const Query& query, std::uint64_t, std::vector<float>&) const override {
        return LogitView{query.id, width_, vocab_, zeros_};
    }

private:
    std::size_t width_, vocab_;
    std::vector<float> zeros_;
};

class FrequencySource final : public TableSource {
public:
    FrequencySource(const KnowledgeGraph& kg, const EntityCatalog& catalog)
        : width_(catalog.max_length()), vocab_(catalog.vocab_size()), table_(width_ * vocab_, 0.0f) {
        std::vector<std::uint64_t> counts(table_.size(), 0);
        for (const Triple& t : kg.train()) {
            for (EntityId e : {t.head, t.tail}) {
                const auto tokens = catalog.tokens(e);
                for (std::size_t j = 0; j < tokens.size(); ++j) {
                    ++counts[j * vocab_ + static_cast<std::size_t>(tokens[j])];
                }
            }
        }
        for (std::size_t k = 0; k < counts.size(); ++k) {
            table_[k] = static_cast<float>(std::log1p(static_cast<double>(counts[k])));
        }
    }

    LogitView table_for(const Query& query, std::uint64_t, std::vector<float>&) const override {
        return LogitView{query.id, width_, vocab_, table_};
    }

private:
    std::size_t width_, vocab_;
    std::vector<float> table_;
};

class RandomSource final : public TableSource {
public:
    explicit RandomSource(const EntityCatalog& catalog) : width_(catalog.max_length()), vocab_(catalog.vocab_size()) {}

    LogitView table_for(const Query& query, std::uint64_t seed, std::vector<float>& scratch) const override {
        scratch.resize(width_ * vocab_);
        std::mt19937_64 engine(derive_seed(seed, query.id, StreamSalt::random_scorer));
        for (float& v : scratch) v = static_cast<float>(engine() >> 40) * 0x1.0p-24f;
        return LogitView{query.id, width_, vocab_, scratch};
    }

    bool seed_dependent() const noexcept override { return true; }

private:
    std::size_t width_, vocab_;
};

}  // namespace

std::string_view to_string(BuiltinScorer kind) noexcept {
    switch (kind) {
        case BuiltinScorer::constant: return "constant";
        case BuiltinScorer::frequency: return "frequency";
        case BuiltinScorer::random: return "random";
    }
    return "?";
}

BuiltinScorer parse_builtin_scorer(std::string_view name) {
    if (name == "constant") return BuiltinScorer::constant;
    if (name == "frequency") return BuiltinScorer::frequency;
    if (name == "random") return BuiltinScorer::random;
    throw InputError("unknown scorer '" + std::string(name) + "' (expected constant, frequency or random)");
}

std::unique_ptr<TableSource> make_builtin_scorer(BuiltinScorer kind, const KnowledgeGraph& kg,
                                                 const EntityCatalog& catalog) {
    switch (kind) {
        case BuiltinScorer::constant: return std::make_unique<ConstantSource>(catalog);
        case BuiltinScorer::frequency: return std::make_unique<FrequencySource>(kg, catalog);
        case BuiltinScorer::random: return std::make_unique<RandomSource>(catalog);
    }
    throw std::invalid_argument("bad scorer kind");
}

}  // namespace meanrank
