#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "meanrank/error.hpp"
#include "meanrank/kg_data.hpp"
#include "meanrank/rng.hpp"

namespace meanrank {

KnowledgeGraph partition_unseen(const KnowledgeGraph& kg, std::span<const EntityId> valid_entities,
                                std::span<const EntityId> test_entities, std::uint64_t seed) {
    std::vector<bool> in_valid(kg.entity_count(), false), in_test(kg.entity_count(), false);
    for (EntityId e : valid_entities) in_valid.at(e) = true;
    for (EntityId e : test_entities) {
        if (in_valid.at(e)) throw InputError("entity " + kg.entity(e).key + " is in both held-out sets");
        in_test[e] = true;
    }

    std::vector<Triple> train, valid, test;
    for (SplitName split : {SplitName::train, SplitName::valid, SplitName::test}) {
        for (const Triple& t : kg.split(split)) {
            if (in_valid[t.head] || in_valid[t.tail]) {
                valid.push_back(t);
            } else if (in_test[t.head] || in_test[t.tail]) {
                test.push_back(t);
            } else {
                train.push_back(t);
            }
        }
    }

    UnseenEntities unseen;
    unseen.seed = seed;
    unseen.valid_entities.assign(valid_entities.begin(), valid_entities.end());
    unseen.test_entities.assign(test_entities.begin(), test_entities.end());
    std::sort(unseen.valid_entities.begin(), unseen.valid_entities.end());
    std::sort(unseen.test_entities.begin(), unseen.test_entities.end());
    return KnowledgeGraph(std::vector<Entity>(kg.entities().begin(), kg.entities().end()),
                          std::vector<Relation>(kg.relations().begin(), kg.relations().end()), std::move(train),
                          std::move(valid), std::move(test), std::move(unseen));
}

KnowledgeGraph make_unseen_split(const KnowledgeGraph& kg, const SplitSpec& spec) {
    auto valid_fraction = [](double f) { return f > 0.0 && f < 1.0; };
    if (!valid_fraction(spec.valid_fraction) || !valid_fraction(spec.test_fraction) ||
        spec.valid_fraction + spec.test_fraction >= 1.0) {
        throw InputError("split fractions must lie in (0, 1) and sum to less than 1");
    }
    const std::size_t n = kg.entity_count();
    const auto valid_count = static_cast<std::size_t>(std::llround(spec.valid_fraction * static_cast<double>(n)));
    const auto test_count = static_cast<std::size_t>(std::llround(spec.test_fraction * static_cast<double>(n)));
    if (valid_count == 0 || test_count == 0) {
        throw InputError("split fractions select no entity out of " + std::to_string(n));
    }
    if (valid_count + test_count > n) throw InputError("split fractions select more entities than exist");

    // Partial Fisher-Yates: the first valid_count + test_count slots are the sample.
    std::vector<EntityId> order(n);
    std::iota(order.begin(), order.end(), EntityId{0});
    std::mt19937_64 engine(derive_seed(spec.seed, 0, StreamSalt::entity_split));
    for (std::size_t i = 0; i < valid_count + test_count; ++i) {
        const std::size_t j = i + uniform_below(engine, n - i);
        std::swap(order[i], order[j]);
    }
    const std::span<const EntityId> sample(order);
    return partition_unseen(kg, sample.first(valid_count), sample.subspan(valid_count, test_count), spec.seed);
}

}  // namespace meanrank
