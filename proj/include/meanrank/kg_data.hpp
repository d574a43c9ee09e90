#pragma once

#include <compare>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace meanrank {

using EntityId = std::uint32_t;
using RelationId = std::uint32_t;

struct Entity {
    EntityId id = 0;
    std::string key;         // raw identifier used by the triple files
    std::string name;        // name as it appears in the entity file
    std::string surface;     // cleaned, unique entity string
    std::string definition;  // may be empty
};

struct Relation {
    RelationId id = 0;
    std::string key;
    std::string surface;
};

struct Triple {
    EntityId head = 0;
    RelationId rel = 0;
    EntityId tail = 0;

    friend auto operator<=>(const Triple&, const Triple&) = default;
};

struct TripleHash {
    std::size_t operator()(const Triple& t) const noexcept;
};

enum class SplitName { train, valid, test };

std::string_view to_string(SplitName split) noexcept;
SplitName parse_split_name(std::string_view text);

// Entities held out by an unseen-entity split. Flags are indexed by entity id.
struct UnseenEntities {
    std::uint64_t seed = 0;
    std::vector<EntityId> valid_entities;
    std::vector<EntityId> test_entities;
    std::vector<bool> is_valid_entity;
    std::vector<bool> is_test_entity;
};

// Immutable after construction; safe to share across reader threads.
class KnowledgeGraph {
public:
    KnowledgeGraph(std::vector<Entity> entities, std::vector<Relation> relations,
                   std::vector<Triple> train, std::vector<Triple> valid, std::vector<Triple> test,
                   std::optional<UnseenEntities> unseen = std::nullopt);

    std::span<const Entity> entities() const noexcept { return entities_; }
    std::span<const Relation> relations() const noexcept { return relations_; }
    const Entity& entity(EntityId id) const { return entities_.at(id); }
    const Relation& relation(RelationId id) const { return relations_.at(id); }
    std::size_t entity_count() const noexcept { return entities_.size(); }
    std::size_t relation_count() const noexcept { return relations_.size(); }

    std::span<const Triple> split(SplitName which) const noexcept;
    std::span<const Triple> train() const noexcept { return train_; }
    std::span<const Triple> valid() const noexcept { return valid_; }
    std::span<const Triple> test() const noexcept { return test_; }

    // Membership in train ∪ valid ∪ test.
    bool is_known(const Triple& t) const { return known_.contains(t); }
    std::size_t known_count() const noexcept { return known_.size(); }

    // Every tail t with (head, rel, t) known; every head h with (h, rel, tail) known.
    std::span<const EntityId> known_tails(EntityId head, RelationId rel) const;
    std::span<const EntityId> known_heads(RelationId rel, EntityId tail) const;

    const std::optional<UnseenEntities>& unseen() const noexcept { return unseen_; }

    std::optional<EntityId> find_entity(std::string_view key) const;
    std::optional<RelationId> find_relation(std::string_view key) const;

private:
    std::vector<Entity> entities_;
    std::vector<Relation> relations_;
    std::vector<Triple> train_, valid_, test_;
    std::unordered_set<Triple, TripleHash> known_;
    std::unordered_map<std::uint64_t, std::vector<EntityId>> tails_by_head_rel_;
    std::unordered_map<std::uint64_t, std::vector<EntityId>> heads_by_rel_tail_;
    std::unordered_map<std::string, EntityId> entity_by_key_;
    std::unordered_map<std::string, RelationId> relation_by_key_;
    std::optional<UnseenEntities> unseen_;
};

// "dog.n.01" -> "dog noun 1". Throws InputError on malformed names.
std::string clean_synset(std::string_view raw);

// "_member_of_domain_usage" -> "member of domain usage",
// "/people/person/nationality" -> "people person nationality".
std::string clean_relation(std::string_view raw);

enum class EntityNaming {
    verbatim,  // names are used as-is (FB15k-237 style mapping files)
    synset,    // names are WordNet synsets and go through clean_synset
    automatic  // synset when every name parses as one, else verbatim
};

struct DatasetPaths {
    std::filesystem::path train;
    std::filesystem::path valid;
    std::filesystem::path test;
    std::filesystem::path entities;
    std::filesystem::path relations;

    // <dir>/{train,valid,test,entities,relations}.tsv
    static DatasetPaths in_directory(const std::filesystem::path& dir);
};

struct LoadOptions {
    EntityNaming naming = EntityNaming::automatic;
};

/// Loads a dataset from TSV files.
///
/// Entity file lines are `key<TAB>name[<TAB>definition]`, relation file lines
/// are `key[<TAB>name]`, triple files hold `head<TAB>relation<TAB>tail` keys.
/// Duplicate triples within and across splits are dropped (first occurrence
/// wins) and reported through `warnings` when given.
KnowledgeGraph load_dataset(const DatasetPaths& paths, const LoadOptions& options = {},
                            std::vector<std::string>* warnings = nullptr);

// load_dataset on a directory; also picks up split.json written by
// write_dataset_directory for unseen-entity splits.
KnowledgeGraph load_dataset_directory(const std::filesystem::path& dir, const LoadOptions& options = {},
                                      std::vector<std::string>* warnings = nullptr);

void write_dataset_directory(const KnowledgeGraph& kg, const std::filesystem::path& dir);

struct SplitSpec {
    std::uint64_t seed = 0;
    double valid_fraction = 0.05;
    double test_fraction = 0.05;
};

// Samples disjoint validation and test entity sets and repartitions every
// triple of `kg` by them. Throws InputError on invalid fractions or when a
// fraction selects no entity.
KnowledgeGraph make_unseen_split(const KnowledgeGraph& kg, const SplitSpec& spec);

// Repartition with explicit held-out sets:
//   train = triples touching neither set
//   valid = triples touching a validation entity
//   test  = triples touching a test entity and no validation entity
KnowledgeGraph partition_unseen(const KnowledgeGraph& kg, std::span<const EntityId> valid_entities,
                                std::span<const EntityId> test_entities, std::uint64_t seed = 0);

}  // namespace meanrank
