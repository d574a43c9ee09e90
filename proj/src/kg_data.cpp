#include "meanrank/kg_data.hpp"

#include <algorithm>
#include <fstream>
#include "json.hpp"

#include "meanrank/error.hpp"
#include "meanrank/text.hpp"

namespace meanrank {

namespace {

constexpr std::uint64_t pack_pair(std::uint32_t a, std::uint32_t b) noexcept {
    return (static_cast<std::uint64_t>(a) << 32) | b;
}

void check_triple(const Triple& t, std::size_t entity_count, std::size_t relation_count) {
    if (t.head >= entity_count || t.tail >= entity_count || t.rel >= relation_count) {
        throw std::invalid_argument("triple references an id outside the catalogs");
    }
}

std::vector<std::string> read_lines(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw LoadError(path.string(), 0, "cannot open file");
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        lines.push_back(std::move(line));
    }
    return lines;
}

std::vector<Entity> read_entities(const std::filesystem::path& path, EntityNaming naming) {
    struct Row {
        std::size_t line;
        std::string key, name, definition;
    };
    std::vector<Row> rows;
    const auto lines = read_lines(path);
    for (std::size_t i = 0; i < lines.size(); ++i) {
        if (text::is_blank(lines[i])) continue;
        auto fields = text::split(lines[i], '\t');
        if (fields.size() < 2 || fields.size() > 3) {
            throw LoadError(path.string(), i + 1, "expected key<TAB>name[<TAB>definition]");
        }
        Row row{i + 1, std::string(text::trim(fields[0])), std::string(text::trim(fields[1])), {}};
        if (fields.size() == 3) row.definition = text::collapse_whitespace(fields[2]);
        if (row.key.empty()) throw LoadError(path.string(), i + 1, "empty entity key");
        rows.push_back(std::move(row));
    }

    if (naming == EntityNaming::automatic) {
        const bool all_synsets = !rows.empty() && std::all_of(rows.begin(), rows.end(), [](const Row& r) {
            try {
                (void)clean_synset(r.name);
                return true;
            } catch (const InputError&) {
                return false;
            }
        });
        naming = all_synsets ? EntityNaming::synset : EntityNaming::verbatim;
    }

    std::vector<Entity> entities;
    entities.reserve(rows.size());
    std::unordered_map<std::string, std::size_t> seen_surface;
    std::unordered_set<std::string> seen_key;
    for (auto& row : rows) {
        std::string surface;
        if (naming == EntityNaming::synset) {
            try {
                surface = clean_synset(row.name);
            } catch (const InputError& e) {
                throw LoadError(path.string(), row.line, e.what());
            }
        } else {
            surface = text::collapse_whitespace(row.name);
        }
        if (surface.empty()) throw LoadError(path.string(), row.line, "entity '" + row.key + "' has an empty name");
        if (!seen_key.insert(row.key).second) {
            throw LoadError(path.string(), row.line, "duplicate entity key '" + row.key + "'");
        }
        auto [it, fresh] = seen_surface.emplace(surface, row.line);
        if (!fresh) {
            throw LoadError(path.string(), row.line,
                            "duplicate entity string '" + surface + "' (first seen on line " +
                                std::to_string(it->second) + ")");
        }
        entities.push_back(Entity{static_cast<EntityId>(entities.size()), std::move(row.key), std::move(row.name),
                                  std::move(surface), std::move(row.definition)});
    }
    return entities;
}

std::vector<Relation> read_relations(const std::filesystem::path& path) {
    std::vector<Relation> relations;
    std::unordered_set<std::string> seen_key, seen_surface;
    const auto lines = read_lines(path);
    for (std::size_t i = 0; i < lines.size(); ++i) {
        if (text::is_blank(lines[i])) continue;
        auto fields = text::split(lines[i], '\t');
        if (fields.size() > 2) throw LoadError(path.string(), i + 1, "expected key[<TAB>name]");
        std::string key(text::trim(fields[0]));
        std::string_view name = fields.size() == 2 ? fields[1] : fields[0];
        std::string surface;
        try {
            surface = clean_relation(name);
        } catch (const InputError& e) {
            throw LoadError(path.string(), i + 1, e.what());
        }
        if (!seen_key.insert(key).second) throw LoadError(path.string(), i + 1, "duplicate relation key '" + key + "'");
        if (!seen_surface.insert(surface).second) {
            throw LoadError(path.string(), i + 1, "duplicate relation string '" + surface + "'");
        }
        relations.push_back(Relation{static_cast<RelationId>(relations.size()), std::move(key), std::move(surface)});
    }
    return relations;
}

}  // namespace

std::size_t TripleHash::operator()(const Triple& t) const noexcept {
    std::uint64_t h = pack_pair(t.head, t.tail);
    h ^= static_cast<std::uint64_t>(t.rel) * 0x9e3779b97f4a7c15ULL;
    h ^= h >> 29;
    h *= 0xbf58476d1ce4e5b9ULL;
    return static_cast<std::size_t>(h ^ (h >> 32));
}

std::string_view to_string(SplitName split) noexcept {
    switch (split) {
        case SplitName::train: return "train";
        case SplitName::valid: return "valid";
        case SplitName::test: return "test";
    }
    return "?";
}

SplitName parse_split_name(std::string_view text) {
    if (text == "train") return SplitName::train;
    if (text == "valid") return SplitName::valid;
    if (text == "test") return SplitName::test;
    throw InputError("unknown split '" + std::string(text) + "' (expected train, valid or test)");
}

KnowledgeGraph::KnowledgeGraph(std::vector<Entity> entities, std::vector<Relation> relations,
                               std::vector<Triple> train, std::vector<Triple> valid, std::vector<Triple> test,
                               std::optional<UnseenEntities> unseen)
    : entities_(std::move(entities)),
      relations_(std::move(relations)),
      train_(std::move(train)),
      valid_(std::move(valid)),
      test_(std::move(test)),
      unseen_(std::move(unseen)) {
    for (std::size_t i = 0; i < entities_.size(); ++i) {
        if (entities_[i].id != i) throw std::invalid_argument("entity ids must be contiguous from 0");
        entity_by_key_.emplace(entities_[i].key, entities_[i].id);
    }
    for (std::size_t i = 0; i < relations_.size(); ++i) {
        if (relations_[i].id != i) throw std::invalid_argument("relation ids must be contiguous from 0");
        relation_by_key_.emplace(relations_[i].key, relations_[i].id);
    }
    known_.reserve(train_.size() + valid_.size() + test_.size());
    for (auto split : {&train_, &valid_, &test_}) {
        for (const Triple& t : *split) {
            check_triple(t, entities_.size(), relations_.size());
            if (!known_.insert(t).second) continue;
            tails_by_head_rel_[pack_pair(t.head, t.rel)].push_back(t.tail);
            heads_by_rel_tail_[pack_pair(t.rel, t.tail)].push_back(t.head);
        }
    }
    for (auto* index : {&tails_by_head_rel_, &heads_by_rel_tail_}) {
        for (auto& [key, ids] : *index) std::sort(ids.begin(), ids.end());
    }
    if (unseen_) {
        unseen_->is_valid_entity.assign(entities_.size(), false);
        unseen_->is_test_entity.assign(entities_.size(), false);
        for (EntityId e : unseen_->valid_entities) unseen_->is_valid_entity.at(e) = true;
        for (EntityId e : unseen_->test_entities) unseen_->is_test_entity.at(e) = true;
    }
}

std::span<const Triple> KnowledgeGraph::split(SplitName which) const noexcept {
    switch (which) {
        case SplitName::train: return train_;
        case SplitName::valid: return valid_;
        case SplitName::test: return test_;
    }
    return {};
}

std::span<const EntityId> KnowledgeGraph::known_tails(EntityId head, RelationId rel) const {
    auto it = tails_by_head_rel_.find(pack_pair(head, rel));
    if (it == tails_by_head_rel_.end()) return {};
    return it->second;
}

std::span<const EntityId> KnowledgeGraph::known_heads(RelationId rel, EntityId tail) const {
    auto it = heads_by_rel_tail_.find(pack_pair(rel, tail));
    if (it == heads_by_rel_tail_.end()) return {};
    return it->second;
}

std::optional<EntityId> KnowledgeGraph::find_entity(std::string_view key) const {
    auto it = entity_by_key_.find(std::string(key));
    if (it == entity_by_key_.end()) return std::nullopt;
    return it->second;
}

std::optional<RelationId> KnowledgeGraph::find_relation(std::string_view key) const {
    auto it = relation_by_key_.find(std::string(key));
    if (it == relation_by_key_.end()) return std::nullopt;
    return it->second;
}

std::string clean_synset(std::string_view raw) {
    auto malformed = [&](const char* why) {
        return InputError("malformed synset '" + std::string(raw) + "': " + why);
    };
    const auto number_dot = raw.rfind('.');
    if (number_dot == std::string_view::npos || number_dot == 0) throw malformed("expected name.pos.NN");
    const auto pos_dot = raw.rfind('.', number_dot - 1);
    if (pos_dot == std::string_view::npos || pos_dot == 0) throw malformed("expected name.pos.NN");

    const std::string_view number = raw.substr(number_dot + 1);
    const std::string_view pos = raw.substr(pos_dot + 1, number_dot - pos_dot - 1);
    const std::string_view name = raw.substr(0, pos_dot);
    if (number.empty() || !std::all_of(number.begin(), number.end(), [](char c) { return c >= '0' && c <= '9'; })) {
        throw malformed("sense number is not numeric");
    }

    std::string_view pos_word;
    if (pos == "n") pos_word = "noun";
    else if (pos == "v") pos_word = "verb";
    else if (pos == "a") pos_word = "adjective";
    else if (pos == "s") pos_word = "adjective satellite";
    else if (pos == "r") pos_word = "adverb";
    else throw malformed("unknown part of speech");

    std::string words(name);
    std::replace(words.begin(), words.end(), '_', ' ');
    words = text::collapse_whitespace(words);
    if (words.empty()) throw malformed("empty lemma");

    const auto first_nonzero = number.find_first_not_of('0');
    const std::string_view sense = first_nonzero == std::string_view::npos ? "0" : number.substr(first_nonzero);

    std::string out;
    out.reserve(words.size() + pos_word.size() + sense.size() + 2);
    out.append(words).append(" ").append(pos_word).append(" ").append(sense);
    return out;
}

std::string clean_relation(std::string_view raw) {
    std::string spaced(raw);
    for (char& c : spaced) {
        if (c == '_' || c == '/' || c == '.') c = ' ';
    }
    std::string out = text::collapse_whitespace(spaced);
    if (out.empty()) throw InputError("relation '" + std::string(raw) + "' is empty after cleaning");
    return out;
}

DatasetPaths DatasetPaths::in_directory(const std::filesystem::path& dir) {
    return DatasetPaths{dir / "train.tsv", dir / "valid.tsv", dir / "test.tsv", dir / "entities.tsv",
                        dir / "relations.tsv"};
}

KnowledgeGraph load_dataset(const DatasetPaths& paths, const LoadOptions& options,
                            std::vector<std::string>* warnings) {
    auto entities = read_entities(paths.entities, options.naming);
    auto relations = read_relations(paths.relations);

    std::unordered_map<std::string_view, EntityId> entity_ids;
    std::unordered_map<std::string_view, RelationId> relation_ids;
    for (const auto& e : entities) entity_ids.emplace(e.key, e.id);
    for (const auto& r : relations) relation_ids.emplace(r.key, r.id);

    std::unordered_set<Triple, TripleHash> seen;
    auto read_triples = [&](const std::filesystem::path& path) {
        std::vector<Triple> out;
        const auto lines = read_lines(path);
        for (std::size_t i = 0; i < lines.size(); ++i) {
            if (text::is_blank(lines[i])) continue;
            auto fields = text::split(lines[i], '\t');
            if (fields.size() != 3) throw LoadError(path.string(), i + 1, "expected head<TAB>relation<TAB>tail");
            auto lookup_entity = [&](std::string_view key) {
                auto it = entity_ids.find(text::trim(key));
                if (it == entity_ids.end()) {
                    throw LoadError(path.string(), i + 1, "unknown entity id '" + std::string(text::trim(key)) + "'");
                }
                return it->second;
            };
            const EntityId head = lookup_entity(fields[0]);
            auto rel = relation_ids.find(text::trim(fields[1]));
            if (rel == relation_ids.end()) {
                throw LoadError(path.string(), i + 1,
                                "unknown relation id '" + std::string(text::trim(fields[1])) + "'");
            }
            const Triple t{head, rel->second, lookup_entity(fields[2])};
            if (!seen.insert(t).second) {
                if (warnings) {
                    warnings->push_back(path.string() + ":" + std::to_string(i + 1) + ": duplicate triple dropped");
                }
                continue;
            }
            out.push_back(t);
        }
        return out;
    };
    auto train = read_triples(paths.train);
    auto valid = read_triples(paths.valid);
    auto test = read_triples(paths.test);
    return KnowledgeGraph(std::move(entities), std::move(relations), std::move(train), std::move(valid),
                          std::move(test));
}

KnowledgeGraph load_dataset_directory(const std::filesystem::path& dir, const LoadOptions& options,
                                      std::vector<std::string>* warnings) {
    KnowledgeGraph kg = load_dataset(DatasetPaths::in_directory(dir), options, warnings);
    const auto manifest_path = dir / "split.json";
    if (!std::filesystem::exists(manifest_path)) return kg;

    std::ifstream in(manifest_path);
    nlohmann::json manifest;
    try {
        manifest = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw LoadError(manifest_path.string(), 0, e.what());
    }
    UnseenEntities unseen;
    try {
        unseen.seed = manifest.at("seed").get<std::uint64_t>();
        for (auto [field, target] : {std::pair{"valid_entities", &unseen.valid_entities},
                                     std::pair{"test_entities", &unseen.test_entities}}) {
            for (const auto& key : manifest.at(field)) {
                auto id = kg.find_entity(key.get<std::string>());
                if (!id) throw LoadError(manifest_path.string(), 0, "unknown entity id '" + key.get<std::string>() + "'");
                target->push_back(*id);
            }
        }
    } catch (const nlohmann::json::exception& e) {
        throw LoadError(manifest_path.string(), 0, e.what());
    }
    return KnowledgeGraph(std::vector<Entity>(kg.entities().begin(), kg.entities().end()),
                          std::vector<Relation>(kg.relations().begin(), kg.relations().end()),
                          std::vector<Triple>(kg.train().begin(), kg.train().end()),
                          std::vector<Triple>(kg.valid().begin(), kg.valid().end()),
                          std::vector<Triple>(kg.test().begin(), kg.test().end()), std::move(unseen));
}

void write_dataset_directory(const KnowledgeGraph& kg, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    auto open = [&](const char* name) {
        std::ofstream out(dir / name, std::ios::binary);
        if (!out) throw InputError("cannot write " + (dir / name).string());
        return out;
    };
    {
        auto out = open("entities.tsv");
        for (const auto& e : kg.entities()) {
            out << e.key << '\t' << e.name;
            if (!e.definition.empty()) out << '\t' << e.definition;
            out << '\n';
        }
    }
    {
        auto out = open("relations.tsv");
        for (const auto& r : kg.relations()) out << r.key << '\t' << r.surface << '\n';
    }
    for (SplitName split : {SplitName::train, SplitName::valid, SplitName::test}) {
        auto out = open((std::string(to_string(split)) + ".tsv").c_str());
        for (const Triple& t : kg.split(split)) {
            out << kg.entity(t.head).key << '\t' << kg.relation(t.rel).key << '\t' << kg.entity(t.tail).key << '\n';
        }
    }
    if (kg.unseen()) {
        nlohmann::json manifest;
        manifest["seed"] = kg.unseen()->seed;
        auto keys = [&](const std::vector<EntityId>& ids) {
            nlohmann::json list = nlohmann::json::array();
            for (EntityId id : ids) list.push_back(kg.entity(id).key);
            return list;
        };
        manifest["valid_entities"] = keys(kg.unseen()->valid_entities);
        manifest["test_entities"] = keys(kg.unseen()->test_entities);
        auto out = open("split.json");
        out << manifest.dump(2) << '\n';
    }
}

}  // namespace meanrank
