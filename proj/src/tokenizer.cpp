#include "meanrank/tokenizer.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <set>

#include "json.hpp"
#include "meanrank/error.hpp"
#include "meanrank/text.hpp"

namespace meanrank {

namespace {

std::string byte_spelling(std::uint8_t byte) {
    char buf[7];
    std::snprintf(buf, sizeof buf, "<0x%02X>", byte);
    return buf;
}

std::optional<std::uint8_t> parse_byte_spelling(std::string_view s) {
    if (s.size() != 6 || s.substr(0, 3) != "<0x" || s[5] != '>') return std::nullopt;
    auto hex = [](char c) -> int {
        if (c >= '0' && c <= '9') return c - '0';
        if (c >= 'A' && c <= 'F') return c - 'A' + 10;
        return -1;
    };
    const int hi = hex(s[3]), lo = hex(s[4]);
    if (hi < 0 || lo < 0) return std::nullopt;
    return static_cast<std::uint8_t>(hi * 16 + lo);
}

std::size_t utf8_sequence_length(unsigned char lead) noexcept {
    if (lead < 0x80) return 1;
    if ((lead & 0xE0) == 0xC0) return 2;
    if ((lead & 0xF0) == 0xE0) return 3;
    if ((lead & 0xF8) == 0xF0) return 4;
    return 1;
}

std::vector<TokenId> parse_id_array(const nlohmann::json& array, const Vocabulary& vocab) {
    std::vector<TokenId> ids;
    ids.reserve(array.size());
    for (const auto& v : array) {
        const auto id = v.get<std::int64_t>();
        if (id < 0 || static_cast<std::uint64_t>(id) >= vocab.size()) {
            throw InputError("token id " + std::to_string(id) + " outside vocabulary of size " +
                             std::to_string(vocab.size()));
        }
        ids.push_back(static_cast<TokenId>(id));
    }
    return ids;
}

}  // namespace

Vocabulary::Vocabulary(std::vector<std::string> tokens) : tokens_(std::move(tokens)) {
    if (tokens_.size() < reserved_count) {
        throw InputError("vocabulary needs the four reserved tokens (bos, eos, mask, pad)");
    }
    ids_.reserve(tokens_.size());
    for (std::size_t i = 0; i < tokens_.size(); ++i) {
        const auto id = static_cast<TokenId>(i);
        if (!ids_.emplace(tokens_[i], id).second) {
            throw InputError("duplicate vocabulary token '" + tokens_[i] + "' at id " + std::to_string(i));
        }
        if (auto byte = parse_byte_spelling(tokens_[i])) byte_ids_[*byte] = id;
        if (!is_reserved(id)) longest_ = std::max(longest_, tokens_[i].size());
    }
}

Vocabulary Vocabulary::load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw LoadError(path.string(), 0, "cannot open vocabulary");
    std::vector<std::string> tokens;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        tokens.push_back(std::move(line));
    }
    try {
        return Vocabulary(std::move(tokens));
    } catch (const InputError& e) {
        throw LoadError(path.string(), 0, e.what());
    }
}

void Vocabulary::save(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot write " + path.string());
    for (const auto& t : tokens_) out << t << '\n';
}

std::optional<TokenId> Vocabulary::find(std::string_view token) const {
    auto it = ids_.find(std::string(token));
    if (it == ids_.end()) return std::nullopt;
    return it->second;
}

std::optional<std::uint8_t> Vocabulary::byte_value(TokenId id) const {
    if (id < 0 || static_cast<std::size_t>(id) >= tokens_.size()) return std::nullopt;
    auto byte = parse_byte_spelling(tokens_[static_cast<std::size_t>(id)]);
    if (byte && byte_ids_[*byte] == id) return byte;
    return std::nullopt;
}

bool Vocabulary::has_byte_fallback() const noexcept {
    return std::all_of(std::begin(byte_ids_), std::end(byte_ids_), [](const auto& id) { return id.has_value(); });
}

Vocabulary Vocabulary::with_byte_fallback() const {
    if (has_byte_fallback()) return *this;
    auto tokens = tokens_;
    for (int b = 0; b < 256; ++b) {
        if (!byte_ids_[b]) tokens.push_back(byte_spelling(static_cast<std::uint8_t>(b)));
    }
    return Vocabulary(std::move(tokens));
}

GreedyTokenizer::GreedyTokenizer(Vocabulary vocab) : vocab_(vocab.with_byte_fallback()) {}

std::vector<TokenId> GreedyTokenizer::encode(std::string_view input) const {
    std::vector<TokenId> out;
    for (std::string_view word : text::words(input)) {
        std::size_t pos = 0;
        while (pos < word.size()) {
            bool matched = false;
            for (std::size_t len = std::min(vocab_.longest_token_bytes(), word.size() - pos); len > 0; --len) {
                auto id = vocab_.find(word.substr(pos, len));
                if (!id || Vocabulary::is_reserved(*id) || vocab_.byte_value(*id)) continue;
                out.push_back(*id);
                pos += len;
                matched = true;
                break;
            }
            if (matched) continue;
            const std::size_t len =
                std::min(utf8_sequence_length(static_cast<unsigned char>(word[pos])), word.size() - pos);
            for (std::size_t k = 0; k < len; ++k) {
                out.push_back(*vocab_.byte_token(static_cast<std::uint8_t>(word[pos + k])));
            }
            pos += len;
        }
    }
    return out;
}

PretokenizedTokenizer::PretokenizedTokenizer(Vocabulary vocab,
                                             std::unordered_map<std::string, std::vector<TokenId>> table)
    : vocab_(std::move(vocab)), table_(std::move(table)) {
    for (const auto& [text, ids] : table_) {
        for (TokenId id : ids) {
            if (id < 0 || static_cast<std::size_t>(id) >= vocab_.size() || Vocabulary::is_reserved(id)) {
                throw InputError("pretokenized string '" + text + "' uses invalid token id " + std::to_string(id));
            }
        }
    }
}

PretokenizedTokenizer PretokenizedTokenizer::load(Vocabulary vocab, const std::filesystem::path& strings_path) {
    std::ifstream in(strings_path, std::ios::binary);
    if (!in) throw LoadError(strings_path.string(), 0, "cannot open pretokenized strings");
    std::unordered_map<std::string, std::vector<TokenId>> table;
    std::string line;
    for (std::size_t line_no = 1; std::getline(in, line); ++line_no) {
        if (text::is_blank(line)) continue;
        try {
            const auto record = nlohmann::json::parse(line);
            table[record.at("text").get<std::string>()] = parse_id_array(record.at("token_ids"), vocab);
        } catch (const nlohmann::json::exception& e) {
            throw LoadError(strings_path.string(), line_no, e.what());
        } catch (const InputError& e) {
            throw LoadError(strings_path.string(), line_no, e.what());
        }
    }
    return PretokenizedTokenizer(std::move(vocab), std::move(table));
}

std::vector<TokenId> PretokenizedTokenizer::encode(std::string_view input) const {
    if (input.empty()) return {};
    auto it = table_.find(std::string(input));
    if (it == table_.end()) throw InputError("string has no pretokenized entry: '" + std::string(input) + "'");
    return it->second;
}

// Pieces are space-separated; a UTF-8 continuation byte is glued to the
// byte before it so multi-byte characters come back whole.
std::string detokenize(const Vocabulary& vocab, std::span<const TokenId> ids) {
    std::string out;
    bool previous_was_byte = false;
    for (TokenId id : ids) {
        if (auto byte = vocab.byte_value(id)) {
            const bool continuation = (*byte & 0xC0) == 0x80;
            if (!(previous_was_byte && continuation) && !out.empty()) out.push_back(' ');
            out.push_back(static_cast<char>(*byte));
            previous_was_byte = true;
            continue;
        }
        if (!out.empty()) out.push_back(' ');
        out.append(vocab.token(id));
        previous_was_byte = false;
    }
    return out;
}

Vocabulary build_word_vocabulary(const KnowledgeGraph& kg) {
    std::set<std::string, std::less<>> words;
    auto add = [&](std::string_view s) {
        for (auto w : text::words(s)) words.emplace(w);
    };
    for (const auto& e : kg.entities()) {
        add(e.surface);
        add(e.definition);
    }
    for (const auto& r : kg.relations()) add(r.surface);

    std::vector<std::string> tokens{"<s>", "</s>", "<mask>", "<pad>"};
    for (int b = 0; b < 256; ++b) tokens.push_back(byte_spelling(static_cast<std::uint8_t>(b)));
    for (const auto& w : words) {
        if (w == "<s>" || w == "</s>" || w == "<mask>" || w == "<pad>" || parse_byte_spelling(w)) continue;
        tokens.push_back(w);
    }
    return Vocabulary(std::move(tokens));
}

EntityCatalog::EntityCatalog(const std::vector<std::vector<TokenId>>& rows, std::size_t vocab_size,
                             std::size_t width)
    : vocab_size_(vocab_size) {
    std::size_t longest = 0;
    lengths_.reserve(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& row = rows[i];
        if (row.empty()) throw InputError("entity " + std::to_string(i) + " has no tokens");
        for (TokenId id : row) {
            if (id < 0 || static_cast<std::size_t>(id) >= vocab_size || id == Vocabulary::pad) {
                throw InputError("entity " + std::to_string(i) + " has invalid token id " + std::to_string(id));
            }
        }
        longest = std::max(longest, row.size());
        lengths_.push_back(static_cast<std::uint32_t>(row.size()));
    }
    if (width == 0) width = longest;
    if (width < longest) {
        throw InputError("catalog width " + std::to_string(width) + " is below the longest entity (" +
                         std::to_string(longest) + " tokens)");
    }
    width_ = width;

    rows_.assign(rows.size() * width_, Vocabulary::pad);
    columns_.assign(rows.size() * width_, Vocabulary::pad);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (std::size_t j = 0; j < rows[i].size(); ++j) {
            rows_[i * width_ + j] = rows[i][j];
            columns_[j * rows.size() + i] = rows[i][j];
        }
    }
}

EntityCatalog build_catalog(const Tokenizer& tokenizer, std::span<const Entity> entities) {
    std::vector<std::vector<TokenId>> rows;
    rows.reserve(entities.size());
    for (std::size_t i = 0; i < entities.size(); ++i) {
        if (entities[i].id != i) throw InputError("entities must be passed in id order");
        auto ids = tokenizer.encode(entities[i].surface);
        if (ids.empty()) {
            throw InputError("entity '" + entities[i].key + "' (\"" + entities[i].surface + "\") has no tokens");
        }
        rows.push_back(std::move(ids));
    }
    return EntityCatalog(rows, tokenizer.vocabulary().size());
}

EntityCatalog load_catalog_jsonl(const std::filesystem::path& path, std::size_t entity_count,
                                 const Vocabulary& vocab) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw LoadError(path.string(), 0, "cannot open catalog");
    std::vector<std::vector<TokenId>> rows(entity_count);
    std::vector<bool> seen(entity_count, false);
    std::string line;
    for (std::size_t line_no = 1; std::getline(in, line); ++line_no) {
        if (text::is_blank(line)) continue;
        try {
            const auto record = nlohmann::json::parse(line);
            const auto id = record.at("entity_id").get<std::int64_t>();
            if (id < 0 || static_cast<std::uint64_t>(id) >= entity_count) {
                throw InputError("entity_id " + std::to_string(id) + " outside [0, " + std::to_string(entity_count) +
                                 ")");
            }
            if (seen[static_cast<std::size_t>(id)]) throw InputError("entity_id " + std::to_string(id) + " repeated");
            seen[static_cast<std::size_t>(id)] = true;
            rows[static_cast<std::size_t>(id)] = parse_id_array(record.at("token_ids"), vocab);
        } catch (const nlohmann::json::exception& e) {
            throw LoadError(path.string(), line_no, e.what());
        } catch (const LoadError&) {
            throw;
        } catch (const InputError& e) {
            throw LoadError(path.string(), line_no, e.what());
        }
    }
    for (std::size_t i = 0; i < entity_count; ++i) {
        if (!seen[i]) throw LoadError(path.string(), 0, "entity_id " + std::to_string(i) + " missing");
    }
    try {
        return EntityCatalog(rows, vocab.size());
    } catch (const InputError& e) {
        throw LoadError(path.string(), 0, e.what());
    }
}

void save_catalog_jsonl(const EntityCatalog& catalog, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot write " + path.string());
    for (std::size_t i = 0; i < catalog.size(); ++i) {
        nlohmann::json record;
        record["entity_id"] = i;
        const auto ids = catalog.tokens(i);
        record["token_ids"] = std::vector<TokenId>(ids.begin(), ids.end());
        out << record.dump() << '\n';
    }
}

}  // namespace meanrank
