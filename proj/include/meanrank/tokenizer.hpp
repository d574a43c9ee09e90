#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "meanrank/kg_data.hpp"

namespace meanrank {

using TokenId = std::int32_t;

// Token <-> id bijection. Ids 0..3 are the reserved bos, eos, mask and pad
// tokens, in that order, exactly as the first four lines of a vocabulary file.
class Vocabulary {
public:
    static constexpr TokenId bos = 0;
    static constexpr TokenId eos = 1;
    static constexpr TokenId mask = 2;
    static constexpr TokenId pad = 3;
    static constexpr std::size_t reserved_count = 4;

    explicit Vocabulary(std::vector<std::string> tokens);

    static Vocabulary load(const std::filesystem::path& path);
    void save(const std::filesystem::path& path) const;

    std::size_t size() const noexcept { return tokens_.size(); }
    const std::string& token(TokenId id) const { return tokens_.at(static_cast<std::size_t>(id)); }
    std::optional<TokenId> find(std::string_view token) const;

    static bool is_reserved(TokenId id) noexcept { return id >= 0 && id < static_cast<TokenId>(reserved_count); }

    // Byte-fallback tokens are spelled <0xNN>.
    std::optional<TokenId> byte_token(std::uint8_t byte) const { return byte_ids_[byte]; }
    std::optional<std::uint8_t> byte_value(TokenId id) const;
    bool has_byte_fallback() const noexcept;

    // Copy with any missing <0xNN> tokens appended after the existing ids.
    Vocabulary with_byte_fallback() const;

    std::size_t longest_token_bytes() const noexcept { return longest_; }

private:
    std::vector<std::string> tokens_;
    std::unordered_map<std::string, TokenId> ids_;
    std::optional<TokenId> byte_ids_[256];
    std::size_t longest_ = 0;
};

class Tokenizer {
public:
    virtual ~Tokenizer() = default;
    virtual const Vocabulary& vocabulary() const noexcept = 0;
    // Never yields reserved ids.
    virtual std::vector<TokenId> encode(std::string_view text) const = 0;
};

// Splits on whitespace, then matches each word greedily against the
// vocabulary, longest token first. Bytes no token covers are emitted as
// <0xNN> tokens, one per byte of the offending UTF-8 character.
class GreedyTokenizer final : public Tokenizer {
public:
    // Adds byte-fallback tokens to `vocab` when it lacks them.
    explicit GreedyTokenizer(Vocabulary vocab);

    const Vocabulary& vocabulary() const noexcept override { return vocab_; }
    std::vector<TokenId> encode(std::string_view text) const override;

private:
    Vocabulary vocab_;
};

// Replays tokenizations produced by an external model tokenizer, keyed by
// the exact input string. Unknown strings are an error: the ids must match
// the model's own.
class PretokenizedTokenizer final : public Tokenizer {
public:
    PretokenizedTokenizer(Vocabulary vocab, std::unordered_map<std::string, std::vector<TokenId>> table);

    // JSON-lines of {"text": ..., "token_ids": [...]}.
    static PretokenizedTokenizer load(Vocabulary vocab, const std::filesystem::path& strings_path);

    const Vocabulary& vocabulary() const noexcept override { return vocab_; }
    std::vector<TokenId> encode(std::string_view text) const override;

private:
    Vocabulary vocab_;
    std::unordered_map<std::string, std::vector<TokenId>> table_;
};

// Joins tokens with single spaces; consecutive byte tokens are decoded back
// to raw bytes. encode(decode(ids)) == ids for ids produced by encode.
std::string detokenize(const Vocabulary& vocab, std::span<const TokenId> ids);

// Reserved tokens, byte tokens, then every distinct word of the entity,
// definition and relation strings in byte order.
Vocabulary build_word_vocabulary(const KnowledgeGraph& kg);

// Entities as right-padded token rows. Row i belongs to entity id i.
class EntityCatalog {
public:
    // `width` of 0 means the longest row. A larger width pads every row
    // further; a smaller one is an error.
    EntityCatalog(const std::vector<std::vector<TokenId>>& rows, std::size_t vocab_size, std::size_t width = 0);

    std::size_t size() const noexcept { return lengths_.size(); }
    std::size_t max_length() const noexcept { return width_; }
    std::size_t vocab_size() const noexcept { return vocab_size_; }

    std::span<const TokenId> row(std::size_t entity) const {
        return std::span<const TokenId>(rows_).subspan(entity * width_, width_);
    }
    std::span<const TokenId> tokens(std::size_t entity) const { return row(entity).first(lengths_[entity]); }
    std::uint32_t length(std::size_t entity) const { return lengths_.at(entity); }
    std::span<const std::uint32_t> lengths() const noexcept { return lengths_; }

    // Same ids stored position-major: element [j * size() + i] is row(i)[j].
    std::span<const TokenId> position_major() const noexcept { return columns_; }

    friend bool operator==(const EntityCatalog&, const EntityCatalog&) = default;

private:
    std::size_t width_ = 0;
    std::size_t vocab_size_ = 0;
    std::vector<TokenId> rows_;
    std::vector<TokenId> columns_;
    std::vector<std::uint32_t> lengths_;
};

// Throws InputError naming any entity whose surface tokenizes to nothing.
EntityCatalog build_catalog(const Tokenizer& tokenizer, std::span<const Entity> entities);

// JSON-lines of {"entity_id": i, "token_ids": [...]}; every entity id of the
// catalog must appear exactly once.
EntityCatalog load_catalog_jsonl(const std::filesystem::path& path, std::size_t entity_count,
                                 const Vocabulary& vocab);
void save_catalog_jsonl(const EntityCatalog& catalog, const std::filesystem::path& path);

}  // namespace meanrank
