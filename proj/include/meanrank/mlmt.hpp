#pragma once

// MLMT: logit tables exchanged with the model runner.
//
//   offset 0   "MLMT"
//   offset 4   u32 version (1)
//   offset 8   u32 vocab_size
//   offset 12  u32 l_max
//   then records: u64 query_id, l_max * vocab_size float32 (row = position)
//
// All integers and floats little-endian. A sidecar JSON manifest
// (<file>.json) maps each query_id to its triple and direction.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <span>
#include <vector>

#include "meanrank/kg_data.hpp"
#include "meanrank/prompt.hpp"
#include "meanrank/scoring.hpp"

namespace meanrank {

struct MlmtDims {
    std::uint32_t vocab_size = 0;
    std::uint32_t l_max = 0;

    friend bool operator==(const MlmtDims&, const MlmtDims&) = default;
};

inline constexpr std::uint32_t mlmt_version = 1;
inline constexpr std::size_t mlmt_header_bytes = 16;

class MlmtWriter {
public:
    MlmtWriter(const std::filesystem::path& path, MlmtDims dims);

    void write(const LogitView& table);
    void write(const LogitTable& table) { write(table.view()); }
    void close();

    std::uint64_t records_written() const noexcept { return records_; }

private:
    std::ofstream out_;
    MlmtDims dims_;
    std::uint64_t records_ = 0;
    std::vector<char> buffer_;
};

class MlmtReader {
public:
    // With `expected`, a header whose dimensions disagree is a DimensionError.
    explicit MlmtReader(const std::filesystem::path& path, std::optional<MlmtDims> expected = std::nullopt);

    const MlmtDims& dims() const noexcept { return dims_; }

    // Next record in file order, or false at a clean end of file. Throws
    // FormatError on a truncated record or non-finite value.
    bool next(LogitTable& table);

private:
    std::ifstream in_;
    MlmtDims dims_;
    std::uint64_t offset_ = 0;
    std::vector<char> buffer_;
};

void save_logit_tables(const std::filesystem::path& path, MlmtDims dims, std::span<const LogitTable> tables);
std::vector<LogitTable> load_logit_tables(const std::filesystem::path& path,
                                          std::optional<MlmtDims> expected = std::nullopt);

struct ManifestEntry {
    std::uint64_t query_id = 0;
    std::string head, relation, tail;  // raw dataset keys
    Direction direction = Direction::predict_tail;
};

void write_logit_manifest(const std::filesystem::path& path, MlmtDims dims, const KnowledgeGraph& kg,
                          std::span<const Query> queries);
std::vector<ManifestEntry> read_logit_manifest(const std::filesystem::path& path, MlmtDims* dims = nullptr);

inline std::filesystem::path manifest_path_for(const std::filesystem::path& mlmt_path) {
    return std::filesystem::path(mlmt_path.string() + ".json");
}

}  // namespace meanrank
