#include "meanrank/mlmt.hpp"

#include <bit>
#include <cmath>
#include <cstring>

#include "json.hpp"
#include "meanrank/error.hpp"

namespace meanrank {

namespace {

constexpr char magic[4] = {'M', 'L', 'M', 'T'};

template <typename T>
void put_le(char* dst, T value) {
    for (std::size_t k = 0; k < sizeof(T); ++k) {
        dst[k] = static_cast<char>(static_cast<std::uint64_t>(value) >> (8 * k) & 0xFF);
    }
}

template <typename T>
T get_le(const char* src) {
    std::uint64_t v = 0;
    for (std::size_t k = 0; k < sizeof(T); ++k) {
        v |= static_cast<std::uint64_t>(static_cast<unsigned char>(src[k])) << (8 * k);
    }
    return static_cast<T>(v);
}

std::size_t record_payload_bytes(const MlmtDims& dims) {
    return static_cast<std::size_t>(dims.vocab_size) * dims.l_max * sizeof(float);
}

}  // namespace

MlmtWriter::MlmtWriter(const std::filesystem::path& path, MlmtDims dims)
    : out_(path, std::ios::binary | std::ios::trunc), dims_(dims) {
    if (!out_) throw InputError("cannot write " + path.string());
    char header[mlmt_header_bytes];
    std::memcpy(header, magic, 4);
    put_le<std::uint32_t>(header + 4, mlmt_version);
    put_le<std::uint32_t>(header + 8, dims.vocab_size);
    put_le<std::uint32_t>(header + 12, dims.l_max);
    out_.write(header, sizeof header);
}

void MlmtWriter::write(const LogitView& table) {
    if (table.vocab != dims_.vocab_size || table.positions != dims_.l_max ||
        table.values.size() != table.vocab * table.positions) {
        throw DimensionError("table " + std::to_string(table.query_id) + " is " + std::to_string(table.positions) +
                             " x " + std::to_string(table.vocab) + ", file expects " + std::to_string(dims_.l_max) +
                             " x " + std::to_string(dims_.vocab_size));
    }
    buffer_.resize(8 + record_payload_bytes(dims_));
    put_le<std::uint64_t>(buffer_.data(), table.query_id);
    if constexpr (std::endian::native == std::endian::little) {
        std::memcpy(buffer_.data() + 8, table.values.data(), table.values.size_bytes());
    } else {
        for (std::size_t k = 0; k < table.values.size(); ++k) {
            put_le<std::uint32_t>(buffer_.data() + 8 + 4 * k, std::bit_cast<std::uint32_t>(table.values[k]));
        }
    }
    out_.write(buffer_.data(), static_cast<std::streamsize>(buffer_.size()));
    if (!out_) throw InputError("write failed after " + std::to_string(records_) + " records");
    ++records_;
}

void MlmtWriter::close() {
    out_.close();
    if (out_.fail()) throw InputError("failed to close logit table file");
}

MlmtReader::MlmtReader(const std::filesystem::path& path, std::optional<MlmtDims> expected)
    : in_(path, std::ios::binary) {
    if (!in_) throw InputError("cannot open " + path.string());
    char header[mlmt_header_bytes];
    in_.read(header, sizeof header);
    if (in_.gcount() != static_cast<std::streamsize>(sizeof header)) {
        throw FormatError(static_cast<std::uint64_t>(in_.gcount()), "file shorter than the 16-byte header");
    }
    if (std::memcmp(header, magic, 4) != 0) throw FormatError(0, "bad magic (expected \"MLMT\")");
    const auto version = get_le<std::uint32_t>(header + 4);
    if (version != mlmt_version) throw FormatError(4, "unsupported version " + std::to_string(version));
    dims_.vocab_size = get_le<std::uint32_t>(header + 8);
    dims_.l_max = get_le<std::uint32_t>(header + 12);
    if (dims_.vocab_size == 0 || dims_.l_max == 0) throw FormatError(8, "zero table dimension");
    if (expected) {
        if (dims_.vocab_size != expected->vocab_size) {
            throw DimensionError("at byte 8: vocab_size " + std::to_string(dims_.vocab_size) +
                                 " does not match the vocabulary size " + std::to_string(expected->vocab_size));
        }
        if (dims_.l_max != expected->l_max) {
            throw DimensionError("at byte 12: l_max " + std::to_string(dims_.l_max) +
                                 " does not match the catalog width " + std::to_string(expected->l_max));
        }
    }
    offset_ = mlmt_header_bytes;
}

bool MlmtReader::next(LogitTable& table) {
    const std::size_t payload = record_payload_bytes(dims_);
    buffer_.resize(8 + payload);
    in_.read(buffer_.data(), static_cast<std::streamsize>(buffer_.size()));
    const auto got = static_cast<std::size_t>(in_.gcount());
    if (got == 0) return false;
    if (got != buffer_.size()) {
        throw FormatError(offset_ + got, "truncated record (" + std::to_string(got) + " of " +
                                             std::to_string(buffer_.size()) + " bytes)");
    }
    std::vector<float> values(static_cast<std::size_t>(dims_.vocab_size) * dims_.l_max);
    if constexpr (std::endian::native == std::endian::little) {
        std::memcpy(values.data(), buffer_.data() + 8, payload);
    } else {
        for (std::size_t k = 0; k < values.size(); ++k) {
            values[k] = std::bit_cast<float>(get_le<std::uint32_t>(buffer_.data() + 8 + 4 * k));
        }
    }
    for (std::size_t k = 0; k < values.size(); ++k) {
        if (!std::isfinite(values[k])) throw FormatError(offset_ + 8 + 4 * k, "non-finite logit");
    }
    table = LogitTable(get_le<std::uint64_t>(buffer_.data()), dims_.l_max, dims_.vocab_size, std::move(values));
    offset_ += buffer_.size();
    return true;
}

void save_logit_tables(const std::filesystem::path& path, MlmtDims dims, std::span<const LogitTable> tables) {
    MlmtWriter writer(path, dims);
    for (const auto& t : tables) writer.write(t);
    writer.close();
}

std::vector<LogitTable> load_logit_tables(const std::filesystem::path& path, std::optional<MlmtDims> expected) {
    MlmtReader reader(path, expected);
    std::vector<LogitTable> out;
    LogitTable table;
    while (reader.next(table)) out.push_back(std::move(table));
    return out;
}

void write_logit_manifest(const std::filesystem::path& path, MlmtDims dims, const KnowledgeGraph& kg,
                          std::span<const Query> queries) {
    nlohmann::json manifest;
    manifest["format"] = "MLMT";
    manifest["version"] = mlmt_version;
    manifest["vocab_size"] = dims.vocab_size;
    manifest["l_max"] = dims.l_max;
    auto& list = manifest["queries"] = nlohmann::json::array();
    for (const Query& q : queries) {
        list.push_back({{"query_id", q.id},
                        {"triple",
                         {kg.entity(q.triple.head).key, kg.relation(q.triple.rel).key, kg.entity(q.triple.tail).key}},
                        {"direction", to_string(q.direction)}});
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot write " + path.string());
    out << manifest.dump(1) << '\n';
}

std::vector<ManifestEntry> read_logit_manifest(const std::filesystem::path& path, MlmtDims* dims) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open " + path.string());
    try {
        const auto manifest = nlohmann::json::parse(in);
        if (dims) {
            dims->vocab_size = manifest.at("vocab_size").get<std::uint32_t>();
            dims->l_max = manifest.at("l_max").get<std::uint32_t>();
        }
        std::vector<ManifestEntry> out;
        for (const auto& q : manifest.at("queries")) {
            const auto& triple = q.at("triple");
            out.push_back(ManifestEntry{q.at("query_id").get<std::uint64_t>(), triple.at(0).get<std::string>(),
                                        triple.at(1).get<std::string>(), triple.at(2).get<std::string>(),
                                        parse_direction(q.at("direction").get<std::string>())});
        }
        return out;
    } catch (const nlohmann::json::exception& e) {
        throw LoadError(path.string(), 0, e.what());
    }
}

}  // namespace meanrank
