#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "meanrank/kernels.hpp"

namespace meanrank {

struct BenchConfig {
    std::vector<std::size_t> entity_counts{1'000, 10'000, 100'000};
    std::size_t l_max = 8;
    std::size_t vocab = 50'265;  // RoBERTa vocabulary size
    std::size_t queries = 32;    // minimum queries per entity count; 0 gives an empty report
    double min_seconds = 0.2;    // keep adding queries until this much time is measured
    std::uint64_t seed = 0;
};

struct BenchRow {
    std::size_t entities = 0;
    std::size_t l_max = 0;
    std::size_t vocab = 0;
    std::size_t queries = 0;
    double seconds = 0;
    double per_entity_ns = 0;
    kernels::Isa isa = kernels::Isa::scalar;
};

// Times score_entities + rank_gold on synthetic catalogs (entity lengths
// uniform in [1, l_max], random tables). Model cost is not part of it.
std::vector<BenchRow> run_bench(const BenchConfig& config);

void write_bench_csv(std::ostream& out, const std::vector<BenchRow>& rows);
// Aligned text table for terminals and plotting scripts.
void write_bench_table(std::ostream& out, const std::vector<BenchRow>& rows);

}  // namespace meanrank
