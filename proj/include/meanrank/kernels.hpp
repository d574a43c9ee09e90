#pragma once

// Data-parallel inner loops of the engine. Each kernel has a scalar
// reference implementation and an AVX2 variant; the variants are required
// to produce bit-identical results, so callers may switch freely.

#include <cstddef>
#include <cstdint>
#include <string_view>

namespace meanrank::kernels {

enum class Isa { scalar, avx2 };

std::string_view to_string(Isa isa) noexcept;

// What this CPU can run.
bool cpu_supports(Isa isa) noexcept;

// Kernel set used by the dispatching entry points. Defaults to the best
// supported ISA, overridable with MEANRANK_KERNEL=scalar|avx2 in the
// environment or with set_active_isa (throws if the CPU lacks it).
Isa active_isa() noexcept;
void set_active_isa(Isa isa);

struct GatherInput {
    const float* table;              // width x vocab, position-major
    std::size_t vocab;
    const std::int32_t* columns;     // width x count token ids, position-major
    const std::uint32_t* lengths;    // count true lengths, each in [1, width]
    std::size_t count;
    std::size_t width;
};

// out[i] = (sum over j < lengths[i] of table[j * vocab + columns[j * count + i]]) / lengths[i]
// accumulated in double, j ascending.
void mean_gather(const GatherInput& in, double* out);
void mean_gather_scalar(const GatherInput& in, double* out);
void mean_gather_avx2(const GatherInput& in, double* out);

struct PivotCounts {
    std::uint64_t greater = 0;
    std::uint64_t equal = 0;
};

// Number of values strictly above and exactly equal to `pivot`.
PivotCounts count_against(const double* values, std::size_t count, double pivot);
PivotCounts count_against_scalar(const double* values, std::size_t count, double pivot);
PivotCounts count_against_avx2(const double* values, std::size_t count, double pivot);

}  // namespace meanrank::kernels
