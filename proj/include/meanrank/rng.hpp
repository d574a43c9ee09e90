#pragma once

#include <cstdint>
#include <random>

namespace meanrank {

// Streams that consume randomness. Each gets its own salt so that, e.g.,
// tie-breaking and a random scorer never share draws for the same query.
enum class StreamSalt : std::uint64_t {
    tie_break = 0x7469652d62726b00ULL,
    random_scorer = 0x72616e642d736300ULL,
    entity_split = 0x73706c6974000000ULL,
};

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t global_seed, std::uint64_t stream_id,
                                    StreamSalt salt) noexcept {
    return splitmix64(splitmix64(global_seed ^ static_cast<std::uint64_t>(salt)) ^ splitmix64(stream_id));
}

// Unbiased draw from [0, bound). std::uniform_int_distribution is not
// specified bit-for-bit across standard libraries; this is (Lemire's
// multiply-and-reject on top of a fully specified engine).
inline std::uint64_t uniform_below(std::mt19937_64& engine, std::uint64_t bound) {
    if (bound <= 1) return 0;
    const unsigned __int128 wide = static_cast<unsigned __int128>(engine()) * bound;
    auto low = static_cast<std::uint64_t>(wide);
    auto result = static_cast<std::uint64_t>(wide >> 64);
    if (low < bound) {
        const std::uint64_t threshold = (0 - bound) % bound;
        while (low < threshold) {
            const unsigned __int128 again = static_cast<unsigned __int128>(engine()) * bound;
            low = static_cast<std::uint64_t>(again);
            result = static_cast<std::uint64_t>(again >> 64);
        }
    }
    return result;
}

// Uniform double in [0, 1) with 53 random bits.
inline double uniform_unit(std::mt19937_64& engine) {
    return static_cast<double>(engine() >> 11) * 0x1.0p-53;
}

// Per-query tie-break randomness: the outcome depends only on
// (global seed, query id), never on evaluation order.
class TieBreakRng {
public:
    explicit TieBreakRng(std::uint64_t global_seed) noexcept : seed_(global_seed) {}

    std::uint64_t seed() const noexcept { return seed_; }

    std::mt19937_64 stream(std::uint64_t query_id) const {
        return std::mt19937_64(derive_seed(seed_, query_id, StreamSalt::tie_break));
    }

private:
    std::uint64_t seed_;
};

}  // namespace meanrank
