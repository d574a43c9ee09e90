#include <atomic>
#include <cstdlib>
#include <stdexcept>
#include <string>

#include "meanrank/kernels.hpp"

namespace meanrank::kernels {

namespace {

Isa initial_isa() noexcept {
    if (const char* forced = std::getenv("MEANRANK_KERNEL")) {
        const std::string_view name(forced);
        if (name == "scalar") return Isa::scalar;
        if (name == "avx2" && cpu_supports(Isa::avx2)) return Isa::avx2;
    }
    return cpu_supports(Isa::avx2) ? Isa::avx2 : Isa::scalar;
}

std::atomic<Isa>& current() noexcept {
    static std::atomic<Isa> isa{initial_isa()};
    return isa;
}

}  // namespace

std::string_view to_string(Isa isa) noexcept {
    return isa == Isa::avx2 ? "avx2" : "scalar";
}

bool cpu_supports(Isa isa) noexcept {
    switch (isa) {
        case Isa::scalar: return true;
        case Isa::avx2:
#if defined(__x86_64__) && (defined(__GNUC__) || defined(__clang__))
            return __builtin_cpu_supports("avx2");
#else
            return false;
#endif
    }
    return false;
}

Isa active_isa() noexcept { return current().load(std::memory_order_relaxed); }

void set_active_isa(Isa isa) {
    if (!cpu_supports(isa)) throw std::runtime_error("CPU does not support " + std::string(to_string(isa)));
    current().store(isa, std::memory_order_relaxed);
}

void mean_gather(const GatherInput& in, double* out) {
    if (active_isa() == Isa::avx2) {
        mean_gather_avx2(in, out);
    } else {
        mean_gather_scalar(in, out);
    }
}

PivotCounts count_against(const double* values, std::size_t count, double pivot) {
    return active_isa() == Isa::avx2 ? count_against_avx2(values, count, pivot)
                                     : count_against_scalar(values, count, pivot);
}

}  // namespace meanrank::kernels
