#include "meanrank/kernels.hpp"

namespace meanrank::kernels {

void mean_gather_scalar(const GatherInput& in, double* out) {
    for (std::size_t i = 0; i < in.count; ++i) {
        double sum = 0.0;
        const std::uint32_t length = in.lengths[i];
        for (std::size_t j = 0; j < length; ++j) {
            const std::int32_t token = in.columns[j * in.count + i];
            sum += static_cast<double>(in.table[j * in.vocab + static_cast<std::size_t>(token)]);
        }
        out[i] = sum / static_cast<double>(length);
    }
}

PivotCounts count_against_scalar(const double* values, std::size_t count, double pivot) {
    PivotCounts c;
    for (std::size_t i = 0; i < count; ++i) {
        c.greater += values[i] > pivot;
        c.equal += values[i] == pivot;
    }
    return c;
}

}  // namespace meanrank::kernels
