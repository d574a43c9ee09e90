// Built with -mavx2 on x86-64. Only reached after a runtime CPU check.

#include "meanrank/kernels.hpp"

#if defined(__AVX2__)
#include <immintrin.h>
#endif

namespace meanrank::kernels {

#if defined(__AVX2__)

void mean_gather_avx2(const GatherInput& in, double* out) {
    const std::size_t n = in.count;
    const __m256 zero = _mm256_setzero_ps();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        const __m256i lengths = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(in.lengths + i));
        std::uint32_t block_max = 0;
        for (int k = 0; k < 8; ++k) block_max = in.lengths[i + k] > block_max ? in.lengths[i + k] : block_max;

        __m256d acc_lo = _mm256_setzero_pd();
        __m256d acc_hi = _mm256_setzero_pd();
        for (std::size_t j = 0; j < block_max; ++j) {
            // Lanes whose entity is shorter than j + 1 hold pads: no load, no add.
            const __m256i live = _mm256_cmpgt_epi32(lengths, _mm256_set1_epi32(static_cast<int>(j)));
            const __m256i ids = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(in.columns + j * n + i));
            const float* row = in.table + j * in.vocab;
            const __m256 v = _mm256_mask_i32gather_ps(zero, row, ids, _mm256_castsi256_ps(live), 4);

            const __m256d live_lo = _mm256_castsi256_pd(_mm256_cvtepi32_epi64(_mm256_castsi256_si128(live)));
            const __m256d live_hi = _mm256_castsi256_pd(_mm256_cvtepi32_epi64(_mm256_extracti128_si256(live, 1)));
            const __m256d v_lo = _mm256_cvtps_pd(_mm256_castps256_ps128(v));
            const __m256d v_hi = _mm256_cvtps_pd(_mm256_extractf128_ps(v, 1));
            acc_lo = _mm256_blendv_pd(acc_lo, _mm256_add_pd(acc_lo, v_lo), live_lo);
            acc_hi = _mm256_blendv_pd(acc_hi, _mm256_add_pd(acc_hi, v_hi), live_hi);
        }
        const __m256d len_lo = _mm256_cvtepi32_pd(_mm256_castsi256_si128(lengths));
        const __m256d len_hi = _mm256_cvtepi32_pd(_mm256_extracti128_si256(lengths, 1));
        _mm256_storeu_pd(out + i, _mm256_div_pd(acc_lo, len_lo));
        _mm256_storeu_pd(out + i + 4, _mm256_div_pd(acc_hi, len_hi));
    }
    for (; i < n; ++i) {
        double sum = 0.0;
        for (std::size_t j = 0; j < in.lengths[i]; ++j) {
            sum += static_cast<double>(in.table[j * in.vocab + static_cast<std::size_t>(in.columns[j * n + i])]);
        }
        out[i] = sum / static_cast<double>(in.lengths[i]);
    }
}

PivotCounts count_against_avx2(const double* values, std::size_t count, double pivot) {
    const __m256d p = _mm256_set1_pd(pivot);
    std::uint64_t greater = 0, equal = 0;
    std::size_t i = 0;
    for (; i + 4 <= count; i += 4) {
        const __m256d v = _mm256_loadu_pd(values + i);
        greater += static_cast<std::uint64_t>(__builtin_popcount(_mm256_movemask_pd(_mm256_cmp_pd(v, p, _CMP_GT_OQ))));
        equal += static_cast<std::uint64_t>(__builtin_popcount(_mm256_movemask_pd(_mm256_cmp_pd(v, p, _CMP_EQ_OQ))));
    }
    for (; i < count; ++i) {
        greater += values[i] > pivot;
        equal += values[i] == pivot;
    }
    return PivotCounts{greater, equal};
}

#else

void mean_gather_avx2(const GatherInput& in, double* out) { mean_gather_scalar(in, out); }

PivotCounts count_against_avx2(const double* values, std::size_t count, double pivot) {
    return count_against_scalar(values, count, pivot);
}

#endif

}  // namespace meanrank::kernels
