// Copyright 2026 The texdr Authors
// SPDX-License-Identifier: Apache-2.0

// Compiled with -mavx2 -mfma -mf16c. Only reached through the dispatch table after
// a cpuid check, so nothing here may be called from generic code directly.

#include <immintrin.h>

#include <algorithm>
#include <limits>

#include "kernels_internal.hpp"

namespace texdr::kernels {
namespace {

inline double hsum_pd(__m256d v) {
    const __m128d lo = _mm256_castpd256_pd128(v);
    const __m128d hi = _mm256_extractf128_pd(v, 1);
    const __m128d s = _mm_add_pd(lo, hi);
    return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

// 8 floats per step, widened to two double lanes of 4.
inline void fma8(const float* a, const float* b, __m256d& acc0, __m256d& acc1) {
    const __m256 va = _mm256_loadu_ps(a);
    const __m256 vb = _mm256_loadu_ps(b);
    acc0 = _mm256_fmadd_pd(_mm256_cvtps_pd(_mm256_castps256_ps128(va)),
                           _mm256_cvtps_pd(_mm256_castps256_ps128(vb)), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_cvtps_pd(_mm256_extractf128_ps(va, 1)),
                           _mm256_cvtps_pd(_mm256_extractf128_ps(vb, 1)), acc1);
}

double dot_avx2(const float* a, const float* b, std::size_t dim) {
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 8 <= dim; i += 8) fma8(a + i, b + i, acc0, acc1);
    double tail = 0.0;
    for (; i < dim; ++i) tail += static_cast<double>(a[i]) * static_cast<double>(b[i]);
    return hsum_pd(_mm256_add_pd(acc0, acc1)) + tail;
}

void dot_batch_avx2(const float* query, const float* rows, std::size_t n_rows, std::size_t dim,
                    double* out) {
    std::size_t r = 0;
    // Two rows at a time share each query load.
    for (; r + 2 <= n_rows; r += 2) {
        const float* r0 = rows + r * dim;
        const float* r1 = r0 + dim;
        __m256d a0 = _mm256_setzero_pd(), a1 = _mm256_setzero_pd();
        __m256d b0 = _mm256_setzero_pd(), b1 = _mm256_setzero_pd();
        std::size_t i = 0;
        for (; i + 8 <= dim; i += 8) {
            const __m256 vq = _mm256_loadu_ps(query + i);
            const __m256d qlo = _mm256_cvtps_pd(_mm256_castps256_ps128(vq));
            const __m256d qhi = _mm256_cvtps_pd(_mm256_extractf128_ps(vq, 1));
            const __m256 v0 = _mm256_loadu_ps(r0 + i);
            const __m256 v1 = _mm256_loadu_ps(r1 + i);
            a0 = _mm256_fmadd_pd(qlo, _mm256_cvtps_pd(_mm256_castps256_ps128(v0)), a0);
            a1 = _mm256_fmadd_pd(qhi, _mm256_cvtps_pd(_mm256_extractf128_ps(v0, 1)), a1);
            b0 = _mm256_fmadd_pd(qlo, _mm256_cvtps_pd(_mm256_castps256_ps128(v1)), b0);
            b1 = _mm256_fmadd_pd(qhi, _mm256_cvtps_pd(_mm256_extractf128_ps(v1, 1)), b1);
        }
        double ta = 0.0, tb = 0.0;
        for (; i < dim; ++i) {
            ta += static_cast<double>(query[i]) * static_cast<double>(r0[i]);
            tb += static_cast<double>(query[i]) * static_cast<double>(r1[i]);
        }
        out[r] = hsum_pd(_mm256_add_pd(a0, a1)) + ta;
        out[r + 1] = hsum_pd(_mm256_add_pd(b0, b1)) + tb;
    }
    for (; r < n_rows; ++r) out[r] = dot_avx2(query, rows + r * dim, dim);
}

double maxsim_avx2(const float* query, std::size_t q_rows, const float* doc, std::size_t d_rows,
                   std::size_t dim) {
    double total = 0.0;
    for (std::size_t i = 0; i < q_rows; ++i) {
        const float* q = query + i * dim;
        double best = -std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < d_rows; ++j) best = std::max(best, dot_avx2(q, doc + j * dim, dim));
        total += best;
    }
    return total;
}

void f32_to_f16_avx2(const float* in, std::uint16_t* out, std::size_t n) {
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        const __m128i h = _mm256_cvtps_ph(_mm256_loadu_ps(in + i), _MM_FROUND_TO_NEAREST_INT);
        _mm_storeu_si128(reinterpret_cast<__m128i*>(out + i), h);
    }
    if (i < n) {
        alignas(32) float buf[8] = {};
        alignas(16) std::uint16_t hb[8];
        std::copy(in + i, in + n, buf);
        _mm_store_si128(reinterpret_cast<__m128i*>(hb),
                        _mm256_cvtps_ph(_mm256_load_ps(buf), _MM_FROUND_TO_NEAREST_INT));
        std::copy(hb, hb + (n - i), out + i);
    }
}

void f16_to_f32_avx2(const std::uint16_t* in, float* out, std::size_t n) {
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        const __m128i h = _mm_loadu_si128(reinterpret_cast<const __m128i*>(in + i));
        _mm256_storeu_ps(out + i, _mm256_cvtph_ps(h));
    }
    if (i < n) {
        alignas(16) std::uint16_t hb[8] = {};
        alignas(32) float buf[8];
        std::copy(in + i, in + n, hb);
        _mm256_store_ps(buf, _mm256_cvtph_ps(_mm_load_si128(reinterpret_cast<const __m128i*>(hb))));
        std::copy(buf, buf + (n - i), out + i);
    }
}

}  // namespace

namespace detail {
const KernelTable kAvx2Table{
    "avx2", dot_avx2, dot_batch_avx2, maxsim_avx2, f32_to_f16_avx2, f16_to_f32_avx2,
};
}  // namespace detail

}  // namespace texdr::kernels
