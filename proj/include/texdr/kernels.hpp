// Copyright 2026 The texdr Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <string_view>

// Data-parallel inner loops used by scoring and the index codec.
//
// Every kernel has a scalar reference implementation; x86-64 builds also carry an
// AVX2/FMA/F16C variant compiled in its own translation unit. active() picks the
// widest variant the running CPU supports. Setting TEXDR_KERNELS=scalar in the
// environment pins the scalar table.
//
// Dot products accumulate in double on every path so the variants agree to
// rounding of the final reduction order only.

namespace texdr::kernels {

struct KernelTable {
    std::string_view name;

    double (*dot)(const float* a, const float* b, std::size_t dim);

    // out[r] = dot(query, rows + r * dim) for r in [0, n_rows)
    void (*dot_batch)(const float* query, const float* rows, std::size_t n_rows, std::size_t dim,
                      double* out);

    // Sum over query rows of the max dot product against any doc row.
    // Caller guarantees q_rows > 0 and d_rows > 0.
    double (*maxsim)(const float* query, std::size_t q_rows, const float* doc, std::size_t d_rows,
                     std::size_t dim);

    // IEEE-754 binary16 conversion, round-to-nearest-even.
    void (*f32_to_f16)(const float* in, std::uint16_t* out, std::size_t n);
    void (*f16_to_f32)(const std::uint16_t* in, float* out, std::size_t n);
};

const KernelTable& scalar();

// nullptr when the build has no AVX2 variant or the CPU lacks AVX2/FMA/F16C.
const KernelTable* avx2();

const KernelTable& active();

}  // namespace texdr::kernels
