// Copyright 2026 The texdr Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <cstring>
#include <limits>

#include "kernels_internal.hpp"

namespace texdr::kernels {
namespace {

double dot_scalar(const float* a, const float* b, std::size_t dim) {
    double acc = 0.0;
    for (std::size_t i = 0; i < dim; ++i) acc += static_cast<double>(a[i]) * static_cast<double>(b[i]);
    return acc;
}

void dot_batch_scalar(const float* query, const float* rows, std::size_t n_rows, std::size_t dim,
                      double* out) {
    for (std::size_t r = 0; r < n_rows; ++r) out[r] = dot_scalar(query, rows + r * dim, dim);
}

double maxsim_scalar(const float* query, std::size_t q_rows, const float* doc, std::size_t d_rows,
                     std::size_t dim) {
    double total = 0.0;
    for (std::size_t i = 0; i < q_rows; ++i) {
        double best = -std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < d_rows; ++j)
            best = std::max(best, dot_scalar(query + i * dim, doc + j * dim, dim));
        total += best;
    }
    return total;
}

std::uint16_t half_from_float(float value) {
    std::uint32_t x;
    std::memcpy(&x, &value, sizeof x);
    const std::uint32_t sign = (x >> 16) & 0x8000u;
    const std::uint32_t exp = (x >> 23) & 0xffu;
    std::uint32_t mant = x & 0x7fffffu;

    if (exp == 0xffu) {
        // Inf stays Inf; NaN is quieted and keeps its top payload bits (matches vcvtps2ph).
        if (mant == 0) return static_cast<std::uint16_t>(sign | 0x7c00u);
        return static_cast<std::uint16_t>(sign | 0x7e00u | (mant >> 13));
    }
    const int e = static_cast<int>(exp) - 127 + 15;
    if (e >= 0x1f) return static_cast<std::uint16_t>(sign | 0x7c00u);
    if (e <= 0) {
        if (e < -10) return static_cast<std::uint16_t>(sign);
        mant |= 0x800000u;
        const int shift = 14 - e;
        std::uint32_t half = mant >> shift;
        const std::uint32_t rem = mant & ((1u << shift) - 1u);
        const std::uint32_t halfway = 1u << (shift - 1);
        if (rem > halfway || (rem == halfway && (half & 1u))) ++half;
        return static_cast<std::uint16_t>(sign | half);
    }
    std::uint32_t half = (static_cast<std::uint32_t>(e) << 10) | (mant >> 13);
    const std::uint32_t rem = mant & 0x1fffu;
    if (rem > 0x1000u || (rem == 0x1000u && (half & 1u))) ++half;  // may carry into Inf, which is correct
    return static_cast<std::uint16_t>(sign | half);
}

float float_from_half(std::uint16_t h) {
    const std::uint32_t sign = static_cast<std::uint32_t>(h & 0x8000u) << 16;
    const std::uint32_t exp = (h >> 10) & 0x1fu;
    std::uint32_t mant = h & 0x3ffu;
    std::uint32_t bits;
    if (exp == 0) {
        if (mant == 0) {
            bits = sign;
        } else {
            int e = -1;
            do {
                ++e;
                mant <<= 1;
            } while ((mant & 0x400u) == 0);
            bits = sign | (static_cast<std::uint32_t>(127 - 15 - e) << 23) | ((mant & 0x3ffu) << 13);
        }
    } else if (exp == 0x1fu) {
        // vcvtph2ps quiets signaling NaNs.
        bits = sign | 0x7f800000u | (mant << 13) | (mant ? 0x00400000u : 0u);
    } else {
        bits = sign | ((exp + 127 - 15) << 23) | (mant << 13);
    }
    float out;
    std::memcpy(&out, &bits, sizeof out);
    return out;
}

void f32_to_f16_scalar(const float* in, std::uint16_t* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] = half_from_float(in[i]);
}

void f16_to_f32_scalar(const std::uint16_t* in, float* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] = float_from_half(in[i]);
}

}  // namespace

namespace detail {
const KernelTable kScalarTable{
    "scalar", dot_scalar, dot_batch_scalar, maxsim_scalar, f32_to_f16_scalar, f16_to_f32_scalar,
};
}  // namespace detail

}  // namespace texdr::kernels
