// Copyright 2026 The texdr Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace texdr::text {

struct TokenSpan {
    std::size_t begin = 0;
    std::size_t end = 0;

    bool operator==(const TokenSpan&) const = default;
};

inline bool is_space(char c) noexcept {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

/// Whitespace-delimited tokens with their byte spans in `s`.
std::vector<TokenSpan> token_spans(std::string_view s);

std::vector<std::string_view> tokens(std::string_view s);

std::string to_lower(std::string_view s);

std::string join(const std::vector<std::string_view>& parts, std::string_view sep);

std::string_view trim(std::string_view s) noexcept;

// 64-bit FNV-1a. Stable across platforms, used for hashing tokens and fixture keys.
constexpr std::uint64_t fnv1a64(std::string_view s, std::uint64_t seed = 0xcbf29ce484222325ULL) noexcept {
    std::uint64_t h = seed;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string hex64(std::uint64_t v);

}  // namespace texdr::text
