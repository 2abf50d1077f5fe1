// Copyright 2026 The texdr Authors
// SPDX-License-Identifier: Apache-2.0

#include "texdr/text.hpp"

#include <cctype>
#include <cstdio>

#include "texdr/error.hpp"

namespace texdr {

std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::kInvalidArgument: return "InvalidArgument";
        case ErrorCode::kIo: return "IoError";
        case ErrorCode::kMissingInclude: return "MissingInclude";
        case ErrorCode::kIncludeCycle: return "IncludeCycle";
        case ErrorCode::kAssetMissing: return "AssetMissing";
        case ErrorCode::kNoRootFile: return "NoRootFile";
        case ErrorCode::kEmptyPages: return "EmptyPages";
        case ErrorCode::kModalityMismatch: return "ModalityMismatch";
        case ErrorCode::kProviderError: return "ProviderError";
        case ErrorCode::kEmptyText: return "EmptyText";
        case ErrorCode::kFormatVersionMismatch: return "FormatVersionMismatch";
        case ErrorCode::kChecksumMismatch: return "ChecksumMismatch";
        case ErrorCode::kMalformedIndex: return "MalformedIndex";
        case ErrorCode::kDimensionMismatch: return "DimensionMismatch";
        case ErrorCode::kModeMismatch: return "ModeMismatch";
        case ErrorCode::kServiceError: return "ServiceError";
        case ErrorCode::kMalformedVerdict: return "MalformedVerdict";
        case ErrorCode::kGoldMissing: return "GoldMissing";
        case ErrorCode::kTooShort: return "TooShort";
        case ErrorCode::kEmptyCaption: return "EmptyCaption";
        case ErrorCode::kFixtureMissing: return "FixtureMissing";
    }
    return "Unknown";
}

namespace text {

std::vector<TokenSpan> token_spans(std::string_view s) {
    std::vector<TokenSpan> out;
    std::size_t i = 0;
    const std::size_t n = s.size();
    while (i < n) {
        while (i < n && is_space(s[i])) ++i;
        if (i == n) break;
        std::size_t start = i;
        while (i < n && !is_space(s[i])) ++i;
        out.push_back({start, i});
    }
    return out;
}

std::vector<std::string_view> tokens(std::string_view s) {
    std::vector<std::string_view> out;
    for (auto span : token_spans(s)) out.push_back(s.substr(span.begin, span.end - span.begin));
    return out;
}

std::string to_lower(std::string_view s) {
    std::string out(s);
    for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

std::string join(const std::vector<std::string_view>& parts, std::string_view sep) {
    std::string out;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (i) out.append(sep);
        out.append(parts[i]);
    }
    return out;
}

std::string_view trim(std::string_view s) noexcept {
    std::size_t b = 0, e = s.size();
    while (b < e && is_space(s[b])) ++b;
    while (e > b && is_space(s[e - 1])) --e;
    return s.substr(b, e - b);
}

std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

}  // namespace text
}  // namespace texdr
