// Copyright 2026 The texdr Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace texdr {

enum class ErrorCode {
    kInvalidArgument,
    kIo,
    // ingestion
    kMissingInclude,
    kIncludeCycle,
    kAssetMissing,
    kNoRootFile,
    // representations
    kEmptyPages,
    // embedding
    kModalityMismatch,
    kProviderError,
    kEmptyText,
    // index store
    kFormatVersionMismatch,
    kChecksumMismatch,
    kMalformedIndex,
    // retrieval
    kDimensionMismatch,
    kModeMismatch,
    // query pipeline / evaluation
    kServiceError,
    kMalformedVerdict,
    kGoldMissing,
    kTooShort,
    kEmptyCaption,
    kFixtureMissing,
};

std::string_view to_string(ErrorCode code) noexcept;

/// All library failures surface as texdr::Error carrying a machine-checkable code.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace texdr
