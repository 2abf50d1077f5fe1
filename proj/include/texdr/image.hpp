// Copyright 2026 The texdr Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace texdr::image {

using Blob = std::vector<std::uint8_t>;

struct Size {
    std::uint32_t width = 0;
    std::uint32_t height = 0;

    bool operator==(const Size&) const = default;
};

// Reads width/height from the IHDR chunk without decoding pixels.
std::optional<Size> png_size(std::span<const std::uint8_t> bytes);

bool is_png(std::span<const std::uint8_t> bytes);

// Decodes anything OpenCV can read and re-encodes it as PNG. Throws Error(kIo).
Blob to_png(std::span<const std::uint8_t> bytes);

// Area-resamples a PNG to `target`. Throws Error(kIo) on undecodable input.
Blob resize_png(std::span<const std::uint8_t> png, Size target);

// Solid-colour PNG, used by fixtures and tests.
Blob make_png(Size size, std::uint8_t gray);

}  // namespace texdr::image
