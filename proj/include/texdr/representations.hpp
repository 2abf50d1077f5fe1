// Copyright 2026 The texdr Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "texdr/diagnostics.hpp"
#include "texdr/document.hpp"
#include "texdr/image.hpp"

namespace texdr {

enum class RepresentationKind { kTextOnly, kTextPlusCaptions, kFiguresOnly, kDocAsImage, kInterleaved };

// CLI spellings: text, text+captions, figures, doc-image, interleaved.
std::string_view to_string(RepresentationKind kind) noexcept;
std::optional<RepresentationKind> parse_representation(std::string_view s) noexcept;

struct Chunk {
    std::string doc_id;
    std::size_t index = 0;
    std::string text;  // tokens joined by single spaces
    std::size_t token_count = 0;
    std::size_t begin = 0;  // char span in the chunked text
    std::size_t end = 0;

    bool operator==(const Chunk&) const = default;
};

struct ChunkOptions {
    std::size_t chunk_size = 512;
    std::size_t overlap = 0;
    // Token cost of one whitespace token; defaults to 1. Lets a provider supply its
    // own tokenizer counts while chunk boundaries stay on whitespace.
    std::function<std::size_t(std::string_view)> token_cost;
};

/// Greedy left-to-right packing of whitespace tokens. Throws InvalidArgument
/// unless chunk_size >= 1 and overlap < chunk_size.
std::vector<Chunk> chunk_text(std::string_view text, const ChunkOptions& options, std::string_view doc_id = {});

enum class UnitKind { kTextChunk, kFigure, kPageImage, kInterleaved };

std::string_view to_string(UnitKind kind) noexcept;

struct ImageBlob {
    std::string source;  // stable identity, e.g. "doc#fig002-0" or "doc#p0003"
    image::Blob bytes;

    bool operator==(const ImageBlob&) const = default;
    auto operator<=>(const ImageBlob&) const = default;
};

struct EmbeddingUnit {
    std::string doc_id;
    std::string unit_id;
    UnitKind kind = UnitKind::kTextChunk;
    std::string text;
    std::vector<ImageBlob> images;

    bool operator==(const EmbeddingUnit&) const = default;
};

// Throws InvalidArgument when kind and payload disagree.
void validate(const EmbeddingUnit& unit);

// "fig007"; the key used by caption files.
std::string figure_id(std::size_t figure_index);
std::string chunk_unit_id(std::string_view doc_id, std::size_t chunk_index);
std::string figure_unit_id(std::string_view doc_id, std::size_t figure_index, std::size_t asset_index);
std::string page_unit_id(std::string_view doc_id, std::size_t page_number);

struct BuildResult {
    std::vector<EmbeddingUnit> units;
    Diagnostics diagnostics;
    bool representable = true;  // false when the document yields no units under this kind
};

using CaptionMap = std::map<std::string, std::string>;  // figure id -> caption

BuildResult build_text_only(const IngestedDocument& doc, const ChunkOptions& options);

/// Captions are appended after the normalized text, one paragraph per figure in
/// figure order, then chunked like text-only.
BuildResult build_text_plus_captions(const IngestedDocument& doc, const CaptionMap& captions,
                                     const ChunkOptions& options);

std::string text_with_captions(const IngestedDocument& doc, const CaptionMap& captions);

BuildResult build_figures_only(const IngestedDocument& doc);

/// Throws EmptyPages when `pages` is empty.
BuildResult build_doc_as_image(const IngestedDocument& doc, const std::vector<image::Blob>& pages);

/// Each resolved figure image attaches to the chunk whose span holds its anchor.
/// A chunk keeps at most two images (nearest by anchor distance); the rest move to
/// the following chunk. Overflow past the last chunk produces continuation units
/// carrying the last chunk's text.
BuildResult build_interleaved(const IngestedDocument& doc, const ChunkOptions& options);

/// Caption file: one "doc_id<TAB>figure id<TAB>caption" record per line, UTF-8.
/// The figure column accepts either "fig003" or a figure unit id.
std::map<std::string, CaptionMap> load_caption_file(const std::filesystem::path& path);
void save_caption_file(const std::filesystem::path& path, const std::map<std::string, CaptionMap>& captions);

/// page-0001.png, page-0002.png, ... in page order.
std::vector<image::Blob> load_page_images(const std::filesystem::path& dir);

/// Writes the flat source to a scratch directory and runs `command` with {in}
/// (the .tex file) and {out} (the page directory) substituted. Returns the pages.
std::vector<image::Blob> render_pages(const std::string& command, std::string_view latex_source);

}  // namespace texdr
