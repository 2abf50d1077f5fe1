// Copyright 2026 The texdr Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "texdr/diagnostics.hpp"

namespace texdr::latex {

using Blob = std::vector<std::uint8_t>;

/// A LaTeX source tree held in memory. Paths are relative and normalized.
struct LatexProject {
    std::string root_file;
    std::map<std::string, std::string> files;  // .tex and other text inputs
    std::map<std::string, Blob> assets;        // figure files: png/jpg/pdf/eps

    // Throws InvalidArgument when the root is absent or a path escapes the tree.
    void validate() const;
};

/// Collapses "." and "x/.." components and converts backslashes. Throws
/// InvalidArgument for absolute paths or paths that climb above the root.
std::string normalize_path(std::string_view path);

struct OriginSegment {
    std::size_t out_begin = 0;
    std::size_t out_end = 0;
    std::string file;  // empty for synthetic text (the newlines around \include)
    std::size_t src_begin = 0;
    std::size_t src_end = 0;

    bool synthetic() const noexcept { return file.empty(); }
    bool operator==(const OriginSegment&) const = default;
};

struct FlatSource {
    std::string text;
    std::vector<OriginSegment> origin_map;
};

struct FlattenOptions {
    // Missing \input targets become empty substitutions instead of failing.
    bool lenient = false;
};

/// Resolves \input / \include depth-first in textual order. Commented-out and
/// verbatim occurrences are left alone.
FlatSource flatten(const LatexProject& project, const FlattenOptions& options = {},
                   Diagnostics* diag = nullptr);

/// Rebuilds the flat text from origin_map spans alone.
std::string reconstruct(const LatexProject& project, const FlatSource& flat);

struct NormalizationPolicy {
    bool strip_comments = true;
    std::vector<std::string> remove_commands{"cite", "ref", "label", "footnote"};
    std::vector<std::string> unwrap_commands{"emph", "textbf", "textit", "texttt"};

    // Throws InvalidArgument when the two command lists intersect.
    void validate() const;
};

std::string normalize(std::string_view text, const NormalizationPolicy& policy,
                      Diagnostics* diag = nullptr);

inline std::string normalize(const FlatSource& flat, const NormalizationPolicy& policy,
                             Diagnostics* diag = nullptr) {
    return normalize(flat.text, policy, diag);
}

struct Section {
    int level = 1;  // 1 = \section, 2 = \subsection
    std::string title;
    std::size_t begin = 0;
    std::size_t end = 0;

    bool operator==(const Section&) const = default;
};

struct FigureBlock {
    std::string caption;
    std::vector<std::string> asset_refs;
    std::size_t anchor = 0;
    std::optional<std::string> label;
    bool synthetic = false;  // no \includegraphics (TikZ, pgfplots, inline drawing)

    bool operator==(const FigureBlock&) const = default;
};

struct TableBlock {
    std::string text;  // full environment, \begin through \end
    std::size_t anchor = 0;

    bool operator==(const TableBlock&) const = default;
};

struct DocumentStructure {
    std::vector<Section> sections;
    std::vector<FigureBlock> figures;
    std::vector<TableBlock> tables;

    bool operator==(const DocumentStructure&) const = default;
};

/// Anchors are byte offsets into `normalized`. `flat` supplies figure labels,
/// which normalization strips.
DocumentStructure extract_structure(const FlatSource& flat, std::string_view normalized,
                                    Diagnostics* diag = nullptr);

enum class AssetFormat { kPng, kJpeg, kPdf, kEps, kUnknown };

std::string_view to_string(AssetFormat f) noexcept;

enum class AssetStatus { kResolved, kMissing, kConversionFailed };

struct ResolvedAsset {
    std::size_t figure_index = 0;
    std::size_t asset_index = 0;  // position within the figure's asset_refs
    std::string ref;
    std::string path;  // project path actually matched; empty when missing
    AssetFormat source_format = AssetFormat::kUnknown;
    bool needs_conversion = false;
    AssetStatus status = AssetStatus::kMissing;
    Blob png;  // unified raster output, empty unless resolved

    bool embeddable() const noexcept { return status == AssetStatus::kResolved; }
};

struct AssetOptions {
    // Template for pdf/eps rasterization, e.g. "pdftoppm -png -singlefile {in} {out_stem}"
    // or "convert {in} {out}". Empty disables conversion (such assets fail).
    std::string converter_command;
    // Re-encode jpg into png so every asset shares one format.
    bool transcode_raster = true;
};

std::vector<ResolvedAsset> resolve_assets(const LatexProject& project,
                                          const DocumentStructure& structure,
                                          const AssetOptions& options = {},
                                          Diagnostics* diag = nullptr);

}  // namespace texdr::latex
