// Copyright 2026 The texdr Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "texdr/diagnostics.hpp"
#include "texdr/latex.hpp"

namespace texdr {

/// One paper after flattening, normalization, structure extraction and asset
/// resolution. Everything downstream (representations, queries, analyses) reads this.
struct IngestedDocument {
    std::string doc_id;
    latex::FlatSource flat;
    std::string normalized;
    latex::DocumentStructure structure;
    std::vector<latex::ResolvedAsset> assets;
    Diagnostics diagnostics;
};

struct IngestOptions {
    latex::FlattenOptions flatten;
    latex::NormalizationPolicy policy;
    latex::AssetOptions assets;
};

/// Runs the full ingestion chain on an in-memory project. Throws the flatten
/// errors (MissingInclude in strict mode, IncludeCycle); asset problems are
/// recorded in diagnostics.
IngestedDocument ingest(std::string doc_id, const latex::LatexProject& project, const IngestOptions& options);

namespace corpus {

struct Entry {
    std::string doc_id;
    std::filesystem::path path;  // directory or .tar.gz / .gz file
};

/// Lists documents under a corpus root: one subdirectory per document id, or one
/// gzip tarball (arXiv source layout) per id. Sorted by doc_id.
std::vector<Entry> list(const std::filesystem::path& root);

latex::LatexProject load_project(const Entry& entry);

latex::LatexProject load_directory(const std::filesystem::path& dir);

// Accepts a gzip'd tar archive or a single gzip'd .tex file.
latex::LatexProject load_tarball(const std::filesystem::path& file);

/// Picks the file holding an uncommented \documentclass, preferring main.tex and
/// ms.tex, then the shallowest path. Throws NoRootFile.
std::string find_root(const std::map<std::string, std::string>& files);

}  // namespace corpus

namespace store {

// Layout per document: flat.tex, origin.json, normalized.txt, structure.json,
// assets.json, assets/fig###-#.png, diagnostics.json.
void save(const IngestedDocument& doc, const std::filesystem::path& dir);
IngestedDocument load(const std::filesystem::path& dir);

// Loads every document directory under `root`, sorted by doc_id.
std::vector<IngestedDocument> load_all(const std::filesystem::path& root);

}  // namespace store

}  // namespace texdr
