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

#include <json.hpp>

#include "texdr/diagnostics.hpp"
#include "texdr/document.hpp"
#include "texdr/embedding.hpp"
#include "texdr/index_store.hpp"
#include "texdr/query_pipeline.hpp"
#include "texdr/representations.hpp"
#include "texdr/retrieval.hpp"

namespace texdr {

/// Single-relevant-document nDCG: 1/log2(r+1) when the gold doc sits at rank
/// r <= k, else 0.
double ndcg_at_k(const std::vector<std::string>& ranked, std::string_view gold, std::size_t k = 10);
double ndcg_from_rank(std::size_t rank, std::size_t k = 10);

struct QueryResult {
    std::string query_id;
    EvidenceType evidence_type = EvidenceType::kText;
    std::string gold_doc_id;
    std::size_t rank = 0;  // 1-based; 0 when the gold doc was not ranked
    double ndcg = 0.0;
    std::string top_doc_id;
};

struct EvalReport {
    std::vector<QueryResult> queries;
    double mean_ndcg = 0.0;
    std::map<std::string, double> mean_ndcg_by_type;
    std::map<std::string, std::size_t> count_by_type;
    std::uint64_t index_size_bytes = 0;
    std::size_t k = 10;
    nlohmann::json config = nlohmann::json::object();

    nlohmann::json to_json() const;
    std::string to_table() const;
    std::string to_csv() const;
};

struct EvalOptions {
    std::size_t k = 10;
    std::size_t workers = 1;
    RetryPolicy retry;
};

/// Embeds each query, ranks every indexed document, and scores the gold rank.
/// Throws GoldMissing when a gold doc is absent from the index.
EvalReport evaluate(const std::vector<Query>& queries, const Index& index, EmbeddingProvider& provider,
                    const EvalOptions& options = {});

// ---------------------------------------------------------------------------
// scaling windows

struct TokenWindow {
    std::size_t size = 0;
    std::size_t begin = 0;  // token offsets into the source
    std::size_t end = 0;
    std::string text;
};

struct ScalingWindowSet {
    std::string doc_id;
    std::uint64_t seed = 0;
    std::size_t query_begin = 0;
    std::size_t query_end = 0;
    std::string query;
    std::vector<TokenWindow> windows;  // ascending size; windows[0] is the base
};

struct ScalingOptions {
    std::size_t query_len = 100;
    std::vector<std::size_t> sizes{500, 1000, 4000, 8000};
    std::uint64_t seed = 0;
};

/// Places a base window at a seeded offset, samples the query inside it, then
/// grows each larger window forward and, once the text ends, backward.
/// Throws TooShort when the text has fewer tokens than the largest size.
ScalingWindowSet build_scaling_windows(std::string_view flat_text, const ScalingOptions& options,
                                       std::string_view doc_id = {});

// Escapes `text` into a standalone article that any LaTeX engine compiles.
std::string render_latex_snippet(std::string_view text);

nlohmann::json to_json(const ScalingWindowSet& set);

// ---------------------------------------------------------------------------
// figure/text diagnostics

struct FigureTextOptions {
    std::size_t window = 2;
    double overlap_threshold = 0.3;
    std::vector<std::string> reference_patterns = default_reference_patterns();

    static std::vector<std::string> default_reference_patterns();
};

struct FigureTextDiagnostics {
    bool near_figure = false;
    bool references_figure = false;
    bool contains_caption_info = false;
    double overlap_ratio = 0.0;
    Diagnostics diagnostics;
};

const std::vector<std::string>& stopwords();

// Lowercased [a-z0-9]+ words of `text`, stopwords removed.
std::vector<std::string> content_words(std::string_view text);

bool references_figure(std::string_view chunk_text, const std::vector<std::string>& patterns);

// |caption content words ∩ chunk words| / |caption content words|. nullopt for
// captions with no content words.
std::optional<double> caption_overlap(std::string_view caption, std::string_view chunk_text);

// Index of the chunk holding character offset `anchor` (the last chunk when past the end).
std::size_t chunk_index_for_offset(const std::vector<Chunk>& chunks, std::size_t anchor);

FigureTextDiagnostics figure_text_diagnostics(const Chunk& chunk, std::size_t figure_chunk_index,
                                              std::string_view caption, const FigureTextOptions& options = {});

// Overload resolving the figure's chunk from its anchor.
FigureTextDiagnostics figure_text_diagnostics(const Chunk& chunk, const std::vector<Chunk>& doc_chunks,
                                              const latex::FigureBlock& figure, const FigureTextOptions& options = {});

struct FigureAnalysisRow {
    std::string query_id;
    std::string doc_id;
    std::string chunk_unit_id;
    bool correct_doc = false;
    FigureTextDiagnostics diagnostics;
};

struct FigureAnalysisSummary {
    std::size_t count = 0;
    double near_pct = 0.0;
    double references_pct = 0.0;
    double caption_pct = 0.0;
};

struct FigureAnalysisReport {
    std::vector<FigureAnalysisRow> rows;
    FigureAnalysisSummary correct;
    FigureAnalysisSummary incorrect;
    nlohmann::json config = nlohmann::json::object();

    nlohmann::json to_json() const;
    std::string to_table() const;
};

/// Runs the diagnostics on the top chunk of the gold document and on the top
/// chunk of the best-ranked other document for each figure query. `index` must
/// be a text-only index over chunks of the same documents.
FigureAnalysisReport analyze_figure_queries(const std::vector<Query>& queries, const Index& index,
                                            EmbeddingProvider& provider, const std::vector<IngestedDocument>& docs,
                                            const FigureTextOptions& options = {}, std::size_t workers = 1);

}  // namespace texdr
