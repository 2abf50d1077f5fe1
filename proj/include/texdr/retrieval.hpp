// Copyright 2026 The texdr Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <limits>
#include <span>
#include <unordered_map>
#include <string>
#include <string_view>
#include <vector>

#include "texdr/diagnostics.hpp"
#include "texdr/embedding.hpp"
#include "texdr/index_store.hpp"
#include "texdr/representations.hpp"

namespace texdr {

inline constexpr double kUnrankable = -std::numeric_limits<double>::infinity();

struct ScoredDoc {
    std::string doc_id;
    double score = 0.0;
    std::string best_unit_id;  // empty for documents without units or lexical hits

    bool operator==(const ScoredDoc&) const = default;
};

// Score descending, doc_id ascending on ties.
bool ranks_before(const ScoredDoc& a, const ScoredDoc& b) noexcept;
void sort_ranking(std::vector<ScoredDoc>& docs);

/// Cosine similarity. A zero vector on either side scores 0 and records a
/// "zero_vector" diagnostic.
double score_single(std::span<const float> query, std::span<const float> unit, Diagnostics* diag = nullptr);

/// Σ over query rows of max over unit rows of the dot product. Empty unit
/// matrix gives kUnrankable.
double score_maxsim(const Matrix& query, const Matrix& unit);

struct QueryEmbedding {
    VectorMode mode = VectorMode::kSingle;
    Matrix vectors;
};

struct SearchOptions {
    std::size_t k = 10;
    std::size_t workers = 1;
};

/// Document-level max over unit scores, top-k. Every document, including ones
/// with no units (scored kUnrankable), takes part in the ranking.
std::vector<ScoredDoc> doc_scores(const QueryEmbedding& query, const Index& index, const SearchOptions& options,
                                  Diagnostics* diag = nullptr);

/// 1-based rank of doc_id in a full ranking, or 0 when absent.
std::size_t rank_of(const std::vector<ScoredDoc>& ranking, std::string_view doc_id);

struct Bm25Params {
    double k1 = 1.2;
    double b = 0.75;
    void validate() const;
};

/// Okapi BM25 over lowercased whitespace-tokenized chunks.
class Bm25Index {
public:
    Bm25Index() = default;
    // `all_docs` lists every document to rank, including ones without chunks.
    Bm25Index(std::vector<Chunk> chunks, std::vector<std::string> all_docs = {});

    std::vector<ScoredDoc> search(std::string_view query, std::size_t k, const Bm25Params& params = {}) const;

    // Chunk-level score of chunk i (exposed for oracle tests).
    double chunk_score(std::size_t chunk, std::string_view query, const Bm25Params& params = {}) const;

    std::size_t num_chunks() const noexcept { return chunks_.size(); }
    double average_length() const noexcept { return avglen_; }
    std::size_t document_frequency(std::string_view term) const;
    const std::vector<std::string>& docs() const noexcept { return docs_; }

private:
    std::vector<std::string> unique_terms(std::string_view query) const;
    double score_terms(std::size_t chunk, const std::vector<std::string>& terms, const Bm25Params& p) const;

    struct Postings {
        std::size_t df = 0;
        std::vector<std::pair<std::size_t, std::size_t>> hits;  // (chunk, tf)
    };
    std::vector<Chunk> chunks_;
    std::vector<std::size_t> lengths_;
    std::vector<std::string> docs_;
    std::unordered_map<std::string, Postings> postings_;
    double avglen_ = 0.0;
};

std::vector<ScoredDoc> bm25_search(std::string_view query, std::vector<Chunk> chunks, std::size_t k,
                                   const Bm25Params& params = {});

}  // namespace texdr
