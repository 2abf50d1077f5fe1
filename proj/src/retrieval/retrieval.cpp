// Copyright 2026 The texdr Authors
// SPDX-License-Identifier: Apache-2.0

#include "texdr/retrieval.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "texdr/error.hpp"
#include "texdr/kernels.hpp"
#include "texdr/parallel.hpp"
#include "texdr/text.hpp"

namespace texdr {

bool ranks_before(const ScoredDoc& a, const ScoredDoc& b) noexcept {
    if (a.score != b.score) return a.score > b.score;
    return a.doc_id < b.doc_id;
}

void sort_ranking(std::vector<ScoredDoc>& docs) { std::sort(docs.begin(), docs.end(), ranks_before); }

namespace {

void top_k(std::vector<ScoredDoc>& docs, std::size_t k) {
    if (k == 0 || k >= docs.size()) {
        sort_ranking(docs);
        return;
    }
    std::partial_sort(docs.begin(), docs.begin() + static_cast<std::ptrdiff_t>(k), docs.end(), ranks_before);
    docs.resize(k);
}

}  // namespace

double score_single(std::span<const float> query, std::span<const float> unit, Diagnostics* diag) {
    if (query.size() != unit.size())
        throw Error(ErrorCode::kDimensionMismatch, std::to_string(query.size()) + " vs " + std::to_string(unit.size()));
    const auto& k = kernels::active();
    const double qq = k.dot(query.data(), query.data(), query.size());
    const double uu = k.dot(unit.data(), unit.data(), unit.size());
    if (qq == 0.0 || uu == 0.0) {
        if (diag) diag->add("zero_vector", "cosine with a zero vector scored 0");
        return 0.0;
    }
    return k.dot(query.data(), unit.data(), query.size()) / (std::sqrt(qq) * std::sqrt(uu));
}

double score_maxsim(const Matrix& query, const Matrix& unit) {
    if (query.cols != unit.cols)
        throw Error(ErrorCode::kDimensionMismatch, std::to_string(query.cols) + " vs " + std::to_string(unit.cols));
    if (unit.rows == 0) return kUnrankable;
    if (query.rows == 0) return 0.0;
    return kernels::active().maxsim(query.data.data(), query.rows, unit.data.data(), unit.rows, unit.cols);
}

std::vector<ScoredDoc> doc_scores(const QueryEmbedding& query, const Index& index, const SearchOptions& options,
                                  Diagnostics* diag) {
    const auto& desc = index.provider();
    if (query.mode != desc.vector_mode)
        throw Error(ErrorCode::kModeMismatch, std::string(to_string(query.mode)) + " query against " +
                                                  std::string(to_string(desc.vector_mode)) + " index");
    if (query.vectors.cols != desc.dimension)
        throw Error(ErrorCode::kDimensionMismatch,
                    "query dimension " + std::to_string(query.vectors.cols) + ", index " + std::to_string(desc.dimension));
    if (query.mode == VectorMode::kSingle && query.vectors.rows != 1)
        throw Error(ErrorCode::kInvalidArgument, "single-vector query must have one row");

    const auto& k = kernels::active();
    const auto& groups = index.groups();
    const auto& entries = index.entries();
    const std::size_t dim = desc.dimension;

    double q_norm = 0.0;
    if (query.mode == VectorMode::kSingle) {
        const float* q = query.vectors.data.data();
        q_norm = std::sqrt(k.dot(q, q, dim));
    }

    std::vector<ScoredDoc> docs(groups.size());
    std::vector<std::size_t> zero_hits(groups.size(), 0);
    parallel_for(groups.size(), options.workers, [&](std::size_t g) {
        const auto& group = groups[g];
        ScoredDoc& out = docs[g];
        out.doc_id = group.doc_id;
        out.score = kUnrankable;
        for (std::size_t e = group.first; e < group.first + group.count; ++e) {
            const auto& entry = entries[e];
            double s;
            if (query.mode == VectorMode::kSingle) {
                const double u_norm = entry.vectors.rows ? index.row_norms(e)[0] : 0.0;
                if (q_norm == 0.0 || u_norm == 0.0) {
                    ++zero_hits[g];
                    s = 0.0;
                } else {
                    s = k.dot(query.vectors.data.data(), entry.vectors.data.data(), dim) / (q_norm * u_norm);
                }
            } else {
                s = score_maxsim(query.vectors, entry.vectors);
            }
            // Strict comparison keeps the first unit on ties.
            if (out.best_unit_id.empty() || s > out.score) {
                out.score = s;
                out.best_unit_id = entry.unit_id;
            }
        }
    });
    if (diag) {
        std::size_t zeros = 0;
        for (auto z : zero_hits) zeros += z;
        if (zeros) diag->add("zero_vector", std::to_string(zeros) + " unit comparisons involved a zero vector");
    }
    top_k(docs, options.k);
    return docs;
}

std::size_t rank_of(const std::vector<ScoredDoc>& ranking, std::string_view doc_id) {
    for (std::size_t i = 0; i < ranking.size(); ++i)
        if (ranking[i].doc_id == doc_id) return i + 1;
    return 0;
}

// ---------------------------------------------------------------------------
// BM25

void Bm25Params::validate() const {
    if (!(k1 >= 0.0)) throw Error(ErrorCode::kInvalidArgument, "bm25 k1 must be >= 0");
    if (!(b >= 0.0 && b <= 1.0)) throw Error(ErrorCode::kInvalidArgument, "bm25 b must be in [0, 1]");
}

Bm25Index::Bm25Index(std::vector<Chunk> chunks, std::vector<std::string> all_docs) : chunks_(std::move(chunks)) {
    std::set<std::string> docs(all_docs.begin(), all_docs.end());
    std::size_t total = 0;
    lengths_.reserve(chunks_.size());
    for (std::size_t c = 0; c < chunks_.size(); ++c) {
        docs.insert(chunks_[c].doc_id);
        std::unordered_map<std::string, std::size_t> tf;
        std::size_t len = 0;
        for (auto tok : text::tokens(chunks_[c].text)) {
            ++tf[text::to_lower(tok)];
            ++len;
        }
        lengths_.push_back(len);
        total += len;
        for (auto& [term, n] : tf) {
            auto& p = postings_[term];
            ++p.df;
            p.hits.emplace_back(c, n);
        }
    }
    docs_.assign(docs.begin(), docs.end());
    avglen_ = chunks_.empty() ? 0.0 : static_cast<double>(total) / static_cast<double>(chunks_.size());
}

std::size_t Bm25Index::document_frequency(std::string_view term) const {
    auto it = postings_.find(text::to_lower(term));
    return it == postings_.end() ? 0 : it->second.df;
}

std::vector<std::string> Bm25Index::unique_terms(std::string_view query) const {
    std::vector<std::string> terms;
    for (auto tok : text::tokens(query)) {
        auto t = text::to_lower(tok);
        if (std::find(terms.begin(), terms.end(), t) == terms.end()) terms.push_back(std::move(t));
    }
    return terms;
}

double Bm25Index::score_terms(std::size_t chunk, const std::vector<std::string>& terms, const Bm25Params& p) const {
    const double n = static_cast<double>(chunks_.size());
    const double len = static_cast<double>(lengths_[chunk]);
    const double norm = avglen_ > 0.0 ? len / avglen_ : 0.0;
    double score = 0.0;
    for (const auto& t : terms) {
        auto it = postings_.find(t);
        if (it == postings_.end()) continue;
        const auto& hits = it->second.hits;
        auto hit = std::lower_bound(hits.begin(), hits.end(), std::pair<std::size_t, std::size_t>{chunk, 0});
        if (hit == hits.end() || hit->first != chunk) continue;
        const double df = static_cast<double>(it->second.df);
        const double tf = static_cast<double>(hit->second);
        const double idf = std::log(1.0 + (n - df + 0.5) / (df + 0.5));
        score += idf * (tf * (p.k1 + 1.0)) / (tf + p.k1 * (1.0 - p.b + p.b * norm));
    }
    return score;
}

double Bm25Index::chunk_score(std::size_t chunk, std::string_view query, const Bm25Params& params) const {
    if (chunk >= chunks_.size()) throw Error(ErrorCode::kInvalidArgument, "chunk index out of range");
    return score_terms(chunk, unique_terms(query), params);
}

std::vector<ScoredDoc> Bm25Index::search(std::string_view query, std::size_t k, const Bm25Params& params) const {
    params.validate();
    const auto terms = unique_terms(query);
    if (terms.empty()) return {};

    std::unordered_map<std::string, ScoredDoc> best;
    for (const auto& d : docs_) best[d] = ScoredDoc{d, 0.0, {}};
    // Only chunks containing a query term can score above zero.
    std::set<std::size_t> candidates;
    for (const auto& t : terms)
        if (auto it = postings_.find(t); it != postings_.end())
            for (const auto& [c, tf] : it->second.hits) candidates.insert(c);
    for (std::size_t c : candidates) {
        const double s = score_terms(c, terms, params);
        auto& doc = best[chunks_[c].doc_id];
        if (s > doc.score) {
            doc.score = s;
            doc.best_unit_id = chunk_unit_id(chunks_[c].doc_id, chunks_[c].index);
        }
    }
    std::vector<ScoredDoc> out;
    out.reserve(best.size());
    for (auto& [id, doc] : best) out.push_back(std::move(doc));
    top_k(out, k);
    return out;
}

std::vector<ScoredDoc> bm25_search(std::string_view query, std::vector<Chunk> chunks, std::size_t k,
                                   const Bm25Params& params) {
    return Bm25Index(std::move(chunks)).search(query, k, params);
}

}  // namespace texdr
