// Copyright 2026 The texdr Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <cstdio>
#include <map>
#include <regex>
#include <set>
#include <sstream>

#include "texdr/error.hpp"
#include "texdr/evaluation.hpp"
#include "texdr/parallel.hpp"

namespace texdr {

using nlohmann::json;

std::vector<std::string> FigureTextOptions::default_reference_patterns() {
    return {R"(\bFigs?\.)", R"(\bFigures?[~\s]*\d+)", R"(\\ref\{fig)", R"(\bFigures?~)"};
}

const std::vector<std::string>& stopwords() {
    // Common English function words plus a few caption boilerplate terms.
    static const std::vector<std::string> words = {
        "a", "about", "above", "after", "again", "against", "all", "also", "am", "an", "and", "any", "are", "as",
        "at", "be", "because", "been", "before", "being", "below", "between", "both", "but", "by", "can", "could",
        "did", "do", "does", "doing", "down", "during", "each", "either", "etc", "few", "fig", "figure", "for",
        "from", "further", "had", "has", "have", "having", "he", "her", "here", "hers", "herself", "him", "himself",
        "his", "how", "i", "if", "in", "into", "is", "it", "its", "itself", "just", "left", "may", "me", "more",
        "most", "my", "myself", "no", "nor", "not", "now", "of", "off", "on", "once", "only", "or", "other", "our",
        "ours", "ourselves", "out", "over", "own", "right", "same", "she", "should", "shown", "shows", "so", "some",
        "such", "than", "that", "the", "their", "theirs", "them", "themselves", "then", "there", "these", "they",
        "this", "those", "through", "to", "too", "under", "until", "up", "us", "using", "very", "via", "was", "we",
        "were", "what", "when", "where", "which", "while", "who", "whom", "why", "will", "with", "would", "you",
        "your", "yours", "yourself", "yourselves",
    };
    return words;
}

namespace {

std::vector<std::string> words_of(std::string_view text) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : text) {
        const char l = (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c;
        if ((l >= 'a' && l <= 'z') || (l >= '0' && l <= '9')) {
            cur += l;
        } else if (!cur.empty()) {
            out.push_back(std::move(cur));
            cur.clear();
        }
    }
    if (!cur.empty()) out.push_back(std::move(cur));
    return out;
}

bool is_stopword(const std::string& w) {
    static const std::set<std::string> set(stopwords().begin(), stopwords().end());
    return set.count(w) > 0;
}

}  // namespace

std::vector<std::string> content_words(std::string_view text) {
    std::vector<std::string> out;
    for (auto& w : words_of(text))
        if (!is_stopword(w)) out.push_back(std::move(w));
    return out;
}

bool references_figure(std::string_view chunk_text, const std::vector<std::string>& patterns) {
    const std::string s(chunk_text);
    for (const auto& p : patterns)
        if (std::regex_search(s, std::regex(p, std::regex::icase))) return true;
    return false;
}

std::optional<double> caption_overlap(std::string_view caption, std::string_view chunk_text) {
    auto cw = content_words(caption);
    const std::set<std::string> caption_words(cw.begin(), cw.end());
    if (caption_words.empty()) return std::nullopt;
    auto chw = words_of(chunk_text);
    const std::set<std::string> chunk_words(chw.begin(), chw.end());
    std::size_t hit = 0;
    for (const auto& w : caption_words) hit += chunk_words.count(w);
    return static_cast<double>(hit) / static_cast<double>(caption_words.size());
}

std::size_t chunk_index_for_offset(const std::vector<Chunk>& chunks, std::size_t anchor) {
    if (chunks.empty()) throw Error(ErrorCode::kInvalidArgument, "document has no chunks");
    for (const auto& c : chunks)
        if (c.end > anchor) return c.index;
    return chunks.back().index;
}

namespace {

void fill_text_flags(FigureTextDiagnostics& d, const Chunk& chunk, std::string_view caption,
                     const FigureTextOptions& options) {
    d.references_figure = references_figure(chunk.text, options.reference_patterns);
    if (auto ratio = caption_overlap(caption, chunk.text)) {
        d.overlap_ratio = *ratio;
        d.contains_caption_info = *ratio >= options.overlap_threshold;
    } else {
        d.diagnostics.add("empty_caption", "caption has no content words; overlap undefined");
    }
}

std::size_t distance(std::size_t a, std::size_t b) { return a > b ? a - b : b - a; }

}  // namespace

FigureTextDiagnostics figure_text_diagnostics(const Chunk& chunk, std::size_t figure_chunk_index,
                                              std::string_view caption, const FigureTextOptions& options) {
    FigureTextDiagnostics d;
    d.near_figure = distance(chunk.index, figure_chunk_index) <= options.window;
    fill_text_flags(d, chunk, caption, options);
    return d;
}

FigureTextDiagnostics figure_text_diagnostics(const Chunk& chunk, const std::vector<Chunk>& doc_chunks,
                                              const latex::FigureBlock& figure, const FigureTextOptions& options) {
    return figure_text_diagnostics(chunk, chunk_index_for_offset(doc_chunks, figure.anchor), figure.caption, options);
}

// ---------------------------------------------------------------------------
// correct-vs-other document report

namespace {

std::optional<std::size_t> chunk_index_of_unit(const std::string& unit_id) {
    auto pos = unit_id.rfind("#c");
    if (pos == std::string::npos) return std::nullopt;
    std::size_t value = 0, i = pos + 2;
    if (i >= unit_id.size()) return std::nullopt;
    for (; i < unit_id.size(); ++i) {
        if (unit_id[i] < '0' || unit_id[i] > '9') return std::nullopt;
        value = value * 10 + static_cast<std::size_t>(unit_id[i] - '0');
    }
    return value;
}

std::optional<std::size_t> figure_index_of(const std::string& ref) {
    unsigned long v = 0;
    int consumed = 0;
    if (std::sscanf(ref.c_str(), "fig%lu%n", &v, &consumed) != 1 || static_cast<std::size_t>(consumed) != ref.size())
        return std::nullopt;
    return v;
}

FigureAnalysisSummary summarize(const std::vector<FigureAnalysisRow>& rows, bool correct) {
    FigureAnalysisSummary s;
    std::size_t near = 0, refs = 0, caption = 0;
    for (const auto& r : rows) {
        if (r.correct_doc != correct) continue;
        ++s.count;
        near += r.diagnostics.near_figure;
        refs += r.diagnostics.references_figure;
        caption += r.diagnostics.contains_caption_info;
    }
    if (s.count) {
        const double n = static_cast<double>(s.count);
        s.near_pct = 100.0 * static_cast<double>(near) / n;
        s.references_pct = 100.0 * static_cast<double>(refs) / n;
        s.caption_pct = 100.0 * static_cast<double>(caption) / n;
    }
    return s;
}

}  // namespace

FigureAnalysisReport analyze_figure_queries(const std::vector<Query>& queries, const Index& index,
                                            EmbeddingProvider& provider, const std::vector<IngestedDocument>& docs,
                                            const FigureTextOptions& options, std::size_t workers) {
    if (index.representation() != RepresentationKind::kTextOnly)
        throw Error(ErrorCode::kInvalidArgument, "figure analysis needs a text-only index");
    std::map<std::string, const IngestedDocument*> by_id;
    for (const auto& d : docs) by_id[d.doc_id] = &d;

    ChunkOptions copts;
    copts.chunk_size = index.manifest().chunk_size;
    copts.overlap = index.manifest().overlap;

    struct Job {
        const Query* query;
        std::size_t figure;
    };
    std::vector<Job> jobs;
    for (const auto& q : queries) {
        if (q.evidence_type != EvidenceType::kFigure || !q.evidence_ref) continue;
        if (!by_id.count(q.gold_doc_id))
            throw Error(ErrorCode::kGoldMissing, q.query_id + ": gold document " + q.gold_doc_id + " not ingested");
        auto fig = figure_index_of(*q.evidence_ref);
        if (!fig || *fig >= by_id[q.gold_doc_id]->structure.figures.size())
            throw Error(ErrorCode::kInvalidArgument, q.query_id + ": unknown figure " + *q.evidence_ref);
        jobs.push_back({&q, *fig});
    }

    std::map<std::string, std::vector<Chunk>> chunk_cache;
    for (const auto& d : docs) chunk_cache[d.doc_id] = chunk_text(d.normalized, copts, d.doc_id);

    std::vector<std::vector<FigureAnalysisRow>> per_job(jobs.size());
    parallel_for(jobs.size(), workers, [&](std::size_t j) {
        const Query& q = *jobs[j].query;
        const auto& gold = *by_id.at(q.gold_doc_id);
        const auto& figure = gold.structure.figures[jobs[j].figure];
        QueryEmbedding qe{provider.descriptor().vector_mode, embed_query(q.text, provider)};
        auto ranking = doc_scores(qe, index, {0, 1});

        auto top_chunk = [&](const ScoredDoc& d) -> const Chunk* {
            auto idx = chunk_index_of_unit(d.best_unit_id);
            auto it = chunk_cache.find(d.doc_id);
            if (!idx || it == chunk_cache.end() || *idx >= it->second.size()) return nullptr;
            return &it->second[*idx];
        };

        for (const auto& d : ranking) {
            if (d.doc_id != q.gold_doc_id) continue;
            if (const Chunk* c = top_chunk(d)) {
                FigureAnalysisRow row{q.query_id, d.doc_id, d.best_unit_id, true, {}};
                row.diagnostics = figure_text_diagnostics(*c, chunk_cache.at(d.doc_id), figure, options);
                per_job[j].push_back(std::move(row));
            }
            break;
        }
        for (const auto& d : ranking) {
            if (d.doc_id == q.gold_doc_id || d.best_unit_id.empty()) continue;
            const Chunk* c = top_chunk(d);
            if (!c) continue;
            FigureAnalysisRow row{q.query_id, d.doc_id, d.best_unit_id, false, {}};
            // Near any of this document's own figures; caption overlap against the gold figure.
            const auto& other_chunks = chunk_cache.at(d.doc_id);
            if (auto it = by_id.find(d.doc_id); it != by_id.end())
                for (const auto& f : it->second->structure.figures)
                    row.diagnostics.near_figure |=
                        distance(c->index, chunk_index_for_offset(other_chunks, f.anchor)) <= options.window;
            fill_text_flags(row.diagnostics, *c, figure.caption, options);
            per_job[j].push_back(std::move(row));
            break;
        }
    });

    FigureAnalysisReport report;
    for (auto& rows : per_job)
        for (auto& r : rows) report.rows.push_back(std::move(r));
    report.correct = summarize(report.rows, true);
    report.incorrect = summarize(report.rows, false);
    report.config = json{{"window", options.window},
                         {"overlap_threshold", options.overlap_threshold},
                         {"reference_patterns", options.reference_patterns},
                         {"chunk_size", copts.chunk_size},
                         {"overlap", copts.overlap}};
    return report;
}

json FigureAnalysisReport::to_json() const {
    auto summary = [](const FigureAnalysisSummary& s) {
        return json{{"count", s.count},
                    {"near_figure_pct", s.near_pct},
                    {"references_figure_pct", s.references_pct},
                    {"contains_caption_info_pct", s.caption_pct}};
    };
    json rows_json = json::array();
    for (const auto& r : rows)
        rows_json.push_back({{"query_id", r.query_id},
                             {"doc_id", r.doc_id},
                             {"chunk_unit_id", r.chunk_unit_id},
                             {"correct_doc", r.correct_doc},
                             {"near_figure", r.diagnostics.near_figure},
                             {"references_figure", r.diagnostics.references_figure},
                             {"contains_caption_info", r.diagnostics.contains_caption_info},
                             {"overlap_ratio", r.diagnostics.overlap_ratio}});
    return json{{"correct_doc", summary(correct)},
                {"incorrect_doc", summary(incorrect)},
                {"config", config},
                {"rows", std::move(rows_json)}};
}

std::string FigureAnalysisReport::to_table() const {
    std::ostringstream out;
    char line[128];
    std::snprintf(line, sizeof line, "%-28s %12s %14s\n", "metric", "correct doc", "incorrect doc");
    out << line;
    std::snprintf(line, sizeof line, "%-28s %12zu %14zu\n", "count", correct.count, incorrect.count);
    out << line;
    std::snprintf(line, sizeof line, "%-28s %12.1f %14.1f\n", "near figure (%)", correct.near_pct, incorrect.near_pct);
    out << line;
    std::snprintf(line, sizeof line, "%-28s %12.1f %14.1f\n", "references figure (%)", correct.references_pct,
                  incorrect.references_pct);
    out << line;
    std::snprintf(line, sizeof line, "%-28s %12.1f %14.1f\n", "contains caption info (%)", correct.caption_pct,
                  incorrect.caption_pct);
    out << line;
    return out.str();
}

}  // namespace texdr
