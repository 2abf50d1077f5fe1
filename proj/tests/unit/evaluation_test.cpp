// Copyright 2026 The texdr Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <set>

#include "../common/figure_fixture.hpp"
#include "test_util.hpp"
#include "texdr/error.hpp"
#include "texdr/evaluation.hpp"
#include "texdr/text.hpp"

namespace texdr {
namespace {

TEST(Ndcg, Examples) {
    std::vector<std::string> r;
    for (int i = 1; i <= 12; ++i) r.push_back("d" + std::to_string(i));
    EXPECT_DOUBLE_EQ(ndcg_at_k(r, "d1"), 1.0);
    EXPECT_DOUBLE_EQ(ndcg_at_k(r, "d11"), 0.0);
    EXPECT_DOUBLE_EQ(ndcg_at_k(r, "d3"), 0.5);
    EXPECT_DOUBLE_EQ(ndcg_at_k(r, "d10"), 1.0 / std::log2(11.0));
    EXPECT_DOUBLE_EQ(ndcg_at_k(r, "absent"), 0.0);
    EXPECT_DOUBLE_EQ(ndcg_at_k(r, "d3", 2), 0.0);
    EXPECT_DOUBLE_EQ(ndcg_from_rank(0), 0.0);
}

// General DCG/IDCG with binary gains over the whole ranking.
double ndcg_oracle(const std::vector<std::string>& ranked, const std::string& gold, std::size_t k) {
    double dcg = 0.0, idcg = 0.0;
    std::vector<int> rel;
    for (const auto& d : ranked) rel.push_back(d == gold ? 1 : 0);
    for (std::size_t i = 0; i < std::min(k, rel.size()); ++i) dcg += (std::pow(2.0, rel[i]) - 1) / std::log2(i + 2.0);
    std::sort(rel.rbegin(), rel.rend());
    for (std::size_t i = 0; i < std::min(k, rel.size()); ++i) idcg += (std::pow(2.0, rel[i]) - 1) / std::log2(i + 2.0);
    return idcg == 0.0 ? 0.0 : dcg / idcg;
}

TEST(Ndcg, MatchesGeneralOracle) {
    std::mt19937_64 rng(3);
    for (int t = 0; t < 500; ++t) {
        std::size_t n = 1 + rng() % 30;
        std::vector<std::string> r;
        for (std::size_t i = 0; i < n; ++i) r.push_back("d" + std::to_string(i));
        std::shuffle(r.begin(), r.end(), rng);
        std::string gold = "d" + std::to_string(rng() % n);
        std::size_t k = 1 + rng() % 20;
        EXPECT_NEAR(ndcg_at_k(r, gold, k), ndcg_oracle(r, gold, k), 1e-12);
    }
}

std::string token_text(std::size_t n) {
    std::string s;
    for (std::size_t i = 0; i < n; ++i) s += (i ? " " : "") + ("t" + std::to_string(i));
    return s;
}

TEST(Scaling, WindowSizesAndContainment) {
    auto text = token_text(9000);
    ScalingOptions o;
    o.seed = 42;
    auto set = build_scaling_windows(text, o, "doc");
    ASSERT_EQ(set.windows.size(), 4u);
    const auto& base = set.windows[0];
    for (std::size_t i = 0; i < 4; ++i) {
        const auto& w = set.windows[i];
        EXPECT_EQ(w.size, o.sizes[i]);
        EXPECT_EQ(w.end - w.begin, o.sizes[i]);
        EXPECT_LE(w.begin, base.begin);
        EXPECT_GE(w.end, base.end);
        EXPECT_LE(w.end, 9000u);
        EXPECT_EQ(texdr::text::tokens(w.text).size(), o.sizes[i]);
        EXPECT_EQ(texdr::text::tokens(w.text).front(), "t" + std::to_string(w.begin));
    }
    EXPECT_EQ(set.query_end - set.query_begin, 100u);
    EXPECT_GE(set.query_begin, base.begin);
    EXPECT_LE(set.query_end, base.end);
    EXPECT_EQ(texdr::text::tokens(set.query).front(), "t" + std::to_string(set.query_begin));
}

TEST(Scaling, TooShortAndDeterministic) {
    ScalingOptions o;
    try {
        build_scaling_windows(token_text(7000), o);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::kTooShort);
    }
    auto text = token_text(8500);
    o.seed = 7;
    auto a = build_scaling_windows(text, o), b = build_scaling_windows(text, o);
    EXPECT_EQ(to_json(a), to_json(b));
    std::set<std::size_t> starts;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        o.seed = seed;
        starts.insert(build_scaling_windows(text, o).windows[0].begin);
    }
    EXPECT_GT(starts.size(), 1u);
}

TEST(Scaling, GrowsBackwardAtTextEnd) {
    auto text = token_text(8000);
    ScalingOptions o;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        o.seed = seed;
        auto set = build_scaling_windows(text, o);
        EXPECT_EQ(set.windows[3].begin, 0u);
        EXPECT_EQ(set.windows[3].end, 8000u);
    }
}

TEST(Scaling, SnippetEscapesSpecials) {
    auto s = render_latex_snippet("50% of $x_1$ & {y} #3 ~ ^ \\cmd");
    EXPECT_TRUE(s.starts_with("\\documentclass"));
    EXPECT_NE(s.find("50\\%"), std::string::npos);
    EXPECT_NE(s.find("\\$x\\_1\\$"), std::string::npos);
    EXPECT_NE(s.find("\\&"), std::string::npos);
    EXPECT_NE(s.find("\\#3"), std::string::npos);
    EXPECT_EQ(s.find("\\cmd"), std::string::npos);
    EXPECT_NE(s.find("\\end{document}"), std::string::npos);
}

TEST(FigureText, SpecExamples) {
    Chunk c{"d", 5, "plain words here", 3, 0, 16};
    EXPECT_TRUE(figure_text_diagnostics(c, 6, "x").near_figure);
    EXPECT_TRUE(references_figure("as shown in Fig. 3", FigureTextOptions::default_reference_patterns()));
    auto ratio = caption_overlap("scaling law curves", "the scaling of these curves");
    ASSERT_TRUE(ratio);
    EXPECT_NEAR(*ratio, 2.0 / 3.0, 1e-12);
    Chunk s{"d", 0, "the scaling of these curves", 5, 0, 27};
    auto d = figure_text_diagnostics(s, 0, "scaling law curves");
    EXPECT_TRUE(d.contains_caption_info);
    EXPECT_NEAR(d.overlap_ratio, 2.0 / 3.0, 1e-12);
}

TEST(FigureText, ContentWordsDropStopwords) {
    EXPECT_EQ(content_words("The Scaling of LAWS, in 2024!"), (std::vector<std::string>{"scaling", "laws", "2024"}));
    EXPECT_FALSE(caption_overlap("the of and", "anything"));
}

TEST(FigureText, EmptyCaptionDiagnostic) {
    Chunk c{"d", 0, "text", 1, 0, 4};
    auto d = figure_text_diagnostics(c, 0, "");
    EXPECT_FALSE(d.contains_caption_info);
    EXPECT_EQ(d.overlap_ratio, 0.0);
    EXPECT_EQ(d.diagnostics.count("empty_caption"), 1u);
}

TEST(FigureText, HandLabeledPairs) {
    auto chunks = chunk_text(figure_fixture::document_text(), {figure_fixture::kChunkSize, 0, {}}, "doc");
    ASSERT_EQ(chunks.size(), figure_fixture::chunk_texts().size());
    for (std::size_t i = 0; i < chunks.size(); ++i) EXPECT_EQ(chunks[i].text, figure_fixture::chunk_texts()[i]);
    auto figs = figure_fixture::figures();
    EXPECT_EQ(chunk_index_for_offset(chunks, figs[0].anchor), 5u);
    EXPECT_EQ(chunk_index_for_offset(chunks, figs[1].anchor), 0u);
    for (const auto& p : figure_fixture::labels()) {
        auto d = figure_text_diagnostics(chunks[p.chunk], chunks, figs[p.figure]);
        EXPECT_EQ(d.near_figure, p.near) << p.chunk << "/" << p.figure;
        EXPECT_EQ(d.references_figure, p.references) << p.chunk << "/" << p.figure;
        EXPECT_EQ(d.contains_caption_info, p.caption) << p.chunk << "/" << p.figure;
    }
}

TEST(FigureText, WindowAndThresholdAreConfigurable) {
    auto chunks = chunk_text(figure_fixture::document_text(), {figure_fixture::kChunkSize, 0, {}}, "doc");
    auto fig = figure_fixture::figures()[0];
    FigureTextOptions o;
    o.window = 3;
    o.overlap_threshold = 0.5;
    EXPECT_TRUE(figure_text_diagnostics(chunks[2], chunks, fig, o).near_figure);
    EXPECT_FALSE(figure_text_diagnostics(chunks[2], chunks, fig, o).contains_caption_info);
    o.reference_patterns = {"appendix"};
    EXPECT_TRUE(figure_text_diagnostics(chunks[9], chunks, fig, o).references_figure);
    EXPECT_FALSE(figure_text_diagnostics(chunks[2], chunks, fig, o).references_figure);
}

}  // namespace
}  // namespace texdr

#include "../common/planted.hpp"

namespace texdr {
namespace {

TEST(Evaluate, PlantedEvidenceScoresOne) {
    auto b = planted::benchmark(8);
    HashProvider p(planted::hash_descriptor());
    auto idx = planted::text_index(b.docs, p);
    auto report = evaluate(b.queries, idx, p, {});
    EXPECT_DOUBLE_EQ(report.mean_ndcg, 1.0);
    EXPECT_EQ(report.count_by_type.at("text"), 8u);
    EXPECT_EQ(report.index_size_bytes, index_size_bytes(idx));
    for (const auto& q : report.queries) {
        EXPECT_EQ(q.rank, 1u);
        EXPECT_EQ(q.top_doc_id, q.gold_doc_id);
    }
}

TEST(Evaluate, DroppedEvidenceOnlyAffectsItsQuery) {
    auto b = planted::benchmark(20, 5);
    HashProvider p(planted::hash_descriptor());
    auto report = evaluate(b.queries, planted::text_index(b.docs, p), p, {.k = 10, .workers = 3});
    for (const auto& q : report.queries) EXPECT_DOUBLE_EQ(q.ndcg, q.gold_doc_id == "doc005" ? 0.0 : 1.0) << q.query_id;
}

TEST(Evaluate, PerTypeMeansRecomputeFromRows) {
    auto b = planted::benchmark(6);
    b.queries[1].evidence_type = EvidenceType::kFigure;
    b.queries[2].evidence_type = EvidenceType::kTable;
    b.queries[2].text = "unrelated words entirely";
    HashProvider p(planted::hash_descriptor());
    auto report = evaluate(b.queries, planted::text_index(b.docs, p), p, {});
    std::map<std::string, std::pair<double, std::size_t>> acc;
    double total = 0;
    for (const auto& q : report.queries) {
        auto& a = acc[std::string(to_string(q.evidence_type))];
        a.first += q.ndcg;
        ++a.second;
        total += q.ndcg;
        EXPECT_DOUBLE_EQ(q.ndcg, ndcg_from_rank(q.rank, report.k));
    }
    for (const auto& [type, a] : acc) EXPECT_DOUBLE_EQ(report.mean_ndcg_by_type.at(type), a.first / a.second);
    EXPECT_DOUBLE_EQ(report.mean_ndcg, total / report.queries.size());
    auto j = report.to_json();
    EXPECT_EQ(j["queries"].size(), 6u);
    EXPECT_NE(report.to_table().find("nDCG@10"), std::string::npos);
    auto csv = report.to_csv();
    EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 7);
}

TEST(Evaluate, GoldMissingAndProviderMismatch) {
    auto b = planted::benchmark(3);
    HashProvider p(planted::hash_descriptor());
    auto idx = planted::text_index(b.docs, p);
    b.queries[0].gold_doc_id = "nope";
    EXPECT_THROW(evaluate(b.queries, idx, p, {}), Error);
    HashProvider other(planted::hash_descriptor(64));
    EXPECT_THROW(evaluate({}, idx, other, {}), Error);
}

TEST(FigureAnalysis, GoldAndOtherRows) {
    // Gold document: the figure fixture. Other document: the same text with the
    // query words moved next to its own figure.
    IngestedDocument gold;
    gold.doc_id = "gold";
    gold.normalized = figure_fixture::document_text();
    gold.structure.figures = figure_fixture::figures();
    IngestedDocument other;
    other.doc_id = "other";
    other.normalized = "unrelated opening words only here and there in text now "
                       "scaling law curves fitted with a power law here again";
    latex::FigureBlock f;
    f.anchor = other.normalized.size() - 3;
    f.caption = "x";
    other.structure.figures = {f};

    HashProvider p(planted::hash_descriptor());
    auto idx = planted::text_index({gold, other}, p, figure_fixture::kChunkSize);
    Query q;
    q.query_id = "gold#q-fig000";
    q.text = "Figures~4 and 5 compare scaling curves against the law baseline.";
    q.evidence_type = EvidenceType::kFigure;
    q.evidence_ref = "fig000";
    q.gold_doc_id = "gold";
    auto report = analyze_figure_queries({q}, idx, p, {gold, other});
    ASSERT_EQ(report.rows.size(), 2u);
    EXPECT_TRUE(report.rows[0].correct_doc);
    EXPECT_EQ(report.rows[0].chunk_unit_id, "gold#c0007");
    EXPECT_TRUE(report.rows[0].diagnostics.near_figure);
    EXPECT_TRUE(report.rows[0].diagnostics.references_figure);
    EXPECT_FALSE(report.rows[1].correct_doc);
    EXPECT_EQ(report.rows[1].doc_id, "other");
    EXPECT_TRUE(report.rows[1].diagnostics.near_figure);
    EXPECT_TRUE(report.rows[1].diagnostics.contains_caption_info);
    EXPECT_EQ(report.correct.count, 1u);
    EXPECT_DOUBLE_EQ(report.correct.near_pct, 100.0);
    EXPECT_NE(report.to_table().find("near figure"), std::string::npos);
    Query bad = q;
    bad.evidence_ref = "fig009";
    EXPECT_THROW(analyze_figure_queries({bad}, idx, p, {gold, other}), Error);
}

}  // namespace
}  // namespace texdr
