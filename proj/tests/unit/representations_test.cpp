// Copyright 2026 The texdr Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <algorithm>
#include <cstdlib>
#include <set>

#include "test_util.hpp"
#include "texdr/document.hpp"
#include "texdr/error.hpp"
#include "texdr/image.hpp"
#include "texdr/representations.hpp"
#include "texdr/text.hpp"

namespace texdr {
namespace {

using testing::TempDir;
using testing::write_file;

std::string words(std::size_t n, const std::string& stem = "w") {
    std::string s;
    for (std::size_t i = 0; i < n; ++i) s += (i ? " " : "") + stem + std::to_string(i);
    return s;
}

TEST(ChunkText, SpecExamples) {
    auto c = chunk_text(words(1000), {512, 0, {}});
    ASSERT_EQ(c.size(), 2u);
    EXPECT_EQ(c[0].token_count, 512u);
    EXPECT_EQ(c[1].token_count, 488u);
    EXPECT_TRUE(chunk_text("", {512, 0, {}}).empty());
    EXPECT_TRUE(chunk_text("  \n\t ", {512, 0, {}}).empty());
    auto text = words(512);
    auto one = chunk_text(text, {512, 0, {}});
    ASSERT_EQ(one.size(), 1u);
    EXPECT_EQ(one[0].begin, 0u);
    EXPECT_EQ(one[0].end, text.size());
}

TEST(ChunkText, RejectsBadSizes) {
    EXPECT_THROW(chunk_text("a", {0, 0, {}}), Error);
    EXPECT_THROW(chunk_text("a", {4, 4, {}}), Error);
}

TEST(ChunkText, OverlapSharesTokens) {
    auto c = chunk_text(words(10), {4, 1, {}});
    // windows start at 0,3,6 ; last chunk [9] would be covered by [6..9]
    ASSERT_GE(c.size(), 3u);
    auto t0 = text::tokens(c[0].text), t1 = text::tokens(c[1].text);
    EXPECT_EQ(t0.back(), t1.front());
    std::size_t total = 0;
    for (std::size_t i = 0; i < c.size(); ++i) total += c[i].token_count - (i ? 1 : 0);
    EXPECT_EQ(total, 10u);
}

TEST(ChunkText, PropertiesOverRandomTexts) {
    std::mt19937_64 rng(5);
    for (int t = 0; t < 200; ++t) {
        std::size_t n = rng() % 300;
        std::string s;
        for (std::size_t i = 0; i < n; ++i) {
            s += std::string(1 + rng() % 3, " \n\t"[rng() % 3]);
            s += "t" + std::to_string(rng() % 50);
        }
        std::size_t size = 1 + rng() % 40;
        std::size_t overlap = rng() % size;
        auto chunks = chunk_text(s, {size, overlap, {}}, "d");
        std::vector<std::string_view> joined;
        for (std::size_t i = 0; i < chunks.size(); ++i) {
            const auto& c = chunks[i];
            EXPECT_EQ(c.index, i);
            EXPECT_EQ(c.doc_id, "d");
            EXPECT_LE(c.token_count, size);
            if (i + 1 < chunks.size()) EXPECT_EQ(c.token_count, size);
            EXPECT_EQ(text::tokens(c.text).size(), c.token_count);
            // Span text holds the same tokens.
            auto span_tokens = text::tokens(std::string_view(s).substr(c.begin, c.end - c.begin));
            EXPECT_EQ(std::vector<std::string_view>(span_tokens.begin(), span_tokens.end()), text::tokens(c.text));
            if (i) EXPECT_GT(c.begin, chunks[i - 1].begin);
            auto toks = text::tokens(c.text);
            joined.insert(joined.end(), toks.begin() + static_cast<std::ptrdiff_t>(i ? overlap : 0), toks.end());
        }
        EXPECT_EQ(joined, text::tokens(s));
    }
}

TEST(ChunkText, ProviderTokenCostHook) {
    ChunkOptions o{10, 0, [](std::string_view w) { return w.size(); }};
    auto c = chunk_text("abcde fghij kl", o);
    ASSERT_EQ(c.size(), 2u);
    EXPECT_EQ(c[0].text, "abcde fghij");
}

TEST(UnitIds, Formats) {
    EXPECT_EQ(figure_id(7), "fig007");
    EXPECT_EQ(chunk_unit_id("d", 3), "d#c0003");
    EXPECT_EQ(figure_unit_id("d", 2, 1), "d#fig002-1");
    EXPECT_EQ(page_unit_id("d", 12), "d#p0012");
}

TEST(RepresentationKind, RoundTrip) {
    for (auto k : {RepresentationKind::kTextOnly, RepresentationKind::kTextPlusCaptions, RepresentationKind::kFiguresOnly,
                   RepresentationKind::kDocAsImage, RepresentationKind::kInterleaved})
        EXPECT_EQ(parse_representation(to_string(k)), k);
    EXPECT_FALSE(parse_representation("pdf"));
}

TEST(Validate, UnitKindInvariants) {
    image::Blob png = image::make_png({2, 2}, 1);
    EXPECT_NO_THROW(validate({"d", "u", UnitKind::kTextChunk, "t", {}}));
    EXPECT_THROW(validate({"d", "u", UnitKind::kTextChunk, "t", {{"s", png}}}), Error);
    EXPECT_THROW(validate({"d", "u", UnitKind::kFigure, "t", {{"s", png}}}), Error);
    EXPECT_THROW(validate({"d", "u", UnitKind::kPageImage, "", {}}), Error);
    EXPECT_THROW(validate({"d", "u", UnitKind::kInterleaved, "t", {{"a", png}, {"b", png}, {"c", png}}}), Error);
    EXPECT_THROW(validate({"d", "u", UnitKind::kInterleaved, "", {{"a", png}}}), Error);
}

// A document with `n_words` filler tokens and figures anchored at given token positions.
IngestedDocument doc_with_figures(std::size_t n_words, std::vector<std::size_t> at_token,
                                  std::vector<std::size_t> images_per_figure = {}) {
    IngestedDocument d;
    d.doc_id = "doc";
    d.normalized = words(n_words);
    auto spans = text::token_spans(d.normalized);
    for (std::size_t f = 0; f < at_token.size(); ++f) {
        latex::FigureBlock fig;
        fig.caption = "caption " + std::to_string(f);
        fig.anchor = at_token[f] < spans.size() ? spans[at_token[f]].begin : d.normalized.size();
        std::size_t n = images_per_figure.empty() ? 1 : images_per_figure[f];
        for (std::size_t a = 0; a < n; ++a) {
            fig.asset_refs.push_back("f" + std::to_string(f) + "_" + std::to_string(a));
            latex::ResolvedAsset r;
            r.figure_index = f;
            r.asset_index = a;
            r.status = latex::AssetStatus::kResolved;
            r.png = image::make_png({3, 3}, static_cast<std::uint8_t>(10 * f + a));
            d.assets.push_back(r);
        }
        d.structure.figures.push_back(fig);
    }
    return d;
}

void check_invariants(const BuildResult& r) {
    for (const auto& u : r.units) EXPECT_NO_THROW(validate(u)) << u.unit_id;
}

TEST(TextOnly, OneUnitPerChunk) {
    auto d = doc_with_figures(30, {});
    auto r = build_text_only(d, {10, 0, {}});
    ASSERT_EQ(r.units.size(), 3u);
    for (const auto& u : r.units) EXPECT_EQ(u.kind, UnitKind::kTextChunk);
    EXPECT_EQ(r.units[2].unit_id, "doc#c0002");
    check_invariants(r);
    IngestedDocument empty;
    empty.doc_id = "e";
    auto e = build_text_only(empty, {});
    EXPECT_TRUE(e.units.empty());
    EXPECT_EQ(e.diagnostics.count("empty_document"), 1u);
}

TEST(TextPlusCaptions, AppendsInFigureOrder) {
    auto d = doc_with_figures(20, {3, 8});
    CaptionMap caps{{"fig001", "second figure words"}, {"fig000", "first figure words"}};
    auto r = build_text_plus_captions(d, caps, {8, 0, {}});
    std::string all;
    for (const auto& u : r.units) all += u.text + " ";
    auto a = all.find("first figure"), b = all.find("second figure");
    ASSERT_NE(a, std::string::npos);
    ASSERT_NE(b, std::string::npos);
    EXPECT_LT(a, b);
    EXPECT_GT(a, all.find("w19"));
    check_invariants(r);
}

TEST(TextPlusCaptions, EmptyMapEqualsTextOnly) {
    auto d = doc_with_figures(25, {3});
    EXPECT_EQ(build_text_plus_captions(d, {}, {8, 0, {}}).units, build_text_only(d, {8, 0, {}}).units);
}

TEST(TextPlusCaptions, CaptionMaySplitAcrossChunks) {
    auto d = doc_with_figures(7, {0});
    auto r = build_text_plus_captions(d, {{"fig000", "cap1 cap2 cap3"}}, {8, 0, {}});
    ASSERT_EQ(r.units.size(), 2u);
    EXPECT_TRUE(r.units[0].text.ends_with("cap1"));
    EXPECT_EQ(r.units[1].text, "cap2 cap3");
}

TEST(FiguresOnly, OneUnitPerResolvedAsset) {
    auto d = doc_with_figures(10, {1, 2, 3, 4});
    auto r = build_figures_only(d);
    EXPECT_EQ(r.units.size(), 4u);
    check_invariants(r);
    auto multi = build_figures_only(doc_with_figures(10, {1}, {2}));
    ASSERT_EQ(multi.units.size(), 2u);
    EXPECT_EQ(multi.units[1].unit_id, "doc#fig000-1");
    auto none = build_figures_only(doc_with_figures(10, {}));
    EXPECT_TRUE(none.units.empty());
    EXPECT_FALSE(none.representable);
}

TEST(FiguresOnly, SkipsUnresolvedAndSynthetic) {
    auto d = doc_with_figures(10, {1, 2});
    d.assets[0].status = latex::AssetStatus::kMissing;
    d.assets[0].png.clear();
    latex::FigureBlock tikz;
    tikz.synthetic = true;
    tikz.caption = "drawn";
    d.structure.figures.push_back(tikz);
    auto r = build_figures_only(d);
    ASSERT_EQ(r.units.size(), 1u);
    EXPECT_EQ(r.units[0].unit_id, "doc#fig001-0");
    EXPECT_GE(r.diagnostics.count("unembeddable_asset"), 1u);
    EXPECT_GE(r.diagnostics.count("synthetic_figure"), 1u);
}

TEST(DocAsImage, PageOrder) {
    std::vector<image::Blob> pages;
    for (int i = 0; i < 12; ++i) pages.push_back(image::make_png({2, 2}, static_cast<std::uint8_t>(i)));
    auto r = build_doc_as_image(doc_with_figures(1, {}), pages);
    ASSERT_EQ(r.units.size(), 12u);
    EXPECT_TRUE(std::is_sorted(r.units.begin(), r.units.end(),
                               [](const auto& a, const auto& b) { return a.unit_id < b.unit_id; }));
    EXPECT_EQ(r.units[11].images[0].bytes, pages[11]);
    check_invariants(r);
    try {
        build_doc_as_image(doc_with_figures(1, {}), {});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::kEmptyPages);
    }
}

TEST(Interleaved, ContainmentRule) {
    auto d = doc_with_figures(40, {33});
    auto r = build_interleaved(d, {10, 0, {}});
    ASSERT_EQ(r.units.size(), 4u);
    EXPECT_EQ(r.units[3].kind, UnitKind::kInterleaved);
    ASSERT_EQ(r.units[3].images.size(), 1u);
    EXPECT_EQ(r.units[3].images[0].source, "doc#fig000-0");
    for (int i = 0; i < 3; ++i) EXPECT_EQ(r.units[static_cast<std::size_t>(i)].kind, UnitKind::kTextChunk);
    check_invariants(r);
}

TEST(Interleaved, NoFiguresEqualsTextOnly) {
    auto d = doc_with_figures(40, {});
    EXPECT_EQ(build_interleaved(d, {10, 0, {}}).units, build_text_only(d, {10, 0, {}}).units);
}

TEST(Interleaved, ThirdFigureSpillsForward) {
    auto d = doc_with_figures(30, {2, 5, 8});
    auto r = build_interleaved(d, {10, 0, {}});
    ASSERT_EQ(r.units.size(), 3u);
    EXPECT_EQ(r.units[0].images.size(), 2u);
    EXPECT_EQ(r.units[1].images.size(), 1u);
    EXPECT_EQ(r.units[1].images[0].source, "doc#fig002-0");
    EXPECT_EQ(r.diagnostics.count("figure_spill"), 1u);
}

TEST(Interleaved, AnchorPastLastSpanGoesToLastChunk) {
    auto d = doc_with_figures(15, {99});
    auto r = build_interleaved(d, {10, 0, {}});
    ASSERT_EQ(r.units.size(), 2u);
    EXPECT_EQ(r.units[1].images.size(), 1u);
}

TEST(Interleaved, OverflowAtEndMakesContinuations) {
    auto d = doc_with_figures(5, {1, 2, 3, 4, 4});
    auto r = build_interleaved(d, {10, 0, {}});
    check_invariants(r);
    ASSERT_EQ(r.units.size(), 3u);
    EXPECT_EQ(r.units[1].unit_id, "doc#c0000+1");
    EXPECT_EQ(r.units[1].text, r.units[0].text);
}

TEST(Interleaved, ImageMultisetEqualsFiguresOnly) {
    std::mt19937_64 rng(9);
    for (int t = 0; t < 100; ++t) {
        std::size_t n = 1 + rng() % 60;
        std::vector<std::size_t> at, per;
        std::size_t nf = rng() % 8;
        for (std::size_t f = 0; f < nf; ++f) {
            at.push_back(rng() % (n + 5));
            per.push_back(1 + rng() % 2);
        }
        std::sort(at.begin(), at.end());
        auto d = doc_with_figures(n, at, per);
        ChunkOptions o{1 + rng() % 12, 0, {}};
        auto inter = build_interleaved(d, o);
        auto figs = build_figures_only(d);
        check_invariants(inter);
        std::multiset<std::string> a, b;
        for (const auto& u : inter.units)
            for (const auto& im : u.images) a.insert(im.source);
        for (const auto& u : figs.units)
            for (const auto& im : u.images) b.insert(im.source);
        EXPECT_EQ(a, b);
        EXPECT_EQ(build_interleaved(d, o).units, inter.units);
    }
}

TEST(CaptionFile, RoundTripAndUnitIdColumn) {
    TempDir dir;
    std::map<std::string, CaptionMap> caps{{"a", {{"fig000", "x y"}}}, {"b", {{"fig002", "z"}}}};
    save_caption_file(dir / "c.tsv", caps);
    EXPECT_EQ(load_caption_file(dir / "c.tsv"), caps);
    write_file(dir / "u.tsv", "a\ta#fig003-0\tunit form\n");
    EXPECT_EQ(load_caption_file(dir / "u.tsv")["a"]["fig003"], "unit form");
    write_file(dir / "bad.tsv", "only one field\n");
    EXPECT_THROW(load_caption_file(dir / "bad.tsv"), Error);
}

TEST(Pages, LoadInOrder) {
    TempDir dir;
    for (int p = 1; p <= 3; ++p) {
        auto png = image::make_png({2, 2}, static_cast<std::uint8_t>(p));
        char name[32];
        std::snprintf(name, sizeof name, "page-%04d.png", p);
        write_file(dir / name, std::string(png.begin(), png.end()));
    }
    auto pages = load_page_images(dir.path());
    ASSERT_EQ(pages.size(), 3u);
    EXPECT_EQ(pages[2], image::make_png({2, 2}, 3));
}

TEST(Pages, RenderCommandTemplate) {
    auto png = image::make_png({2, 2}, 9);
    TempDir dir;
    write_file(dir / "p.png", std::string(png.begin(), png.end()));
    auto pages = render_pages("cp " + (dir / "p.png").string() + " {out}/page-0001.png", "\\documentclass{article}");
    ASSERT_EQ(pages.size(), 1u);
    EXPECT_EQ(pages[0], png);
}

}  // namespace
}  // namespace texdr
