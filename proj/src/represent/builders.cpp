// Copyright 2026 The texdr Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iterator>

#include <unistd.h>

#include "texdr/error.hpp"
#include "texdr/representations.hpp"
#include "texdr/text.hpp"

namespace texdr {

namespace fs = std::filesystem;

std::string_view to_string(RepresentationKind kind) noexcept {
    switch (kind) {
        case RepresentationKind::kTextOnly: return "text";
        case RepresentationKind::kTextPlusCaptions: return "text+captions";
        case RepresentationKind::kFiguresOnly: return "figures";
        case RepresentationKind::kDocAsImage: return "doc-image";
        case RepresentationKind::kInterleaved: return "interleaved";
    }
    return "text";
}

std::optional<RepresentationKind> parse_representation(std::string_view s) noexcept {
    for (auto k : {RepresentationKind::kTextOnly, RepresentationKind::kTextPlusCaptions,
                   RepresentationKind::kFiguresOnly, RepresentationKind::kDocAsImage,
                   RepresentationKind::kInterleaved})
        if (to_string(k) == s) return k;
    return std::nullopt;
}

std::string_view to_string(UnitKind kind) noexcept {
    switch (kind) {
        case UnitKind::kTextChunk: return "text_chunk";
        case UnitKind::kFigure: return "figure";
        case UnitKind::kPageImage: return "page_image";
        case UnitKind::kInterleaved: return "interleaved";
    }
    return "text_chunk";
}

void validate(const EmbeddingUnit& unit) {
    auto fail = [&](const char* why) {
        throw Error(ErrorCode::kInvalidArgument, unit.unit_id + ": " + why);
    };
    switch (unit.kind) {
        case UnitKind::kTextChunk:
            if (!unit.images.empty()) fail("text chunk carries images");
            break;
        case UnitKind::kFigure:
        case UnitKind::kPageImage:
            if (unit.images.size() != 1) fail("image unit must carry exactly one image");
            if (!unit.text.empty()) fail("image unit carries text");
            break;
        case UnitKind::kInterleaved:
            if (unit.text.empty()) fail("interleaved unit without text");
            if (unit.images.empty() || unit.images.size() > 2) fail("interleaved unit needs one or two images");
            break;
    }
}

namespace {

std::string format_id(const char* fmt, std::string_view doc_id, std::size_t a, std::size_t b = 0) {
    char buf[48];
    std::snprintf(buf, sizeof buf, fmt, a, b);
    return std::string(doc_id) + buf;
}

std::vector<EmbeddingUnit> text_units(std::string_view doc_id, const std::vector<Chunk>& chunks) {
    std::vector<EmbeddingUnit> units;
    units.reserve(chunks.size());
    for (const auto& c : chunks)
        units.push_back({std::string(doc_id), chunk_unit_id(doc_id, c.index), UnitKind::kTextChunk, c.text, {}});
    return units;
}

}  // namespace

std::string figure_id(std::size_t figure_index) {
    char buf[24];
    std::snprintf(buf, sizeof buf, "fig%03zu", figure_index);
    return buf;
}

std::string chunk_unit_id(std::string_view doc_id, std::size_t chunk_index) {
    return format_id("#c%04zu", doc_id, chunk_index);
}

std::string figure_unit_id(std::string_view doc_id, std::size_t figure_index, std::size_t asset_index) {
    return format_id("#fig%03zu-%zu", doc_id, figure_index, asset_index);
}

std::string page_unit_id(std::string_view doc_id, std::size_t page_number) {
    return format_id("#p%04zu", doc_id, page_number);
}

BuildResult build_text_only(const IngestedDocument& doc, const ChunkOptions& options) {
    BuildResult r;
    r.units = text_units(doc.doc_id, chunk_text(doc.normalized, options, doc.doc_id));
    if (r.units.empty()) {
        r.representable = false;
        r.diagnostics.add("empty_document", doc.doc_id);
    }
    return r;
}

std::string text_with_captions(const IngestedDocument& doc, const CaptionMap& captions) {
    std::string text = doc.normalized;
    for (std::size_t f = 0; f < doc.structure.figures.size(); ++f) {
        auto it = captions.find(figure_id(f));
        if (it == captions.end() || text::trim(it->second).empty()) continue;
        text += "\n\n";
        text += it->second;
    }
    return text;
}

BuildResult build_text_plus_captions(const IngestedDocument& doc, const CaptionMap& captions,
                                     const ChunkOptions& options) {
    BuildResult r;
    r.units = text_units(doc.doc_id, chunk_text(text_with_captions(doc, captions), options, doc.doc_id));
    std::size_t missing = 0;
    for (std::size_t f = 0; f < doc.structure.figures.size(); ++f)
        if (!captions.contains(figure_id(f))) ++missing;
    if (missing) r.diagnostics.add("captions_missing", doc.doc_id + ": " + std::to_string(missing));
    if (r.units.empty()) {
        r.representable = false;
        r.diagnostics.add("empty_document", doc.doc_id);
    }
    return r;
}

BuildResult build_figures_only(const IngestedDocument& doc) {
    BuildResult r;
    for (std::size_t f = 0; f < doc.structure.figures.size(); ++f)
        if (doc.structure.figures[f].synthetic) r.diagnostics.add("synthetic_figure", doc.doc_id + "#" + figure_id(f));
    for (const auto& a : doc.assets) {
        if (!a.embeddable()) {
            r.diagnostics.add("unembeddable_asset", doc.doc_id + ": " + a.ref);
            continue;
        }
        std::string id = figure_unit_id(doc.doc_id, a.figure_index, a.asset_index);
        r.units.push_back({doc.doc_id, id, UnitKind::kFigure, {}, {ImageBlob{id, a.png}}});
    }
    if (r.units.empty()) {
        r.representable = false;
        r.diagnostics.add("no_figures", doc.doc_id);
    }
    return r;
}

BuildResult build_doc_as_image(const IngestedDocument& doc, const std::vector<image::Blob>& pages) {
    if (pages.empty()) throw Error(ErrorCode::kEmptyPages, doc.doc_id);
    BuildResult r;
    for (std::size_t p = 0; p < pages.size(); ++p) {
        std::string id = page_unit_id(doc.doc_id, p + 1);
        r.units.push_back({doc.doc_id, id, UnitKind::kPageImage, {}, {ImageBlob{id, pages[p]}}});
    }
    return r;
}

BuildResult build_interleaved(const IngestedDocument& doc, const ChunkOptions& options) {
    BuildResult r;
    const auto chunks = chunk_text(doc.normalized, options, doc.doc_id);

    struct Pending {
        std::size_t anchor;
        std::size_t order;  // document order, breaks distance ties
        std::size_t figure_index;
        ImageBlob image;
    };
    std::vector<Pending> items;
    for (const auto& a : doc.assets) {
        if (!a.embeddable()) continue;
        std::string id = figure_unit_id(doc.doc_id, a.figure_index, a.asset_index);
        items.push_back({doc.structure.figures.at(a.figure_index).anchor, items.size(), a.figure_index, ImageBlob{id, a.png}});
    }

    if (chunks.empty()) {
        if (!items.empty()) {
            // No text to attach to: fall back to the figure captions as unit text.
            for (auto& it : items) {
                const auto& fig = doc.structure.figures.at(it.figure_index);
                std::string text = fig.caption.empty() ? it.image.source : fig.caption;
                r.units.push_back({doc.doc_id, it.image.source, UnitKind::kInterleaved, text, {it.image}});
            }
            r.diagnostics.add("no_text_for_figures", doc.doc_id);
        } else {
            r.representable = false;
            r.diagnostics.add("empty_document", doc.doc_id);
        }
        return r;
    }

    // Chunk holding each anchor: first chunk whose span ends after it.
    std::vector<std::vector<Pending>> attached(chunks.size());
    for (auto& it : items) {
        std::size_t c = 0;
        while (c + 1 < chunks.size() && it.anchor >= chunks[c].end) ++c;
        attached[c].push_back(std::move(it));
    }

    auto distance = [](const Chunk& c, std::size_t anchor) -> std::size_t {
        if (anchor < c.begin) return c.begin - anchor;
        if (anchor >= c.end) return anchor - c.end + 1;
        return 0;
    };
    auto keep_nearest = [&](const Chunk& c, std::vector<Pending>& pend) {
        std::stable_sort(pend.begin(), pend.end(), [&](const Pending& a, const Pending& b) {
            auto da = distance(c, a.anchor), db = distance(c, b.anchor);
            return da != db ? da < db : a.order < b.order;
        });
    };
    auto make_unit = [&](const Chunk& c, std::string id, std::vector<Pending> imgs) {
        std::sort(imgs.begin(), imgs.end(), [](const Pending& a, const Pending& b) { return a.order < b.order; });
        EmbeddingUnit u{doc.doc_id, std::move(id), imgs.empty() ? UnitKind::kTextChunk : UnitKind::kInterleaved,
                        c.text, {}};
        for (auto& p : imgs) u.images.push_back(std::move(p.image));
        return u;
    };

    std::vector<Pending> carry;
    for (std::size_t c = 0; c < chunks.size(); ++c) {
        std::vector<Pending> pend = std::move(carry);
        carry.clear();
        for (auto& p : attached[c]) pend.push_back(std::move(p));
        keep_nearest(chunks[c], pend);
        const bool last = c + 1 == chunks.size();
        std::vector<Pending> here;
        for (std::size_t k = 0; k < pend.size(); ++k) {
            if (k < 2) {
                here.push_back(std::move(pend[k]));
            } else {
                carry.push_back(std::move(pend[k]));
            }
        }
        if (!carry.empty() && !last) r.diagnostics.add("figure_spill", chunk_unit_id(doc.doc_id, c));
        r.units.push_back(make_unit(chunks[c], chunk_unit_id(doc.doc_id, c), std::move(here)));
        if (last) {
            std::sort(carry.begin(), carry.end(), [](const Pending& a, const Pending& b) { return a.order < b.order; });
            for (std::size_t k = 0, part = 1; k < carry.size(); k += 2, ++part) {
                std::vector<Pending> two;
                for (std::size_t m = k; m < std::min(k + 2, carry.size()); ++m) two.push_back(std::move(carry[m]));
                r.units.push_back(make_unit(chunks[c], chunk_unit_id(doc.doc_id, c) + "+" + std::to_string(part),
                                            std::move(two)));
                r.diagnostics.add("figure_overflow", chunk_unit_id(doc.doc_id, c));
            }
        }
    }
    return r;
}

// ---------------------------------------------------------------------------
// caption files and page images

std::map<std::string, CaptionMap> load_caption_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::kIo, "cannot read caption file " + path.string());
    std::map<std::string, CaptionMap> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto t1 = line.find('\t');
        auto t2 = t1 == std::string::npos ? t1 : line.find('\t', t1 + 1);
        if (t2 == std::string::npos)
            throw Error(ErrorCode::kInvalidArgument, path.string() + ":" + std::to_string(line_no) + ": expected 3 fields");
        std::string doc = line.substr(0, t1);
        std::string fig = line.substr(t1 + 1, t2 - t1 - 1);
        if (auto hash = fig.find('#'); hash != std::string::npos) fig = fig.substr(hash + 1);
        if (auto dash = fig.find('-'); dash != std::string::npos) fig = fig.substr(0, dash);
        out[doc][fig] = line.substr(t2 + 1);
    }
    return out;
}

void save_caption_file(const fs::path& path, const std::map<std::string, CaptionMap>& captions) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::kIo, "cannot write caption file " + path.string());
    for (const auto& [doc, caps] : captions)
        for (const auto& [fig, cap] : caps) out << doc << '\t' << fig << '\t' << cap << '\n';
}

std::vector<image::Blob> load_page_images(const fs::path& dir) {
    std::vector<image::Blob> pages;
    for (std::size_t p = 1;; ++p) {
        char name[32];
        std::snprintf(name, sizeof name, "page-%04zu.png", p);
        std::ifstream in(dir / name, std::ios::binary);
        if (!in) break;
        pages.emplace_back(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
    }
    return pages;
}

std::vector<image::Blob> render_pages(const std::string& command, std::string_view latex_source) {
    static std::atomic<unsigned> counter{0};
    fs::path dir = fs::temp_directory_path() /
                   ("texdr-render-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    fs::create_directories(dir / "pages");
    {
        std::ofstream f(dir / "doc.tex", std::ios::binary);
        f.write(latex_source.data(), static_cast<std::streamsize>(latex_source.size()));
    }
    std::string cmd = command;
    auto subst = [&](std::string_view key, const std::string& value) {
        for (std::size_t pos = 0; (pos = cmd.find(key, pos)) != std::string::npos; pos += value.size())
            cmd.replace(pos, key.size(), value);
    };
    subst("{in}", "'" + (dir / "doc.tex").string() + "'");
    subst("{out}", "'" + (dir / "pages").string() + "'");
    const int rc = std::system(cmd.c_str());
    std::vector<image::Blob> pages;
    if (rc == 0) pages = load_page_images(dir / "pages");
    std::error_code ec;
    fs::remove_all(dir, ec);
    if (rc != 0) throw Error(ErrorCode::kIo, "render command failed with status " + std::to_string(rc));
    return pages;
}

}  // namespace texdr
