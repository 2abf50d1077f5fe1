// Copyright 2026 The texdr Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <array>
#include <cstring>
#include <fstream>
#include <iterator>

#include <json.hpp>
#include <zlib.h>

#include "texdr/document.hpp"
#include "texdr/error.hpp"
#include "texdr/text.hpp"

namespace texdr {

namespace fs = std::filesystem;
using nlohmann::json;

IngestedDocument ingest(std::string doc_id, const latex::LatexProject& project, const IngestOptions& options) {
    IngestedDocument doc;
    doc.doc_id = std::move(doc_id);
    doc.flat = latex::flatten(project, options.flatten, &doc.diagnostics);
    doc.normalized = latex::normalize(doc.flat, options.policy, &doc.diagnostics);
    doc.structure = latex::extract_structure(doc.flat, doc.normalized, &doc.diagnostics);
    doc.assets = latex::resolve_assets(project, doc.structure, options.assets, &doc.diagnostics);
    return doc;
}

namespace corpus {
namespace {

enum class Kind { kText, kAsset, kIgnored };

Kind classify(std::string_view path) {
    auto dot = path.rfind('.');
    if (dot == std::string_view::npos) return Kind::kIgnored;
    std::string ext = text::to_lower(path.substr(dot + 1));
    for (const char* t : {"tex", "sty", "cls", "bbl", "bib", "txt", "def", "cfg", "clo", "ltx"})
        if (ext == t) return Kind::kText;
    for (const char* a : {"png", "jpg", "jpeg", "pdf", "eps", "ps"})
        if (ext == a) return Kind::kAsset;
    return Kind::kIgnored;
}

void add_member(latex::LatexProject& project, std::string_view raw_path, std::string data) {
    std::string path;
    try {
        path = latex::normalize_path(raw_path);
    } catch (const Error&) {
        return;
    }
    switch (classify(path)) {
        case Kind::kText: project.files[path] = std::move(data); break;
        case Kind::kAsset: project.assets[path] = latex::Blob(data.begin(), data.end()); break;
        case Kind::kIgnored: break;
    }
}

std::string read_file(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    if (!f) throw Error(ErrorCode::kIo, "cannot read " + p.string());
    return std::string(std::istreambuf_iterator<char>(f), {});
}

std::string gunzip_file(const fs::path& p) {
    gzFile gz = gzopen(p.string().c_str(), "rb");
    if (!gz) throw Error(ErrorCode::kIo, "cannot open " + p.string());
    std::string out;
    std::array<char, 1 << 16> buf;
    int n;
    while ((n = gzread(gz, buf.data(), static_cast<unsigned>(buf.size()))) > 0) out.append(buf.data(), n);
    int err = 0;
    const char* msg = gzerror(gz, &err);
    std::string message = msg ? msg : "";
    gzclose(gz);
    if (n < 0 || (err != Z_OK && err != Z_STREAM_END))
        throw Error(ErrorCode::kIo, "gzip error in " + p.string() + ": " + message);
    return out;
}

std::uint64_t octal(const char* p, std::size_t n) {
    std::uint64_t v = 0;
    for (std::size_t i = 0; i < n && p[i]; ++i) {
        if (p[i] == ' ') continue;
        if (p[i] < '0' || p[i] > '7') break;
        v = v * 8 + static_cast<std::uint64_t>(p[i] - '0');
    }
    return v;
}

std::string cstr(const char* p, std::size_t n) { return std::string(p, strnlen(p, n)); }

// Header checksum: byte sum with the checksum field itself read as spaces.
bool looks_like_tar(std::string_view data) {
    if (data.size() < 512) return false;
    std::uint64_t sum = 0;
    for (std::size_t i = 0; i < 512; ++i)
        sum += (i >= 148 && i < 156) ? 0x20u : static_cast<unsigned char>(data[i]);
    return sum != 8 * 0x20u && sum == octal(data.data() + 148, 8);
}

void parse_tar(std::string_view data, latex::LatexProject& project) {
    std::size_t off = 0;
    std::string long_name;
    while (off + 512 <= data.size()) {
        const char* h = data.data() + off;
        if (std::all_of(h, h + 512, [](char c) { return c == 0; })) break;
        std::string name = cstr(h, 100);
        if (std::string_view(h + 257, 5) == "ustar") {
            std::string prefix = cstr(h + 345, 155);
            if (!prefix.empty()) name = prefix + "/" + name;
        }
        const std::uint64_t size = octal(h + 124, 12);
        const char type = h[156];
        off += 512;
        if (off + size > data.size()) throw Error(ErrorCode::kIo, "truncated tar member " + name);
        std::string_view body = data.substr(off, size);
        off += (size + 511) / 512 * 512;
        if (type == 'L') {
            long_name = cstr(body.data(), body.size());
            continue;
        }
        if (type == 'x') {
            // pax header: "<len> path=<value>\n" records
            for (std::size_t p = 0; p < body.size();) {
                auto sp = body.find(' ', p);
                if (sp == std::string_view::npos) break;
                std::size_t len = std::strtoul(std::string(body.substr(p, sp - p)).c_str(), nullptr, 10);
                if (len == 0) break;
                auto rec = body.substr(sp + 1, len - (sp - p) - 2);
                if (rec.starts_with("path=")) long_name = std::string(rec.substr(5));
                p += len;
            }
            continue;
        }
        if (!long_name.empty()) {
            name = long_name;
            long_name.clear();
        }
        if (type == '0' || type == '\0') add_member(project, name, std::string(body));
    }
}

}  // namespace

std::string find_root(const std::map<std::string, std::string>& files) {
    auto has_documentclass = [](std::string_view s) {
        std::size_t pos = 0;
        while ((pos = s.find("\\documentclass", pos)) != std::string_view::npos) {
            std::size_t line = s.rfind('\n', pos);
            line = line == std::string_view::npos ? 0 : line + 1;
            bool commented = false;
            for (std::size_t i = line; i < pos; ++i) {
                if (s[i] == '\\') {
                    ++i;
                } else if (s[i] == '%') {
                    commented = true;
                    break;
                }
            }
            if (!commented) return true;
            pos += 14;
        }
        return false;
    };
    std::vector<std::string> tex;
    std::vector<std::string> candidates;
    for (const auto& [path, content] : files) {
        if (!path.ends_with(".tex")) continue;
        tex.push_back(path);
        if (has_documentclass(content)) candidates.push_back(path);
    }
    if (candidates.empty()) {
        if (tex.size() == 1) return tex.front();
        throw Error(ErrorCode::kNoRootFile, "no file with \\documentclass");
    }
    auto rank = [](const std::string& p) {
        const auto depth = std::count(p.begin(), p.end(), '/');
        const std::string leaf = p.substr(p.rfind('/') == std::string::npos ? 0 : p.rfind('/') + 1);
        const int preferred = leaf == "main.tex" ? 0 : leaf == "ms.tex" ? 1 : 2;
        return std::tuple(depth, preferred, p);
    };
    return *std::min_element(candidates.begin(), candidates.end(),
                             [&](const auto& a, const auto& b) { return rank(a) < rank(b); });
}

std::vector<Entry> list(const fs::path& root) {
    if (!fs::is_directory(root)) throw Error(ErrorCode::kIo, "corpus root is not a directory: " + root.string());
    std::vector<Entry> out;
    for (const auto& e : fs::directory_iterator(root)) {
        std::string name = e.path().filename().string();
        if (name.starts_with(".")) continue;
        if (e.is_directory()) {
            out.push_back({name, e.path()});
        } else if (e.is_regular_file()) {
            for (const char* suffix : {".tar.gz", ".tgz", ".gz"}) {
                if (name.ends_with(suffix)) {
                    out.push_back({name.substr(0, name.size() - std::strlen(suffix)), e.path()});
                    break;
                }
            }
        }
    }
    std::sort(out.begin(), out.end(), [](const Entry& a, const Entry& b) { return a.doc_id < b.doc_id; });
    return out;
}

latex::LatexProject load_directory(const fs::path& dir) {
    latex::LatexProject project;
    std::vector<fs::path> paths;
    for (const auto& e : fs::recursive_directory_iterator(dir))
        if (e.is_regular_file()) paths.push_back(e.path());
    std::sort(paths.begin(), paths.end());
    for (const auto& p : paths) add_member(project, fs::relative(p, dir).generic_string(), read_file(p));
    project.root_file = find_root(project.files);
    return project;
}

latex::LatexProject load_tarball(const fs::path& file) {
    latex::LatexProject project;
    std::string data = gunzip_file(file);
    if (looks_like_tar(data)) {
        parse_tar(data, project);
    } else {
        project.files["main.tex"] = std::move(data);
    }
    project.root_file = find_root(project.files);
    return project;
}

latex::LatexProject load_project(const Entry& entry) {
    return fs::is_directory(entry.path) ? load_directory(entry.path) : load_tarball(entry.path);
}

}  // namespace corpus

// ---------------------------------------------------------------------------
// on-disk store of ingested documents

namespace store {
namespace {

void write_text(const fs::path& p, std::string_view content) {
    std::ofstream f(p, std::ios::binary);
    if (!f) throw Error(ErrorCode::kIo, "cannot write " + p.string());
    f.write(content.data(), static_cast<std::streamsize>(content.size()));
}

std::string read_text(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    if (!f) throw Error(ErrorCode::kIo, "cannot read " + p.string());
    return std::string(std::istreambuf_iterator<char>(f), {});
}

std::string asset_filename(const latex::ResolvedAsset& a) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "fig%03zu-%zu.png", a.figure_index, a.asset_index);
    return buf;
}

latex::AssetFormat parse_format(std::string_view s) {
    for (auto f : {latex::AssetFormat::kPng, latex::AssetFormat::kJpeg, latex::AssetFormat::kPdf,
                   latex::AssetFormat::kEps})
        if (latex::to_string(f) == s) return f;
    return latex::AssetFormat::kUnknown;
}

std::string_view status_name(latex::AssetStatus s) {
    switch (s) {
        case latex::AssetStatus::kResolved: return "resolved";
        case latex::AssetStatus::kMissing: return "missing";
        case latex::AssetStatus::kConversionFailed: return "conversion_failed";
    }
    return "missing";
}

latex::AssetStatus parse_status(std::string_view s) {
    if (s == "resolved") return latex::AssetStatus::kResolved;
    if (s == "conversion_failed") return latex::AssetStatus::kConversionFailed;
    return latex::AssetStatus::kMissing;
}

}  // namespace

void save(const IngestedDocument& doc, const fs::path& dir) {
    fs::create_directories(dir / "assets");
    write_text(dir / "flat.tex", doc.flat.text);
    write_text(dir / "normalized.txt", doc.normalized);

    json origin = json::array();
    for (const auto& s : doc.flat.origin_map)
        origin.push_back({{"out", {s.out_begin, s.out_end}}, {"file", s.file}, {"src", {s.src_begin, s.src_end}}});
    write_text(dir / "origin.json", origin.dump(1) + "\n");

    json st;
    st["doc_id"] = doc.doc_id;
    st["sections"] = json::array();
    for (const auto& s : doc.structure.sections)
        st["sections"].push_back({{"level", s.level}, {"title", s.title}, {"begin", s.begin}, {"end", s.end}});
    st["figures"] = json::array();
    for (const auto& f : doc.structure.figures) {
        json jf{{"caption", f.caption}, {"asset_refs", f.asset_refs}, {"anchor", f.anchor}, {"synthetic", f.synthetic}};
        jf["label"] = f.label ? json(*f.label) : json(nullptr);
        st["figures"].push_back(std::move(jf));
    }
    st["tables"] = json::array();
    for (const auto& t : doc.structure.tables) st["tables"].push_back({{"text", t.text}, {"anchor", t.anchor}});
    write_text(dir / "structure.json", st.dump(1) + "\n");

    json assets = json::array();
    for (const auto& a : doc.assets) {
        json ja{{"figure", a.figure_index}, {"asset", a.asset_index},  {"ref", a.ref},
                {"path", a.path},           {"format", latex::to_string(a.source_format)},
                {"needs_conversion", a.needs_conversion}, {"status", status_name(a.status)}};
        if (a.embeddable()) {
            ja["file"] = "assets/" + asset_filename(a);
            write_text(dir / "assets" / asset_filename(a),
                       std::string_view(reinterpret_cast<const char*>(a.png.data()), a.png.size()));
        }
        assets.push_back(std::move(ja));
    }
    write_text(dir / "assets.json", assets.dump(1) + "\n");

    json diag = json::array();
    for (const auto& d : doc.diagnostics.items()) diag.push_back({{"kind", d.kind}, {"message", d.message}});
    write_text(dir / "diagnostics.json", diag.dump(1) + "\n");
}

IngestedDocument load(const fs::path& dir) {
    IngestedDocument doc;
    try {
        json st = json::parse(read_text(dir / "structure.json"));
        doc.doc_id = st.at("doc_id").get<std::string>();
        doc.flat.text = read_text(dir / "flat.tex");
        doc.normalized = read_text(dir / "normalized.txt");
        for (const auto& o : json::parse(read_text(dir / "origin.json")))
            doc.flat.origin_map.push_back({o["out"][0], o["out"][1], o["file"], o["src"][0], o["src"][1]});
        for (const auto& s : st.at("sections"))
            doc.structure.sections.push_back({s["level"], s["title"], s["begin"], s["end"]});
        for (const auto& f : st.at("figures")) {
            latex::FigureBlock fig;
            fig.caption = f["caption"];
            fig.asset_refs = f["asset_refs"].get<std::vector<std::string>>();
            fig.anchor = f["anchor"];
            fig.synthetic = f["synthetic"];
            if (!f["label"].is_null()) fig.label = f["label"].get<std::string>();
            doc.structure.figures.push_back(std::move(fig));
        }
        for (const auto& t : st.at("tables")) doc.structure.tables.push_back({t["text"], t["anchor"]});
        for (const auto& a : json::parse(read_text(dir / "assets.json"))) {
            latex::ResolvedAsset r;
            r.figure_index = a["figure"];
            r.asset_index = a["asset"];
            r.ref = a["ref"];
            r.path = a["path"];
            r.source_format = parse_format(a["format"].get<std::string>());
            r.needs_conversion = a["needs_conversion"];
            r.status = parse_status(a["status"].get<std::string>());
            if (a.contains("file")) {
                std::string bytes = read_text(dir / a["file"].get<std::string>());
                r.png.assign(bytes.begin(), bytes.end());
            }
            doc.assets.push_back(std::move(r));
        }
        if (fs::exists(dir / "diagnostics.json"))
            for (const auto& d : json::parse(read_text(dir / "diagnostics.json"))) doc.diagnostics.add(d["kind"], d["message"]);
    } catch (const json::exception& e) {
        throw Error(ErrorCode::kIo, "malformed ingested document in " + dir.string() + ": " + e.what());
    }
    return doc;
}

std::vector<IngestedDocument> load_all(const fs::path& root) {
    std::vector<fs::path> dirs;
    for (const auto& e : fs::directory_iterator(root))
        if (e.is_directory() && fs::exists(e.path() / "structure.json")) dirs.push_back(e.path());
    std::vector<IngestedDocument> docs;
    for (const auto& d : dirs) docs.push_back(load(d));
    std::sort(docs.begin(), docs.end(), [](const auto& a, const auto& b) { return a.doc_id < b.doc_id; });
    return docs;
}

}  // namespace store
}  // namespace texdr
