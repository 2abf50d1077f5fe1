// Copyright 2026 The texdr Authors
// SPDX-License-Identifier: Apache-2.0

#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iterator>

#include <unistd.h>

#include "texdr/error.hpp"
#include "texdr/image.hpp"
#include "texdr/latex.hpp"
#include "texdr/text.hpp"

namespace texdr::latex {

std::string_view to_string(AssetFormat f) noexcept {
    switch (f) {
        case AssetFormat::kPng: return "png";
        case AssetFormat::kJpeg: return "jpg";
        case AssetFormat::kPdf: return "pdf";
        case AssetFormat::kEps: return "eps";
        case AssetFormat::kUnknown: break;
    }
    return "unknown";
}

namespace {

namespace fs = std::filesystem;

AssetFormat format_of(std::string_view path) {
    auto dot = path.rfind('.');
    if (dot == std::string_view::npos) return AssetFormat::kUnknown;
    std::string ext = text::to_lower(path.substr(dot + 1));
    if (ext == "png") return AssetFormat::kPng;
    if (ext == "jpg" || ext == "jpeg") return AssetFormat::kJpeg;
    if (ext == "pdf") return AssetFormat::kPdf;
    if (ext == "eps" || ext == "ps") return AssetFormat::kEps;
    return AssetFormat::kUnknown;
}

std::optional<std::string> find_asset(const LatexProject& project, std::string_view ref) {
    std::string base;
    try {
        base = normalize_path(ref);
    } catch (const Error&) {
        return std::nullopt;
    }
    for (const char* ext : {"", ".png", ".jpg", ".jpeg", ".pdf", ".eps"}) {
        std::string candidate = base + ext;
        if (project.assets.contains(candidate)) return candidate;
    }
    return std::nullopt;
}

std::string replace_all(std::string s, std::string_view from, const std::string& to) {
    for (std::size_t pos = 0; (pos = s.find(from, pos)) != std::string::npos; pos += to.size())
        s.replace(pos, from.size(), to);
    return s;
}

// Runs the converter template with {in}, {out} and {out_stem} substituted.
std::optional<Blob> run_converter(const std::string& command, const Blob& input, AssetFormat format) {
    static std::atomic<unsigned> counter{0};
    fs::path dir = fs::temp_directory_path() /
                   ("texdr-conv-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    fs::create_directories(dir);
    fs::path in = dir / (std::string("in.") + std::string(to_string(format)));
    fs::path out = dir / "out.png";
    {
        std::ofstream f(in, std::ios::binary);
        f.write(reinterpret_cast<const char*>(input.data()), static_cast<std::streamsize>(input.size()));
    }
    std::string cmd = replace_all(command, "{in}", "'" + in.string() + "'");
    cmd = replace_all(cmd, "{out_stem}", "'" + (dir / "out").string() + "'");
    cmd = replace_all(cmd, "{out}", "'" + out.string() + "'");
    int rc = std::system(cmd.c_str());
    std::optional<Blob> result;
    if (rc == 0 && fs::exists(out)) {
        std::ifstream f(out, std::ios::binary);
        result = Blob(std::istreambuf_iterator<char>(f), {});
    }
    std::error_code ec;
    fs::remove_all(dir, ec);
    return result;
}

}  // namespace

std::vector<ResolvedAsset> resolve_assets(const LatexProject& project, const DocumentStructure& structure,
                                          const AssetOptions& options, Diagnostics* diag) {
    std::vector<ResolvedAsset> out;
    for (std::size_t f = 0; f < structure.figures.size(); ++f) {
        const auto& fig = structure.figures[f];
        for (std::size_t a = 0; a < fig.asset_refs.size(); ++a) {
            ResolvedAsset r;
            r.figure_index = f;
            r.asset_index = a;
            r.ref = fig.asset_refs[a];
            auto path = find_asset(project, r.ref);
            if (!path) {
                r.status = AssetStatus::kMissing;
                if (diag) diag->add("asset_missing", r.ref);
                out.push_back(std::move(r));
                continue;
            }
            r.path = *path;
            r.source_format = format_of(*path);
            const Blob& bytes = project.assets.at(*path);
            r.needs_conversion = r.source_format == AssetFormat::kPdf || r.source_format == AssetFormat::kEps;
            r.status = AssetStatus::kResolved;
            if (r.needs_conversion) {
                std::optional<Blob> png;
                if (!options.converter_command.empty())
                    png = run_converter(options.converter_command, bytes, r.source_format);
                if (png) {
                    r.png = std::move(*png);
                } else {
                    r.status = AssetStatus::kConversionFailed;
                    if (diag)
                        diag->add("conversion_failed", r.path + (options.converter_command.empty()
                                                                     ? " (no converter configured)"
                                                                     : ""));
                }
            } else if (r.source_format == AssetFormat::kPng || !options.transcode_raster) {
                r.png = bytes;
            } else {
                try {
                    r.png = image::to_png(bytes);
                } catch (const Error& e) {
                    r.status = AssetStatus::kConversionFailed;
                    if (diag) diag->add("conversion_failed", r.path + ": " + e.what());
                }
            }
            out.push_back(std::move(r));
        }
    }
    return out;
}

}  // namespace texdr::latex
