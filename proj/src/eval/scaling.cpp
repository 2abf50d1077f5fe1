// Copyright 2026 The texdr Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <random>

#include "texdr/error.hpp"
#include "texdr/evaluation.hpp"
#include "texdr/text.hpp"

namespace texdr {

using nlohmann::json;

namespace {

std::string join_tokens(const std::vector<std::string_view>& toks, std::size_t begin, std::size_t end) {
    return text::join({toks.begin() + static_cast<std::ptrdiff_t>(begin), toks.begin() + static_cast<std::ptrdiff_t>(end)},
                      " ");
}

}  // namespace

ScalingWindowSet build_scaling_windows(std::string_view flat_text, const ScalingOptions& options,
                                       std::string_view doc_id) {
    const auto& sizes = options.sizes;
    if (sizes.empty() || sizes.front() == 0) throw Error(ErrorCode::kInvalidArgument, "window sizes must be positive");
    if (!std::is_sorted(sizes.begin(), sizes.end()))
        throw Error(ErrorCode::kInvalidArgument, "window sizes must ascend");
    if (options.query_len == 0 || options.query_len > sizes.front())
        throw Error(ErrorCode::kInvalidArgument, "query length must fit in the base window");

    const auto toks = text::tokens(flat_text);
    const std::size_t n = toks.size();
    if (n < sizes.back())
        throw Error(ErrorCode::kTooShort, std::string(doc_id) + " has " + std::to_string(n) + " tokens, needs " +
                                              std::to_string(sizes.back()));

    std::mt19937_64 rng(options.seed);
    ScalingWindowSet set;
    set.doc_id = std::string(doc_id);
    set.seed = options.seed;

    const std::size_t base = sizes.front();
    std::size_t begin = static_cast<std::size_t>(rng() % (n - base + 1));
    std::size_t end = begin + base;
    set.query_begin = begin + static_cast<std::size_t>(rng() % (base - options.query_len + 1));
    set.query_end = set.query_begin + options.query_len;
    set.query = join_tokens(toks, set.query_begin, set.query_end);

    for (std::size_t size : sizes) {
        end = std::min(n, begin + size);
        if (end - begin < size) begin = end - size;
        set.windows.push_back({size, begin, end, join_tokens(toks, begin, end)});
    }
    return set;
}

std::string render_latex_snippet(std::string_view body) {
    std::string out =
        "\\documentclass{article}\n"
        "\\usepackage[T1]{fontenc}\n"
        "\\usepackage[margin=1in]{geometry}\n"
        "\\begin{document}\n";
    for (char c : body) {
        switch (c) {
            case '\\': out += "\\textbackslash{}"; break;
            case '{': out += "\\{"; break;
            case '}': out += "\\}"; break;
            case '$': out += "\\$"; break;
            case '&': out += "\\&"; break;
            case '#': out += "\\#"; break;
            case '_': out += "\\_"; break;
            case '%': out += "\\%"; break;
            case '^': out += "\\textasciicircum{}"; break;
            case '~': out += "\\textasciitilde{}"; break;
            default: out += c;
        }
    }
    out += "\n\\end{document}\n";
    return out;
}

json to_json(const ScalingWindowSet& set) {
    json windows = json::array();
    for (const auto& w : set.windows)
        windows.push_back({{"size", w.size}, {"begin", w.begin}, {"end", w.end}, {"text", w.text}});
    return json{{"doc_id", set.doc_id},
                {"seed", set.seed},
                {"query_begin", set.query_begin},
                {"query_end", set.query_end},
                {"query", set.query},
                {"windows", std::move(windows)}};
}

}  // namespace texdr
