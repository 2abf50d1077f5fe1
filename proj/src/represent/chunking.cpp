// Copyright 2026 The texdr Authors
// SPDX-License-Identifier: Apache-2.0

#include "texdr/error.hpp"
#include "texdr/representations.hpp"
#include "texdr/text.hpp"

namespace texdr {

std::vector<Chunk> chunk_text(std::string_view text, const ChunkOptions& options, std::string_view doc_id) {
    if (options.chunk_size < 1) throw Error(ErrorCode::kInvalidArgument, "chunk_size must be >= 1");
    if (options.overlap >= options.chunk_size)
        throw Error(ErrorCode::kInvalidArgument, "overlap must be smaller than chunk_size");

    const auto spans = text::token_spans(text);
    const std::size_t n = spans.size();
    auto cost = [&](std::size_t k) -> std::size_t {
        if (!options.token_cost) return 1;
        return options.token_cost(text.substr(spans[k].begin, spans[k].end - spans[k].begin));
    };

    std::vector<Chunk> chunks;
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        std::size_t used = 0;
        while (j < n) {
            std::size_t c = cost(j);
            if (j > i && used + c > options.chunk_size) break;
            used += c;
            ++j;
        }
        Chunk chunk;
        chunk.doc_id = std::string(doc_id);
        chunk.index = chunks.size();
        chunk.token_count = used;
        chunk.begin = spans[i].begin;
        chunk.end = spans[j - 1].end;
        for (std::size_t k = i; k < j; ++k) {
            if (k > i) chunk.text.push_back(' ');
            chunk.text.append(text.substr(spans[k].begin, spans[k].end - spans[k].begin));
        }
        chunks.push_back(std::move(chunk));
        if (j == n) break;
        std::size_t next = j - std::min(options.overlap, j - i);
        i = next > i ? next : i + 1;
    }
    return chunks;
}

}  // namespace texdr
