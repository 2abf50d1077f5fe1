// Copyright 2026 The texdr Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <cmath>
#include <mutex>

#include "texdr/embedding.hpp"
#include "texdr/error.hpp"
#include "texdr/parallel.hpp"

namespace texdr {

bool compatible(UnitKind kind, Modality modality) noexcept {
    switch (kind) {
        case UnitKind::kTextChunk: return modality == Modality::kText || modality == Modality::kMultimodal;
        case UnitKind::kFigure:
        case UnitKind::kPageImage: return modality == Modality::kImage || modality == Modality::kMultimodal;
        case UnitKind::kInterleaved: return modality == Modality::kMultimodal;
    }
    return false;
}

image::Size resize_for_budget(std::uint32_t width, std::uint32_t height, std::uint64_t max_pixels) {
    if (width == 0 || height == 0 || max_pixels == 0)
        throw Error(ErrorCode::kInvalidArgument, "resize_for_budget needs positive sizes");
    const std::uint64_t area = std::uint64_t{width} * height;
    if (area <= max_pixels) return {width, height};
    const double scale = std::sqrt(static_cast<double>(max_pixels) / static_cast<double>(area));
    auto shrink = [scale](std::uint32_t side) {
        return std::clamp<std::uint64_t>(static_cast<std::uint64_t>(std::floor(side * scale)), 1, side);
    };
    std::uint64_t w = shrink(width), h = shrink(height);
    // A side clamped to 1 leaves room the other side must give back.
    if (w * h > max_pixels) {
        if (w == 1) h = std::max<std::uint64_t>(1, max_pixels);
        else if (h == 1) w = std::max<std::uint64_t>(1, max_pixels);
    }
    while (w * h > max_pixels) (w >= h ? w : h) -= 1;
    return {static_cast<std::uint32_t>(w), static_cast<std::uint32_t>(h)};
}

std::uint64_t estimate_visual_tokens(std::uint32_t width, std::uint32_t height, std::uint32_t patch_size) {
    if (patch_size == 0) throw Error(ErrorCode::kInvalidArgument, "patch_size must be positive");
    auto ceil_div = [](std::uint64_t a, std::uint64_t b) { return (a + b - 1) / b; };
    return ceil_div(width, patch_size) * ceil_div(height, patch_size);
}

image::Blob fit_image_to_budget(const image::Blob& png, std::uint64_t max_pixels) {
    auto size = image::png_size(png);
    if (!size) return png;
    auto target = resize_for_budget(size->width, size->height, max_pixels);
    if (target == *size) return png;
    return image::resize_png(png, target);
}

namespace {

std::string check_embedding(const ProviderDescriptor& d, const Matrix& m) {
    if (m.cols != d.dimension) return "dimension " + std::to_string(m.cols) + " != " + std::to_string(d.dimension);
    if (d.vector_mode == VectorMode::kSingle && m.rows != 1) return "single-vector provider returned " + std::to_string(m.rows) + " rows";
    if (!d.normalizes) return {};
    for (std::size_t r = 0; r < m.rows; ++r) {
        double n2 = 0.0;
        for (float v : m.row(r)) n2 += static_cast<double>(v) * v;
        // All-zero rows come from empty inputs and are flagged, not rejected.
        if (n2 == 0.0) continue;
        if (std::abs(std::sqrt(n2) - 1.0) > 1e-4) return "row " + std::to_string(r) + " is not unit norm";
    }
    return {};
}

bool all_rows_unit(const Matrix& m) {
    if (m.rows == 0) return false;
    for (std::size_t r = 0; r < m.rows; ++r) {
        double n2 = 0.0;
        for (float v : m.row(r)) n2 += static_cast<double>(v) * v;
        if (std::abs(std::sqrt(n2) - 1.0) > 1e-4) return false;
    }
    return true;
}

}  // namespace

EmbedResult embed_units(std::span<const EmbeddingUnit> units, EmbeddingProvider& provider,
                        const EmbedOptions& options) {
    const auto& desc = provider.descriptor();
    for (const auto& u : units)
        if (!compatible(u.kind, desc.modality))
            throw Error(ErrorCode::kModalityMismatch, u.unit_id + " (" + std::string(to_string(u.kind)) + ") cannot be embedded by " +
                                                          desc.name + " (" + std::string(to_string(desc.modality)) + ")");
    const std::size_t batch = std::max<std::size_t>(1, options.batch);
    const std::size_t n_batches = (units.size() + batch - 1) / batch;

    std::vector<std::optional<Matrix>> results(units.size());
    std::vector<std::string> errors(units.size());

    parallel_for(n_batches, std::max<std::size_t>(1, options.in_flight), [&](std::size_t b) {
        const std::size_t lo = b * batch, hi = std::min(units.size(), lo + batch);
        std::vector<EmbeddingInput> inputs;
        inputs.reserve(hi - lo);
        for (std::size_t i = lo; i < hi; ++i) {
            EmbeddingInput in{units[i].text, {}};
            for (const auto& img : units[i].images)
                in.images.push_back(desc.max_pixels ? fit_image_to_budget(img.bytes, *desc.max_pixels) : img.bytes);
            inputs.push_back(std::move(in));
        }
        try {
            auto out = with_retry(options.retry, [&] {
                auto r = provider.embed(inputs);
                if (r.size() != inputs.size())
                    throw Error(ErrorCode::kProviderError, "provider returned " + std::to_string(r.size()) + " of " +
                                                               std::to_string(inputs.size()) + " embeddings");
                return r;
            });
            for (std::size_t i = lo; i < hi; ++i) {
                auto problem = check_embedding(desc, out[i - lo]);
                if (problem.empty()) results[i] = std::move(out[i - lo]);
                else errors[i] = problem;
            }
        } catch (const Error& e) {
            if (e.code() != ErrorCode::kProviderError && e.code() != ErrorCode::kServiceError) throw;
            for (std::size_t i = lo; i < hi; ++i) errors[i] = e.what();
        }
    });

    EmbedResult result;
    for (std::size_t i = 0; i < units.size(); ++i) {
        if (!results[i]) {
            result.failures.push_back({units[i].unit_id, errors[i]});
            continue;
        }
        UnitEmbedding e;
        e.unit_id = units[i].unit_id;
        e.doc_id = units[i].doc_id;
        e.normalized = desc.normalizes && all_rows_unit(*results[i]);
        e.vectors = std::move(*results[i]);
        result.embeddings.push_back(std::move(e));
    }
    if (!units.empty() &&
        static_cast<double>(result.failures.size()) > options.failure_threshold * static_cast<double>(units.size()))
        throw Error(ErrorCode::kProviderError, std::to_string(result.failures.size()) + " of " +
                                                   std::to_string(units.size()) + " units failed; first: " +
                                                   result.failures.front().unit_id + ": " + result.failures.front().message);
    return result;
}

Matrix embed_query(std::string_view text, EmbeddingProvider& provider, const RetryPolicy& retry) {
    std::vector<EmbeddingInput> in{{std::string(text), {}}};
    auto out = with_retry(retry, [&] { return provider.embed(in); });
    if (out.size() != 1) throw Error(ErrorCode::kProviderError, "query embedding returned wrong count");
    if (out[0].cols != provider.descriptor().dimension) throw Error(ErrorCode::kProviderError, "query embedding dimension mismatch");
    return std::move(out[0]);
}

}  // namespace texdr
