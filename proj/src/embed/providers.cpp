// Copyright 2026 The texdr Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <cmath>

#include <boost/archive/iterators/base64_from_binary.hpp>
#include <boost/archive/iterators/binary_from_base64.hpp>
#include <boost/archive/iterators/transform_width.hpp>

#include "texdr/embedding.hpp"
#include "texdr/error.hpp"
#include "texdr/text.hpp"

namespace texdr {

using nlohmann::json;

std::string_view to_string(Modality m) noexcept {
    switch (m) {
        case Modality::kText: return "text";
        case Modality::kImage: return "image";
        case Modality::kMultimodal: return "multimodal";
    }
    return "text";
}

std::string_view to_string(VectorMode m) noexcept { return m == VectorMode::kSingle ? "single" : "multi"; }

std::optional<Modality> parse_modality(std::string_view s) noexcept {
    for (auto m : {Modality::kText, Modality::kImage, Modality::kMultimodal})
        if (to_string(m) == s) return m;
    return std::nullopt;
}

std::optional<VectorMode> parse_vector_mode(std::string_view s) noexcept {
    if (s == "single") return VectorMode::kSingle;
    if (s == "multi") return VectorMode::kMulti;
    return std::nullopt;
}

void ProviderDescriptor::validate() const {
    if (dimension == 0) throw Error(ErrorCode::kInvalidArgument, name + ": dimension must be positive");
    if (modality != Modality::kText && vector_mode == VectorMode::kMulti && !patch_size)
        throw Error(ErrorCode::kInvalidArgument, name + ": multi-vector image provider needs patch_size");
    if (patch_size && *patch_size == 0) throw Error(ErrorCode::kInvalidArgument, name + ": patch_size must be positive");
    if (max_pixels && *max_pixels == 0) throw Error(ErrorCode::kInvalidArgument, name + ": max_pixels must be positive");
}

// ---------------------------------------------------------------------------
// hashing provider

std::size_t hash_bucket(std::string_view token, std::size_t dimension) {
    return static_cast<std::size_t>(text::fnv1a64(token) % dimension);
}

UnitEmbedding hash_embed(std::string_view text, std::size_t dimension) {
    if (dimension < 2) throw Error(ErrorCode::kInvalidArgument, "hash_embed dimension must be >= 2");
    UnitEmbedding e;
    e.vectors = Matrix(1, dimension);
    auto row = e.vectors.row(0);
    double norm2 = 0.0;
    for (auto tok : text::tokens(text)) row[hash_bucket(tok, dimension)] += 1.0f;
    for (float v : row) norm2 += static_cast<double>(v) * v;
    if (norm2 == 0.0) {
        e.normalized = false;
        return e;
    }
    const double inv = 1.0 / std::sqrt(norm2);
    for (float& v : row) v = static_cast<float>(v * inv);
    return e;
}

HashProvider::HashProvider(ProviderDescriptor descriptor) : descriptor_(std::move(descriptor)) {
    if (descriptor_.dimension < 2) throw Error(ErrorCode::kInvalidArgument, "hash provider dimension must be >= 2");
    descriptor_.validate();
    descriptor_.normalizes = true;
}

std::vector<Matrix> HashProvider::embed(std::span<const EmbeddingInput> batch) {
    const std::size_t dim = descriptor_.dimension;
    std::vector<Matrix> out;
    out.reserve(batch.size());
    for (const auto& input : batch) {
        std::vector<std::size_t> buckets;
        for (auto tok : text::tokens(input.text)) buckets.push_back(hash_bucket(tok, dim));
        for (const auto& img : input.images) {
            const std::string tag = "\x01img:" + text::hex64(text::fnv1a64(
                std::string_view(reinterpret_cast<const char*>(img.data()), img.size())));
            if (descriptor_.vector_mode == VectorMode::kSingle) {
                buckets.push_back(hash_bucket(tag, dim));
                continue;
            }
            std::uint64_t patches = 1;
            if (auto sz = image::png_size(img); sz && descriptor_.patch_size)
                patches = estimate_visual_tokens(sz->width, sz->height, *descriptor_.patch_size);
            for (std::uint64_t p = 0; p < patches; ++p) buckets.push_back(hash_bucket(tag + ":" + std::to_string(p), dim));
        }

        if (descriptor_.vector_mode == VectorMode::kMulti) {
            Matrix m(buckets.size(), dim);
            for (std::size_t r = 0; r < buckets.size(); ++r) m.row(r)[buckets[r]] = 1.0f;
            out.push_back(std::move(m));
            continue;
        }
        Matrix m(1, dim);
        auto row = m.row(0);
        for (auto b : buckets) row[b] += 1.0f;
        double norm2 = 0.0;
        for (float v : row) norm2 += static_cast<double>(v) * v;
        if (norm2 > 0.0) {
            const double inv = 1.0 / std::sqrt(norm2);
            for (float& v : row) v = static_cast<float>(v * inv);
        }
        out.push_back(std::move(m));
    }
    return out;
}

// ---------------------------------------------------------------------------
// remote provider

std::string base64_encode(std::span<const std::uint8_t> bytes) {
    using namespace boost::archive::iterators;
    using It = base64_from_binary<transform_width<const std::uint8_t*, 6, 8>>;
    std::string out(It(bytes.data()), It(bytes.data() + bytes.size()));
    out.append((3 - bytes.size() % 3) % 3, '=');
    return out;
}

std::vector<std::uint8_t> base64_decode(std::string_view in) {
    using namespace boost::archive::iterators;
    using It = transform_width<binary_from_base64<std::string::const_iterator>, 8, 6>;
    std::string s(in);
    std::size_t pad = 0;
    while (!s.empty() && s.back() == '=') {
        s.pop_back();
        ++pad;
    }
    if (s.empty()) return {};
    std::vector<std::uint8_t> out;
    try {
        for (It it(s.cbegin()), end(s.cend()); it != end; ++it) out.push_back(static_cast<std::uint8_t>(*it));
    } catch (const std::exception&) {
        throw Error(ErrorCode::kInvalidArgument, "invalid base64");
    }
    // transform_width emits a trailing partial byte for padded input.
    const std::size_t expected = (s.size() + pad) / 4 * 3 - pad;
    if (out.size() > expected) out.resize(expected);
    return out;
}

json encode_embed_request(const ProviderDescriptor& d, std::span<const EmbeddingInput> batch) {
    json inputs = json::array();
    for (const auto& in : batch) {
        json item = json::object();
        if (!in.text.empty()) item["text"] = in.text;
        if (!in.images.empty()) {
            item["images"] = json::array();
            for (const auto& img : in.images) item["images"].push_back(base64_encode(img));
        }
        inputs.push_back(std::move(item));
    }
    return json{{"model", d.name}, {"inputs", std::move(inputs)}, {"mode", to_string(d.vector_mode)}};
}

std::vector<Matrix> decode_embed_response(const ProviderDescriptor& d, const json& response,
                                          std::size_t expected_inputs) {
    auto fail = [](const std::string& why) -> void { throw Error(ErrorCode::kProviderError, why); };
    if (!response.is_object() || !response.contains("vectors") || !response["vectors"].is_array())
        fail("response lacks a vectors array");
    const auto& vectors = response["vectors"];
    if (vectors.size() != expected_inputs)
        fail("expected " + std::to_string(expected_inputs) + " embeddings, got " + std::to_string(vectors.size()));
    if (response.contains("dimension") && response["dimension"].is_number_unsigned() &&
        response["dimension"].get<std::size_t>() != d.dimension)
        fail("service dimension " + response["dimension"].dump() + " differs from descriptor");
    std::vector<Matrix> out;
    for (const auto& unit : vectors) {
        if (!unit.is_array()) fail("embedding is not an array of rows");
        if (d.vector_mode == VectorMode::kSingle && unit.size() != 1) fail("single-vector provider returned multiple rows");
        Matrix m(unit.size(), d.dimension);
        for (std::size_t r = 0; r < unit.size(); ++r) {
            const auto& row = unit[r];
            if (!row.is_array() || row.size() != d.dimension) fail("row dimension mismatch");
            for (std::size_t c = 0; c < d.dimension; ++c) {
                if (!row[c].is_number()) fail("non-numeric vector value");
                m.row(r)[c] = row[c].get<float>();
            }
        }
        out.push_back(std::move(m));
    }
    return out;
}

RemoteProvider::RemoteProvider(ProviderDescriptor descriptor, Transport& transport, std::string route)
    : descriptor_(std::move(descriptor)), transport_(transport), route_(std::move(route)) {
    descriptor_.validate();
}

std::vector<Matrix> RemoteProvider::embed(std::span<const EmbeddingInput> batch) {
    json response = transport_.post(route_, encode_embed_request(descriptor_, batch));
    return decode_embed_response(descriptor_, response, batch.size());
}

}  // namespace texdr
