// Copyright 2026 The texdr Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "texdr/image.hpp"
#include "texdr/representations.hpp"
#include "texdr/transport.hpp"

namespace texdr {

enum class Modality { kText, kImage, kMultimodal };
enum class VectorMode { kSingle, kMulti };

std::string_view to_string(Modality m) noexcept;
std::string_view to_string(VectorMode m) noexcept;
std::optional<Modality> parse_modality(std::string_view s) noexcept;
std::optional<VectorMode> parse_vector_mode(std::string_view s) noexcept;

struct ProviderDescriptor {
    std::string name;
    Modality modality = Modality::kText;
    VectorMode vector_mode = VectorMode::kSingle;
    std::size_t dimension = 0;
    bool normalizes = true;
    std::optional<std::uint64_t> max_pixels;
    std::optional<std::uint32_t> patch_size;

    void validate() const;
    bool operator==(const ProviderDescriptor&) const = default;
};

/// Row-major float matrix; one row per vector.
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<float> data;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0f) {}

    std::span<float> row(std::size_t r) { return {data.data() + r * cols, cols}; }
    std::span<const float> row(std::size_t r) const { return {data.data() + r * cols, cols}; }

    bool operator==(const Matrix&) const = default;
};

struct UnitEmbedding {
    std::string unit_id;
    std::string doc_id;
    Matrix vectors;
    int precision = 4;  // bytes per stored value: 4 (f32) or 2 (f16)
    bool normalized = true;

    bool operator==(const UnitEmbedding&) const = default;
};

struct EmbeddingInput {
    std::string text;
    std::vector<image::Blob> images;
};

class EmbeddingProvider {
public:
    virtual ~EmbeddingProvider() = default;
    virtual const ProviderDescriptor& descriptor() const = 0;
    // One matrix per input, same order. Throws Error(kProviderError).
    virtual std::vector<Matrix> embed(std::span<const EmbeddingInput> batch) = 0;
};

/// Bag-of-words hashing embedding: tokens hashed into `dimension` buckets, counts
/// L2-normalized. Empty text yields a zero vector with normalized = false.
UnitEmbedding hash_embed(std::string_view text, std::size_t dimension);

// Bucket index hash_embed uses for one token.
std::size_t hash_bucket(std::string_view token, std::size_t dimension);

/// Deterministic local provider built on hash_embed. In multi-vector mode each
/// token becomes its own one-hot row, and each image contributes one row per
/// estimated visual token.
class HashProvider final : public EmbeddingProvider {
public:
    explicit HashProvider(ProviderDescriptor descriptor);
    const ProviderDescriptor& descriptor() const override { return descriptor_; }
    std::vector<Matrix> embed(std::span<const EmbeddingInput> batch) override;

private:
    ProviderDescriptor descriptor_;
};

/// Client for the embedding wire protocol:
///   request  {model, inputs:[{text?, images?:[base64]}], mode:"single"|"multi"}
///   response {vectors:[[[f32,...],...],...], dimension, normalized}
class RemoteProvider final : public EmbeddingProvider {
public:
    RemoteProvider(ProviderDescriptor descriptor, Transport& transport, std::string route = "/v1/embed");
    const ProviderDescriptor& descriptor() const override { return descriptor_; }
    std::vector<Matrix> embed(std::span<const EmbeddingInput> batch) override;

private:
    ProviderDescriptor descriptor_;
    Transport& transport_;
    std::string route_;
};

nlohmann::json encode_embed_request(const ProviderDescriptor& d, std::span<const EmbeddingInput> batch);
// Throws Error(kProviderError) on shape or dimension violations.
std::vector<Matrix> decode_embed_response(const ProviderDescriptor& d, const nlohmann::json& response,
                                          std::size_t expected_inputs);

std::string base64_encode(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> base64_decode(std::string_view text);

struct RetryPolicy {
    // Retries after the first attempt; the n-th retry waits backoff[n].
    std::vector<std::chrono::milliseconds> backoff{std::chrono::seconds(1), std::chrono::seconds(2),
                                                   std::chrono::seconds(4)};
    std::function<void(std::chrono::milliseconds)> sleep;  // defaults to this_thread::sleep_for
};

/// Calls fn, retrying Error(kProviderError / kServiceError) per policy.
template <class Fn>
auto with_retry(const RetryPolicy& policy, Fn&& fn) -> decltype(fn());

struct EmbedOptions {
    std::size_t batch = 16;
    std::size_t in_flight = 1;  // concurrent batch requests
    RetryPolicy retry;
    double failure_threshold = 0.01;  // fraction of units allowed to fail
};

struct UnitFailure {
    std::string unit_id;
    std::string message;
};

struct EmbedResult {
    std::vector<UnitEmbedding> embeddings;  // successful units, input order
    std::vector<UnitFailure> failures;
};

/// Embeds units in order-preserving batches. Images are shrunk to the provider's
/// max_pixels budget first. Throws ModalityMismatch before any request, and
/// ProviderError when failures exceed the threshold.
EmbedResult embed_units(std::span<const EmbeddingUnit> units, EmbeddingProvider& provider,
                        const EmbedOptions& options = {});

bool compatible(UnitKind kind, Modality modality) noexcept;

/// Query text embedding (queries are text for every provider family).
Matrix embed_query(std::string_view text, EmbeddingProvider& provider, const RetryPolicy& retry = {});

/// Scales both sides by sqrt(max_pixels / (w*h)) rounding down (min 1) when the
/// image exceeds the budget. The result never exceeds max_pixels.
image::Size resize_for_budget(std::uint32_t width, std::uint32_t height, std::uint64_t max_pixels);

/// ceil(w / patch) * ceil(h / patch)
std::uint64_t estimate_visual_tokens(std::uint32_t width, std::uint32_t height, std::uint32_t patch_size);

/// Shrinks a PNG to the budget; non-PNG or already-small input is returned as is.
image::Blob fit_image_to_budget(const image::Blob& png, std::uint64_t max_pixels);

/// Asks a captioning service for one caption per figure that has images:
///   request  {model, doc_id, figures:[{figure_id, images:[base64]}]}
///   response {captions:{figure_id: text}}
CaptionMap request_captions(const IngestedDocument& doc, Transport& transport, const std::string& model,
                            const RetryPolicy& retry = {}, const std::string& route = "/v1/caption");

}  // namespace texdr

#include "texdr/detail/retry_impl.hpp"
