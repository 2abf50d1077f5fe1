// Copyright 2026 The texdr Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>

#include <json.hpp>

#include "texdr/embedding.hpp"
#include "texdr/representations.hpp"
#include "texdr/retrieval.hpp"
#include "texdr/transport.hpp"

namespace texdr::cli {

struct ProviderConfig {
    std::string kind = "hash";  // "hash" or "remote"
    ProviderDescriptor descriptor{"hash-1024", Modality::kText, VectorMode::kSingle, 1024, true, std::nullopt, std::nullopt};
    std::string endpoint;
};

struct RunConfig {
    std::filesystem::path corpus;
    std::filesystem::path ingested = "ingested";
    RepresentationKind representation = RepresentationKind::kTextOnly;
    ProviderConfig provider;
    std::size_t chunk_size = 512;
    std::size_t overlap = 0;
    std::optional<std::uint64_t> max_pixels;
    int precision = 4;
    Bm25Params bm25;
    std::size_t k = 10;
    std::size_t cutoff = 5;
    std::uint64_t seed = 0;
    FixtureMode fixtures = FixtureMode::kOff;
    std::filesystem::path fixture_dir = "fixtures";
    std::size_t workers = 0;  // 0 = available parallelism
    std::size_t batch = 16;
    std::size_t in_flight = 1;
    double failure_threshold = 0.01;
    std::string llm_endpoint;
    std::string caption_endpoint;
    std::string caption_model = "captioner";
    std::filesystem::path captions;
    std::filesystem::path pages;
    std::string render_command;
    std::string converter_command;
    bool lenient_includes = false;
    double overlap_threshold = 0.3;
    std::size_t figure_window = 2;

    void validate() const;
    std::size_t worker_count() const;
};

inline constexpr const char* kTokenEnv = "TEXDR_PROVIDER_TOKEN";

nlohmann::json to_json(const RunConfig& c);

// Reads known keys; unknown keys are an error so typos do not pass silently.
void apply_json(RunConfig& c, const nlohmann::json& j);

RunConfig load_config(const std::filesystem::path& path);

std::optional<std::string> provider_token();

// Transport for a service; fixture files for each service live in their own subdirectory.
std::unique_ptr<Transport> service_transport(const RunConfig& c, const std::string& endpoint, const std::string& service);

struct ProviderHandle {
    std::unique_ptr<Transport> transport;
    std::unique_ptr<EmbeddingProvider> provider;
};

// `descriptor` overrides the configured one, e.g. with the descriptor stored in an index.
ProviderHandle make_provider(const RunConfig& c, const ProviderDescriptor* descriptor = nullptr);

}  // namespace texdr::cli
