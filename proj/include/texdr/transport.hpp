// Copyright 2026 The texdr Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <chrono>
#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <string>

#include <json.hpp>

namespace texdr {

/// JSON-over-HTTP request/response channel shared by embedding, caption and LLM
/// services. Implementations throw Error(kProviderError) for transport failures.
class Transport {
public:
    virtual ~Transport() = default;
    virtual nlohmann::json post(const std::string& route, const nlohmann::json& body) = 0;
};

class HttpTransport final : public Transport {
public:
    // base_url like "http://127.0.0.1:8080". A bearer token, when set, goes in the
    // Authorization header.
    explicit HttpTransport(std::string base_url, std::optional<std::string> bearer_token = std::nullopt,
                           std::chrono::seconds timeout = std::chrono::seconds(120));

    nlohmann::json post(const std::string& route, const nlohmann::json& body) override;

private:
    std::string base_url_;
    std::optional<std::string> token_;
    std::chrono::seconds timeout_;
};

// Fixture key: FNV-1a of route and the canonical request dump.
std::string fixture_key(const std::string& route, const nlohmann::json& body);

/// Forwards to `inner` and writes every exchange to <dir>/<key>.json.
class RecordingTransport final : public Transport {
public:
    RecordingTransport(Transport& inner, std::filesystem::path dir);
    nlohmann::json post(const std::string& route, const nlohmann::json& body) override;

private:
    Transport& inner_;
    std::filesystem::path dir_;
    std::mutex mu_;
};

/// Serves responses from a recorded fixture directory. Unknown requests throw
/// Error(kFixtureMissing).
class ReplayTransport final : public Transport {
public:
    explicit ReplayTransport(std::filesystem::path dir);
    nlohmann::json post(const std::string& route, const nlohmann::json& body) override;

private:
    std::filesystem::path dir_;
};

enum class FixtureMode { kOff, kRecord, kReplay };

/// Builds the transport stack for a fixture mode. `endpoint` may be empty in replay mode.
std::unique_ptr<Transport> make_transport(FixtureMode mode, const std::string& endpoint,
                                          const std::filesystem::path& fixture_dir,
                                          std::optional<std::string> token);

}  // namespace texdr
