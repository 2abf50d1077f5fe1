// Copyright 2026 The texdr Authors
// SPDX-License-Identifier: Apache-2.0

#include "texdr/transport.hpp"

#include <fstream>
#include <iterator>

#include <httplib.h>

#include "texdr/error.hpp"
#include "texdr/text.hpp"

namespace texdr {

namespace fs = std::filesystem;
using nlohmann::json;

HttpTransport::HttpTransport(std::string base_url, std::optional<std::string> bearer_token,
                             std::chrono::seconds timeout)
    : base_url_(std::move(base_url)), token_(std::move(bearer_token)), timeout_(timeout) {
    while (!base_url_.empty() && base_url_.back() == '/') base_url_.pop_back();
}

json HttpTransport::post(const std::string& route, const json& body) {
    // Split "http://host:port/prefix" into the client origin and a path prefix.
    std::string origin = base_url_;
    std::string prefix;
    if (auto scheme = base_url_.find("://"); scheme != std::string::npos) {
        if (auto slash = base_url_.find('/', scheme + 3); slash != std::string::npos) {
            origin = base_url_.substr(0, slash);
            prefix = base_url_.substr(slash);
        }
    }
    httplib::Client client(origin);
    client.set_connection_timeout(timeout_);
    client.set_read_timeout(timeout_);
    client.set_write_timeout(timeout_);
    httplib::Headers headers;
    if (token_) headers.emplace("Authorization", "Bearer " + *token_);
    auto res = client.Post(prefix + route, headers, body.dump(), "application/json");
    if (!res) throw Error(ErrorCode::kProviderError, "transport failure: " + httplib::to_string(res.error()));
    if (res->status != 200)
        throw Error(ErrorCode::kProviderError, "HTTP " + std::to_string(res->status) + " from " + route);
    try {
        return json::parse(res->body);
    } catch (const json::parse_error& e) {
        throw Error(ErrorCode::kProviderError, std::string("unparseable response: ") + e.what());
    }
}

std::string fixture_key(const std::string& route, const json& body) {
    return text::hex64(text::fnv1a64(route + "\n" + body.dump()));
}

RecordingTransport::RecordingTransport(Transport& inner, fs::path dir) : inner_(inner), dir_(std::move(dir)) {
    fs::create_directories(dir_);
}

json RecordingTransport::post(const std::string& route, const json& body) {
    json response = inner_.post(route, body);
    json record{{"route", route}, {"request", body}, {"response", response}};
    std::lock_guard lock(mu_);
    std::ofstream out(dir_ / (fixture_key(route, body) + ".json"), std::ios::binary);
    if (!out) throw Error(ErrorCode::kIo, "cannot write fixture in " + dir_.string());
    out << record.dump(1) << '\n';
    return response;
}

ReplayTransport::ReplayTransport(fs::path dir) : dir_(std::move(dir)) {}

json ReplayTransport::post(const std::string& route, const json& body) {
    fs::path file = dir_ / (fixture_key(route, body) + ".json");
    std::ifstream in(file, std::ios::binary);
    if (!in) throw Error(ErrorCode::kFixtureMissing, "no recorded response for " + route + " (" + file.string() + ")");
    json record;
    try {
        record = json::parse(std::string(std::istreambuf_iterator<char>(in), {}));
    } catch (const json::parse_error& e) {
        throw Error(ErrorCode::kFixtureMissing, "corrupt fixture " + file.string() + ": " + e.what());
    }
    if (record.value("route", "") != route || record["request"] != body)
        throw Error(ErrorCode::kFixtureMissing, "fixture key collision in " + file.string());
    return record["response"];
}

std::unique_ptr<Transport> make_transport(FixtureMode mode, const std::string& endpoint, const fs::path& fixture_dir,
                                          std::optional<std::string> token) {
    if (mode == FixtureMode::kReplay) return std::make_unique<ReplayTransport>(fixture_dir);
    if (endpoint.empty()) throw Error(ErrorCode::kInvalidArgument, "service endpoint required");
    auto http = std::make_unique<HttpTransport>(endpoint, std::move(token));
    if (mode == FixtureMode::kOff) return http;

    // Recording owns its inner transport through this small adapter.
    struct OwningRecorder final : Transport {
        OwningRecorder(std::unique_ptr<Transport> inner, const fs::path& dir)
            : inner(std::move(inner)), recorder(*this->inner, dir) {}
        json post(const std::string& route, const json& body) override { return recorder.post(route, body); }
        std::unique_ptr<Transport> inner;
        RecordingTransport recorder;
    };
    return std::make_unique<OwningRecorder>(std::move(http), fixture_dir);
}

}  // namespace texdr
