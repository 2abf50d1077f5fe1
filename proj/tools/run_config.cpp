// Copyright 2026 The texdr Authors
// SPDX-License-Identifier: Apache-2.0

#include "run_config.hpp"

#include <cstdlib>
#include <fstream>
#include <iterator>
#include <set>

#include "texdr/error.hpp"
#include "texdr/parallel.hpp"

namespace texdr::cli {

using nlohmann::json;

namespace {

std::string_view fixture_name(FixtureMode m) {
    switch (m) {
        case FixtureMode::kOff: return "off";
        case FixtureMode::kRecord: return "record";
        case FixtureMode::kReplay: return "replay";
    }
    return "off";
}

FixtureMode parse_fixture_mode(const std::string& s) {
    if (s == "off") return FixtureMode::kOff;
    if (s == "record") return FixtureMode::kRecord;
    if (s == "replay") return FixtureMode::kReplay;
    throw Error(ErrorCode::kInvalidArgument, "fixtures must be record, replay or off");
}

int parse_precision(const json& v) {
    if (v.is_string()) {
        if (v == "f32") return 4;
        if (v == "f16") return 2;
    } else if (v.is_number_integer() && (v == 4 || v == 2)) {
        return v.get<int>();
    }
    throw Error(ErrorCode::kInvalidArgument, "precision must be f32 or f16");
}

}  // namespace

void RunConfig::validate() const {
    if (chunk_size == 0) throw Error(ErrorCode::kInvalidArgument, "chunk_size must be positive");
    if (overlap >= chunk_size) throw Error(ErrorCode::kInvalidArgument, "overlap must be smaller than chunk_size");
    if (max_pixels && *max_pixels == 0) throw Error(ErrorCode::kInvalidArgument, "max_pixels must be positive");
    if (precision != 2 && precision != 4) throw Error(ErrorCode::kInvalidArgument, "precision must be f32 or f16");
    if (k == 0) throw Error(ErrorCode::kInvalidArgument, "k must be positive");
    if (cutoff == 0) throw Error(ErrorCode::kInvalidArgument, "cutoff must be positive");
    if (batch == 0 || in_flight == 0) throw Error(ErrorCode::kInvalidArgument, "batch and in_flight must be positive");
    if (!(failure_threshold >= 0.0 && failure_threshold <= 1.0))
        throw Error(ErrorCode::kInvalidArgument, "failure_threshold must be in [0, 1]");
    if (!(overlap_threshold >= 0.0 && overlap_threshold <= 1.0))
        throw Error(ErrorCode::kInvalidArgument, "overlap_threshold must be in [0, 1]");
    bm25.validate();
    if (provider.kind != "hash" && provider.kind != "remote")
        throw Error(ErrorCode::kInvalidArgument, "provider kind must be hash or remote");
    if (provider.kind == "remote" && provider.endpoint.empty() && fixtures != FixtureMode::kReplay)
        throw Error(ErrorCode::kInvalidArgument, "remote provider needs --provider-endpoint");
    provider.descriptor.validate();
}

std::size_t RunConfig::worker_count() const { return workers ? workers : default_workers(); }

json to_json(const RunConfig& c) {
    const auto& d = c.provider.descriptor;
    json provider{{"kind", c.provider.kind},
                  {"name", d.name},
                  {"modality", to_string(d.modality)},
                  {"vector_mode", to_string(d.vector_mode)},
                  {"dimension", d.dimension},
                  {"normalizes", d.normalizes},
                  {"max_pixels", d.max_pixels ? json(*d.max_pixels) : json(nullptr)},
                  {"patch_size", d.patch_size ? json(*d.patch_size) : json(nullptr)},
                  {"endpoint", c.provider.endpoint}};
    return json{{"corpus", c.corpus.string()},
                {"ingested", c.ingested.string()},
                {"representation", to_string(c.representation)},
                {"provider", provider},
                {"chunk_size", c.chunk_size},
                {"overlap", c.overlap},
                {"max_pixels", c.max_pixels ? json(*c.max_pixels) : json(nullptr)},
                {"precision", c.precision == 2 ? "f16" : "f32"},
                {"bm25", {{"k1", c.bm25.k1}, {"b", c.bm25.b}}},
                {"k", c.k},
                {"cutoff", c.cutoff},
                {"seed", c.seed},
                {"fixtures", fixture_name(c.fixtures)},
                {"fixture_dir", c.fixture_dir.string()},
                {"workers", c.workers},
                {"batch", c.batch},
                {"in_flight", c.in_flight},
                {"failure_threshold", c.failure_threshold},
                {"llm_endpoint", c.llm_endpoint},
                {"caption_endpoint", c.caption_endpoint},
                {"caption_model", c.caption_model},
                {"captions", c.captions.string()},
                {"pages", c.pages.string()},
                {"render_command", c.render_command},
                {"converter_command", c.converter_command},
                {"lenient_includes", c.lenient_includes},
                {"overlap_threshold", c.overlap_threshold},
                {"figure_window", c.figure_window}};
}

void apply_json(RunConfig& c, const json& j) {
    if (!j.is_object()) throw Error(ErrorCode::kInvalidArgument, "config must be a JSON object");
    static const std::set<std::string> known = {
        "corpus", "ingested", "representation", "provider", "chunk_size", "overlap", "max_pixels", "precision",
        "bm25", "k", "cutoff", "seed", "fixtures", "fixture_dir", "workers", "batch", "in_flight",
        "failure_threshold", "llm_endpoint", "caption_endpoint", "caption_model", "captions", "pages",
        "render_command", "converter_command", "lenient_includes", "overlap_threshold", "figure_window"};
    for (const auto& [key, value] : j.items())
        if (!known.count(key)) throw Error(ErrorCode::kInvalidArgument, "unknown config key: " + key);
    try {
        if (j.contains("corpus")) c.corpus = j["corpus"].get<std::string>();
        if (j.contains("ingested")) c.ingested = j["ingested"].get<std::string>();
        if (j.contains("representation")) {
            auto r = parse_representation(j["representation"].get<std::string>());
            if (!r) throw Error(ErrorCode::kInvalidArgument, "unknown representation " + j["representation"].dump());
            c.representation = *r;
        }
        if (j.contains("provider")) {
            const auto& p = j["provider"];
            auto& d = c.provider.descriptor;
            if (p.contains("kind")) c.provider.kind = p["kind"].get<std::string>();
            if (p.contains("name")) d.name = p["name"].get<std::string>();
            if (p.contains("modality")) {
                auto m = parse_modality(p["modality"].get<std::string>());
                if (!m) throw Error(ErrorCode::kInvalidArgument, "unknown modality");
                d.modality = *m;
            }
            if (p.contains("vector_mode")) {
                auto v = parse_vector_mode(p["vector_mode"].get<std::string>());
                if (!v) throw Error(ErrorCode::kInvalidArgument, "unknown vector_mode");
                d.vector_mode = *v;
            }
            if (p.contains("dimension")) d.dimension = p["dimension"].get<std::size_t>();
            if (p.contains("normalizes")) d.normalizes = p["normalizes"].get<bool>();
            if (p.contains("max_pixels") && !p["max_pixels"].is_null()) d.max_pixels = p["max_pixels"].get<std::uint64_t>();
            if (p.contains("patch_size") && !p["patch_size"].is_null()) d.patch_size = p["patch_size"].get<std::uint32_t>();
            if (p.contains("endpoint")) c.provider.endpoint = p["endpoint"].get<std::string>();
        }
        if (j.contains("chunk_size")) c.chunk_size = j["chunk_size"].get<std::size_t>();
        if (j.contains("overlap")) c.overlap = j["overlap"].get<std::size_t>();
        if (j.contains("max_pixels") && !j["max_pixels"].is_null()) c.max_pixels = j["max_pixels"].get<std::uint64_t>();
        if (j.contains("precision")) c.precision = parse_precision(j["precision"]);
        if (j.contains("bm25")) {
            c.bm25.k1 = j["bm25"].value("k1", c.bm25.k1);
            c.bm25.b = j["bm25"].value("b", c.bm25.b);
        }
        if (j.contains("k")) c.k = j["k"].get<std::size_t>();
        if (j.contains("cutoff")) c.cutoff = j["cutoff"].get<std::size_t>();
        if (j.contains("seed")) c.seed = j["seed"].get<std::uint64_t>();
        if (j.contains("fixtures")) c.fixtures = parse_fixture_mode(j["fixtures"].get<std::string>());
        if (j.contains("fixture_dir")) c.fixture_dir = j["fixture_dir"].get<std::string>();
        if (j.contains("workers")) c.workers = j["workers"].get<std::size_t>();
        if (j.contains("batch")) c.batch = j["batch"].get<std::size_t>();
        if (j.contains("in_flight")) c.in_flight = j["in_flight"].get<std::size_t>();
        if (j.contains("failure_threshold")) c.failure_threshold = j["failure_threshold"].get<double>();
        if (j.contains("llm_endpoint")) c.llm_endpoint = j["llm_endpoint"].get<std::string>();
        if (j.contains("caption_endpoint")) c.caption_endpoint = j["caption_endpoint"].get<std::string>();
        if (j.contains("caption_model")) c.caption_model = j["caption_model"].get<std::string>();
        if (j.contains("captions")) c.captions = j["captions"].get<std::string>();
        if (j.contains("pages")) c.pages = j["pages"].get<std::string>();
        if (j.contains("render_command")) c.render_command = j["render_command"].get<std::string>();
        if (j.contains("converter_command")) c.converter_command = j["converter_command"].get<std::string>();
        if (j.contains("lenient_includes")) c.lenient_includes = j["lenient_includes"].get<bool>();
        if (j.contains("overlap_threshold")) c.overlap_threshold = j["overlap_threshold"].get<double>();
        if (j.contains("figure_window")) c.figure_window = j["figure_window"].get<std::size_t>();
    } catch (const json::exception& e) {
        throw Error(ErrorCode::kInvalidArgument, std::string("config: ") + e.what());
    }
}

RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::kIo, "cannot open config " + path.string());
    RunConfig c;
    try {
        apply_json(c, json::parse(std::string(std::istreambuf_iterator<char>(in), {})));
    } catch (const json::parse_error& e) {
        throw Error(ErrorCode::kInvalidArgument, path.string() + ": " + e.what());
    }
    return c;
}

std::optional<std::string> provider_token() {
    if (const char* t = std::getenv(kTokenEnv); t && *t) return std::string(t);
    return std::nullopt;
}

std::unique_ptr<Transport> service_transport(const RunConfig& c, const std::string& endpoint, const std::string& service) {
    return make_transport(c.fixtures, endpoint, c.fixture_dir / service, provider_token());
}

ProviderHandle make_provider(const RunConfig& c, const ProviderDescriptor* descriptor) {
    ProviderHandle h;
    auto desc = descriptor ? *descriptor : c.provider.descriptor;
    if (c.max_pixels && !descriptor) desc.max_pixels = c.max_pixels;
    if (c.provider.kind == "hash") {
        h.provider = std::make_unique<HashProvider>(desc);
        return h;
    }
    h.transport = service_transport(c, c.provider.endpoint, "embed");
    h.provider = std::make_unique<RemoteProvider>(desc, *h.transport);
    return h;
}

}  // namespace texdr::cli
