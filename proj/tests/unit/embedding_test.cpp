// Copyright 2026 The texdr Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <atomic>
#include <cmath>
#include <random>
#include <set>
#include <thread>

#include <httplib.h>

#include "test_util.hpp"
#include "texdr/embedding.hpp"
#include "texdr/error.hpp"
#include "texdr/image.hpp"
#include "texdr/text.hpp"

namespace texdr {
namespace {

using nlohmann::json;
using testing::TempDir;

double cosine(std::span<const float> a, std::span<const float> b) {
    double ab = 0, aa = 0, bb = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        ab += double{a[i]} * b[i];
        aa += double{a[i]} * a[i];
        bb += double{b[i]} * b[i];
    }
    return ab / std::sqrt(aa * bb);
}

TEST(HashEmbed, DeterministicAndUnitNorm) {
    auto a = hash_embed("the quick brown fox", 64);
    auto b = hash_embed("the quick brown fox", 64);
    EXPECT_EQ(a.vectors, b.vectors);
    EXPECT_TRUE(a.normalized);
    EXPECT_NEAR(cosine(a.vectors.row(0), a.vectors.row(0)), 1.0, 1e-6);
}

TEST(HashEmbed, RepetitionOnlyScales) {
    EXPECT_EQ(hash_embed("a a", 32).vectors, hash_embed("a", 32).vectors);
}

TEST(HashEmbed, PermutationInvariant) {
    EXPECT_EQ(hash_embed("alpha beta gamma", 128).vectors, hash_embed("gamma alpha beta", 128).vectors);
}

TEST(HashEmbed, DisjointBucketsGiveZeroCosine) {
    const std::size_t dim = 4096;
    const std::vector<std::string> left{"lattice", "phonon", "dispersion"};
    const std::vector<std::string> right{"protein", "folding", "kinetics"};
    std::set<std::size_t> lb, rb;
    for (const auto& w : left) lb.insert(hash_bucket(w, dim));
    for (const auto& w : right) rb.insert(hash_bucket(w, dim));
    for (auto b : lb) ASSERT_EQ(rb.count(b), 0u) << "fixture words collide; pick others";
    auto a = hash_embed("lattice phonon dispersion", dim);
    auto b = hash_embed("protein folding kinetics", dim);
    EXPECT_EQ(cosine(a.vectors.row(0), b.vectors.row(0)), 0.0);
}

TEST(HashEmbed, EmptyTextIsZeroAndFlagged) {
    auto e = hash_embed("   ", 16);
    EXPECT_FALSE(e.normalized);
    for (float v : e.vectors.data) EXPECT_EQ(v, 0.0f);
    EXPECT_THROW(hash_embed("x", 1), Error);
}

TEST(ResizeForBudget, Examples) {
    EXPECT_EQ(resize_for_budget(100, 100, 20000), (image::Size{100, 100}));
    EXPECT_EQ(resize_for_budget(1000, 1000, 500000), (image::Size{707, 707}));
    EXPECT_EQ(resize_for_budget(1, 1, 1), (image::Size{1, 1}));
    EXPECT_EQ(resize_for_budget(1, 1, 999), (image::Size{1, 1}));
}

TEST(ResizeForBudget, ExtremeAspectStaysWithinBudget) {
    auto s = resize_for_budget(1, 1000000, 1000);
    EXPECT_EQ(s.width, 1u);
    EXPECT_LE(std::uint64_t{s.width} * s.height, 1000u);
    auto t = resize_for_budget(50000, 2, 10);
    EXPECT_LE(std::uint64_t{t.width} * t.height, 10u);
}

TEST(ResizeForBudget, RandomTriplesNeverExceedAndAreIdempotent) {
    std::mt19937_64 rng(7);
    for (int i = 0; i < 10000; ++i) {
        const auto w = static_cast<std::uint32_t>(1 + rng() % 20000);
        const auto h = static_cast<std::uint32_t>(1 + rng() % 20000);
        const std::uint64_t budget = 1 + rng() % 50000000;
        auto s = resize_for_budget(w, h, budget);
        ASSERT_LE(std::uint64_t{s.width} * s.height, budget);
        ASSERT_LE(s.width, w);
        ASSERT_LE(s.height, h);
        ASSERT_EQ(resize_for_budget(s.width, s.height, budget), s);
    }
}

TEST(VisualTokens, Examples) {
    EXPECT_EQ(estimate_visual_tokens(28, 28, 14), 4u);
    EXPECT_EQ(estimate_visual_tokens(14, 14, 14), 1u);
    EXPECT_EQ(estimate_visual_tokens(15, 14, 14), 2u);
    EXPECT_THROW(estimate_visual_tokens(1, 1, 0), Error);
}

TEST(VisualTokens, MonotoneInBothSides) {
    for (std::uint32_t w = 1; w < 80; ++w)
        for (std::uint32_t h = 1; h < 80; ++h) {
            ASSERT_LE(estimate_visual_tokens(w, h, 14), estimate_visual_tokens(w + 1, h, 14));
            ASSERT_LE(estimate_visual_tokens(w, h, 14), estimate_visual_tokens(w, h + 1, 14));
        }
}

TEST(FitImage, ShrinksPngToBudget) {
    auto png = image::make_png({200, 100}, 128);
    auto small = fit_image_to_budget(png, 5000);
    auto size = image::png_size(small);
    ASSERT_TRUE(size);
    EXPECT_EQ(*size, (image::Size{100, 50}));
    EXPECT_EQ(fit_image_to_budget(png, 1000000), png);
}

TEST(Base64, RoundTripsAllLengths) {
    std::mt19937_64 rng(8);
    for (std::size_t n = 0; n < 40; ++n) {
        std::vector<std::uint8_t> bytes(n);
        for (auto& b : bytes) b = static_cast<std::uint8_t>(rng());
        auto enc = base64_encode(bytes);
        EXPECT_EQ(enc.size() % 4, 0u);
        EXPECT_EQ(base64_decode(enc), bytes);
    }
    const std::string hello = "hello";
    EXPECT_EQ(base64_encode({reinterpret_cast<const std::uint8_t*>(hello.data()), hello.size()}), "aGVsbG8=");
}

EmbeddingUnit text_unit(const std::string& doc, std::size_t i, const std::string& text) {
    return {doc, chunk_unit_id(doc, i), UnitKind::kTextChunk, text, {}};
}

TEST(EmbedUnits, ShapeAndOrder) {
    HashProvider p({"hash", Modality::kText, VectorMode::kSingle, 8, true, {}, {}});
    std::vector<EmbeddingUnit> units{text_unit("d", 0, "a b"), text_unit("d", 1, "c"), text_unit("e", 0, "d e f")};
    auto r = embed_units(units, p, {.batch = 2});
    ASSERT_EQ(r.embeddings.size(), 3u);
    for (std::size_t i = 0; i < 3; ++i) {
        EXPECT_EQ(r.embeddings[i].unit_id, units[i].unit_id);
        EXPECT_EQ(r.embeddings[i].doc_id, units[i].doc_id);
        EXPECT_EQ(r.embeddings[i].vectors.rows, 1u);
        EXPECT_EQ(r.embeddings[i].vectors.cols, 8u);
    }
}

TEST(EmbedUnits, ModalityMismatchBeforeAnyRequest) {
    HashProvider p({"hash", Modality::kText, VectorMode::kSingle, 8, true, {}, {}});
    std::vector<EmbeddingUnit> units{{"d", "d#fig000-0", UnitKind::kFigure, "", {{"d#fig000-0", image::make_png({4, 4}, 1)}}}};
    try {
        embed_units(units, p);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::kModalityMismatch);
    }
}

TEST(EmbedUnits, CompatibilityTable) {
    EXPECT_TRUE(compatible(UnitKind::kTextChunk, Modality::kText));
    EXPECT_TRUE(compatible(UnitKind::kTextChunk, Modality::kMultimodal));
    EXPECT_FALSE(compatible(UnitKind::kTextChunk, Modality::kImage));
    EXPECT_TRUE(compatible(UnitKind::kFigure, Modality::kImage));
    EXPECT_TRUE(compatible(UnitKind::kPageImage, Modality::kMultimodal));
    EXPECT_FALSE(compatible(UnitKind::kInterleaved, Modality::kImage));
    EXPECT_TRUE(compatible(UnitKind::kInterleaved, Modality::kMultimodal));
}

TEST(EmbedUnits, MultiVectorRowsEqualTokenCount) {
    HashProvider p({"hash-multi", Modality::kText, VectorMode::kMulti, 16, true, {}, {}});
    std::vector<EmbeddingUnit> units{text_unit("d", 0, "one two three four five")};
    auto r = embed_units(units, p);
    EXPECT_EQ(r.embeddings[0].vectors.rows, 5u);
}

TEST(EmbedUnits, ImagesResizedBeforeDispatch) {
    struct Capture final : EmbeddingProvider {
        ProviderDescriptor d{"cap", Modality::kImage, VectorMode::kSingle, 4, false, 400, {}};
        std::vector<image::Size> seen;
        const ProviderDescriptor& descriptor() const override { return d; }
        std::vector<Matrix> embed(std::span<const EmbeddingInput> batch) override {
            std::vector<Matrix> out;
            for (const auto& in : batch) {
                for (const auto& img : in.images) seen.push_back(*image::png_size(img));
                out.emplace_back(1, 4);
            }
            return out;
        }
    } p;
    std::vector<EmbeddingUnit> units{{"d", "d#fig000-0", UnitKind::kFigure, "", {{"s", image::make_png({40, 40}, 9)}}}};
    embed_units(units, p);
    ASSERT_EQ(p.seen.size(), 1u);
    EXPECT_EQ(p.seen[0], (image::Size{20, 20}));
}

// Provider that fails the first `failures` calls.
struct Flaky final : EmbeddingProvider {
    ProviderDescriptor d{"flaky", Modality::kText, VectorMode::kSingle, 4, true, {}, {}};
    int failures = 0;
    std::atomic<int> calls{0};
    const ProviderDescriptor& descriptor() const override { return d; }
    std::vector<Matrix> embed(std::span<const EmbeddingInput> batch) override {
        if (calls++ < failures) throw Error(ErrorCode::kProviderError, "HTTP 503");
        std::vector<Matrix> out;
        for (std::size_t i = 0; i < batch.size(); ++i) {
            Matrix m(1, 4);
            m.data[0] = 1.0f;
            out.push_back(m);
        }
        return out;
    }
};

TEST(EmbedUnits, RetriesWithBackoffSchedule) {
    Flaky p;
    p.failures = 3;
    std::vector<std::chrono::milliseconds> sleeps;
    EmbedOptions o;
    o.retry.sleep = [&](std::chrono::milliseconds ms) { sleeps.push_back(ms); };
    std::vector<EmbeddingUnit> units{text_unit("d", 0, "x")};
    auto r = embed_units(units, p, o);
    EXPECT_EQ(r.embeddings.size(), 1u);
    EXPECT_EQ(p.calls, 4);
    ASSERT_EQ(sleeps.size(), 3u);
    EXPECT_EQ(sleeps[0], std::chrono::seconds(1));
    EXPECT_EQ(sleeps[1], std::chrono::seconds(2));
    EXPECT_EQ(sleeps[2], std::chrono::seconds(4));
}

TEST(EmbedUnits, ExhaustedRetriesRecordedAndThresholdEnforced) {
    Flaky p;
    p.failures = 1000;
    EmbedOptions o;
    o.retry.sleep = [](auto) {};
    std::vector<EmbeddingUnit> units{text_unit("d", 0, "x"), text_unit("d", 1, "y")};
    try {
        embed_units(units, p, o);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::kProviderError);
    }
    o.failure_threshold = 1.0;
    auto r = embed_units(units, p, o);
    EXPECT_TRUE(r.embeddings.empty());
    EXPECT_EQ(r.failures.size(), 2u);
}

TEST(EmbedUnits, NonUnitRowsRejectedForNormalizingProvider) {
    struct Bad final : EmbeddingProvider {
        ProviderDescriptor d{"bad", Modality::kText, VectorMode::kSingle, 2, true, {}, {}};
        const ProviderDescriptor& descriptor() const override { return d; }
        std::vector<Matrix> embed(std::span<const EmbeddingInput> batch) override {
            std::vector<Matrix> out;
            for (std::size_t i = 0; i < batch.size(); ++i) {
                Matrix m(1, 2);
                m.data = {3.0f, 4.0f};
                out.push_back(m);
            }
            return out;
        }
    } p;
    std::vector<EmbeddingUnit> units{text_unit("d", 0, "x")};
    EmbedOptions o;
    o.failure_threshold = 1.0;
    auto r = embed_units(units, p, o);
    ASSERT_EQ(r.failures.size(), 1u);
    EXPECT_NE(r.failures[0].message.find("unit norm"), std::string::npos);
}

TEST(EmbedUnits, InFlightBatchesPreserveOrder) {
    HashProvider p({"hash", Modality::kText, VectorMode::kSingle, 32, true, {}, {}});
    std::vector<EmbeddingUnit> units;
    for (std::size_t i = 0; i < 50; ++i) units.push_back(text_unit("d", i, "token" + std::to_string(i)));
    auto serial = embed_units(units, p, {.batch = 3, .in_flight = 1});
    auto parallel = embed_units(units, p, {.batch = 3, .in_flight = 4});
    EXPECT_EQ(serial.embeddings, parallel.embeddings);
}

// ---------------------------------------------------------------------------
// wire protocol against a local HTTP server

class FakeEmbedServer {
public:
    explicit FakeEmbedServer(std::size_t dim) : dim_(dim) {
        server_.Post("/v1/embed", [this](const httplib::Request& req, httplib::Response& res) {
            ++requests;
            last_auth = req.get_header_value("Authorization");
            if (fail_next > 0) {
                --fail_next;
                res.status = 503;
                return;
            }
            auto body = json::parse(req.body);
            last_request = body;
            json vectors = json::array();
            for (const auto& in : body["inputs"]) {
                std::string t = in.value("text", "");
                for (const auto& img : in.value("images", json::array())) t += " img" + std::to_string(img.get<std::string>().size());
                auto e = hash_embed(t, dim_);
                vectors.push_back(json::array({e.vectors.data}));
            }
            res.set_content(json{{"vectors", vectors}, {"dimension", dim_}, {"normalized", true}}.dump(),
                            "application/json");
        });
        port_ = server_.bind_to_any_port("127.0.0.1");
        thread_ = std::thread([this] { server_.listen_after_bind(); });
        server_.wait_until_ready();
    }
    ~FakeEmbedServer() {
        server_.stop();
        thread_.join();
    }
    std::string url() const { return "http://127.0.0.1:" + std::to_string(port_); }

    std::atomic<int> requests{0};
    std::atomic<int> fail_next{0};
    json last_request;
    std::string last_auth;

private:
    std::size_t dim_;
    httplib::Server server_;
    int port_ = 0;
    std::thread thread_;
};

TEST(RemoteProvider, SpeaksWireProtocol) {
    FakeEmbedServer server(16);
    HttpTransport http(server.url(), std::string("sekret"));
    RemoteProvider p({"remote-model", Modality::kMultimodal, VectorMode::kSingle, 16, true, {}, {}}, http);
    std::vector<EmbeddingInput> in{{"hello world", {}}, {"", {image::make_png({2, 2}, 0)}}};
    auto out = p.embed(in);
    ASSERT_EQ(out.size(), 2u);
    EXPECT_EQ(out[0], hash_embed("hello world", 16).vectors);
    EXPECT_EQ(server.last_request["model"], "remote-model");
    EXPECT_EQ(server.last_request["mode"], "single");
    EXPECT_FALSE(server.last_request["inputs"][1].contains("text"));
    EXPECT_EQ(base64_decode(server.last_request["inputs"][1]["images"][0].get<std::string>()), in[1].images[0]);
    EXPECT_EQ(server.last_auth, "Bearer sekret");
}

TEST(RemoteProvider, ServerErrorsAreRetried) {
    FakeEmbedServer server(8);
    server.fail_next = 2;
    HttpTransport http(server.url());
    RemoteProvider p({"m", Modality::kText, VectorMode::kSingle, 8, true, {}, {}}, http);
    EmbedOptions o;
    o.retry.sleep = [](auto) {};
    std::vector<EmbeddingUnit> units{text_unit("d", 0, "abc")};
    auto r = embed_units(units, p, o);
    EXPECT_EQ(r.embeddings.size(), 1u);
    EXPECT_EQ(server.requests, 3);
}

TEST(RemoteProvider, ShapeViolationsAreProviderErrors) {
    ProviderDescriptor d{"m", Modality::kText, VectorMode::kSingle, 2, true, {}, {}};
    EXPECT_THROW(decode_embed_response(d, json{{"vectors", json::array()}}, 1), Error);
    EXPECT_THROW(decode_embed_response(d, json{{"vectors", {{{1.0, 0.0, 0.0}}}}}, 1), Error);
    EXPECT_THROW(decode_embed_response(d, json{{"vectors", {{{1.0, 0.0}, {0.0, 1.0}}}}}, 1), Error);
    auto ok = decode_embed_response(d, json{{"vectors", {{{0.6, 0.8}}}}, {"dimension", 2}}, 1);
    EXPECT_FLOAT_EQ(ok[0].data[1], 0.8f);
}

TEST(Transport, RecordThenReplayIsIdentical) {
    FakeEmbedServer server(8);
    TempDir dir;
    HttpTransport http(server.url());
    RecordingTransport rec(http, dir.path());
    json body{{"model", "m"}, {"inputs", {{{"text", "abc"}}}}, {"mode", "single"}};
    auto live = rec.post("/v1/embed", body);
    ReplayTransport replay(dir.path());
    EXPECT_EQ(replay.post("/v1/embed", body), live);
    try {
        replay.post("/v1/embed", json{{"other", 1}});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::kFixtureMissing);
    }
}

TEST(Transport, UnreachableEndpointIsProviderError) {
    HttpTransport http("http://127.0.0.1:1", std::nullopt, std::chrono::seconds(1));
    try {
        http.post("/v1/embed", json::object());
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::kProviderError);
    }
}

TEST(EmbedQuery, TextQueryOnImageProvider) {
    HashProvider p({"img", Modality::kImage, VectorMode::kMulti, 16, true, {}, 14});
    auto m = embed_query("two words", p);
    EXPECT_EQ(m.rows, 2u);
}

}  // namespace
}  // namespace texdr
