// Copyright 2026 The texdr Authors
// SPDX-License-Identifier: Apache-2.0

// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 on any failure.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "../common/figure_fixture.hpp"
#include "../common/golden.hpp"
#include "../common/planted.hpp"
#include "../common/scripted_llm.hpp"
#include "texdr/embedding.hpp"
#include "texdr/evaluation.hpp"
#include "texdr/index_store.hpp"
#include "texdr/query_pipeline.hpp"
#include "texdr/retrieval.hpp"
#include "texdr/text.hpp"
#include "texdr/transport.hpp"

namespace fs = std::filesystem;
using namespace texdr;

namespace {

const fs::path kData = TEXDR_TEST_DATA;

// Collects mismatches; a criterion passes when none were recorded.
struct Check {
    std::vector<std::string> failures;
    void expect(bool ok, const std::string& what) {
        if (!ok) failures.push_back(what);
    }
    template <class... Args>
    void expectf(bool ok, const char* fmt, Args... args) {
        if (ok) return;
        char buf[512];
        std::snprintf(buf, sizeof buf, fmt, args...);
        failures.emplace_back(buf);
    }
};

Matrix random_matrix(std::mt19937_64& rng, std::size_t rows, std::size_t cols) {
    std::uniform_real_distribution<float> d(-1.0f, 1.0f);
    Matrix m(rows, cols);
    for (float& v : m.data) v = d(rng);
    return m;
}

UnitEmbedding unit(const std::string& doc, const std::string& id, Matrix m) {
    UnitEmbedding e;
    e.doc_id = doc;
    e.unit_id = id;
    e.vectors = std::move(m);
    return e;
}

// --- 1 -----------------------------------------------------------------------

double dcg_oracle(const std::vector<int>& rel, std::size_t k) {
    double s = 0.0;
    for (std::size_t i = 0; i < std::min(k, rel.size()); ++i) s += (std::pow(2.0, rel[i]) - 1.0) / std::log2(i + 2.0);
    return s;
}

void ndcg_oracle(Check& c) {
    std::mt19937_64 rng(101);
    for (int t = 0; t < 1000; ++t) {
        const std::size_t n = 1 + rng() % 40;
        std::vector<std::string> ranked;
        for (std::size_t i = 0; i < n; ++i) ranked.push_back("d" + std::to_string(i));
        std::shuffle(ranked.begin(), ranked.end(), rng);
        // One instance in eight asks for a gold document absent from the ranking.
        const std::string gold = rng() % 8 == 0 ? "absent" : "d" + std::to_string(rng() % n);
        const std::size_t k = 1 + rng() % 25;

        std::vector<int> rel;
        for (const auto& d : ranked) rel.push_back(d == gold ? 1 : 0);
        std::vector<int> ideal{1};  // one relevant document exists in the collection
        const double expect = dcg_oracle(rel, k) / dcg_oracle(ideal, k);
        const double got = ndcg_at_k(ranked, gold, k);
        c.expectf(std::abs(got - expect) <= 1e-12, "instance %d: got %.17g want %.17g", t, got, expect);
    }
}

// --- 2 -----------------------------------------------------------------------

void maxsim_oracle(Check& c) {
    std::mt19937_64 rng(202);
    for (int t = 0; t < 500; ++t) {
        const std::size_t dim = 1 + rng() % 16;
        auto q = random_matrix(rng, 1 + rng() % 10, dim);
        auto u = random_matrix(rng, 1 + rng() % 10, dim);
        double expect = 0.0;
        for (std::size_t i = 0; i < q.rows; ++i) {
            double best = -1e300;
            for (std::size_t j = 0; j < u.rows; ++j) {
                double dot = 0.0;
                for (std::size_t d = 0; d < dim; ++d) dot += double{q.row(i)[d]} * double{u.row(j)[d]};
                best = std::max(best, dot);
            }
            expect += best;
        }
        const double got = score_maxsim(q, u);
        c.expectf(std::abs(got - expect) <= 1e-6, "pair %d: got %.9g want %.9g", t, got, expect);
    }
}

// --- 3 -----------------------------------------------------------------------

void bm25_oracle(Check& c) {
    const std::vector<std::pair<std::string, std::string>> docs{
        {"d1", "the cat sat on the mat"}, {"d2", "the dog chased the cat"}, {"d3", "dogs and cats play"},
        {"d4", "a cat a dog a bird"},     {"d5", "the dog chased the cat"},
    };
    std::vector<Chunk> chunks;
    for (const auto& [id, t] : docs) chunks.push_back({id, 0, t, text::tokens(t).size(), 0, t.size()});

    // Independently derived Okapi scores (k1=1.2, b=0.75, idf = ln(1 + (N-df+0.5)/(df+0.5))).
    const std::map<std::string, std::vector<double>> expected{
        {"cat dog", {0.27064826553029386, 0.8398936835906141, 0.0, 0.77773049977223, 0.8398936835906141}},
        {"the mat", {2.014593627206, 0.7492247835214996, 0.0, 0.0, 0.7492247835214996}},
        {"bird", {0.0, 0.0, 0.0, 1.304211142369371, 0.0}},
    };
    const Bm25Params params{1.2, 0.75};
    Bm25Index idx(chunks);
    for (const auto& [q, scores] : expected)
        for (std::size_t i = 0; i < docs.size(); ++i) {
            const double got = idx.chunk_score(i, q, params);
            c.expectf(std::abs(got - scores[i]) <= 1e-12, "'%s' on %s: got %.17g want %.17g", q.c_str(),
                      docs[i].first.c_str(), got, scores[i]);
        }

    // d2 and d5 tie; the tie rule orders them by doc id, whatever the input order.
    const std::vector<std::string> want{"d2", "d5", "d4", "d1", "d3"};
    std::mt19937_64 rng(303);
    for (int perm = 0; perm < 20; ++perm) {
        auto shuffled = chunks;
        std::shuffle(shuffled.begin(), shuffled.end(), rng);
        auto r = bm25_search("cat dog", shuffled, 10, params);
        std::vector<std::string> got;
        for (const auto& d : r) got.push_back(d.doc_id);
        c.expectf(got == want, "permutation %d ranked differently", perm);
    }
}

// --- 4 -----------------------------------------------------------------------

void aggregation(Check& c) {
    for (auto mode : {VectorMode::kSingle, VectorMode::kMulti}) {
        std::mt19937_64 rng(mode == VectorMode::kSingle ? 401 : 402);
        ProviderDescriptor d{"agg", Modality::kText, mode, 12, false, {}, {}};
        std::vector<std::string> docs;
        for (int i = 0; i < 50; ++i) docs.push_back("doc" + std::to_string(i));
        std::vector<UnitEmbedding> es;
        for (int u = 0; u < 200; ++u) {
            const auto& doc = docs[rng() % docs.size()];
            const std::size_t rows = mode == VectorMode::kSingle ? 1 : 1 + rng() % 5;
            es.push_back(unit(doc, doc + "#u" + std::to_string(u), random_matrix(rng, rows, 12)));
        }
        auto idx = build_index(RepresentationKind::kTextOnly, d, docs, es, {});
        auto q = random_matrix(rng, mode == VectorMode::kSingle ? 1 : 4, 12);

        // Exhaustive scan over every unit, then group by document and take the max.
        std::map<std::string, double> best;
        for (const auto& id : docs) best[id] = kUnrankable;
        for (const auto& e : es) {
            const double s = mode == VectorMode::kSingle ? score_single(q.row(0), e.vectors.row(0))
                                                         : score_maxsim(q, e.vectors);
            best[e.doc_id] = std::max(best[e.doc_id], s);
        }
        std::vector<ScoredDoc> expect;
        for (const auto& [id, s] : best) expect.push_back({id, s, {}});
        sort_ranking(expect);

        for (std::size_t k = 1; k <= docs.size(); ++k) {
            auto got = doc_scores({mode, q}, idx, {k, 1 + k % 4});
            c.expectf(got.size() == k, "%s k=%zu: %zu results", std::string(to_string(mode)).c_str(), k, got.size());
            for (std::size_t i = 0; i < std::min(k, got.size()); ++i)
                c.expectf(got[i].doc_id == expect[i].doc_id && got[i].score == expect[i].score,
                          "%s k=%zu rank %zu: %s vs %s", std::string(to_string(mode)).c_str(), k, i + 1,
                          got[i].doc_id.c_str(), expect[i].doc_id.c_str());
        }
    }
}

// --- 5, 6 --------------------------------------------------------------------

void golden_corpus(Check& c) {
    auto cases = golden::list(kData / "golden");
    c.expectf(cases.size() == 10, "%zu golden projects, want 10", cases.size());
    for (const auto& g : cases)
        for (auto& f : golden::check(g).failures) c.expect(false, f);
}

void representation_invariants(Check& c) {
    std::size_t checked = 0;
    for (const auto& g : golden::list(kData / "golden")) {
        auto r = golden::check(g);
        if (!r.doc) continue;
        ++checked;
        for (std::size_t size : {4, 16, 512})
            for (auto& f : golden::check_representations(*r.doc, {size, size / 4, {}})) c.expect(false, f);
    }
    c.expectf(checked == 9, "%zu ingestible projects, want 9", checked);
}

// --- 7 -----------------------------------------------------------------------

void index_round_trip(Check& c) {
    const fs::path dir = fs::temp_directory_path() / ("texdr-acceptance-" + std::to_string(std::random_device{}()));
    fs::create_directories(dir);
    for (int precision : {4, 2}) {
        std::mt19937_64 rng(700 + precision);
        ProviderDescriptor d{"multi", Modality::kMultimodal, VectorMode::kMulti, 32, false, 1000, 14};
        std::vector<std::string> docs{"a", "b", "c", "empty"};
        std::vector<UnitEmbedding> es;
        for (int u = 0; u < 12; ++u) {
            const auto& doc = docs[u % 3];
            es.push_back(unit(doc, doc + "#c" + std::to_string(u), random_matrix(rng, rng() % 9, 32)));
        }
        IndexManifest m{256, 32, 1000, precision, "rt"};
        auto idx = build_index(RepresentationKind::kInterleaved, d, docs, es, m);
        const auto path = dir / ("idx" + std::to_string(precision));
        save_index(idx, path);
        auto back = load_index(path);
        c.expectf(back == idx, "f%d: loaded index differs", precision * 8);
        auto bytes = serialize_index(idx);
        c.expectf(locate_payload(bytes).length == index_size_bytes(idx), "f%d: size %llu vs payload %llu",
                  precision * 8, static_cast<unsigned long long>(index_size_bytes(idx)),
                  static_cast<unsigned long long>(locate_payload(bytes).length));
        c.expectf(serialize_index(back) == bytes, "f%d: re-serialization differs", precision * 8);
    }
    fs::remove_all(dir);

    ProviderDescriptor d{"wide", Modality::kText, VectorMode::kSingle, 4096, true, {}, {}};
    std::vector<std::string> docs;
    std::vector<UnitEmbedding> es;
    for (int i = 0; i < 100; ++i) {
        docs.push_back("d" + std::to_string(i));
        es.push_back(unit(docs.back(), docs.back() + "#c0000", Matrix(1, 4096)));
    }
    auto wide = build_index(RepresentationKind::kTextOnly, d, docs, es, {});
    c.expectf(index_size_bytes(wide) == 1638400, "100x4096 f32 reports %llu bytes",
              static_cast<unsigned long long>(index_size_bytes(wide)));
    c.expect(locate_payload(serialize_index(wide)).length == 1638400, "100x4096 f32 payload length");
}

// --- 8 -----------------------------------------------------------------------

void pixel_budget(Check& c) {
    std::mt19937_64 rng(808);
    for (int i = 0; i < 10000; ++i) {
        const auto w = static_cast<std::uint32_t>(1 + rng() % 30000);
        const auto h = static_cast<std::uint32_t>(1 + rng() % 30000);
        const std::uint64_t budget = 1 + rng() % 100000000;
        auto s = resize_for_budget(w, h, budget);
        c.expectf(std::uint64_t{s.width} * s.height <= budget, "%ux%u budget %llu -> %ux%u", w, h,
                  static_cast<unsigned long long>(budget), s.width, s.height);
        c.expectf(resize_for_budget(s.width, s.height, budget) == s, "%ux%u budget %llu not idempotent", w, h,
                  static_cast<unsigned long long>(budget));
    }
    c.expect(estimate_visual_tokens(28, 28, 14) == 4, "estimate_visual_tokens(28, 28, 14) != 4");
}

// --- 9 -----------------------------------------------------------------------

void difficulty_filter_behavior(Check& c) {
    auto corpus = planted::filter_corpus(100, 40, 40);
    c.expect(corpus.verbatim.size() == 40 && corpus.paraphrased.size() == 40, "query counts");

    // Paraphrases must share no words with their gold document.
    std::map<std::string, std::set<std::string>> words;
    for (const auto& ch : corpus.chunks)
        for (auto t : text::tokens(ch.text)) words[ch.doc_id].insert(text::to_lower(t));
    for (const auto& q : corpus.paraphrased)
        for (auto t : text::tokens(q.text))
            c.expectf(!words[q.gold_doc_id].count(text::to_lower(t)), "%s shares '%s' with its gold",
                      q.query_id.c_str(), std::string(t).c_str());

    Bm25Index idx(corpus.chunks, corpus.doc_ids);
    auto all = corpus.verbatim;
    all.insert(all.end(), corpus.paraphrased.begin(), corpus.paraphrased.end());
    auto r = difficulty_filter(all, idx, {}, 5, 4);
    std::set<std::string> removed, kept;
    for (const auto& q : r.removed) removed.insert(q.query_id);
    for (const auto& q : r.kept) kept.insert(q.query_id);
    for (const auto& q : corpus.verbatim) c.expectf(removed.count(q.query_id), "verbatim %s kept", q.query_id.c_str());
    for (const auto& q : corpus.paraphrased)
        c.expectf(kept.count(q.query_id), "paraphrase %s removed", q.query_id.c_str());
}

// --- 10 ----------------------------------------------------------------------

void mini_benchmark(Check& c) {
    HashProvider provider(planted::hash_descriptor());
    auto full = planted::benchmark(20);
    auto report = evaluate(full.queries, planted::text_index(full.docs, provider), provider, {});
    c.expectf(report.mean_ndcg == 1.0, "aggregate nDCG@10 %.6f", report.mean_ndcg);
    c.expectf(report.queries.size() == 20, "%zu evaluated queries", report.queries.size());

    const std::size_t dropped = 7;
    auto holed = planted::benchmark(20, dropped);
    auto after = evaluate(holed.queries, planted::text_index(holed.docs, provider), provider, {});
    for (const auto& q : after.queries) {
        const double want = q.gold_doc_id == planted::doc_name(dropped) ? 0.0 : 1.0;
        c.expectf(q.ndcg == want, "%s scored %.6f after deletion, want %.0f", q.query_id.c_str(), q.ndcg, want);
    }
}

// --- 11 ----------------------------------------------------------------------

void pipeline_determinism(Check& c) {
    const fs::path fixtures = kData / "fixtures" / "pipeline";
    auto docs = scripted::pipeline_corpus();
    auto bm25 = scripted::bm25_corpus(docs);
    auto replay = [&](std::size_t workers) {
        ReplayTransport transport(fixtures);
        LlmService llm(transport);
        PipelineOptions o;
        o.workers = workers;
        return run_pipeline(docs, bm25, llm, o);
    };
    auto first = replay(1);
    auto second = replay(4);
    const auto a = scripted::serialize(first), b = scripted::serialize(second);
    c.expect(a == b, "two replays serialize differently");
    c.expect(a == golden::slurp(fixtures / "expected_run.txt"), "replay differs from the recorded run");
    c.expect(first.stats.monotone(), "stage counts increase: " + first.stats.to_json().dump());
    c.expect(!first.final_queries.empty(), "no final queries");
    for (auto type : kEvidenceTypes)
        c.expectf(first.stats.count(Stage::kGenerated, type) > first.stats.count(Stage::kFinal, type),
                  "%s: no attrition between generation and final", std::string(to_string(type)).c_str());
}

// --- 12 ----------------------------------------------------------------------

void figure_text(Check& c) {
    auto chunks = chunk_text(figure_fixture::document_text(), {figure_fixture::kChunkSize, 0, {}}, "doc");
    auto figs = figure_fixture::figures();
    const auto& labels = figure_fixture::labels();
    c.expectf(labels.size() == 12, "%zu labeled pairs", labels.size());
    for (const auto& p : labels) {
        auto d = figure_text_diagnostics(chunks.at(p.chunk), chunks, figs.at(p.figure));
        c.expectf(d.near_figure == p.near, "chunk %zu / figure %zu: near", p.chunk, p.figure);
        c.expectf(d.references_figure == p.references, "chunk %zu / figure %zu: reference", p.chunk, p.figure);
        c.expectf(d.contains_caption_info == p.caption, "chunk %zu / figure %zu: caption", p.chunk, p.figure);
    }
}

struct Criterion {
    int id;
    const char* name;
    std::function<void(Check&)> run;
    double limit_s;  // 0 means untimed
};

}  // namespace

int main() {
    const std::vector<Criterion> criteria{
        {1, "nDCG matches general DCG/IDCG oracle", ndcg_oracle, 1.0},
        {2, "MaxSim matches brute force", maxsim_oracle, 1.0},
        {3, "BM25 matches hand-derived Okapi scores", bm25_oracle, 1.0},
        {4, "grouped per-document max equals exhaustive scan", aggregation, 0.0},
        {5, "golden LaTeX corpus", golden_corpus, 0.0},
        {6, "representation invariants on golden corpus", representation_invariants, 0.0},
        {7, "index round trip and size", index_round_trip, 0.0},
        {8, "pixel budget", pixel_budget, 0.0},
        {9, "difficulty filter on planted corpus", difficulty_filter_behavior, 10.0},
        {10, "planted-evidence mini-benchmark", mini_benchmark, 30.0},
        {11, "pipeline replay determinism", pipeline_determinism, 0.0},
        {12, "figure-text diagnostics on labeled pairs", figure_text, 0.0},
    };

    int failed = 0;
    for (const auto& cr : criteria) {
        Check check;
        const auto t0 = std::chrono::steady_clock::now();
        try {
            cr.run(check);
        } catch (const std::exception& e) {
            check.expect(false, std::string("exception: ") + e.what());
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (cr.limit_s > 0 && secs >= cr.limit_s) {
            std::ostringstream os;
            os << "took " << secs << " s, limit " << cr.limit_s << " s";
            check.expect(false, os.str());
        }
        const bool ok = check.failures.empty();
        failed += !ok;
        std::printf("%s  %2d  %-50s %8.3f s\n", ok ? "PASS" : "FAIL", cr.id, cr.name, secs);
        const std::size_t shown = std::min<std::size_t>(check.failures.size(), 10);
        for (std::size_t i = 0; i < shown; ++i) std::printf("        %s\n", check.failures[i].c_str());
        if (check.failures.size() > shown) std::printf("        ... %zu more\n", check.failures.size() - shown);
    }
    std::printf("%zu/%zu criteria passed\n", criteria.size() - failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
