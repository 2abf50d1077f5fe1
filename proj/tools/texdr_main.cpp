// Copyright 2026 The texdr Authors
// SPDX-License-Identifier: Apache-2.0

#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

#include <CLI11.hpp>

#include "run_config.hpp"
#include "texdr/document.hpp"
#include "texdr/error.hpp"
#include "texdr/evaluation.hpp"
#include "texdr/index_store.hpp"
#include "texdr/kernels.hpp"
#include "texdr/parallel.hpp"
#include "texdr/query_pipeline.hpp"
#include "texdr/text.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace texdr::cli {
namespace {

void warn(const std::string& msg) { std::cerr << "texdr: warning: " << msg << '\n'; }

void write_text(const fs::path& path, const std::string& data) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
    out << data;
}

void write_json(const fs::path& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

ChunkOptions chunk_options(const RunConfig& c) {
    ChunkOptions o;
    o.chunk_size = c.chunk_size;
    o.overlap = c.overlap;
    return o;
}

std::string corpus_fingerprint(const std::vector<IngestedDocument>& docs) {
    std::uint64_t h = text::fnv1a64("");
    for (const auto& d : docs) {
        h = text::fnv1a64(d.doc_id, h);
        h = text::fnv1a64(std::string_view("\0", 1), h);
        h = text::fnv1a64(d.normalized, h);
    }
    return text::hex64(h);
}

std::vector<IngestedDocument> load_ingested(const RunConfig& c) {
    auto docs = store::load_all(c.ingested);
    if (docs.empty()) throw Error(ErrorCode::kIo, "no ingested documents under " + c.ingested.string());
    return docs;
}

std::vector<std::string> doc_ids_of(const std::vector<IngestedDocument>& docs) {
    std::vector<std::string> ids;
    for (const auto& d : docs) ids.push_back(d.doc_id);
    return ids;
}

// ---------------------------------------------------------------------------

int cmd_ingest(const RunConfig& c, const fs::path& out_dir) {
    if (c.corpus.empty()) throw Error(ErrorCode::kInvalidArgument, "--corpus is required");
    const auto entries = corpus::list(c.corpus);
    IngestOptions opts;
    opts.flatten.lenient = c.lenient_includes;
    opts.assets.converter_command = c.converter_command;

    std::vector<std::string> errors(entries.size());
    std::vector<std::map<std::string, std::size_t>> tallies(entries.size());
    parallel_for(entries.size(), c.worker_count(), [&](std::size_t i) {
        try {
            auto doc = ingest(entries[i].doc_id, corpus::load_project(entries[i]), opts);
            tallies[i] = doc.diagnostics.tally();
            store::save(doc, out_dir / doc.doc_id);
        } catch (const Error& e) {
            errors[i] = e.what();
        }
    });

    json failed = json::array();
    std::map<std::string, std::size_t> diag;
    std::size_t ok = 0;
    for (std::size_t i = 0; i < entries.size(); ++i) {
        if (!errors[i].empty()) {
            failed.push_back({{"doc_id", entries[i].doc_id}, {"error", errors[i]}});
            continue;
        }
        ++ok;
        for (const auto& [k, n] : tallies[i]) diag[k] += n;
    }
    json report{{"documents", entries.size()}, {"ingested", ok}, {"failed", failed}, {"diagnostics", diag}};
    write_json(out_dir / "ingest_report.json", report);
    std::cout << "ingested " << ok << " of " << entries.size() << " documents, " << failed.size() << " failed\n";
    for (const auto& f : failed) std::cout << "  failed " << f["doc_id"].get<std::string>() << ": " << f["error"].get<std::string>() << '\n';
    return 0;
}

// ---------------------------------------------------------------------------

int cmd_index(const RunConfig& c, const fs::path& out) {
    if (out.empty()) throw Error(ErrorCode::kInvalidArgument, "--out is required");
    auto docs = load_ingested(c);
    auto handle = make_provider(c);
    auto& provider = *handle.provider;
    const auto copts = chunk_options(c);

    std::map<std::string, CaptionMap> file_captions;
    std::unique_ptr<Transport> caption_transport;
    if (c.representation == RepresentationKind::kTextPlusCaptions) {
        if (!c.captions.empty()) file_captions = load_caption_file(c.captions);
        else if (!c.caption_endpoint.empty() || c.fixtures == FixtureMode::kReplay)
            caption_transport = service_transport(c, c.caption_endpoint, "caption");
        else warn("no caption source given; text+captions degenerates to text");
    }

    std::vector<EmbeddingUnit> units;
    std::size_t unrepresentable = 0;
    for (const auto& doc : docs) {
        BuildResult r;
        switch (c.representation) {
            case RepresentationKind::kTextOnly: r = build_text_only(doc, copts); break;
            case RepresentationKind::kTextPlusCaptions: {
                CaptionMap caps;
                if (auto it = file_captions.find(doc.doc_id); it != file_captions.end()) caps = it->second;
                if (caption_transport) caps = request_captions(doc, *caption_transport, c.caption_model);
                r = build_text_plus_captions(doc, caps, copts);
                break;
            }
            case RepresentationKind::kFiguresOnly: r = build_figures_only(doc); break;
            case RepresentationKind::kDocAsImage: {
                std::vector<image::Blob> pages;
                if (!c.pages.empty()) pages = load_page_images(c.pages / doc.doc_id);
                else if (!c.render_command.empty()) pages = render_pages(c.render_command, doc.flat.text);
                else throw Error(ErrorCode::kInvalidArgument, "doc-image needs --pages or --render-command");
                try {
                    r = build_doc_as_image(doc, pages);
                } catch (const Error& e) {
                    if (e.code() != ErrorCode::kEmptyPages) throw;
                    r.representable = false;
                }
                break;
            }
            case RepresentationKind::kInterleaved: r = build_interleaved(doc, copts); break;
        }
        if (!r.representable) ++unrepresentable;
        for (auto& u : r.units) units.push_back(std::move(u));
    }
    if (unrepresentable)
        warn(std::to_string(unrepresentable) + " of " + std::to_string(docs.size()) + " documents have no " +
             std::string(to_string(c.representation)) + " units");

    EmbedOptions eo;
    eo.batch = c.batch;
    eo.in_flight = c.in_flight;
    eo.failure_threshold = c.failure_threshold;
    auto embedded = embed_units(units, provider, eo);
    for (const auto& f : embedded.failures) warn("embedding failed for " + f.unit_id + ": " + f.message);

    IndexManifest manifest;
    manifest.chunk_size = c.chunk_size;
    manifest.overlap = c.overlap;
    manifest.max_pixels = provider.descriptor().max_pixels;
    manifest.precision = c.precision;
    manifest.corpus_fingerprint = corpus_fingerprint(docs);
    auto index = build_index(c.representation, provider.descriptor(), doc_ids_of(docs), std::move(embedded.embeddings),
                             manifest);
    if (index.entries().empty()) warn("index is empty");
    save_index(index, out);
    std::cout << "units " << index.entries().size() << '\n';
    std::cout << "index_size_bytes " << index_size_bytes(index) << '\n';
    return 0;
}

// ---------------------------------------------------------------------------

int cmd_search(const RunConfig& c, const fs::path& index_path, const std::string& query) {
    auto index = load_index(index_path);
    auto handle = make_provider(c, &index.provider());
    QueryEmbedding qe{index.provider().vector_mode, embed_query(query, *handle.provider)};
    Diagnostics diag;
    auto ranking = doc_scores(qe, index, {c.k, c.worker_count()}, &diag);
    for (std::size_t i = 0; i < ranking.size(); ++i) {
        char line[64];
        std::snprintf(line, sizeof line, "%3zu  %.6f  ", i + 1, ranking[i].score);
        std::cout << line << ranking[i].doc_id << "  " << ranking[i].best_unit_id << '\n';
    }
    return 0;
}

int cmd_eval(const RunConfig& c, const fs::path& index_path, const fs::path& queries_path, const fs::path& out,
             const fs::path& csv) {
    auto index = load_index(index_path);
    auto queries = read_queries(queries_path);
    auto handle = make_provider(c, &index.provider());
    EvalOptions eo;
    eo.k = c.k;
    eo.workers = c.worker_count();
    auto report = evaluate(queries, index, *handle.provider, eo);
    report.config["run"] = to_json(c);
    if (!out.empty()) write_json(out, report.to_json());
    if (!csv.empty()) write_text(csv, report.to_csv());
    std::cout << report.to_table();
    return 0;
}

int cmd_filter(const RunConfig& c, const fs::path& queries_path, const fs::path& out, fs::path removed_out) {
    if (out.empty()) throw Error(ErrorCode::kInvalidArgument, "--out is required");
    auto docs = load_ingested(c);
    auto queries = read_queries(queries_path);
    std::vector<Chunk> chunks;
    for (const auto& d : docs)
        for (auto& ch : chunk_text(d.normalized, chunk_options(c), d.doc_id)) chunks.push_back(std::move(ch));
    Bm25Index bm25(std::move(chunks), doc_ids_of(docs));
    auto result = difficulty_filter(queries, bm25, c.bm25, c.cutoff, c.worker_count());
    if (removed_out.empty()) removed_out = fs::path(out).replace_extension(".removed.jsonl");
    write_queries(out, result.kept);
    write_queries(removed_out, result.removed);
    std::cout << "kept " << result.kept.size() << ", removed " << result.removed.size() << " (cutoff " << c.cutoff << ")\n";
    for (const auto& q : result.removed) std::cout << "  removed " << q.query_id << " rank " << q.audit["bm25_rank"] << '\n';
    return 0;
}

std::vector<EvidenceType> parse_types(const std::vector<std::string>& names) {
    std::vector<EvidenceType> out;
    for (const auto& n : names) {
        auto t = parse_evidence_type(n);
        if (!t) throw Error(ErrorCode::kInvalidArgument, "unknown evidence type " + n);
        out.push_back(*t);
    }
    return out;
}

int cmd_gen(const RunConfig& c, const fs::path& out, const std::vector<std::string>& types, const fs::path& stats_out,
            const fs::path& review_out) {
    if (out.empty()) throw Error(ErrorCode::kInvalidArgument, "--out is required");
    auto docs = load_ingested(c);
    auto transport = service_transport(c, c.llm_endpoint, "llm");
    LlmService llm(*transport);
    std::vector<Chunk> chunks;
    for (const auto& d : docs)
        for (auto& ch : chunk_text(d.normalized, chunk_options(c), d.doc_id)) chunks.push_back(std::move(ch));
    Bm25Index bm25(std::move(chunks), doc_ids_of(docs));

    PipelineOptions po;
    if (!types.empty()) po.types = parse_types(types);
    po.cutoff = c.cutoff;
    po.bm25 = c.bm25;
    po.workers = c.worker_count();
    auto run = run_pipeline(docs, bm25, llm, po);

    write_queries(out, run.final_queries);
    write_queries(fs::path(out).replace_extension(".rejected.jsonl"), run.rejected);
    write_queries(fs::path(out).replace_extension(".review.jsonl"), run.manual_review);
    json stats{{"stages", run.stats.to_json()},
               {"generation_nulls", run.generation_nulls},
               {"manual_review", run.manual_review.size()},
               {"monotone", run.stats.monotone()},
               {"config", to_json(c)}};
    if (!stats_out.empty()) write_json(stats_out, stats);
    if (!review_out.empty()) {
        auto all = run.final_queries;
        all.insert(all.end(), run.manual_review.begin(), run.manual_review.end());
        write_review_export(review_out, all);
    }
    std::cout << run.stats.to_json().dump(2) << '\n';
    std::cout << "final " << run.final_queries.size() << ", rejected " << run.rejected.size() << ", manual review "
              << run.manual_review.size() << '\n';
    return 0;
}

// ---------------------------------------------------------------------------

int cmd_scaling(const RunConfig& c, const fs::path& docs_list, const fs::path& out_dir,
                const std::vector<std::size_t>& sizes, std::size_t query_len) {
    if (out_dir.empty()) throw Error(ErrorCode::kInvalidArgument, "--out is required");
    auto docs = load_ingested(c);
    if (!docs_list.empty()) {
        std::ifstream in(docs_list);
        if (!in) throw Error(ErrorCode::kIo, "cannot open " + docs_list.string());
        std::set<std::string> wanted;
        for (std::string line; std::getline(in, line);)
            if (auto t = text::trim(line); !t.empty()) wanted.emplace(t);
        std::erase_if(docs, [&](const IngestedDocument& d) { return !wanted.count(d.doc_id); });
        if (docs.size() != wanted.size()) warn("some listed documents are not ingested");
    }

    ScalingOptions so;
    so.seed = c.seed;
    if (!sizes.empty()) so.sizes = sizes;
    so.query_len = query_len;

    std::vector<ScalingWindowSet> sets;
    json skipped = json::array();
    std::string windows_jsonl;
    for (const auto& d : docs) {
        try {
            // Per-document seed keeps placements independent of list order.
            ScalingOptions per_doc = so;
            per_doc.seed = text::fnv1a64(d.doc_id, c.seed ^ 0x9e3779b97f4a7c15ULL);
            auto set = build_scaling_windows(d.flat.text, per_doc, d.doc_id);
            windows_jsonl += to_json(set).dump() + "\n";
            for (const auto& w : set.windows) {
                char name[48];
                std::snprintf(name, sizeof name, "window-%05zu.tex", w.size);
                write_text(out_dir / "snippets" / d.doc_id / name, render_latex_snippet(w.text));
                if (!c.render_command.empty()) {
                    auto pages = render_pages(c.render_command, render_latex_snippet(w.text));
                    if (pages.empty()) throw Error(ErrorCode::kEmptyPages, d.doc_id + " window " + std::to_string(w.size));
                    std::snprintf(name, sizeof name, "window-%05zu", w.size);
                    std::ofstream(out_dir / "pages" / d.doc_id / name / "page-0001.png", std::ios::binary)
                        .write(reinterpret_cast<const char*>(pages[0].data()), static_cast<std::streamsize>(pages[0].size()));
                }
            }
            sets.push_back(std::move(set));
        } catch (const Error& e) {
            if (e.code() != ErrorCode::kTooShort && e.code() != ErrorCode::kEmptyPages && e.code() != ErrorCode::kIo) throw;
            skipped.push_back({{"doc_id", d.doc_id}, {"reason", e.what()}});
        }
    }
    write_text(out_dir / "windows.jsonl", windows_jsonl);

    std::vector<Query> queries;
    for (const auto& s : sets) {
        Query q;
        q.query_id = s.doc_id + "#scaling";
        q.text = s.query;
        q.gold_doc_id = s.doc_id;
        q.stage = Stage::kFinal;
        q.audit["query_begin"] = s.query_begin;
        queries.push_back(std::move(q));
    }
    write_queries(out_dir / "queries.jsonl", queries);

    // Retrieval over each window size: every document is represented by its window.
    json results = json::object();
    auto handle = make_provider(c);
    auto& provider = *handle.provider;
    const bool text_side = compatible(UnitKind::kTextChunk, provider.descriptor().modality);
    const bool image_side = compatible(UnitKind::kPageImage, provider.descriptor().modality) && !c.render_command.empty();
    if (!sets.empty() && (text_side || image_side)) {
        std::vector<std::string> ids;
        for (const auto& s : sets) ids.push_back(s.doc_id);
        for (std::size_t w = 0; w < sets.front().windows.size(); ++w) {
            std::vector<EmbeddingUnit> units;
            for (const auto& s : sets) {
                EmbeddingUnit u;
                u.doc_id = s.doc_id;
                u.unit_id = s.doc_id + "#w" + std::to_string(s.windows[w].size);
                if (text_side) {
                    u.kind = UnitKind::kTextChunk;
                    u.text = s.windows[w].text;
                } else {
                    char name[48];
                    std::snprintf(name, sizeof name, "window-%05zu", s.windows[w].size);
                    u.kind = UnitKind::kPageImage;
                    auto pages = load_page_images(out_dir / "pages" / s.doc_id / name);
                    if (pages.empty()) continue;
                    u.images.push_back({u.unit_id, pages[0]});
                }
                units.push_back(std::move(u));
            }
            EmbedOptions eo;
            eo.batch = c.batch;
            eo.in_flight = c.in_flight;
            eo.failure_threshold = c.failure_threshold;
            auto emb = embed_units(units, provider, eo);
            IndexManifest m;
            m.precision = c.precision;
            auto rep = text_side ? RepresentationKind::kTextOnly : RepresentationKind::kDocAsImage;
            auto index = build_index(rep, provider.descriptor(), ids, std::move(emb.embeddings), m);
            EvalOptions ev;
            ev.k = c.k;
            ev.workers = c.worker_count();
            auto report = evaluate(queries, index, provider, ev);
            results[std::to_string(sets.front().windows[w].size)] =
                json{{"mean_ndcg", report.mean_ndcg}, {"index_size_bytes", report.index_size_bytes}};
        }
    }
    json summary{{"documents", sets.size()},
                 {"skipped", skipped},
                 {"representation", text_side ? "text" : (image_side ? "doc-image" : "none")},
                 {"ndcg_by_window", results},
                 {"config", to_json(c)}};
    write_json(out_dir / "scaling_report.json", summary);
    std::cout << summary["ndcg_by_window"].dump(2) << '\n';
    std::cout << "windows for " << sets.size() << " documents, " << skipped.size() << " skipped\n";
    return 0;
}

int cmd_figures(const RunConfig& c, const fs::path& index_path, const fs::path& queries_path, const fs::path& out) {
    auto index = load_index(index_path);
    auto queries = read_queries(queries_path);
    auto docs = load_ingested(c);
    auto handle = make_provider(c, &index.provider());
    FigureTextOptions fo;
    fo.window = c.figure_window;
    fo.overlap_threshold = c.overlap_threshold;
    auto report = analyze_figure_queries(queries, index, *handle.provider, docs, fo, c.worker_count());
    if (!out.empty()) write_json(out, report.to_json());
    std::cout << report.to_table();
    return 0;
}

}  // namespace
}  // namespace texdr::cli

int main(int argc, char** argv) {
    using namespace texdr::cli;
    CLI::App app{"texdr: document retrieval benchmarking over LaTeX sources"};
    app.require_subcommand(1);
    app.fallthrough();
    app.set_version_flag("--version", "texdr 1.0.0");

    std::string config_path, corpus, rep, endpoint, precision, fixtures, fixture_dir, ingested, provider_kind,
        provider_name, modality, vector_mode, llm_endpoint, caption_endpoint, captions, pages, render_cmd, converter;
    std::size_t chunk_size = 0, overlap = 0, k = 0, cutoff = 0, workers = 0, dimension = 0, batch = 0, in_flight = 0;
    std::uint64_t max_pixels = 0, seed = 0;
    std::uint32_t patch_size = 0;
    double k1 = 0, b = 0;
    bool lenient = false;

    std::map<std::string, CLI::Option*> o;
    o["config"] = app.add_option("--config", config_path, "JSON run configuration; flags override it");
    o["corpus"] = app.add_option("--corpus", corpus, "corpus directory (one entry per document)");
    o["ingested"] = app.add_option("--ingested", ingested, "directory of ingested documents");
    o["rep"] = app.add_option("--rep", rep, "representation")
                   ->check(CLI::IsMember({"text", "text+captions", "figures", "doc-image", "interleaved"}));
    o["provider"] = app.add_option("--provider", provider_kind, "embedding provider kind")->check(CLI::IsMember({"hash", "remote"}));
    o["provider-name"] = app.add_option("--provider-name", provider_name, "model name sent to the provider");
    o["provider-endpoint"] = app.add_option("--provider-endpoint", endpoint, "embedding service base URL");
    o["modality"] = app.add_option("--modality", modality)->check(CLI::IsMember({"text", "image", "multimodal"}));
    o["vector-mode"] = app.add_option("--vector-mode", vector_mode)->check(CLI::IsMember({"single", "multi"}));
    o["dimension"] = app.add_option("--dimension", dimension, "embedding dimension");
    o["patch-size"] = app.add_option("--patch-size", patch_size, "vision patch size in pixels");
    o["chunk-size"] = app.add_option("--chunk-size", chunk_size, "tokens per text chunk");
    o["overlap"] = app.add_option("--overlap", overlap, "tokens shared by consecutive chunks");
    o["max-pixels"] = app.add_option("--max-pixels", max_pixels, "per-image pixel budget");
    o["precision"] = app.add_option("--precision", precision, "stored vector precision")->check(CLI::IsMember({"f32", "f16"}));
    o["k"] = app.add_option("--k", k, "ranking depth");
    o["cutoff"] = app.add_option("--cutoff", cutoff, "difficulty filter rank cutoff");
    o["bm25-k1"] = app.add_option("--bm25-k1", k1);
    o["bm25-b"] = app.add_option("--bm25-b", b);
    o["seed"] = app.add_option("--seed", seed);
    o["fixtures"] = app.add_option("--fixtures", fixtures, "service fixture mode")->check(CLI::IsMember({"record", "replay", "off"}));
    o["fixture-dir"] = app.add_option("--fixture-dir", fixture_dir);
    o["workers"] = app.add_option("--workers", workers, "worker threads (default: available parallelism)");
    o["batch"] = app.add_option("--batch", batch, "units per embedding request");
    o["in-flight"] = app.add_option("--in-flight", in_flight, "concurrent embedding requests");
    o["llm-endpoint"] = app.add_option("--llm-endpoint", llm_endpoint, "LLM service base URL");
    o["caption-endpoint"] = app.add_option("--caption-endpoint", caption_endpoint, "captioning service base URL");
    o["captions"] = app.add_option("--captions", captions, "caption file (doc_id, figure id, caption; tab-separated)");
    o["pages"] = app.add_option("--pages", pages, "directory of rendered pages, one subdirectory per document");
    o["render-command"] = app.add_option("--render-command", render_cmd, "page renderer template using {in} and {out}");
    o["converter-command"] = app.add_option("--converter-command", converter, "pdf/eps rasterizer template");
    o["lenient"] = app.add_flag("--lenient", lenient, "treat missing \\input files as empty");

    std::string out, index_path, queries_path, csv, removed, stats, review, query, docs_list;
    std::vector<std::string> types;
    std::vector<std::size_t> sizes;
    std::size_t query_len = 100, window = 0;
    double threshold = 0;

    auto* ingest = app.add_subcommand("ingest", "flatten, normalize and extract structure for every document");
    ingest->add_option("--out", out, "output directory")->required();

    auto* index = app.add_subcommand("index", "build and save an embedding index");
    index->add_option("--out", out, "index file")->required();

    auto* search = app.add_subcommand("search", "rank documents for one query");
    search->add_option("--index", index_path)->required();
    search->add_option("--query", query)->required();

    auto* eval = app.add_subcommand("eval", "nDCG evaluation of a query file against an index");
    eval->add_option("--index", index_path)->required();
    eval->add_option("--queries", queries_path)->required();
    eval->add_option("--out", out, "JSON report");
    eval->add_option("--csv", csv, "per-query CSV");

    auto* filter = app.add_subcommand("filter-queries", "BM25 difficulty filter");
    filter->add_option("--queries", queries_path)->required();
    filter->add_option("--out", out, "kept queries (JSONL)")->required();
    filter->add_option("--removed", removed, "removed queries (JSONL)");

    auto* gen = app.add_subcommand("gen-queries", "generate, decontextualize, filter and verify queries");
    gen->add_option("--out", out, "final queries (JSONL)")->required();
    gen->add_option("--types", types, "evidence types")->check(CLI::IsMember({"text", "table", "figure"}));
    gen->add_option("--stats", stats, "pipeline statistics (JSON)");
    gen->add_option("--review", review, "review export (TSV)");

    auto* scaling = app.add_subcommand("analyze-scaling", "context-length scaling windows and retrieval");
    scaling->add_option("--out", out, "output directory")->required();
    scaling->add_option("--docs", docs_list, "file listing document ids, one per line");
    scaling->add_option("--sizes", sizes, "window sizes in tokens");
    scaling->add_option("--query-len", query_len, "query length in tokens");

    auto* figures = app.add_subcommand("analyze-figures", "figure/text diagnostics for figure queries");
    figures->add_option("--index", index_path, "text-only index")->required();
    figures->add_option("--queries", queries_path)->required();
    figures->add_option("--out", out, "JSON report");
    figures->add_option("--window", window, "near-figure window in chunks");
    figures->add_option("--threshold", threshold, "caption overlap threshold");

    CLI11_PARSE(app, argc, argv);

    try {
        RunConfig c = o["config"]->count() ? load_config(config_path) : RunConfig{};
        auto set = [&](const char* name) { return o[name]->count() > 0; };
        if (set("corpus")) c.corpus = corpus;
        if (set("ingested")) c.ingested = ingested;
        if (set("rep")) c.representation = *texdr::parse_representation(rep);
        if (set("provider")) c.provider.kind = provider_kind;
        if (set("provider-name")) c.provider.descriptor.name = provider_name;
        if (set("provider-endpoint")) c.provider.endpoint = endpoint;
        if (set("modality")) c.provider.descriptor.modality = *texdr::parse_modality(modality);
        if (set("vector-mode")) c.provider.descriptor.vector_mode = *texdr::parse_vector_mode(vector_mode);
        if (set("dimension")) c.provider.descriptor.dimension = dimension;
        if (set("patch-size")) c.provider.descriptor.patch_size = patch_size;
        if (set("chunk-size")) c.chunk_size = chunk_size;
        if (set("overlap")) c.overlap = overlap;
        if (set("max-pixels")) c.max_pixels = max_pixels;
        if (set("precision")) c.precision = precision == "f16" ? 2 : 4;
        if (set("k")) c.k = k;
        if (set("cutoff")) c.cutoff = cutoff;
        if (set("bm25-k1")) c.bm25.k1 = k1;
        if (set("bm25-b")) c.bm25.b = b;
        if (set("seed")) c.seed = seed;
        if (set("fixtures")) {
            c.fixtures = fixtures == "record" ? texdr::FixtureMode::kRecord
                         : fixtures == "replay" ? texdr::FixtureMode::kReplay
                                                : texdr::FixtureMode::kOff;
        }
        if (set("fixture-dir")) c.fixture_dir = fixture_dir;
        if (set("workers")) c.workers = workers;
        if (set("batch")) c.batch = batch;
        if (set("in-flight")) c.in_flight = in_flight;
        if (set("llm-endpoint")) c.llm_endpoint = llm_endpoint;
        if (set("caption-endpoint")) c.caption_endpoint = caption_endpoint;
        if (set("captions")) c.captions = captions;
        if (set("pages")) c.pages = pages;
        if (set("render-command")) c.render_command = render_cmd;
        if (set("converter-command")) c.converter_command = converter;
        if (set("lenient")) c.lenient_includes = lenient;
        if (figures->count("--window")) c.figure_window = window;
        if (figures->count("--threshold")) c.overlap_threshold = threshold;
        c.validate();

        if (*ingest) return cmd_ingest(c, out);
        if (*index) return cmd_index(c, out);
        if (*search) return cmd_search(c, index_path, query);
        if (*eval) return cmd_eval(c, index_path, queries_path, out, csv);
        if (*filter) return cmd_filter(c, queries_path, out, removed);
        if (*gen) return cmd_gen(c, out, types, stats, review);
        if (*scaling) return cmd_scaling(c, docs_list, out, sizes, query_len);
        if (*figures) return cmd_figures(c, index_path, queries_path, out);
    } catch (const texdr::Error& e) {
        std::cerr << "texdr: error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "texdr: error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
