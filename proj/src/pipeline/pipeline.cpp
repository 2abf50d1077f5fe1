// Copyright 2026 The texdr Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <regex>

#include "texdr/error.hpp"
#include "texdr/parallel.hpp"
#include "texdr/query_pipeline.hpp"
#include "texdr/text.hpp"

namespace texdr {

using nlohmann::json;

std::string_view to_string(EvidenceType t) noexcept {
    switch (t) {
        case EvidenceType::kText: return "text";
        case EvidenceType::kTable: return "table";
        case EvidenceType::kFigure: return "figure";
    }
    return "text";
}

std::string_view to_string(Stage s) noexcept {
    switch (s) {
        case Stage::kGenerated: return "generated";
        case Stage::kDecontextualized: return "decontextualized";
        case Stage::kFiltered: return "filtered";
        case Stage::kVerified: return "verified";
        case Stage::kFinal: return "final";
    }
    return "generated";
}

std::optional<EvidenceType> parse_evidence_type(std::string_view s) noexcept {
    for (auto t : kEvidenceTypes)
        if (to_string(t) == s) return t;
    return std::nullopt;
}

std::optional<Stage> parse_stage(std::string_view s) noexcept {
    for (auto st : kStages)
        if (to_string(st) == s) return st;
    return std::nullopt;
}

void Query::advance(Stage to) {
    if (to < stage)
        throw Error(ErrorCode::kInvalidArgument, query_id + ": cannot move from " + std::string(to_string(stage)) +
                                                     " back to " + std::string(to_string(to)));
    stage = to;
}

json to_json(const Query& q) {
    json j{{"query_id", q.query_id},
           {"text", q.text},
           {"evidence_type", to_string(q.evidence_type)},
           {"gold_doc_id", q.gold_doc_id},
           {"stage", to_string(q.stage)}};
    if (q.evidence_ref) j["evidence_ref"] = *q.evidence_ref;
    j["audit"] = q.audit;
    return j;
}

Query query_from_json(const json& j) {
    try {
        Query q;
        q.query_id = j.at("query_id").get<std::string>();
        q.text = j.at("text").get<std::string>();
        auto type = parse_evidence_type(j.at("evidence_type").get<std::string>());
        auto stage = parse_stage(j.value("stage", std::string("generated")));
        if (!type) throw Error(ErrorCode::kInvalidArgument, q.query_id + ": unknown evidence_type");
        if (!stage) throw Error(ErrorCode::kInvalidArgument, q.query_id + ": unknown stage");
        q.evidence_type = *type;
        q.stage = *stage;
        q.gold_doc_id = j.at("gold_doc_id").get<std::string>();
        if (j.contains("evidence_ref") && j["evidence_ref"].is_string()) q.evidence_ref = j["evidence_ref"].get<std::string>();
        if (j.contains("audit") && j["audit"].is_object()) q.audit = j["audit"];
        if (text::trim(q.text).empty()) throw Error(ErrorCode::kInvalidArgument, q.query_id + ": empty query text");
        return q;
    } catch (const json::exception& e) {
        throw Error(ErrorCode::kInvalidArgument, std::string("query record: ") + e.what());
    }
}

void write_queries(const std::filesystem::path& path, const std::vector<Query>& queries) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
    for (const auto& q : queries) out << to_json(q).dump() << '\n';
}

std::vector<Query> read_queries(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
    std::vector<Query> out;
    std::string line;
    for (std::size_t n = 1; std::getline(in, line); ++n) {
        if (text::trim(line).empty()) continue;
        try {
            out.push_back(query_from_json(json::parse(line)));
        } catch (const json::parse_error& e) {
            throw Error(ErrorCode::kInvalidArgument, path.string() + ":" + std::to_string(n) + ": " + e.what());
        }
    }
    return out;
}

namespace {

std::string one_line(std::string s) {
    for (char& c : s)
        if (c == '\t' || c == '\n' || c == '\r') c = ' ';
    return s;
}

std::string audit_string(const Query& q, const char* key) {
    auto it = q.audit.find(key);
    return it != q.audit.end() && it->is_string() ? it->get<std::string>() : std::string();
}

}  // namespace

void write_review_export(const std::filesystem::path& path, const std::vector<Query>& queries) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
    out << "query_id\tevidence_type\tgold_doc_id\ttext\toriginal_text\trationale\tflags\n";
    for (const auto& q : queries) {
        std::string flags;
        if (auto it = q.audit.find("flags"); it != q.audit.end() && it->is_array())
            for (const auto& f : *it) flags += (flags.empty() ? "" : ",") + f.get<std::string>();
        out << one_line(q.query_id) << '\t' << to_string(q.evidence_type) << '\t' << one_line(q.gold_doc_id) << '\t'
            << one_line(q.text) << '\t' << one_line(audit_string(q, "original_text")) << '\t'
            << one_line(audit_string(q, "decontext_rationale")) << '\t' << flags << '\n';
    }
}

// ---------------------------------------------------------------------------
// LLM service

LlmService::LlmService(Transport& transport, RetryPolicy retry, std::string route)
    : transport_(transport), retry_(std::move(retry)), route_(std::move(route)) {}

namespace {

// Model output often arrives wrapped in a markdown code fence.
std::string_view strip_fence(std::string_view s) {
    s = text::trim(s);
    if (s.substr(0, 3) != "```") return s;
    auto nl = s.find('\n');
    if (nl == std::string_view::npos) return s;
    s.remove_prefix(nl + 1);
    if (auto end = s.rfind("```"); end != std::string_view::npos) s = s.substr(0, end);
    return text::trim(s);
}

}  // namespace

json LlmService::complete(std::string_view template_id, const json& variables) {
    json body{{"prompt_template_id", template_id},
              {"system_prompt", prompts::system_prompt(template_id)},
              {"variables", variables}};
    json response = with_retry(retry_, [&] {
        try {
            return transport_.post(route_, body);
        } catch (const Error& e) {
            if (e.code() == ErrorCode::kProviderError) throw Error(ErrorCode::kServiceError, e.what());
            throw;
        }
    });
    if (!response.is_object()) throw Error(ErrorCode::kServiceError, "LLM response is not an object");
    if (response.contains("verdict")) return response["verdict"];
    if (!response.contains("text")) return response;
    const auto& t = response["text"];
    if (t.is_null()) return nullptr;
    if (!t.is_string()) return t;
    auto body_text = strip_fence(t.get_ref<const std::string&>());
    try {
        return json::parse(body_text);
    } catch (const json::parse_error&) {
        return json(std::string(body_text));
    }
}

// ---------------------------------------------------------------------------
// generation

namespace {

struct Candidate {
    std::string query_id;
    std::string template_id;
    std::optional<std::string> evidence_ref;
    std::string evidence_text;
};

std::string clip(std::string_view s, std::size_t limit) {
    if (s.size() <= limit) return std::string(s);
    auto cut = s.rfind(' ', limit);
    return std::string(s.substr(0, cut == std::string_view::npos || cut == 0 ? limit : cut));
}

// The generated query, or nullopt when the model returned null or nothing usable.
std::optional<std::string> extract_query(const json& out) {
    if (out.is_object()) {
        auto it = out.find("query");
        if (it == out.end() || !it->is_string()) return std::nullopt;
        auto t = text::trim(it->get_ref<const std::string&>());
        return t.empty() ? std::nullopt : std::optional<std::string>(t);
    }
    if (out.is_string()) {
        auto t = text::trim(out.get_ref<const std::string&>());
        if (t.empty() || t == "null") return std::nullopt;
        return std::string(t);
    }
    return std::nullopt;
}

}  // namespace

GenerateResult generate_queries(const IngestedDocument& doc, EvidenceType type, LlmService& llm,
                                const GenerateOptions& options) {
    GenerateResult result;
    std::vector<Candidate> cands;
    char buf[32];
    switch (type) {
        case EvidenceType::kText:
            if (!text::trim(doc.normalized).empty())
                cands.push_back({doc.doc_id + "#q-text", std::string(prompts::kGenerateTextId), std::nullopt,
                                 clip(doc.normalized, options.max_text_chars)});
            break;
        case EvidenceType::kTable:
            for (std::size_t i = 0; i < doc.structure.tables.size(); ++i) {
                std::snprintf(buf, sizeof buf, "tab%03zu", i);
                cands.push_back({doc.doc_id + "#q-" + buf, std::string(prompts::kGenerateTableId), std::string(buf),
                                 clip(doc.structure.tables[i].text, options.max_text_chars)});
            }
            break;
        case EvidenceType::kFigure:
            for (std::size_t i = 0; i < doc.structure.figures.size(); ++i) {
                const auto& caption = doc.structure.figures[i].caption;
                if (text::trim(caption).empty()) {
                    result.diagnostics.add("uncaptioned_figure", doc.doc_id + " " + figure_id(i));
                    continue;
                }
                cands.push_back({doc.doc_id + "#q-" + figure_id(i), std::string(prompts::kGenerateFigureId),
                                 figure_id(i), caption});
            }
            break;
    }

    std::vector<std::optional<std::string>> outputs(cands.size());
    parallel_for(cands.size(), options.workers, [&](std::size_t i) {
        outputs[i] = extract_query(llm.complete(cands[i].template_id, json{{"paper_text", cands[i].evidence_text}}));
    });
    result.candidates = cands.size();
    for (std::size_t i = 0; i < cands.size(); ++i) {
        if (!outputs[i]) {
            ++result.nulls;
            continue;
        }
        Query q;
        q.query_id = cands[i].query_id;
        q.text = *outputs[i];
        q.evidence_type = type;
        q.gold_doc_id = doc.doc_id;
        q.evidence_ref = cands[i].evidence_ref;
        q.audit["template"] = cands[i].template_id;
        q.audit["generated_text"] = q.text;
        result.queries.push_back(std::move(q));
    }
    return result;
}

// ---------------------------------------------------------------------------
// decontextualization

std::vector<std::string> deictic_matches(std::string_view text) {
    static const std::regex patterns[] = {
        std::regex(R"(\b(this|these|that|those)\s+(figures?|fig\.|tables?|plots?|graphs?|panels?|images?|diagrams?|charts?|results|paper|document|study|section)\b)",
                   std::regex::icase),
        std::regex(R"(\bthe\s+(figures?|fig\.|tables?|plots?|graphs?|panels?|images?|diagrams?|charts?)\b)",
                   std::regex::icase),
        std::regex(R"(\b(shown|depicted|illustrated|listed|given|presented|reported)\s+(above|below)\b)",
                   std::regex::icase),
        std::regex(R"(\b(figure|table|panel)\s+(above|below)\b)", std::regex::icase),
    };
    std::vector<std::string> out;
    const std::string s(text);
    for (const auto& re : patterns)
        for (std::sregex_iterator it(s.begin(), s.end(), re), end; it != end; ++it) out.push_back(it->str());
    return out;
}

DecontextResult decontextualize(const Query& q, LlmService& llm) {
    if (q.stage != Stage::kGenerated)
        throw Error(ErrorCode::kInvalidArgument, q.query_id + ": decontextualize expects a generated query");
    json out = llm.complete(prompts::kDecontextualizeId, json{{"question", q.text}});
    DecontextResult r;
    if (out.is_object() && out.contains("reasoning") && out["reasoning"].is_string())
        r.rationale = out["reasoning"].get<std::string>();
    auto rewritten = extract_query(out.is_object() ? out : json(nullptr));
    if (!rewritten) {
        if (r.rationale.empty() && !out.is_object()) r.rationale = "unusable rewrite output";
        return r;
    }
    Query next = q;
    next.text = *rewritten;
    next.advance(Stage::kDecontextualized);
    next.audit["original_text"] = q.text;
    next.audit["decontext_rationale"] = r.rationale;
    if (auto hits = deictic_matches(next.text); !hits.empty()) {
        r.flagged = true;
        next.audit["flags"] = json::array({"deictic_reference"});
        next.audit["deictic_matches"] = hits;
    }
    r.query = std::move(next);
    return r;
}

// ---------------------------------------------------------------------------
// difficulty filter

FilterResult difficulty_filter(const std::vector<Query>& queries, const Bm25Index& corpus, const Bm25Params& params,
                               std::size_t cutoff, std::size_t workers) {
    params.validate();
    const auto& docs = corpus.docs();
    for (const auto& q : queries)
        if (!std::binary_search(docs.begin(), docs.end(), q.gold_doc_id))
            throw Error(ErrorCode::kGoldMissing, q.query_id + ": gold document " + q.gold_doc_id + " not in corpus");

    std::vector<std::size_t> ranks(queries.size());
    parallel_for(queries.size(), workers, [&](std::size_t i) {
        auto ranking = corpus.search(queries[i].text, 0, params);
        ranks[i] = rank_of(ranking, queries[i].gold_doc_id);
    });

    FilterResult r;
    for (std::size_t i = 0; i < queries.size(); ++i) {
        Query q = queries[i];
        // An empty query yields no ranking; rank 0 means unranked, never removed.
        q.audit["bm25_rank"] = ranks[i] ? json(ranks[i]) : json(nullptr);
        if (ranks[i] != 0 && ranks[i] <= cutoff) {
            q.audit["removed_by"] = "difficulty_filter";
            r.removed.push_back(std::move(q));
        } else {
            q.advance(Stage::kFiltered);
            r.kept.push_back(std::move(q));
        }
    }
    return r;
}

// ---------------------------------------------------------------------------
// verification

Verdict parse_verdict(const json& output) {
    auto bad = [](const std::string& why) { return Error(ErrorCode::kMalformedVerdict, why); };
    if (!output.is_object()) throw bad("verdict is not a JSON object");
    auto field = [&](const char* name) -> const json& {
        auto it = output.find(name);
        if (it == output.end()) throw bad(std::string("missing field ") + name);
        return *it;
    };
    Verdict v;
    const auto& valid = field("is_valid");
    const auto& score = field("score");
    const auto& rationale = field("decision_rationale");
    const auto& confidence = field("confidence");
    if (!valid.is_boolean()) throw bad("is_valid must be boolean");
    if (!score.is_number_integer()) throw bad("score must be an integer");
    if (!rationale.is_string()) throw bad("decision_rationale must be a string");
    if (!confidence.is_number_integer()) throw bad("confidence must be an integer");
    v.is_valid = valid.get<bool>();
    v.score = score.get<long long>();
    v.decision_rationale = rationale.get<std::string>();
    v.confidence = confidence.get<long long>();
    for (const char* key : {"failure_modes", "labels"}) {
        auto it = output.find(key);
        if (it == output.end() || !it->is_array()) continue;
        for (const auto& l : *it)
            if (l.is_string()) v.failure_modes.push_back(l.get<std::string>());
    }
    return v;
}

VerifyResult verify_queries(const std::vector<Query>& queries, LlmService& llm, std::size_t workers) {
    for (const auto& q : queries)
        if (q.stage != Stage::kFiltered)
            throw Error(ErrorCode::kInvalidArgument, q.query_id + ": verify expects a filtered query");

    std::vector<json> outputs(queries.size());
    parallel_for(queries.size(), workers, [&](std::size_t i) {
        const auto& q = queries[i];
        json vars{{"decontextualized_question", q.text}};
        auto original = audit_string(q, "original_text");
        vars["original_question"] = original.empty() ? q.text : original;
        outputs[i] = llm.complete(prompts::kVerifyId, vars);
    });

    VerifyResult r;
    for (std::size_t i = 0; i < queries.size(); ++i) {
        Query q = queries[i];
        try {
            Verdict v = parse_verdict(outputs[i]);
            q.audit["verdict"] = json{{"is_valid", v.is_valid},
                                      {"score", v.score},
                                      {"decision_rationale", v.decision_rationale},
                                      {"confidence", v.confidence},
                                      {"failure_modes", v.failure_modes}};
            if (v.is_valid) {
                q.advance(Stage::kVerified);
                r.valid.push_back(std::move(q));
            } else {
                r.invalid.push_back(std::move(q));
            }
        } catch (const Error& e) {
            if (e.code() != ErrorCode::kMalformedVerdict) throw;
            q.audit["verdict_error"] = e.what();
            q.audit["raw_verdict"] = outputs[i];
            r.manual_review.push_back(std::move(q));
        }
    }
    return r;
}

std::vector<Query> naturalize(std::vector<Query> queries) {
    for (auto& q : queries) q.advance(Stage::kFinal);
    return queries;
}

// ---------------------------------------------------------------------------
// stats and the end-to-end run

void PipelineStats::add(Stage stage, EvidenceType type, std::size_t n) {
    counts_[static_cast<std::size_t>(stage)][static_cast<std::size_t>(type)] += n;
}

std::size_t PipelineStats::count(Stage stage, EvidenceType type) const {
    return counts_[static_cast<std::size_t>(stage)][static_cast<std::size_t>(type)];
}

bool PipelineStats::monotone() const {
    for (std::size_t t = 0; t < kEvidenceTypes.size(); ++t)
        for (std::size_t s = 1; s < kStages.size(); ++s)
            if (counts_[s][t] > counts_[s - 1][t]) return false;
    return true;
}

json PipelineStats::to_json() const {
    json j = json::object();
    for (auto s : kStages)
        for (auto t : kEvidenceTypes) j[std::string(to_string(s))][std::string(to_string(t))] = count(s, t);
    return j;
}

PipelineRun run_pipeline(const std::vector<IngestedDocument>& docs, const Bm25Index& corpus, LlmService& llm,
                         const PipelineOptions& options) {
    PipelineRun run;
    for (auto type : options.types) {
        std::vector<Query> generated;
        for (const auto& doc : docs) {
            auto g = generate_queries(doc, type, llm, options.generate);
            run.generation_nulls += g.nulls;
            run.diagnostics.merge(g.diagnostics);
            for (auto& q : g.queries) generated.push_back(std::move(q));
        }
        run.stats.add(Stage::kGenerated, type, generated.size());

        std::vector<DecontextResult> rewrites(generated.size());
        parallel_for(generated.size(), options.workers,
                     [&](std::size_t i) { rewrites[i] = decontextualize(generated[i], llm); });
        std::vector<Query> decontextualized;
        for (std::size_t i = 0; i < generated.size(); ++i) {
            if (rewrites[i].query) {
                decontextualized.push_back(std::move(*rewrites[i].query));
                continue;
            }
            Query dropped = generated[i];
            dropped.audit["removed_by"] = "decontextualize";
            dropped.audit["decontext_rationale"] = rewrites[i].rationale;
            run.rejected.push_back(std::move(dropped));
        }
        run.stats.add(Stage::kDecontextualized, type, decontextualized.size());

        auto filtered = difficulty_filter(decontextualized, corpus, options.bm25, options.cutoff, options.workers);
        run.stats.add(Stage::kFiltered, type, filtered.kept.size());
        for (auto& q : filtered.removed) run.rejected.push_back(std::move(q));

        auto verified = verify_queries(filtered.kept, llm, options.workers);
        run.stats.add(Stage::kVerified, type, verified.valid.size());
        for (auto& q : verified.invalid) {
            q.audit["removed_by"] = "verify";
            run.rejected.push_back(std::move(q));
        }
        for (auto& q : verified.manual_review) run.manual_review.push_back(std::move(q));

        auto final_queries = naturalize(std::move(verified.valid));
        run.stats.add(Stage::kFinal, type, final_queries.size());
        for (auto& q : final_queries) run.final_queries.push_back(std::move(q));
    }
    return run;
}

}  // namespace texdr
