// Copyright 2026 The texdr Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "texdr/diagnostics.hpp"
#include "texdr/document.hpp"
#include "texdr/embedding.hpp"
#include "texdr/retrieval.hpp"
#include "texdr/transport.hpp"

namespace texdr {

enum class EvidenceType { kText, kTable, kFigure };
enum class Stage { kGenerated, kDecontextualized, kFiltered, kVerified, kFinal };

inline constexpr std::array kEvidenceTypes{EvidenceType::kText, EvidenceType::kTable, EvidenceType::kFigure};
inline constexpr std::array kStages{Stage::kGenerated, Stage::kDecontextualized, Stage::kFiltered, Stage::kVerified,
                                    Stage::kFinal};

std::string_view to_string(EvidenceType t) noexcept;
std::string_view to_string(Stage s) noexcept;
std::optional<EvidenceType> parse_evidence_type(std::string_view s) noexcept;
std::optional<Stage> parse_stage(std::string_view s) noexcept;

struct Query {
    std::string query_id;
    std::string text;
    EvidenceType evidence_type = EvidenceType::kText;
    std::string gold_doc_id;
    Stage stage = Stage::kGenerated;
    std::optional<std::string> evidence_ref;  // figure or table id within the gold doc
    nlohmann::json audit = nlohmann::json::object();

    // Moves forward only; throws InvalidArgument on a backward move.
    void advance(Stage to);

    bool operator==(const Query&) const = default;
};

nlohmann::json to_json(const Query& q);
Query query_from_json(const nlohmann::json& j);

void write_queries(const std::filesystem::path& path, const std::vector<Query>& queries);
std::vector<Query> read_queries(const std::filesystem::path& path);

// Tab-separated sheet for human review: id, type, gold, text, original, rationale, flags.
void write_review_export(const std::filesystem::path& path, const std::vector<Query>& queries);

namespace prompts {

extern const std::string_view kGenerateText;
extern const std::string_view kDecontextualize;
extern const std::string_view kVerify;

// Template ids sent to the LLM service.
inline constexpr std::string_view kGenerateTextId = "generate_text";
inline constexpr std::string_view kGenerateTableId = "generate_table";
inline constexpr std::string_view kGenerateFigureId = "generate_figure";
inline constexpr std::string_view kDecontextualizeId = "decontextualize";
inline constexpr std::string_view kVerifyId = "verify";

std::string_view system_prompt(std::string_view template_id);

// Replaces {name} placeholders from `variables` (string values only).
std::string render(std::string_view tmpl, const nlohmann::json& variables);

}  // namespace prompts

/// LLM stages over the shared transport:
///   request  {prompt_template_id, system_prompt, variables}
///   response {text} holding the model's JSON output, or {verdict} for verification
class LlmService {
public:
    LlmService(Transport& transport, RetryPolicy retry = {}, std::string route = "/v1/complete");

    // Returns the model output parsed as JSON; a bare string output is returned as a
    // JSON string. Transport failures surface as Error(kServiceError) after retries.
    nlohmann::json complete(std::string_view template_id, const nlohmann::json& variables);

private:
    Transport& transport_;
    RetryPolicy retry_;
    std::string route_;
};

struct GenerateResult {
    std::vector<Query> queries;
    std::size_t candidates = 0;  // service calls made
    std::size_t nulls = 0;       // service declined
    Diagnostics diagnostics;
};

struct GenerateOptions {
    std::size_t workers = 1;
    std::size_t max_text_chars = 60000;  // document text budget per generation call
};

GenerateResult generate_queries(const IngestedDocument& doc, EvidenceType type, LlmService& llm,
                                const GenerateOptions& options = {});

struct DecontextResult {
    std::optional<Query> query;  // nullopt when the service rejected the question
    std::string rationale;
    bool flagged = false;  // rewritten text still has deictic wording
};

DecontextResult decontextualize(const Query& q, LlmService& llm);

// Deictic phrases that should not survive decontextualization.
std::vector<std::string> deictic_matches(std::string_view text);

struct FilterResult {
    std::vector<Query> kept;
    std::vector<Query> removed;
};

/// Removes a query iff its gold document ranks <= cutoff under BM25. Ranks are
/// recorded in audit["bm25_rank"].
FilterResult difficulty_filter(const std::vector<Query>& queries, const Bm25Index& corpus, const Bm25Params& params,
                               std::size_t cutoff = 5, std::size_t workers = 1);

struct Verdict {
    bool is_valid = false;
    long long score = 0;
    std::string decision_rationale;
    long long confidence = 0;
    std::vector<std::string> failure_modes;
};

// Throws Error(kMalformedVerdict).
Verdict parse_verdict(const nlohmann::json& output);

struct VerifyResult {
    std::vector<Query> valid;
    std::vector<Query> invalid;
    std::vector<Query> manual_review;
};

VerifyResult verify_queries(const std::vector<Query>& queries, LlmService& llm, std::size_t workers = 1);

// No prompt exists for naturalization; queries move to kFinal unchanged.
std::vector<Query> naturalize(std::vector<Query> queries);

class PipelineStats {
public:
    void add(Stage stage, EvidenceType type, std::size_t n = 1);
    std::size_t count(Stage stage, EvidenceType type) const;
    // True when counts never increase from one stage to the next, per type.
    bool monotone() const;
    nlohmann::json to_json() const;

private:
    std::array<std::array<std::size_t, kEvidenceTypes.size()>, kStages.size()> counts_{};
};

struct PipelineOptions {
    std::vector<EvidenceType> types{EvidenceType::kText, EvidenceType::kTable, EvidenceType::kFigure};
    std::size_t cutoff = 5;
    Bm25Params bm25;
    std::size_t workers = 1;
    GenerateOptions generate;
};

struct PipelineRun {
    std::vector<Query> final_queries;
    std::vector<Query> rejected;       // declined, filtered out, or judged invalid
    std::vector<Query> manual_review;  // malformed verdicts
    PipelineStats stats;
    std::size_t generation_nulls = 0;
    Diagnostics diagnostics;
};

PipelineRun run_pipeline(const std::vector<IngestedDocument>& docs, const Bm25Index& corpus, LlmService& llm,
                         const PipelineOptions& options = {});

}  // namespace texdr
