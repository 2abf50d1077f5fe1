// Copyright 2026 The texdr Authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <cstdio>
#include <set>
#include <sstream>

#include "texdr/error.hpp"
#include "texdr/evaluation.hpp"
#include "texdr/parallel.hpp"

namespace texdr {

using nlohmann::json;

double ndcg_from_rank(std::size_t rank, std::size_t k) {
    if (rank == 0 || rank > k) return 0.0;
    return 1.0 / std::log2(static_cast<double>(rank) + 1.0);
}

double ndcg_at_k(const std::vector<std::string>& ranked, std::string_view gold, std::size_t k) {
    const std::size_t limit = std::min(k, ranked.size());
    for (std::size_t i = 0; i < limit; ++i)
        if (ranked[i] == gold) return ndcg_from_rank(i + 1, k);
    return 0.0;
}

EvalReport evaluate(const std::vector<Query>& queries, const Index& index, EmbeddingProvider& provider,
                    const EvalOptions& options) {
    const auto ids = index.doc_ids();
    const std::set<std::string> known(ids.begin(), ids.end());
    for (const auto& q : queries)
        if (!known.count(q.gold_doc_id))
            throw Error(ErrorCode::kGoldMissing, q.query_id + ": gold document " + q.gold_doc_id + " not in index");
    if (provider.descriptor().dimension != index.provider().dimension ||
        provider.descriptor().vector_mode != index.provider().vector_mode)
        throw Error(ErrorCode::kInvalidArgument, "query provider " + provider.descriptor().name +
                                                     " does not match index provider " + index.provider().name);

    EvalReport report;
    report.k = options.k;
    report.index_size_bytes = index_size_bytes(index);
    report.queries.resize(queries.size());
    parallel_for(queries.size(), options.workers, [&](std::size_t i) {
        const auto& q = queries[i];
        QueryEmbedding qe{provider.descriptor().vector_mode, embed_query(q.text, provider, options.retry)};
        auto ranking = doc_scores(qe, index, {0, 1});
        auto& row = report.queries[i];
        row.query_id = q.query_id;
        row.evidence_type = q.evidence_type;
        row.gold_doc_id = q.gold_doc_id;
        row.rank = rank_of(ranking, q.gold_doc_id);
        row.ndcg = ndcg_from_rank(row.rank, options.k);
        row.top_doc_id = ranking.empty() ? std::string() : ranking.front().doc_id;
    });

    double total = 0.0;
    std::map<std::string, double> sums;
    for (const auto& r : report.queries) {
        total += r.ndcg;
        const std::string type(to_string(r.evidence_type));
        sums[type] += r.ndcg;
        ++report.count_by_type[type];
    }
    if (!report.queries.empty()) report.mean_ndcg = total / static_cast<double>(report.queries.size());
    for (const auto& [type, sum] : sums)
        report.mean_ndcg_by_type[type] = sum / static_cast<double>(report.count_by_type[type]);

    const auto& m = index.manifest();
    report.config = json{{"k", options.k},
                         {"representation", to_string(index.representation())},
                         {"provider", index.provider().name},
                         {"dimension", index.provider().dimension},
                         {"vector_mode", to_string(index.provider().vector_mode)},
                         {"chunk_size", m.chunk_size},
                         {"overlap", m.overlap},
                         {"max_pixels", m.max_pixels ? json(*m.max_pixels) : json(nullptr)},
                         {"precision", m.precision},
                         {"corpus_fingerprint", m.corpus_fingerprint}};
    return report;
}

json EvalReport::to_json() const {
    json rows = json::array();
    for (const auto& r : queries)
        rows.push_back({{"query_id", r.query_id},
                        {"evidence_type", to_string(r.evidence_type)},
                        {"gold_doc_id", r.gold_doc_id},
                        {"rank", r.rank ? json(r.rank) : json(nullptr)},
                        {"ndcg", r.ndcg},
                        {"top_doc_id", r.top_doc_id}});
    return json{{"k", k},
                {"mean_ndcg", mean_ndcg},
                {"mean_ndcg_by_type", mean_ndcg_by_type},
                {"count_by_type", count_by_type},
                {"num_queries", queries.size()},
                {"index_size_bytes", index_size_bytes},
                {"config", config},
                {"queries", std::move(rows)}};
}

std::string EvalReport::to_table() const {
    std::ostringstream out;
    char line[160];
    const std::string metric = "nDCG@" + std::to_string(k);
    std::snprintf(line, sizeof line, "%-10s %8s %10s\n", "type", "queries", metric.c_str());
    out << line;
    for (const auto& [type, mean] : mean_ndcg_by_type) {
        std::snprintf(line, sizeof line, "%-10s %8zu %10.4f\n", type.c_str(), count_by_type.at(type), mean);
        out << line;
    }
    std::snprintf(line, sizeof line, "%-10s %8zu %10.4f\n", "all", queries.size(), mean_ndcg);
    out << line;
    out << "index_size_bytes " << index_size_bytes << '\n';
    return out.str();
}

std::string EvalReport::to_csv() const {
    auto quote = [](const std::string& s) {
        if (s.find_first_of(",\"\n") == std::string::npos) return s;
        std::string q = "\"";
        for (char c : s) q += c == '"' ? std::string("\"\"") : std::string(1, c);
        return q + "\"";
    };
    std::ostringstream out;
    out << "query_id,evidence_type,gold_doc_id,rank,ndcg,top_doc_id\n";
    char num[32];
    for (const auto& r : queries) {
        std::snprintf(num, sizeof num, "%.12g", r.ndcg);
        out << quote(r.query_id) << ',' << to_string(r.evidence_type) << ',' << quote(r.gold_doc_id) << ','
            << (r.rank ? std::to_string(r.rank) : std::string()) << ',' << num << ',' << quote(r.top_doc_id) << '\n';
    }
    return out.str();
}

}  // namespace texdr
