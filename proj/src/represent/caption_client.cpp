// Copyright 2026 The texdr Authors
// SPDX-License-Identifier: Apache-2.0

#include "texdr/embedding.hpp"
#include "texdr/error.hpp"

namespace texdr {

using nlohmann::json;

CaptionMap request_captions(const IngestedDocument& doc, Transport& transport, const std::string& model,
                            const RetryPolicy& retry, const std::string& route) {
    json figures = json::array();
    for (std::size_t f = 0; f < doc.structure.figures.size(); ++f) {
        json images = json::array();
        for (const auto& a : doc.assets)
            if (a.figure_index == f && a.embeddable()) images.push_back(base64_encode(a.png));
        if (!images.empty()) figures.push_back({{"figure_id", figure_id(f)}, {"images", std::move(images)}});
    }
    CaptionMap out;
    if (figures.empty()) return out;
    json body{{"model", model}, {"doc_id", doc.doc_id}, {"figures", std::move(figures)}};
    json response = with_retry(retry, [&] { return transport.post(route, body); });
    if (!response.is_object() || !response.contains("captions") || !response["captions"].is_object())
        throw Error(ErrorCode::kProviderError, "caption response lacks a captions object");
    for (const auto& [id, text] : response["captions"].items())
        if (text.is_string() && !text.get_ref<const std::string&>().empty()) out[id] = text.get<std::string>();
    return out;
}

}  // namespace texdr
