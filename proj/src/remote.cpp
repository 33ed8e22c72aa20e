// Copyright (c) 2026 diffurank contributors
// SPDX-License-Identifier: Apache-2.0

#include "diffurank/remote.hpp"

#include <cstdlib>

#include "httplib.h"
#include "json.hpp"

namespace diffurank {

RemoteProvider::RemoteProvider(std::string base_url, std::chrono::seconds timeout)
    : base_url_(std::move(base_url)), timeout_(timeout) {
    if (base_url_.empty()) {
        const char* env = std::getenv("DIFFURANK_REMOTE_URL");
        if (env == nullptr || *env == '\0')
            throw ProviderError("remote: no base URL given and DIFFURANK_REMOTE_URL unset");
        base_url_ = env;
    }
}

LogitsResponse RemoteProvider::provide(const PromptContext& ctx, const MaskQuery& mq) {
    mq.validate();

    nlohmann::json body;
    body["template_id"] = ctx.template_id;
    body["query_text"] = ctx.query.text;
    auto docs = nlohmann::json::array();
    for (const auto& [label, doc] : ctx.tagged_docs)
        docs.push_back({{"label", label}, {"text", doc.text}});
    body["docs"] = std::move(docs);
    body["masked_positions"] = mq.masked_positions;
    auto filled = nlohmann::json::array();
    for (const auto& [pos, label] : mq.filled_slots)
        filled.push_back({{"pos", pos}, {"label", label}});
    body["filled"] = std::move(filled);
    body["allowed_tokens"] = mq.allowed_tokens;

    httplib::Client client(base_url_);
    client.set_connection_timeout(timeout_.count(), 0);
    client.set_read_timeout(timeout_.count(), 0);

    auto res = client.Post("/v1/mask_logits", body.dump(), "application/json");
    if (!res)
        throw TransportError("remote: request to " + base_url_ +
                             " failed: " + httplib::to_string(res.error()));
    if (res->status != 200)
        throw TransportError("remote: HTTP " + std::to_string(res->status) +
                             " from " + base_url_);

    nlohmann::json parsed;
    try {
        parsed = nlohmann::json::parse(res->body);
    } catch (const nlohmann::json::exception& e) {
        throw MalformedResponseError(std::string("remote: unparsable body: ") + e.what());
    }
    if (!parsed.contains("rows") || !parsed["rows"].is_array())
        throw MalformedResponseError("remote: response lacks 'rows' array");

    const auto& rows_json = parsed["rows"];
    if (rows_json.size() != mq.masked_positions.size())
        throw DimensionMismatchError("remote: expected " +
                                     std::to_string(mq.masked_positions.size()) +
                                     " rows, got " + std::to_string(rows_json.size()));
    std::vector<double> data;
    data.reserve(rows_json.size() * mq.allowed_tokens.size());
    for (const auto& row : rows_json) {
        if (!row.is_array() || row.size() != mq.allowed_tokens.size())
            throw DimensionMismatchError("remote: row width does not match allowed tokens");
        for (const auto& v : row) {
            if (!v.is_number())
                throw MalformedResponseError("remote: non-numeric probability entry");
            data.push_back(v.get<double>());
        }
    }
    ProbMatrix probs(mq.masked_positions.size(), mq.allowed_tokens.size(), std::move(data));
    probs.validate();

    LogitsResponse resp{std::move(probs), {}};
    resp.provider_meta["backend"] = "remote";
    return resp;
}

}  // namespace diffurank
