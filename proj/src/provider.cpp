// Copyright (c) 2026 diffurank contributors
// SPDX-License-Identifier: Apache-2.0

#include "diffurank/provider.hpp"

#include <algorithm>
#include <unordered_set>

#include "json.hpp"

namespace diffurank {

std::string strategy_name(Strategy s) {
    switch (s) {
        case Strategy::kPointwise: return "pointwise";
        case Strategy::kLogitsList: return "logits_list";
        case Strategy::kPermutation: return "permutation";
    }
    return "unknown";
}

PromptContext::PromptContext(Strategy s, Query q,
                             std::vector<std::pair<std::string, Document>> docs,
                             std::string tmpl)
    : strategy(s), query(std::move(q)), tagged_docs(std::move(docs)),
      template_id(std::move(tmpl)) {
    if (tagged_docs.empty()) throw ValidationError("PromptContext: no documents");
    if (strategy == Strategy::kPointwise && tagged_docs.size() != 1)
        throw ValidationError("PromptContext: pointwise context must carry one document");
}

PromptContext make_context(Strategy strategy, const CandidateList& cands,
                           const std::string& template_id) {
    std::vector<std::pair<std::string, Document>> tagged;
    tagged.reserve(cands.size());
    for (std::size_t i = 0; i < cands.size(); ++i)
        tagged.emplace_back(cands.label(i), cands.docs[i]);
    return PromptContext(strategy, cands.query, std::move(tagged), template_id);
}

void MaskQuery::validate() const {
    if (allowed_tokens.empty()) throw ValidationError("MaskQuery: no allowed tokens");
    std::unordered_set<std::string> tokens(allowed_tokens.begin(), allowed_tokens.end());
    if (tokens.size() != allowed_tokens.size())
        throw ValidationError("MaskQuery: duplicate allowed token");
    std::unordered_set<std::size_t> masked(masked_positions.begin(), masked_positions.end());
    if (masked.size() != masked_positions.size())
        throw ValidationError("MaskQuery: duplicate masked position");
    for (const auto& [pos, label] : filled_slots) {
        if (masked.count(pos))
            throw ValidationError("MaskQuery: position " + std::to_string(pos) +
                                  " both masked and filled");
    }
}

std::string canonical_request(const PromptContext& ctx, const MaskQuery& mq) {
    nlohmann::json j;
    j["template_id"] = ctx.template_id;
    j["strategy"] = strategy_name(ctx.strategy);
    j["query_id"] = ctx.query.query_id;
    j["query_text"] = ctx.query.text;
    auto docs = nlohmann::json::array();
    for (const auto& [label, doc] : ctx.tagged_docs)
        docs.push_back({{"label", label}, {"doc_id", doc.doc_id}, {"text", doc.text}});
    j["docs"] = std::move(docs);
    j["masked_positions"] = mq.masked_positions;
    j["allowed_tokens"] = mq.allowed_tokens;
    auto filled = nlohmann::json::array();
    for (const auto& [pos, label] : mq.filled_slots)
        filled.push_back({{"pos", pos}, {"label", label}});
    j["filled"] = std::move(filled);
    return j.dump();
}

namespace {

std::uint64_t fnv1a(const std::string& s, std::uint64_t basis) {
    std::uint64_t h = basis;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

}  // namespace

std::string request_key(const PromptContext& ctx, const MaskQuery& mq) {
    const std::string canon = canonical_request(ctx, mq);
    // two independent 64-bit FNV-1a passes, 32 hex chars total
    std::uint64_t a = fnv1a(canon, 14695981039346656037ULL);
    std::uint64_t b = fnv1a(canon, 0x9e3779b97f4a7c15ULL);
    char buf[33];
    std::snprintf(buf, sizeof(buf), "%016llx%016llx",
                  static_cast<unsigned long long>(a),
                  static_cast<unsigned long long>(b));
    return std::string(buf);
}

}  // namespace diffurank
