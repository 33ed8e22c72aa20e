// Copyright (c) 2026 diffurank contributors
// SPDX-License-Identifier: Apache-2.0

#include "diffurank/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace diffurank {

void OracleConfig::validate() const {
    if (!std::isfinite(beta) || beta < 0.0) throw ValidationError("OracleConfig: bad beta");
    if (!std::isfinite(gamma) || gamma < 0.0) throw ValidationError("OracleConfig: bad gamma");
    if (!std::isfinite(lambda) || lambda < 0.0)
        throw ValidationError("OracleConfig: bad lambda");
}

void RelevanceTable::set(const std::string& query_id, const std::string& doc_id, double rel) {
    if (!(rel >= 0.0 && rel <= 1.0))
        throw ValidationError("RelevanceTable: rel outside [0,1] for " + doc_id);
    table_[query_id][doc_id] = rel;
}

double RelevanceTable::get(const std::string& query_id, const std::string& doc_id) const {
    auto qit = table_.find(query_id);
    if (qit != table_.end()) {
        auto dit = qit->second.find(doc_id);
        if (dit != qit->second.end()) return dit->second;
    }
    throw ValidationError("RelevanceTable: no entry for (" + query_id + ", " + doc_id + ")");
}

bool RelevanceTable::has(const std::string& query_id, const std::string& doc_id) const {
    auto qit = table_.find(query_id);
    return qit != table_.end() && qit->second.count(doc_id) > 0;
}

SyntheticOracle::SyntheticOracle(OracleConfig config, RelevanceTable rel)
    : config_(config), rel_(std::move(rel)) {
    config_.validate();
}

double SyntheticOracle::pseudo_noise(std::uint64_t seed, const std::string& query_id,
                                     std::size_t slot, const std::string& token) {
    // splitmix64 over an FNV-mixed key
    std::uint64_t h = seed ^ 0x9e3779b97f4a7c15ULL;
    auto mix = [&h](const std::string& s) {
        for (unsigned char c : s) {
            h ^= c;
            h *= 1099511628211ULL;
        }
    };
    mix(query_id);
    h ^= static_cast<std::uint64_t>(slot) + 0x632be59bd9b4e019ULL;
    h *= 1099511628211ULL;
    mix(token);
    h += 0x9e3779b97f4a7c15ULL;
    h = (h ^ (h >> 30)) * 0xbf58476d1ce4e5b9ULL;
    h = (h ^ (h >> 27)) * 0x94d049bb133111ebULL;
    h = h ^ (h >> 31);
    // map to [-1, 1]
    return static_cast<double>(h >> 11) * (1.0 / 4503599627370495.5) - 1.0;
}

LogitsResponse SyntheticOracle::provide(const PromptContext& ctx, const MaskQuery& mq) {
    mq.validate();
    const std::size_t n = ctx.tagged_docs.size();
    const std::size_t rows = mq.masked_positions.size();
    const std::size_t cols = mq.allowed_tokens.size();
    const std::string& qid = ctx.query.query_id;

    const bool binary = cols == 2 && mq.allowed_tokens[0] == "0" && mq.allowed_tokens[1] == "1";

    ProbMatrix probs(rows, cols);
    if (binary) {
        for (std::size_t r = 0; r < rows; ++r) {
            const std::size_t slot = mq.masked_positions[r];
            // pointwise: the single tagged doc; listwise: slot index selects the doc
            const std::size_t doc_idx = ctx.strategy == Strategy::kPointwise ? 0 : slot;
            if (doc_idx >= n)
                throw ValidationError("SyntheticOracle: slot " + std::to_string(slot) +
                                      " beyond document count");
            double rel = rel_.get(qid, ctx.tagged_docs[doc_idx].second.doc_id);
            if (config_.gamma > 0.0) {
                rel += config_.gamma * pseudo_noise(config_.seed, qid, slot, "1");
                rel = std::clamp(rel, 0.0, 1.0);
            }
            probs(r, 0) = 1.0 - rel;
            probs(r, 1) = rel;
        }
    } else {
        // truerank: position of each doc in the rel-descending order,
        // ties broken by candidate order
        std::vector<std::size_t> order(n);
        std::iota(order.begin(), order.end(), 0);
        std::vector<double> rels(n);
        for (std::size_t j = 0; j < n; ++j)
            rels[j] = rel_.get(qid, ctx.tagged_docs[j].second.doc_id);
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) { return rels[a] > rels[b]; });
        std::vector<std::size_t> truerank(n);
        for (std::size_t pos = 0; pos < n; ++pos) truerank[order[pos]] = pos;

        for (std::size_t r = 0; r < rows; ++r) {
            const std::size_t slot = mq.masked_positions[r];
            const double w = n > 1
                ? 1.0 + config_.lambda *
                      std::abs(2.0 * static_cast<double>(slot) - static_cast<double>(n - 1)) /
                      static_cast<double>(n - 1)
                : 1.0;
            std::vector<double> logits(cols);
            double max_logit = -std::numeric_limits<double>::infinity();
            for (std::size_t c = 0; c < cols; ++c) {
                const std::string& token = mq.allowed_tokens[c];
                int doc_idx = -1;
                for (std::size_t j = 0; j < n; ++j) {
                    if (ctx.tagged_docs[j].first == token) {
                        doc_idx = static_cast<int>(j);
                        break;
                    }
                }
                if (doc_idx < 0)
                    throw ValidationError("SyntheticOracle: token '" + token +
                                          "' not an identifier of this context");
                const double dist = std::abs(static_cast<double>(slot) -
                                             static_cast<double>(truerank[doc_idx]));
                double l = -config_.beta * w * dist;
                if (config_.gamma > 0.0)
                    l += config_.gamma * pseudo_noise(config_.seed, qid, slot, token);
                logits[c] = l;
                max_logit = std::max(max_logit, l);
            }
            double z = 0.0;
            for (std::size_t c = 0; c < cols; ++c) {
                logits[c] = std::exp(logits[c] - max_logit);
                z += logits[c];
            }
            for (std::size_t c = 0; c < cols; ++c) probs(r, c) = logits[c] / z;
        }
    }

    LogitsResponse resp{std::move(probs), {}};
    resp.provider_meta["backend"] = "synthetic";
    return resp;
}

}  // namespace diffurank
