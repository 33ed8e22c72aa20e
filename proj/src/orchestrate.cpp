// Copyright (c) 2026 diffurank contributors
// SPDX-License-Identifier: Apache-2.0

#include "diffurank/orchestrate.hpp"

#include <algorithm>
#include <chrono>
#include <numeric>

namespace diffurank {

void WindowConfig::validate() const {
    if (step_size < 1 || step_size > window_size || window_size > top_k)
        throw ValidationError("WindowConfig: need 1 <= step <= window <= top_k");
}

RerankStrategy parse_strategy(const std::string& name) {
    if (name == "pointwise") return RerankStrategy::kPointwise;
    if (name == "logits_list") return RerankStrategy::kLogitsList;
    if (name == "perm_samp") return RerankStrategy::kPermSamp;
    if (name == "perm_assign") return RerankStrategy::kPermAssign;
    throw ValidationError("unknown strategy '" + name + "'");
}

std::string rerank_strategy_name(RerankStrategy s) {
    switch (s) {
        case RerankStrategy::kPointwise: return "pointwise";
        case RerankStrategy::kLogitsList: return "logits_list";
        case RerankStrategy::kPermSamp: return "perm_samp";
        case RerankStrategy::kPermAssign: return "perm_assign";
    }
    return "unknown";
}

void RerankJob::validate() const {
    window.validate();
    if (strategy == RerankStrategy::kPermSamp) sampler.validate();
}

WindowResult rerank_window(const CandidateList& window, const RerankJob& job,
                           LogitsProvider& provider) {
    const std::size_t n = window.size();
    WindowResult result;
    switch (job.strategy) {
        case RerankStrategy::kPointwise: {
            std::vector<RelevanceScore> scores;
            scores.reserve(n);
            for (const auto& doc : window.docs) {
                scores.push_back(pointwise_score(window.query, doc, provider,
                                                 job.template_id));
                ++result.provider_calls;
            }
            std::vector<std::size_t> order(n);
            std::iota(order.begin(), order.end(), 0);
            std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
                return scores[a].value > scores[b].value;
            });
            result.order = std::move(order);
            break;
        }
        case RerankStrategy::kLogitsList: {
            auto scores = logits_listwise_scores(window, provider, job.template_id);
            result.provider_calls = 1;
            std::vector<std::size_t> order(n);
            std::iota(order.begin(), order.end(), 0);
            std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
                return scores[a].value > scores[b].value;
            });
            result.order = std::move(order);
            break;
        }
        case RerankStrategy::kPermSamp: {
            PromptContext ctx = make_context(Strategy::kPermutation, window, job.template_id);
            SampleResult sampled = sample_permutation(ctx, window, provider, job.sampler);
            result.provider_calls = sampled.provider_calls;
            Permutation perm = sampled.permutation
                                   ? *sampled.permutation
                                   : repair_invalid(sampled.raw_slots, n);
            result.order = perm.mapping();
            WindowTrace trace;
            trace.query_id = window.query.query_id;
            trace.n = n;
            trace.k = job.sampler.steps;
            trace.mode = job.sampler.mode == SamplerMode::kConstrained ? "constrained"
                                                                       : "vanilla";
            trace.steps = std::move(sampled.trace);
            trace.raw_slots = std::move(sampled.raw_slots);
            trace.valid = sampled.valid;
            result.trace = std::move(trace);
            break;
        }
        case RerankStrategy::kPermAssign: {
            PromptContext ctx = make_context(Strategy::kPermutation, window, job.template_id);
            result.order = decode_assign(ctx, window, provider).mapping();
            result.provider_calls = 1;
            break;
        }
    }
    return result;
}

std::size_t window_count(std::size_t m, const WindowConfig& cfg) {
    if (m == 0) return 0;
    if (m <= cfg.window_size) return 1;
    std::size_t count = 0;
    std::size_t end = m;
    while (true) {
        ++count;
        const std::size_t start = end > cfg.window_size ? end - cfg.window_size : 0;
        if (start == 0) break;
        end -= cfg.step_size;
    }
    return count;
}

RerankOutcome sliding_rerank(const Query& query, const std::vector<Document>& candidates,
                             const RerankJob& job, LogitsProvider& provider) {
    job.validate();
    if (candidates.empty()) throw ValidationError("sliding_rerank: empty candidate list");

    const auto t0 = std::chrono::steady_clock::now();
    const std::size_t m = std::min(candidates.size(), job.window.top_k);
    std::vector<Document> working(candidates.begin(), candidates.begin() + m);

    RerankOutcome outcome;
    outcome.log.query_id = query.query_id;
    outcome.log.strategy = rerank_strategy_name(job.strategy);

    if (job.strategy == RerankStrategy::kPointwise) {
        // pointwise scores every candidate directly; windows are irrelevant
        std::vector<RelevanceScore> scores;
        scores.reserve(m);
        for (const auto& doc : working) {
            scores.push_back(pointwise_score(query, doc, provider, job.template_id));
            ++outcome.log.provider_calls;
        }
        std::vector<std::size_t> order(m);
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            return scores[a].value > scores[b].value;
        });
        outcome.ranking.query_id = query.query_id;
        for (std::size_t i = 0; i < m; ++i)
            outcome.ranking.entries.push_back(
                {working[order[i]].doc_id, scores[order[i]].value, i + 1});
    } else {
        std::size_t end = m;
        std::size_t window_index = 0;
        while (true) {
            const std::size_t start = end > job.window.window_size
                                          ? end - job.window.window_size
                                          : 0;
            std::vector<Document> slice(working.begin() + start, working.begin() + end);
            CandidateList window = assign_identifiers(query, std::move(slice));
            WindowResult res;
            try {
                res = rerank_window(window, job, provider);
            } catch (const std::exception& e) {
                throw ProviderError("window " + std::to_string(window_index) + " [" +
                                    std::to_string(start) + "," + std::to_string(end) +
                                    "): " + e.what());
            }
            outcome.log.provider_calls += res.provider_calls;
            if (res.trace) {
                res.trace->window_index = window_index;
                outcome.log.validity_flags.push_back(res.trace->valid);
                outcome.traces.push_back(std::move(*res.trace));
            }
            // write the local ordering in place before the next window forms
            std::vector<Document> reordered;
            reordered.reserve(window.size());
            for (std::size_t idx : res.order) reordered.push_back(window.docs[idx]);
            std::copy(reordered.begin(), reordered.end(), working.begin() + start);
            ++window_index;
            if (start == 0) break;
            end -= job.window.step_size;
        }
        outcome.log.windows = window_index;
        outcome.ranking.query_id = query.query_id;
        for (std::size_t i = 0; i < m; ++i)
            outcome.ranking.entries.push_back(
                {working[i].doc_id, static_cast<double>(m - i), i + 1});
    }

    outcome.log.wall_ms = std::chrono::duration<double, std::milli>(
                              std::chrono::steady_clock::now() - t0)
                              .count();
    outcome.ranking.validate();
    return outcome;
}

}  // namespace diffurank
