// Copyright (c) 2026 diffurank contributors
// SPDX-License-Identifier: Apache-2.0

#ifndef DIFFURANK_ORCHESTRATE_HPP
#define DIFFURANK_ORCHESTRATE_HPP

#include "diffurank/assign.hpp"
#include "diffurank/sampler.hpp"
#include "diffurank/scoring.hpp"

namespace diffurank {

struct WindowConfig {
    std::size_t window_size = 20;
    std::size_t step_size = 10;
    std::size_t top_k = 100;

    void validate() const;
};

enum class RerankStrategy { kPointwise, kLogitsList, kPermSamp, kPermAssign };

RerankStrategy parse_strategy(const std::string& name);
std::string rerank_strategy_name(RerankStrategy s);

struct RerankJob {
    RerankStrategy strategy = RerankStrategy::kPermAssign;
    SamplerConfig sampler;         // used by perm_samp only
    WindowConfig window;
    std::string template_id = "default";

    void validate() const;
};

/// Per-window sampler trace kept for Correct% and filling-dynamics analysis.
struct WindowTrace {
    std::string query_id;
    std::size_t window_index = 0;
    std::size_t n = 0;
    std::size_t k = 0;
    std::string mode;
    std::vector<StepTrace> steps;
    std::vector<std::size_t> raw_slots;
    bool valid = true;
};

struct QueryRunLog {
    std::string query_id;
    std::string strategy;
    std::size_t provider_calls = 0;
    double wall_ms = 0.0;
    std::size_t windows = 0;
    std::vector<bool> validity_flags;
};

struct RerankOutcome {
    RankedList ranking;
    std::vector<WindowTrace> traces;
    QueryRunLog log;
};

struct WindowResult {
    std::vector<std::size_t> order;  // new window order: position i holds old index
    std::size_t provider_calls = 0;
    std::optional<WindowTrace> trace;
};

/// Applies the job's strategy to one candidate window.
WindowResult rerank_window(const CandidateList& window, const RerankJob& job,
                           LogitsProvider& provider);

/// Number of windows the back-to-front schedule produces for m candidates.
std::size_t window_count(std::size_t m, const WindowConfig& cfg);

/// Full reranking of up to top_k candidates. Windows run back-to-front,
/// each written in place before the next forms; pointwise bypasses windows
/// and scores every candidate directly.
RerankOutcome sliding_rerank(const Query& query, const std::vector<Document>& candidates,
                             const RerankJob& job, LogitsProvider& provider);

}  // namespace diffurank

#endif
