// Copyright (c) 2026 diffurank contributors
// SPDX-License-Identifier: Apache-2.0

#include "diffurank/scoring.hpp"

#include <algorithm>
#include <numeric>

namespace diffurank {

RelevanceScore score_from_row(double p0, double p1) {
    if (p0 < 0.0 || p1 < 0.0)
        throw ValidationError("score_from_row: negative probability");
    if (p0 + p1 == 0.0) return RelevanceScore{0.5, p0, p1, true};
    return RelevanceScore{p1 / (p0 + p1), p0, p1, false};
}

RelevanceScore pointwise_score(const Query& q, const Document& d,
                               LogitsProvider& provider, const std::string& template_id) {
    PromptContext ctx(Strategy::kPointwise, q, {{"A", d}}, template_id);
    MaskQuery mq;
    mq.masked_positions = {0};
    mq.allowed_tokens = {"0", "1"};

    LogitsResponse resp = provider.provide(ctx, mq);
    if (resp.rows.rows() != 1 || resp.rows.cols() != 2)
        throw DimensionMismatchError("pointwise_score: expected a single 2-wide row");
    return score_from_row(resp.rows(0, 0), resp.rows(0, 1));
}

std::vector<RelevanceScore> logits_listwise_scores(const CandidateList& cands,
                                                   LogitsProvider& provider,
                                                   const std::string& template_id) {
    const std::size_t n = cands.size();
    PromptContext ctx = make_context(Strategy::kLogitsList, cands, template_id);
    MaskQuery mq;
    mq.masked_positions.resize(n);
    std::iota(mq.masked_positions.begin(), mq.masked_positions.end(), 0);
    mq.allowed_tokens = {"0", "1"};

    LogitsResponse resp = provider.provide(ctx, mq);
    if (resp.rows.rows() != n || resp.rows.cols() != 2)
        throw DimensionMismatchError("logits_listwise_scores: expected " +
                                     std::to_string(n) + " rows of width 2");
    std::vector<RelevanceScore> scores;
    scores.reserve(n);
    for (std::size_t i = 0; i < n; ++i)
        scores.push_back(score_from_row(resp.rows(i, 0), resp.rows(i, 1)));
    return scores;
}

RankedList scores_to_ranking(const CandidateList& cands,
                             const std::vector<RelevanceScore>& scores) {
    if (scores.size() != cands.size())
        throw ValidationError("scores_to_ranking: score count mismatch");
    std::vector<std::size_t> order(cands.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return scores[a].value > scores[b].value;
    });
    RankedList out;
    out.query_id = cands.query.query_id;
    for (std::size_t i = 0; i < order.size(); ++i)
        out.entries.push_back({cands.docs[order[i]].doc_id, scores[order[i]].value, i + 1});
    return out;
}

}  // namespace diffurank
