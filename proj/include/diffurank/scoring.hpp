// Copyright (c) 2026 diffurank contributors
// SPDX-License-Identifier: Apache-2.0

#ifndef DIFFURANK_SCORING_HPP
#define DIFFURANK_SCORING_HPP

#include "diffurank/provider.hpp"

namespace diffurank {

struct RelevanceScore {
    double value;      // p1 / (p0 + p1), in [0,1]
    double p0, p1;     // raw token probabilities
    bool degenerate;   // p0 + p1 == 0; value defaulted to 0.5
};

RelevanceScore score_from_row(double p0, double p1);

/// Single provider call: one masked slot, allowed tokens {"0","1"}.
RelevanceScore pointwise_score(const Query& q, const Document& d,
                               LogitsProvider& provider,
                               const std::string& template_id = "default");

/// Single provider call with one masked slot per document; scores returned
/// in candidate order.
std::vector<RelevanceScore> logits_listwise_scores(const CandidateList& cands,
                                                   LogitsProvider& provider,
                                                   const std::string& template_id = "default");

/// Ranking by descending score, ties keep the original candidate order.
RankedList scores_to_ranking(const CandidateList& cands,
                             const std::vector<RelevanceScore>& scores);

}  // namespace diffurank

#endif
