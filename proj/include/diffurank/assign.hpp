// Copyright (c) 2026 diffurank contributors
// SPDX-License-Identifier: Apache-2.0

#ifndef DIFFURANK_ASSIGN_HPP
#define DIFFURANK_ASSIGN_HPP

#include <string>

#include "diffurank/provider.hpp"

namespace diffurank {

struct AssignmentResult {
    Permutation permutation;
    double total_cost;
    std::string matrix_checksum;
};

/// Minimum-cost assignment via the O(N^3) shortest-augmenting-path
/// Hungarian method. Among co-optimal solutions the lexicographically
/// smallest mapping is returned.
AssignmentResult hungarian(const CostMatrix& cost);

/// Exhaustive oracle, same tie rule. N <= 9.
AssignmentResult brute_force_assignment(const CostMatrix& cost);

/// Single provider call with all N slots masked and the full identifier
/// set allowed; cost matrix with the eta floor; Hungarian decode.
Permutation decode_assign(const PromptContext& ctx, const CandidateList& cands,
                          LogitsProvider& provider);

/// Sum of C[i, perm[i]] accumulated in ascending position order.
double assignment_cost(const CostMatrix& cost, const Permutation& perm);

}  // namespace diffurank

#endif
