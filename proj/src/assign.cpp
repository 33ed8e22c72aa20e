// Copyright (c) 2026 diffurank contributors
// SPDX-License-Identifier: Apache-2.0

#include "diffurank/assign.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <numeric>

namespace diffurank {

namespace {

// shortest augmenting path Hungarian, O(n^3); returns row -> col
std::vector<std::size_t> jv_solve(const std::vector<double>& cost, std::size_t n) {
    const double kInf = std::numeric_limits<double>::infinity();
    // 1-based internals
    std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
    std::vector<std::size_t> p(n + 1, 0), way(n + 1, 0);
    for (std::size_t i = 1; i <= n; ++i) {
        p[0] = i;
        std::size_t j0 = 0;
        std::vector<double> minv(n + 1, kInf);
        std::vector<bool> used(n + 1, false);
        do {
            used[j0] = true;
            const std::size_t i0 = p[j0];
            double delta = kInf;
            std::size_t j1 = 0;
            for (std::size_t j = 1; j <= n; ++j) {
                if (used[j]) continue;
                const double cur = cost[(i0 - 1) * n + (j - 1)] - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (std::size_t j = 0; j <= n; ++j) {
                if (used[j]) {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (p[j0] != 0);
        do {
            const std::size_t j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
        } while (j0 != 0);
    }
    std::vector<std::size_t> assignment(n);
    for (std::size_t j = 1; j <= n; ++j) assignment[p[j] - 1] = j - 1;
    return assignment;
}

std::string checksum(const CostMatrix& cost) {
    std::uint64_t h = 14695981039346656037ULL;
    const std::size_t n = cost.size();
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t c = 0; c < n; ++c) {
            double v = cost(r, c);
            unsigned char bytes[sizeof(double)];
            std::memcpy(bytes, &v, sizeof(double));
            for (unsigned char b : bytes) {
                h ^= b;
                h *= 1099511628211ULL;
            }
        }
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return std::string(buf);
}

}  // namespace

double assignment_cost(const CostMatrix& cost, const Permutation& perm) {
    double total = 0.0;
    for (std::size_t i = 0; i < perm.size(); ++i) total += cost(i, perm[i]);
    return total;
}

AssignmentResult hungarian(const CostMatrix& cost) {
    cost.validate();
    const std::size_t n = cost.size();
    if (n == 0) throw ValidationError("hungarian: empty matrix");

    std::vector<double> flat(n * n);
    for (std::size_t r = 0; r < n; ++r)
        for (std::size_t c = 0; c < n; ++c) flat[r * n + c] = cost(r, c);

    std::vector<std::size_t> best = jv_solve(flat, n);
    double best_cost = 0.0;
    for (std::size_t i = 0; i < n; ++i) best_cost += cost(i, best[i]);

    // lexicographic refinement over co-optimal assignments: at each
    // position try smaller columns and keep any that still reach best_cost
    std::vector<bool> taken(n, false);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < best[i]; ++j) {
            if (taken[j]) continue;
            // complete rows i+1.. over the remaining columns
            std::vector<std::size_t> free_cols;
            for (std::size_t c = 0; c < n; ++c)
                if (!taken[c] && c != j) free_cols.push_back(c);
            const std::size_t m = n - i - 1;
            std::vector<std::size_t> completion;
            if (m > 0) {
                std::vector<double> sub(m * m);
                for (std::size_t r = 0; r < m; ++r)
                    for (std::size_t c = 0; c < m; ++c)
                        sub[r * m + c] = cost(i + 1 + r, free_cols[c]);
                completion = jv_solve(sub, m);
            }
            std::vector<std::size_t> candidate(best.begin(), best.begin() + i);
            candidate.push_back(j);
            for (std::size_t r = 0; r < m; ++r)
                candidate.push_back(free_cols[completion[r]]);
            double total = 0.0;
            for (std::size_t r = 0; r < n; ++r) total += cost(r, candidate[r]);
            if (total <= best_cost) {
                best = std::move(candidate);
                best_cost = total;
                break;
            }
        }
        taken[best[i]] = true;
    }

    Permutation perm(best);
    return AssignmentResult{perm, assignment_cost(cost, perm), checksum(cost)};
}

AssignmentResult brute_force_assignment(const CostMatrix& cost) {
    cost.validate();
    const std::size_t n = cost.size();
    if (n == 0) throw ValidationError("brute_force_assignment: empty matrix");
    if (n > 9) throw ValidationError("brute_force_assignment: N > 9");

    std::vector<std::size_t> mapping(n);
    std::iota(mapping.begin(), mapping.end(), 0);
    std::vector<std::size_t> best = mapping;
    double best_cost = std::numeric_limits<double>::infinity();
    do {
        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i) total += cost(i, mapping[i]);
        if (total < best_cost) {  // strict: keeps the lexicographically first
            best_cost = total;
            best = mapping;
        }
    } while (std::next_permutation(mapping.begin(), mapping.end()));

    Permutation perm(best);
    return AssignmentResult{perm, assignment_cost(cost, perm), checksum(cost)};
}

Permutation decode_assign(const PromptContext& ctx, const CandidateList& cands,
                          LogitsProvider& provider) {
    const std::size_t n = cands.size();
    MaskQuery mq;
    mq.masked_positions.resize(n);
    std::iota(mq.masked_positions.begin(), mq.masked_positions.end(), 0);
    for (std::size_t i = 0; i < n; ++i) mq.allowed_tokens.push_back(cands.label(i));

    LogitsResponse resp = provider.provide(ctx, mq);
    if (resp.rows.rows() != n || resp.rows.cols() != n)
        throw DimensionMismatchError("decode_assign: expected " + std::to_string(n) + "x" +
                                     std::to_string(n) + " rows");
    CostMatrix cost(resp.rows);
    return hungarian(cost).permutation;
}

}  // namespace diffurank
