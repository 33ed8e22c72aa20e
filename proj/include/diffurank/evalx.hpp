// Copyright (c) 2026 diffurank contributors
// SPDX-License-Identifier: Apache-2.0

#ifndef DIFFURANK_EVALX_HPP
#define DIFFURANK_EVALX_HPP

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "diffurank/orchestrate.hpp"

namespace diffurank {

/// Graded relevance judgments: (query_id, doc_id) -> grade >= 0.
class Qrels {
public:
    void set(const std::string& query_id, const std::string& doc_id, int grade);
    int grade(const std::string& query_id, const std::string& doc_id) const;  // missing -> 0
    std::vector<int> grades_for(const std::string& query_id) const;
    bool has_query(const std::string& query_id) const;

private:
    std::map<std::string, std::map<std::string, int>> table_;
};

enum class GainConvention { kExponential, kLinear };

/// NDCG@k with DCG = sum gain(rel_r) / log2(r + 1); gain is 2^g - 1 by
/// default, g under the linear convention. Queries with no relevant docs
/// score 0.
double ndcg_at_k(const RankedList& run, const Qrels& qrels, std::size_t k,
                 GainConvention gain = GainConvention::kExponential);

/// Fraction (percent) of traced windows whose raw output was already a
/// valid permutation; absent for an empty trace set.
std::optional<double> correct_rate(const std::vector<WindowTrace>& traces);

struct TTestResult {
    double t;
    double p;  // two-sided
};

/// Paired Student's t-test on per-query score differences.
TTestResult paired_ttest(const std::vector<double>& a, const std::vector<double>& b);

/// Regularized incomplete beta function I_x(a, b).
double regularized_incomplete_beta(double a, double b, double x);

/// First-fill statistics of the constrained sampler, steps x positions.
struct FillingDynamics {
    std::size_t steps = 0;
    std::size_t positions = 0;
    std::vector<std::size_t> first_fill;   // H(t, i)
    std::vector<std::size_t> eligible;     // E(t, i)
    std::vector<double> conditional;       // P = H / E, 0 where E = 0

    std::size_t h(std::size_t t, std::size_t i) const { return first_fill[t * positions + i]; }
    std::size_t e(std::size_t t, std::size_t i) const { return eligible[t * positions + i]; }
    double p(std::size_t t, std::size_t i) const { return conditional[t * positions + i]; }
};

/// Aggregates perm_samp traces recorded with sampling step K. All traces
/// must share the same window size.
FillingDynamics filling_dynamics(const std::vector<WindowTrace>& traces, std::size_t k);

}  // namespace diffurank

#endif
