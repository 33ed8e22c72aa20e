// Copyright (c) 2026 diffurank contributors
// SPDX-License-Identifier: Apache-2.0

#ifndef DIFFURANK_ORACLE_HPP
#define DIFFURANK_ORACLE_HPP

#include <cstdint>
#include <unordered_map>

#include "diffurank/provider.hpp"

namespace diffurank {

/// Parameters of the synthetic mask predictor used for desk-scale runs.
struct OracleConfig {
    std::uint64_t seed = 0;
    double beta = 5.0;     // sharpness of the rank-distance softmax
    double gamma = 0.0;    // pseudo-noise weight
    double lambda = 0.0;   // end-bias: positions near both ends get sharper rows

    void validate() const;
};

/// Hidden relevance rel in [0,1] per (query_id, doc_id).
class RelevanceTable {
public:
    void set(const std::string& query_id, const std::string& doc_id, double rel);
    double get(const std::string& query_id, const std::string& doc_id) const;
    bool has(const std::string& query_id, const std::string& doc_id) const;

    const std::unordered_map<std::string, std::unordered_map<std::string, double>>&
    by_query() const { return table_; }

private:
    std::unordered_map<std::string, std::unordered_map<std::string, double>> table_;
};

/// Deterministic test double for the dLLM.
///
/// Identifier rows: softmax_j( -beta * w(i) * |i - truerank(j)| + gamma * g(seed,i,j) )
/// over the allowed identifier set, where truerank sorts hidden rel descending
/// and w(i) = 1 + lambda * |2i - (N-1)| / (N-1) sharpens both ends.
///
/// Binary rows (allowed tokens {"0","1"}): (p0, p1) = (1 - rel, rel) with
/// optional gamma noise, one row per masked document slot.
class SyntheticOracle : public LogitsProvider {
public:
    SyntheticOracle(OracleConfig config, RelevanceTable rel);

    LogitsResponse provide(const PromptContext& ctx, const MaskQuery& mq) override;

    const OracleConfig& config() const { return config_; }
    const RelevanceTable& relevance() const { return rel_; }

    /// Seeded hash-based pseudo-noise in [-1, 1].
    static double pseudo_noise(std::uint64_t seed, const std::string& query_id,
                               std::size_t slot, const std::string& token);

private:
    OracleConfig config_;
    RelevanceTable rel_;
};

}  // namespace diffurank

#endif
