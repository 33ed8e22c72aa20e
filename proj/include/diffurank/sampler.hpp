// Copyright (c) 2026 diffurank contributors
// SPDX-License-Identifier: Apache-2.0

#ifndef DIFFURANK_SAMPLER_HPP
#define DIFFURANK_SAMPLER_HPP

#include <optional>
#include <string>
#include <vector>

#include "diffurank/provider.hpp"

namespace diffurank {

enum class SamplerMode { kConstrained, kVanilla };

struct SamplerConfig {
    std::size_t steps = 4;  // K
    SamplerMode mode = SamplerMode::kConstrained;

    void validate() const;
};

inline constexpr std::size_t kMaskSlot = static_cast<std::size_t>(-1);

struct StepFill {
    std::size_t pos;
    std::size_t id;  // identifier index
    double conf;
};

struct StepTrace {
    std::size_t step = 0;  // 1-based
    double s = 0.0;        // target noise level after this step
    std::vector<StepFill> filled;
    std::vector<std::size_t> remasked;
};

/// Partially decoded response during iterative denoising.
struct SamplerState {
    std::vector<std::size_t> response;    // identifier index per slot, or kMaskSlot
    std::vector<double> confidence;       // in [0,1]
    double t = 1.0;
    std::vector<std::size_t> unused;      // identifier indices absent from response
    std::vector<StepTrace> trace;

    static SamplerState initial(std::size_t n);

    std::vector<std::size_t> masked_positions() const;
    bool fully_filled() const;
    void recompute_unused();
};

/// One denoising step of the constrained sampler: global greedy fill over
/// (prob, position, identifier) triples with row/column exclusivity, then
/// low-confidence remasking down to floor(N * (1 - s)) unmasked slots.
/// probs rows align with the current masked positions (ascending) and
/// columns with state.unused.
SamplerState constrained_step(SamplerState state, const ProbMatrix& probs, double s);

struct SampleResult {
    std::optional<Permutation> permutation;  // present in constrained mode
    std::vector<std::size_t> raw_slots;      // pre-repair; may duplicate in vanilla mode
    bool valid = false;                      // raw output was a bijection
    std::size_t provider_calls = 0;
    std::vector<StepTrace> trace;
};

/// Full decoding loop: K steps from t = 1 down to 1/K. Constrained mode
/// always yields a valid permutation; vanilla mode returns raw slots plus
/// a validity flag.
SampleResult sample_permutation(const PromptContext& ctx, const CandidateList& cands,
                                LogitsProvider& provider, const SamplerConfig& cfg);

/// Keeps the first occurrence of each identifier in slot order; duplicate
/// and empty slots receive the missing identifiers in candidate order.
Permutation repair_invalid(const std::vector<std::size_t>& raw_slots, std::size_t n);

}  // namespace diffurank

#endif
