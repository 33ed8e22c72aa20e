// Copyright (c) 2026 diffurank contributors
// SPDX-License-Identifier: Apache-2.0

#ifndef DIFFURANK_CORRUPTION_HPP
#define DIFFURANK_CORRUPTION_HPP

#include <cstdint>
#include <random>
#include <unordered_set>
#include <vector>

#include "diffurank/core.hpp"

namespace diffurank {

enum class MaskStrategy { kRandomMask, kDocidMask };

struct CorruptionConfig {
    double epsilon = 1e-3;  // floor on the mask probability
    MaskStrategy strategy = MaskStrategy::kRandomMask;
    std::uint64_t seed = 0;

    void validate() const;
};

/// A clean sequence with some response tokens replaced by masks.
/// Positions below prompt_len are never masked. p holds the masking
/// probability for every maskable position (0 elsewhere).
struct MaskedSequence {
    std::vector<std::string> tokens;
    std::vector<bool> mask_flags;
    std::size_t prompt_len = 0;
    double t = 0.0;
    std::vector<double> p;
};

/// Forward noising at level t: each eligible response token is masked
/// independently with p_mask = (1 - eps) * t + eps. docid_mask restricts
/// eligibility to tokens that are identifier labels.
MaskedSequence corrupt(const std::vector<std::string>& clean, std::size_t prompt_len,
                       double t, const CorruptionConfig& cfg,
                       const std::unordered_set<std::string>& identifier_labels = {});

/// t ~ U(0, 1)
double sample_noise_level(std::mt19937_64& rng);

}  // namespace diffurank

#endif
