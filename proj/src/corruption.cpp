// Copyright (c) 2026 diffurank contributors
// SPDX-License-Identifier: Apache-2.0

#include "diffurank/corruption.hpp"

#include <cmath>

namespace diffurank {

void CorruptionConfig::validate() const {
    if (!(epsilon >= 0.0 && epsilon < 1.0))
        throw ValidationError("CorruptionConfig: epsilon outside [0,1)");
}

MaskedSequence corrupt(const std::vector<std::string>& clean, std::size_t prompt_len,
                       double t, const CorruptionConfig& cfg,
                       const std::unordered_set<std::string>& identifier_labels) {
    cfg.validate();
    if (!(t >= 0.0 && t <= 1.0))
        throw ValidationError("corrupt: noise level t outside [0,1]");
    if (prompt_len > clean.size())
        throw ValidationError("corrupt: prompt_len exceeds sequence length");
    if (cfg.strategy == MaskStrategy::kDocidMask && identifier_labels.empty())
        throw ValidationError("corrupt: docid_mask requires identifier labels");

    const double p_mask = (1.0 - cfg.epsilon) * t + cfg.epsilon;

    MaskedSequence out;
    out.tokens = clean;
    out.mask_flags.assign(clean.size(), false);
    out.prompt_len = prompt_len;
    out.t = t;
    out.p.assign(clean.size(), 0.0);

    std::mt19937_64 rng(cfg.seed);
    std::uniform_real_distribution<double> uniform(0.0, 1.0);
    for (std::size_t i = prompt_len; i < clean.size(); ++i) {
        const bool eligible = cfg.strategy == MaskStrategy::kRandomMask ||
                              identifier_labels.count(clean[i]) > 0;
        if (!eligible) continue;
        out.p[i] = p_mask;
        if (uniform(rng) < p_mask) out.mask_flags[i] = true;
    }
    return out;
}

double sample_noise_level(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> uniform(0.0, 1.0);
    return uniform(rng);
}

}  // namespace diffurank
