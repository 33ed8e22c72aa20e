// Copyright (c) 2026 diffurank contributors
// SPDX-License-Identifier: Apache-2.0

#include "diffurank/sampler.hpp"

#include <algorithm>
#include <cmath>

namespace diffurank {

void SamplerConfig::validate() const {
    if (steps < 1) throw ValidationError("SamplerConfig: K must be >= 1");
}

SamplerState SamplerState::initial(std::size_t n) {
    SamplerState s;
    s.response.assign(n, kMaskSlot);
    s.confidence.assign(n, 0.0);
    s.t = 1.0;
    s.unused.resize(n);
    for (std::size_t i = 0; i < n; ++i) s.unused[i] = i;
    return s;
}

std::vector<std::size_t> SamplerState::masked_positions() const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < response.size(); ++i)
        if (response[i] == kMaskSlot) out.push_back(i);
    return out;
}

bool SamplerState::fully_filled() const {
    return std::none_of(response.begin(), response.end(),
                        [](std::size_t v) { return v == kMaskSlot; });
}

void SamplerState::recompute_unused() {
    std::vector<bool> used(response.size(), false);
    for (std::size_t v : response)
        if (v != kMaskSlot) used[v] = true;
    unused.clear();
    for (std::size_t i = 0; i < response.size(); ++i)
        if (!used[i]) unused.push_back(i);
}

namespace {

struct Triple {
    double value;
    std::size_t row, col;
};

// remask the N - n_un lowest-confidence slots; ties remask newly filled
// before previously filled, then higher position index first
void remask_lowest(SamplerState& state, const std::vector<bool>& prev_filled,
                   double s, StepTrace& trace) {
    const std::size_t n = state.response.size();
    const std::size_t n_un =
        static_cast<std::size_t>(std::floor(static_cast<double>(n) * (1.0 - s)));
    if (n_un >= n) {
        state.t = s;
        return;
    }
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (state.confidence[a] != state.confidence[b])
            return state.confidence[a] < state.confidence[b];
        if (prev_filled[a] != prev_filled[b]) return !prev_filled[a];
        return a > b;
    });
    for (std::size_t i = 0; i < n - n_un; ++i) {
        const std::size_t pos = order[i];
        if (state.response[pos] != kMaskSlot) {
            state.response[pos] = kMaskSlot;
            state.confidence[pos] = 0.0;
            trace.remasked.push_back(pos);
        }
    }
    std::sort(trace.remasked.begin(), trace.remasked.end());
    state.t = s;
}

}  // namespace

SamplerState constrained_step(SamplerState state, const ProbMatrix& probs, double s) {
    const std::vector<std::size_t> masked = state.masked_positions();
    if (probs.rows() != masked.size() || probs.cols() != state.unused.size())
        throw ValidationError("constrained_step: probs " + std::to_string(probs.rows()) +
                              "x" + std::to_string(probs.cols()) + " does not match " +
                              std::to_string(masked.size()) + " masked positions x " +
                              std::to_string(state.unused.size()) + " unused identifiers");
    if (!(s >= 0.0 && s < state.t))
        throw ValidationError("constrained_step: target level s not in [0, t)");

    std::vector<bool> prev_filled(state.response.size(), false);
    for (std::size_t i = 0; i < state.response.size(); ++i) {
        if (state.response[i] != kMaskSlot) {
            prev_filled[i] = true;
            state.confidence[i] = 1.0;
        }
    }

    std::vector<Triple> triples;
    triples.reserve(probs.rows() * probs.cols());
    for (std::size_t r = 0; r < probs.rows(); ++r)
        for (std::size_t c = 0; c < probs.cols(); ++c)
            triples.push_back({probs(r, c), r, c});
    std::sort(triples.begin(), triples.end(), [](const Triple& a, const Triple& b) {
        if (a.value != b.value) return a.value > b.value;
        if (a.row != b.row) return a.row < b.row;
        return a.col < b.col;
    });

    StepTrace trace;
    trace.s = s;
    std::vector<bool> row_used(probs.rows(), false), col_used(probs.cols(), false);
    for (const Triple& tr : triples) {
        if (row_used[tr.row] || col_used[tr.col]) continue;
        row_used[tr.row] = true;
        col_used[tr.col] = true;
        const std::size_t pos = masked[tr.row];
        const std::size_t id = state.unused[tr.col];
        state.response[pos] = id;
        state.confidence[pos] = std::clamp(tr.value, 0.0, 1.0);
        trace.filled.push_back({pos, id, state.confidence[pos]});
    }
    std::sort(trace.filled.begin(), trace.filled.end(),
              [](const StepFill& a, const StepFill& b) { return a.pos < b.pos; });

    remask_lowest(state, prev_filled, s, trace);
    state.recompute_unused();
    state.trace.push_back(std::move(trace));
    return state;
}

namespace {

// vanilla reverse step: independent per-row argmax over the full identifier
// set, no cross-row constraint; duplicates are allowed even within a step
SamplerState vanilla_step(SamplerState state, const ProbMatrix& probs, double s) {
    const std::vector<std::size_t> masked = state.masked_positions();
    if (probs.rows() != masked.size() || probs.cols() != state.response.size())
        throw ValidationError("vanilla_step: probs shape mismatch");

    std::vector<bool> prev_filled(state.response.size(), false);
    for (std::size_t i = 0; i < state.response.size(); ++i) {
        if (state.response[i] != kMaskSlot) {
            prev_filled[i] = true;
            state.confidence[i] = 1.0;
        }
    }

    StepTrace trace;
    trace.s = s;
    for (std::size_t r = 0; r < probs.rows(); ++r) {
        std::size_t best = 0;
        for (std::size_t c = 1; c < probs.cols(); ++c)
            if (probs(r, c) > probs(r, best)) best = c;
        const std::size_t pos = masked[r];
        state.response[pos] = best;
        state.confidence[pos] = std::clamp(probs(r, best), 0.0, 1.0);
        trace.filled.push_back({pos, best, state.confidence[pos]});
    }

    remask_lowest(state, prev_filled, s, trace);
    state.trace.push_back(std::move(trace));
    return state;
}

}  // namespace

SampleResult sample_permutation(const PromptContext& ctx, const CandidateList& cands,
                                LogitsProvider& provider, const SamplerConfig& cfg) {
    cfg.validate();
    const std::size_t n = cands.size();
    const std::size_t k_steps = cfg.steps;

    SamplerState state = SamplerState::initial(n);
    SampleResult result;

    for (std::size_t k = 1; k <= k_steps; ++k) {
        const double s = static_cast<double>(k_steps - k) / static_cast<double>(k_steps);
        const std::vector<std::size_t> masked = state.masked_positions();
        if (masked.empty()) break;

        MaskQuery mq;
        mq.masked_positions = masked;
        if (cfg.mode == SamplerMode::kConstrained) {
            for (std::size_t id : state.unused)
                mq.allowed_tokens.push_back(cands.label(id));
        } else {
            for (std::size_t id = 0; id < n; ++id)
                mq.allowed_tokens.push_back(cands.label(id));
        }
        for (std::size_t i = 0; i < n; ++i)
            if (state.response[i] != kMaskSlot)
                mq.filled_slots.emplace_back(i, cands.label(state.response[i]));

        LogitsResponse resp;
        try {
            resp = provider.provide(ctx, mq);
        } catch (const std::exception& e) {
            throw ProviderError("sampler step " + std::to_string(k) + ": " + e.what());
        }
        ++result.provider_calls;
        if (resp.rows.rows() != mq.masked_positions.size() ||
            resp.rows.cols() != mq.allowed_tokens.size())
            throw DimensionMismatchError("sampler step " + std::to_string(k) +
                                         ": provider row/column mismatch");

        state = cfg.mode == SamplerMode::kConstrained
                    ? constrained_step(std::move(state), resp.rows, s)
                    : vanilla_step(std::move(state), resp.rows, s);
        state.trace.back().step = k;
    }

    result.raw_slots = state.response;
    result.trace = state.trace;

    std::vector<bool> used(n, false);
    bool valid = true;
    for (std::size_t v : result.raw_slots) {
        if (v == kMaskSlot || v >= n || used[v]) {
            valid = false;
            break;
        }
        used[v] = true;
    }
    result.valid = valid;
    if (valid) result.permutation = Permutation(result.raw_slots);
    return result;
}

Permutation repair_invalid(const std::vector<std::size_t>& raw_slots, std::size_t n) {
    if (raw_slots.size() != n) throw ValidationError("repair_invalid: slot count mismatch");
    std::vector<std::size_t> out(n, kMaskSlot);
    std::vector<bool> used(n, false);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t v = raw_slots[i];
        if (v != kMaskSlot && v < n && !used[v]) {
            out[i] = v;
            used[v] = true;
        }
    }
    std::size_t next_missing = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (out[i] != kMaskSlot) continue;
        while (used[next_missing]) ++next_missing;
        out[i] = next_missing;
        used[next_missing] = true;
    }
    return Permutation(std::move(out));
}

}  // namespace diffurank
