// Copyright (c) 2026 diffurank contributors
// SPDX-License-Identifier: Apache-2.0

#ifndef DIFFURANK_TRAIN_HPP
#define DIFFURANK_TRAIN_HPP

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "diffurank/core.hpp"
#include "diffurank/corruption.hpp"

namespace diffurank {

struct LossValue {
    double loss;
    std::vector<double> gradient;
};

/// loss = -log softmax(scores)[top1]; gradient = softmax - onehot(top1).
LossValue ce_loss(const std::vector<double>& scores, std::size_t top1_index);

/// Teacher ordering for one instance: rank r (1-based) holds doc index
/// teacher_order[r-1] into the scored list.
struct TeacherRanking {
    std::string query_id;
    std::vector<std::size_t> order;  // best-first doc indices

    /// rank_i (1-based) per doc index; covers exactly the scored docs
    std::vector<std::size_t> ranks(std::size_t num_docs) const;
};

/// loss = sum over pairs rank_i < rank_j of log(1 + exp(s_j - s_i)):
/// better-ranked documents are pushed toward higher scores.
LossValue ranknet_loss(const std::vector<double>& scores, const TeacherRanking& teacher);

/// Toy position-and-token conditioned categorical predictor used by the
/// masked-denoising loss. Parameters are logits[position][token].
struct ToyPredictor {
    std::size_t positions;
    std::vector<std::string> vocab;
    std::vector<double> logits;  // positions x vocab

    ToyPredictor(std::size_t positions, std::vector<std::string> vocab);
    std::size_t token_index(const std::string& token) const;
    std::size_t param_index(std::size_t pos, std::size_t tok) const {
        return pos * vocab.size() + tok;
    }
};

struct SftBatch {
    std::vector<MaskedSequence> items;  // tokens hold the *clean* targets
};

/// Reweighted masked-denoising loss: per item
///   (1 / response_len) * sum over masked positions of (1/p_i) * (-log p(clean))
/// averaged over the batch; gradient is with respect to predictor logits.
LossValue sft_loss(const SftBatch& batch, const ToyPredictor& predictor);

/// Linear scorer over fixed-length features.
struct ToyScorer {
    std::vector<double> theta;

    double score(const std::vector<double>& features) const;
};

struct TrainInstance {
    std::string query_id;
    std::vector<std::vector<double>> features;  // per doc
    TeacherRanking teacher;                     // order over doc indices
};

enum class TrainLoss { kCe, kRankNet };

struct TrainReport {
    ToyScorer scorer;
    std::vector<double> loss_curve;  // mean loss per epoch
};

/// Full-batch gradient descent, deterministic per seed. Aborts with a
/// diagnostic if the loss goes non-finite.
TrainReport train_toy(const std::vector<TrainInstance>& instances, TrainLoss loss,
                      std::size_t epochs, double learning_rate, std::uint64_t seed);

/// Max relative deviation between the analytic gradient and central finite
/// differences of `fn` at `point`.
double finite_difference_check(
    const std::function<LossValue(const std::vector<double>&)>& fn,
    const std::vector<double>& point, double step = 1e-5);

}  // namespace diffurank

#endif
