// Copyright (c) 2026 diffurank contributors
// SPDX-License-Identifier: Apache-2.0

#include "diffurank/train.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace diffurank {

LossValue ce_loss(const std::vector<double>& scores, std::size_t top1_index) {
    if (scores.empty()) throw ValidationError("ce_loss: empty scores");
    if (top1_index >= scores.size()) throw ValidationError("ce_loss: top1 index out of range");

    const double max_s = *std::max_element(scores.begin(), scores.end());
    std::vector<double> softmax(scores.size());
    double z = 0.0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        softmax[i] = std::exp(scores[i] - max_s);
        z += softmax[i];
    }
    for (double& v : softmax) v /= z;

    LossValue out;
    out.loss = -std::log(softmax[top1_index]);
    out.gradient = softmax;
    out.gradient[top1_index] -= 1.0;
    return out;
}

std::vector<std::size_t> TeacherRanking::ranks(std::size_t num_docs) const {
    if (order.size() != num_docs)
        throw ValidationError("TeacherRanking: teacher covers " + std::to_string(order.size()) +
                              " docs, instance has " + std::to_string(num_docs));
    std::vector<std::size_t> rank(num_docs, 0);
    std::vector<bool> seen(num_docs, false);
    for (std::size_t r = 0; r < order.size(); ++r) {
        const std::size_t doc = order[r];
        if (doc >= num_docs || seen[doc])
            throw ValidationError("TeacherRanking: invalid or duplicate doc index");
        seen[doc] = true;
        rank[doc] = r + 1;
    }
    return rank;
}

LossValue ranknet_loss(const std::vector<double>& scores, const TeacherRanking& teacher) {
    const std::size_t n = scores.size();
    const std::vector<std::size_t> rank = teacher.ranks(n);

    LossValue out;
    out.loss = 0.0;
    out.gradient.assign(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            if (rank[i] >= rank[j]) continue;
            // log(1 + exp(s_j - s_i)), computed stably
            const double d = scores[j] - scores[i];
            const double loss = d > 0.0 ? d + std::log1p(std::exp(-d))
                                        : std::log1p(std::exp(d));
            out.loss += loss;
            const double sig = 1.0 / (1.0 + std::exp(-d));  // d loss / d d
            out.gradient[j] += sig;
            out.gradient[i] -= sig;
        }
    }
    return out;
}

ToyPredictor::ToyPredictor(std::size_t positions_, std::vector<std::string> vocab_)
    : positions(positions_), vocab(std::move(vocab_)),
      logits(positions_ * vocab.size(), 0.0) {
    if (positions == 0 || vocab.empty())
        throw ValidationError("ToyPredictor: empty positions or vocab");
}

std::size_t ToyPredictor::token_index(const std::string& token) const {
    for (std::size_t i = 0; i < vocab.size(); ++i)
        if (vocab[i] == token) return i;
    throw ValidationError("ToyPredictor: token '" + token + "' not in vocab");
}

LossValue sft_loss(const SftBatch& batch, const ToyPredictor& predictor) {
    if (batch.items.empty()) throw ValidationError("sft_loss: empty batch");
    const std::size_t v = predictor.vocab.size();

    LossValue out;
    out.loss = 0.0;
    out.gradient.assign(predictor.logits.size(), 0.0);

    for (const MaskedSequence& item : batch.items) {
        const std::size_t response_len = item.tokens.size() - item.prompt_len;
        if (response_len == 0) throw ValidationError("sft_loss: empty response");
        const double item_weight = 1.0 / static_cast<double>(response_len);

        for (std::size_t i = 0; i < item.tokens.size(); ++i) {
            if (!item.mask_flags[i]) continue;
            if (!(item.p[i] > 0.0))
                throw ValidationError("sft_loss: masked position with p_i = 0");
            const std::size_t pos = i - item.prompt_len;
            if (pos >= predictor.positions)
                throw ValidationError("sft_loss: response longer than predictor positions");

            // softmax over the vocab at this position
            double max_l = -std::numeric_limits<double>::infinity();
            for (std::size_t tok = 0; tok < v; ++tok)
                max_l = std::max(max_l, predictor.logits[predictor.param_index(pos, tok)]);
            std::vector<double> softmax(v);
            double z = 0.0;
            for (std::size_t tok = 0; tok < v; ++tok) {
                softmax[tok] =
                    std::exp(predictor.logits[predictor.param_index(pos, tok)] - max_l);
                z += softmax[tok];
            }
            for (double& s : softmax) s /= z;

            const std::size_t clean = predictor.token_index(item.tokens[i]);
            const double w = item_weight / item.p[i];
            out.loss += w * -std::log(softmax[clean]);
            for (std::size_t tok = 0; tok < v; ++tok) {
                double g = softmax[tok];
                if (tok == clean) g -= 1.0;
                out.gradient[predictor.param_index(pos, tok)] += w * g;
            }
        }
    }

    const double inv_batch = 1.0 / static_cast<double>(batch.items.size());
    out.loss *= inv_batch;
    for (double& g : out.gradient) g *= inv_batch;
    return out;
}

double ToyScorer::score(const std::vector<double>& features) const {
    if (features.size() != theta.size())
        throw ValidationError("ToyScorer: feature length mismatch");
    return std::inner_product(features.begin(), features.end(), theta.begin(), 0.0);
}

TrainReport train_toy(const std::vector<TrainInstance>& instances, TrainLoss loss,
                      std::size_t epochs, double learning_rate, std::uint64_t seed) {
    if (instances.empty()) throw ValidationError("train_toy: no instances");
    const std::size_t dim = instances[0].features.at(0).size();
    for (const auto& inst : instances)
        for (const auto& f : inst.features)
            if (f.size() != dim)
                throw ValidationError("train_toy: inconsistent feature length");

    TrainReport report;
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> init(0.0, 0.01);
    report.scorer.theta.resize(dim);
    for (double& w : report.scorer.theta) w = init(rng);

    for (std::size_t epoch = 0; epoch < epochs; ++epoch) {
        double total_loss = 0.0;
        std::vector<double> grad_theta(dim, 0.0);
        for (const auto& inst : instances) {
            std::vector<double> scores;
            scores.reserve(inst.features.size());
            for (const auto& f : inst.features) scores.push_back(report.scorer.score(f));

            LossValue lv;
            if (loss == TrainLoss::kCe) {
                lv = ce_loss(scores, inst.teacher.order.at(0));
            } else {
                lv = ranknet_loss(scores, inst.teacher);
            }
            total_loss += lv.loss;
            for (std::size_t d = 0; d < inst.features.size(); ++d)
                for (std::size_t w = 0; w < dim; ++w)
                    grad_theta[w] += lv.gradient[d] * inst.features[d][w];
        }
        const double mean_loss = total_loss / static_cast<double>(instances.size());
        if (!std::isfinite(mean_loss))
            throw ValidationError("train_toy: loss diverged at epoch " +
                                  std::to_string(epoch));
        report.loss_curve.push_back(mean_loss);
        const double scale = learning_rate / static_cast<double>(instances.size());
        for (std::size_t w = 0; w < dim; ++w) report.scorer.theta[w] -= scale * grad_theta[w];
    }
    return report;
}

double finite_difference_check(
    const std::function<LossValue(const std::vector<double>&)>& fn,
    const std::vector<double>& point, double step) {
    if (!(step > 0.0)) throw ValidationError("finite_difference_check: step must be > 0");
    const LossValue at_point = fn(point);
    double worst = 0.0;
    for (std::size_t i = 0; i < point.size(); ++i) {
        std::vector<double> plus = point, minus = point;
        plus[i] += step;
        minus[i] -= step;
        const double numeric = (fn(plus).loss - fn(minus).loss) / (2.0 * step);
        const double analytic = at_point.gradient[i];
        const double denom = std::max({std::abs(numeric), std::abs(analytic), 1.0});
        worst = std::max(worst, std::abs(numeric - analytic) / denom);
    }
    return worst;
}

}  // namespace diffurank
