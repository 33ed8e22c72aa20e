// Copyright (c) 2026 diffurank contributors
// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <random>

#include "diffurank/oracle.hpp"
#include "diffurank/sampler.hpp"

using namespace diffurank;

namespace {

CandidateList make_cands(std::size_t n) {
    std::vector<Document> docs;
    for (std::size_t i = 0; i < n; ++i)
        docs.emplace_back("d" + std::to_string(i + 1), "t");
    return assign_identifiers(Query("q1", "query"), std::move(docs));
}

/// Answers every mask query from one fixed full matrix, selecting the rows
/// for the masked positions and the columns for the allowed labels.
class FixedMatrixProvider : public LogitsProvider {
public:
    FixedMatrixProvider(ProbMatrix full, IdentifierAlphabet alphabet)
        : full_(std::move(full)), alphabet_(std::move(alphabet)) {}

    LogitsResponse provide(const PromptContext&, const MaskQuery& mq) override {
        std::vector<double> data;
        for (std::size_t pos : mq.masked_positions) {
            for (const auto& tok : mq.allowed_tokens) {
                const int c = alphabet_.index_of(tok);
                REQUIRE(c >= 0);
                data.push_back(full_(pos, static_cast<std::size_t>(c)));
            }
        }
        return LogitsResponse{
            ProbMatrix(mq.masked_positions.size(), mq.allowed_tokens.size(),
                       std::move(data)),
            {}};
    }

private:
    ProbMatrix full_;
    IdentifierAlphabet alphabet_;
};

/// Random row-stochastic matrices, a fresh draw per call.
class RandomProvider : public LogitsProvider {
public:
    explicit RandomProvider(std::uint64_t seed) : rng_(seed) {}

    LogitsResponse provide(const PromptContext&, const MaskQuery& mq) override {
        std::uniform_real_distribution<double> uniform(0.0, 1.0);
        const std::size_t rows = mq.masked_positions.size();
        const std::size_t cols = mq.allowed_tokens.size();
        std::vector<double> data(rows * cols);
        for (std::size_t r = 0; r < rows; ++r) {
            double sum = 0.0;
            for (std::size_t c = 0; c < cols; ++c) {
                data[r * cols + c] = uniform(rng_) + 1e-6;
                sum += data[r * cols + c];
            }
            for (std::size_t c = 0; c < cols; ++c) data[r * cols + c] /= sum;
        }
        return LogitsResponse{ProbMatrix(rows, cols, std::move(data)), {}};
    }

private:
    std::mt19937_64 rng_;
};

class ThrowingProvider : public LogitsProvider {
public:
    LogitsResponse provide(const PromptContext&, const MaskQuery&) override {
        throw std::runtime_error("backend unavailable");
    }
};

}  // namespace

TEST_CASE("remasking leaves exactly floor(N * (1 - s)) slots unmasked") {
    auto cands = make_cands(4);
    FixedMatrixProvider provider(
        ProbMatrix(4, 4, {0.7, 0.1, 0.1, 0.1,
                          0.1, 0.6, 0.2, 0.1,
                          0.2, 0.1, 0.5, 0.2,
                          0.1, 0.1, 0.1, 0.7}),
        IdentifierAlphabet::make_default(4));
    SamplerConfig cfg;
    cfg.steps = 2;
    auto ctx = make_context(Strategy::kPermutation, cands);
    auto result = sample_permutation(ctx, cands, provider, cfg);
    REQUIRE(result.trace.size() == 2);

    // after step 1 (s = 1/2): floor(4 * 1/2) = 2 unmasked
    const auto& step1 = result.trace[0];
    CHECK(step1.filled.size() == 4);
    CHECK(step1.remasked.size() == 2);
    CHECK(result.valid);
}

TEST_CASE("diagonal-dominant matrix decodes the identity in one step") {
    auto cands = make_cands(3);
    FixedMatrixProvider provider(
        ProbMatrix(3, 3, {0.8, 0.1, 0.1,
                          0.1, 0.8, 0.1,
                          0.1, 0.1, 0.8}),
        IdentifierAlphabet::make_default(3));
    SamplerConfig cfg;
    cfg.steps = 1;
    auto result = sample_permutation(make_context(Strategy::kPermutation, cands),
                                     cands, provider, cfg);
    CHECK(result.provider_calls == 1);
    REQUIRE(result.permutation.has_value());
    CHECK(*result.permutation == Permutation::identity(3));
    CHECK(result.trace.size() == 1);
    CHECK(result.trace[0].remasked.empty());
}

TEST_CASE("hand-traced two-step decode on a fixed 3x3 matrix") {
    // step 1: greedy fill takes (0.6, pos 2, C), (0.5, pos 0, A), (0.4, pos 1, B);
    // remask to floor(3 * 1/2) = 1 unmasked drops pos 1 (0.4) and pos 0 (0.5);
    // step 2 over positions {0,1} x {A,B} refills A then B; result is identity.
    auto cands = make_cands(3);
    FixedMatrixProvider provider(
        ProbMatrix(3, 3, {0.5, 0.3, 0.2,
                          0.5, 0.4, 0.1,
                          0.2, 0.2, 0.6}),
        IdentifierAlphabet::make_default(3));
    SamplerConfig cfg;
    cfg.steps = 2;
    auto result = sample_permutation(make_context(Strategy::kPermutation, cands),
                                     cands, provider, cfg);
    REQUIRE(result.trace.size() == 2);
    CHECK(result.trace[0].remasked == std::vector<std::size_t>{0, 1});
    CHECK(result.trace[0].s == 0.5);
    CHECK(result.trace[1].s == 0.0);
    REQUIRE(result.permutation.has_value());
    CHECK(*result.permutation == Permutation::identity(3));
    CHECK(result.provider_calls == 2);
}

TEST_CASE("sharp oracle recovers the relevance order for any step count") {
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> uniform(0.0, 1.0);
    for (std::size_t n = 2; n <= 8; ++n) {
        for (std::size_t steps : {std::size_t{1}, std::size_t{2}, n}) {
            std::vector<double> rels(n);
            RelevanceTable table;
            for (std::size_t i = 0; i < n; ++i) {
                rels[i] = uniform(rng);
                table.set("q1", "d" + std::to_string(i + 1), rels[i]);
            }
            SyntheticOracle oracle(OracleConfig{1, 5.0, 0.0, 0.0}, table);
            auto cands = make_cands(n);
            SamplerConfig cfg;
            cfg.steps = steps;
            auto result = sample_permutation(make_context(Strategy::kPermutation, cands),
                                             cands, oracle, cfg);
            REQUIRE(result.permutation.has_value());

            std::vector<std::size_t> expect(n);
            for (std::size_t i = 0; i < n; ++i) expect[i] = i;
            std::stable_sort(expect.begin(), expect.end(),
                             [&](std::size_t a, std::size_t b) { return rels[a] > rels[b]; });
            CHECK(*result.permutation == Permutation(expect));
        }
    }
}

TEST_CASE("constrained fuzz: output is always a valid permutation") {
    std::mt19937_64 rng(77);
    for (int trial = 0; trial < 300; ++trial) {
        const std::size_t n = 2 + rng() % 39;
        const std::size_t steps = 1 + rng() % n;
        auto cands = make_cands(n);
        RandomProvider provider(rng());
        SamplerConfig cfg;
        cfg.steps = steps;
        auto result = sample_permutation(make_context(Strategy::kPermutation, cands),
                                         cands, provider, cfg);
        REQUIRE(result.valid);
        REQUIRE(result.permutation.has_value());
        CHECK(result.permutation->size() == n);
        CHECK(result.provider_calls <= steps);
        for (std::size_t i = 0; i < result.trace.size(); ++i) {
            CHECK(result.trace[i].step == i + 1);
            CHECK(result.trace[i].s ==
                  static_cast<double>(steps - i - 1) / static_cast<double>(steps));
        }
    }
}

TEST_CASE("vanilla mode may emit duplicates and flags them invalid") {
    auto cands = make_cands(3);
    // every row prefers the same identifier
    FixedMatrixProvider provider(
        ProbMatrix(3, 3, {0.9, 0.05, 0.05,
                          0.9, 0.05, 0.05,
                          0.9, 0.05, 0.05}),
        IdentifierAlphabet::make_default(3));
    SamplerConfig cfg;
    cfg.steps = 1;
    cfg.mode = SamplerMode::kVanilla;
    auto result = sample_permutation(make_context(Strategy::kPermutation, cands),
                                     cands, provider, cfg);
    CHECK_FALSE(result.valid);
    CHECK_FALSE(result.permutation.has_value());
    CHECK(result.raw_slots == std::vector<std::size_t>{0, 0, 0});
}

TEST_CASE("vanilla mode on a clean diagonal matrix is valid") {
    auto cands = make_cands(4);
    FixedMatrixProvider provider(
        ProbMatrix(4, 4, {0.9, 0.03, 0.03, 0.04,
                          0.03, 0.9, 0.03, 0.04,
                          0.03, 0.03, 0.9, 0.04,
                          0.03, 0.03, 0.04, 0.9}),
        IdentifierAlphabet::make_default(4));
    SamplerConfig cfg;
    cfg.steps = 2;
    cfg.mode = SamplerMode::kVanilla;
    auto result = sample_permutation(make_context(Strategy::kPermutation, cands),
                                     cands, provider, cfg);
    CHECK(result.valid);
    CHECK(result.raw_slots == std::vector<std::size_t>{0, 1, 2, 3});
}

TEST_CASE("repair keeps first occurrences and fills holes in order") {
    CHECK(repair_invalid({0, 1, 2}, 3) == Permutation({0, 1, 2}));
    CHECK(repair_invalid({0, 0, 2}, 3) == Permutation({0, 1, 2}));
    CHECK(repair_invalid({2, 2, 2}, 3) == Permutation({2, 0, 1}));
    CHECK(repair_invalid({kMaskSlot, 1, kMaskSlot}, 3) == Permutation({0, 1, 2}));
    CHECK_THROWS_AS(repair_invalid({0, 1}, 3), ValidationError);
}

TEST_CASE("repair fuzz always yields a bijection") {
    std::mt19937_64 rng(13);
    for (int trial = 0; trial < 500; ++trial) {
        const std::size_t n = 1 + rng() % 20;
        std::vector<std::size_t> raw(n);
        for (auto& v : raw) v = rng() % (n + 1) == n ? kMaskSlot : rng() % n;
        CHECK_NOTHROW(repair_invalid(raw, n));
    }
}

TEST_CASE("provider failures surface as ProviderError with step context") {
    auto cands = make_cands(3);
    ThrowingProvider provider;
    SamplerConfig cfg;
    cfg.steps = 2;
    CHECK_THROWS_WITH_AS(
        sample_permutation(make_context(Strategy::kPermutation, cands), cands,
                           provider, cfg),
        "sampler step 1: backend unavailable", ProviderError);
}

TEST_CASE("zero steps rejected") {
    auto cands = make_cands(2);
    RandomProvider provider(1);
    SamplerConfig cfg;
    cfg.steps = 0;
    CHECK_THROWS_AS(sample_permutation(make_context(Strategy::kPermutation, cands),
                                       cands, provider, cfg),
                    ValidationError);
}

TEST_CASE("previously filled slots survive remasking over new low-confidence fills") {
    // K=2 on N=4: step 1 fills everything, keeps floor(4/2)=2. The two kept
    // slots carry confidence 1 into step 2 and must persist to the end.
    auto cands = make_cands(4);
    RandomProvider provider(99);
    SamplerConfig cfg;
    cfg.steps = 2;
    auto result = sample_permutation(make_context(Strategy::kPermutation, cands),
                                     cands, provider, cfg);
    REQUIRE(result.trace.size() == 2);
    std::vector<std::size_t> kept;
    for (const auto& f : result.trace[0].filled) {
        const auto& rem = result.trace[0].remasked;
        if (std::find(rem.begin(), rem.end(), f.pos) == rem.end())
            kept.push_back(f.pos);
    }
    CHECK(kept.size() == 2);
    for (std::size_t pos : kept) {
        auto id = std::find_if(result.trace[0].filled.begin(), result.trace[0].filled.end(),
                               [&](const StepFill& f) { return f.pos == pos; })
                      ->id;
        CHECK(result.raw_slots[pos] == id);
    }
}
