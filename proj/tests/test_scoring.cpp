// Copyright (c) 2026 diffurank contributors
// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <memory>
#include <random>

#include "diffurank/oracle.hpp"
#include "diffurank/scoring.hpp"

using namespace diffurank;

namespace {

class CountingProvider : public LogitsProvider {
public:
    explicit CountingProvider(LogitsProvider& inner) : inner_(inner) {}

    LogitsResponse provide(const PromptContext& ctx, const MaskQuery& mq) override {
        ++calls;
        return inner_.provide(ctx, mq);
    }

    std::size_t calls = 0;

private:
    LogitsProvider& inner_;
};

CandidateList make_cands(std::size_t n, const std::vector<double>& rels,
                         RelevanceTable& table) {
    std::vector<Document> docs;
    for (std::size_t i = 0; i < n; ++i) {
        docs.emplace_back("d" + std::to_string(i + 1), "text");
        table.set("q1", "d" + std::to_string(i + 1), rels[i]);
    }
    return assign_identifiers(Query("q1", "query"), std::move(docs));
}

}  // namespace

TEST_CASE("score from a probability row") {
    CHECK(score_from_row(0.2, 0.6).value == doctest::Approx(0.75));
    CHECK(score_from_row(0.3, 0.3).value == doctest::Approx(0.5));
    CHECK(score_from_row(0.4, 0.0).value == doctest::Approx(0.0));
    CHECK(score_from_row(0.0, 0.4).value == doctest::Approx(1.0));
    CHECK_THROWS_AS(score_from_row(-0.1, 0.5), ValidationError);
}

TEST_CASE("degenerate all-zero row defaults to 0.5 with a flag") {
    auto s = score_from_row(0.0, 0.0);
    CHECK(s.degenerate);
    CHECK(s.value == 0.5);
    CHECK_FALSE(score_from_row(0.1, 0.0).degenerate);
}

TEST_CASE("score is invariant under row rescaling") {
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> uniform(0.01, 1.0);
    for (int trial = 0; trial < 100; ++trial) {
        const double p0 = uniform(rng), p1 = uniform(rng), c = uniform(rng) * 10.0;
        CHECK(score_from_row(c * p0, c * p1).value ==
              doctest::Approx(score_from_row(p0, p1).value).epsilon(1e-12));
    }
}

TEST_CASE("pointwise score equals the hidden relevance under the oracle") {
    RelevanceTable table;
    table.set("q1", "d1", 0.8);
    SyntheticOracle oracle(OracleConfig{1, 5.0, 0.0, 0.0}, table);
    auto s = pointwise_score(Query("q1", "query"), Document("d1", "text"), oracle);
    CHECK(s.value == doctest::Approx(0.8));
    CHECK_FALSE(s.degenerate);
}

TEST_CASE("listwise scoring uses exactly one provider call") {
    RelevanceTable table;
    auto cands = make_cands(6, {0.9, 0.1, 0.5, 0.7, 0.3, 0.6}, table);
    SyntheticOracle oracle(OracleConfig{1, 5.0, 0.0, 0.0}, table);
    CountingProvider counter(oracle);
    auto scores = logits_listwise_scores(cands, counter);
    CHECK(counter.calls == 1);
    REQUIRE(scores.size() == 6);
    const std::vector<double> rels{0.9, 0.1, 0.5, 0.7, 0.3, 0.6};
    for (std::size_t i = 0; i < 6; ++i)
        CHECK(scores[i].value == doctest::Approx(rels[i]));
}

TEST_CASE("single-candidate listwise matches pointwise") {
    RelevanceTable table;
    auto cands = make_cands(1, {0.42}, table);
    SyntheticOracle oracle(OracleConfig{1, 5.0, 0.0, 0.0}, table);
    auto list = logits_listwise_scores(cands, oracle);
    auto point = pointwise_score(cands.query, cands.docs[0], oracle);
    REQUIRE(list.size() == 1);
    CHECK(list[0].value == doctest::Approx(point.value).epsilon(1e-12));
}

TEST_CASE("ranking sorts by descending score") {
    RelevanceTable table;
    auto cands = make_cands(4, {0.2, 0.9, 0.5, 0.7}, table);
    std::vector<RelevanceScore> scores{
        {0.2, 0.8, 0.2, false}, {0.9, 0.1, 0.9, false},
        {0.5, 0.5, 0.5, false}, {0.7, 0.3, 0.7, false}};
    auto ranking = scores_to_ranking(cands, scores);
    CHECK_NOTHROW(ranking.validate());
    CHECK(ranking.entries[0].doc_id == "d2");
    CHECK(ranking.entries[1].doc_id == "d4");
    CHECK(ranking.entries[2].doc_id == "d3");
    CHECK(ranking.entries[3].doc_id == "d1");
    CHECK(ranking.entries[0].score == doctest::Approx(0.9));
}

TEST_CASE("ties keep the candidate order") {
    RelevanceTable table;
    auto cands = make_cands(3, {0.5, 0.5, 0.5}, table);
    std::vector<RelevanceScore> scores{
        {0.5, 0.5, 0.5, false}, {0.5, 0.5, 0.5, false}, {0.5, 0.5, 0.5, false}};
    auto ranking = scores_to_ranking(cands, scores);
    CHECK(ranking.entries[0].doc_id == "d1");
    CHECK(ranking.entries[1].doc_id == "d2");
    CHECK(ranking.entries[2].doc_id == "d3");
}

TEST_CASE("score count mismatch rejected") {
    RelevanceTable table;
    auto cands = make_cands(3, {0.1, 0.2, 0.3}, table);
    CHECK_THROWS_AS(scores_to_ranking(cands, {{0.5, 0.5, 0.5, false}}), ValidationError);
}
