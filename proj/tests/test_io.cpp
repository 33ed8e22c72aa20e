// Copyright (c) 2026 diffurank contributors
// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "diffurank/io.hpp"

using namespace diffurank;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() : path(fs::temp_directory_path() / "diffurank_io_test") {
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }

    std::string file(const std::string& name, const std::string& content) const {
        const std::string p = (path / name).string();
        std::ofstream out(p);
        out << content;
        return p;
    }
};

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("corpus loads and prepends titles") {
    TempDir dir;
    const auto p = dir.file("corpus.jsonl",
                            R"({"doc_id":"d1","text":"body one"})"
                            "\n"
                            R"({"doc_id":"d2","title":"A Title","text":"body two"})"
                            "\n");
    auto corpus = load_corpus(p);
    REQUIRE(corpus.size() == 2);
    CHECK(corpus.at("d1").text == "body one");
    CHECK(corpus.at("d2").text == "A Title body two");
}

TEST_CASE("corpus errors carry path and line") {
    TempDir dir;
    const auto p = dir.file("bad.jsonl", "{\"doc_id\":\"d1\",\"text\":\"x\"}\nnot json\n");
    try {
        load_corpus(p);
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(std::string(e.what()).find(p + ":2") != std::string::npos);
    }
    const auto dup = dir.file("dup.jsonl",
                              "{\"doc_id\":\"d1\",\"text\":\"x\"}\n"
                              "{\"doc_id\":\"d1\",\"text\":\"y\"}\n");
    CHECK_THROWS_AS(load_corpus(dup), ParseError);
    const auto missing = dir.file("missing.jsonl", "{\"doc_id\":\"d1\"}\n");
    CHECK_THROWS_AS(load_corpus(missing), ParseError);
}

TEST_CASE("queries load from TSV") {
    TempDir dir;
    const auto p = dir.file("queries.tsv", "q1\twhat is a test\nq2\tanother query\n");
    auto queries = load_queries(p);
    REQUIRE(queries.size() == 2);
    CHECK(queries[0].query_id == "q1");
    CHECK(queries[1].text == "another query");
    CHECK_THROWS_AS(load_queries(dir.file("bad.tsv", "no tab here\n")), ParseError);
}

TEST_CASE("candidates truncate to top_k in retrieval order") {
    TempDir dir;
    const auto corpus_path = dir.file("corpus.jsonl",
                                      "{\"doc_id\":\"d1\",\"text\":\"a\"}\n"
                                      "{\"doc_id\":\"d2\",\"text\":\"b\"}\n"
                                      "{\"doc_id\":\"d3\",\"text\":\"c\"}\n");
    auto corpus = load_corpus(corpus_path);
    const auto p = dir.file("cands.txt",
                            "q1 Q0 d3 1 3.000000 bm25\n"
                            "q1 Q0 d1 2 2.000000 bm25\n"
                            "q1 Q0 d2 3 1.000000 bm25\n");
    auto cands = load_candidates(p, corpus, 2);
    REQUIRE(cands.at("q1").size() == 2);
    CHECK(cands.at("q1")[0].doc_id == "d3");
    CHECK(cands.at("q1")[1].doc_id == "d1");
}

TEST_CASE("candidates referencing unknown docs name the offenders") {
    TempDir dir;
    auto corpus = load_corpus(dir.file("corpus.jsonl", "{\"doc_id\":\"d1\",\"text\":\"a\"}\n"));
    const auto p = dir.file("cands.txt",
                            "q1 Q0 d1 1 2.000000 bm25\n"
                            "q1 Q0 ghost 2 1.000000 bm25\n");
    try {
        load_candidates(p, corpus, 10);
        FAIL("expected error");
    } catch (const std::runtime_error& e) {
        CHECK(std::string(e.what()).find("ghost") != std::string::npos);
    }
}

TEST_CASE("qrels load") {
    TempDir dir;
    const auto p = dir.file("qrels.txt", "q1 0 d1 3\nq1 0 d2 1\nq2 0 d1 0\n");
    auto qrels = load_qrels(p);
    CHECK(qrels.grade("q1", "d1") == 3);
    CHECK(qrels.grade("q1", "d2") == 1);
    CHECK(qrels.grade("q1", "dX") == 0);
    CHECK(qrels.has_query("q2"));
    CHECK_THROWS_AS(load_qrels(dir.file("bad.txt", "q1 0 d1\n")), ParseError);
    CHECK_THROWS_AS(load_qrels(dir.file("neg.txt", "q1 0 d1 -2\n")), ParseError);
}

TEST_CASE("run files round-trip and have stable bytes") {
    TempDir dir;
    RankedList run;
    run.query_id = "q1";
    run.entries = {{"d2", 3.0, 1}, {"d1", 2.5, 2}, {"d3", 0.125, 3}};
    const std::string p = (dir.path / "run.txt").string();
    write_run({run}, p, "diffurank");
    CHECK(slurp(p) ==
          "q1 Q0 d2 1 3.000000 diffurank\n"
          "q1 Q0 d1 2 2.500000 diffurank\n"
          "q1 Q0 d3 3 0.125000 diffurank\n");

    auto loaded = load_run(p);
    REQUIRE(loaded.size() == 1);
    CHECK(loaded[0].query_id == "q1");
    REQUIRE(loaded[0].entries.size() == 3);
    CHECK(loaded[0].entries[1].doc_id == "d1");
    CHECK(loaded[0].entries[1].score == 2.5);
    CHECK(loaded[0].entries[1].rank == 2);

    // writing the loaded run again reproduces the bytes
    const std::string p2 = (dir.path / "run2.txt").string();
    write_run(loaded, p2, "diffurank");
    CHECK(slurp(p) == slurp(p2));
}

TEST_CASE("invalid runs are rejected on load") {
    TempDir dir;
    const auto gap = dir.file("gap.txt",
                              "q1 Q0 d1 1 2.000000 t\n"
                              "q1 Q0 d2 3 1.000000 t\n");
    CHECK_THROWS_AS(load_run(gap), ValidationError);
    const auto rising = dir.file("rising.txt",
                                 "q1 Q0 d1 1 1.000000 t\n"
                                 "q1 Q0 d2 2 2.000000 t\n");
    CHECK_THROWS_AS(load_run(rising), ValidationError);
}

TEST_CASE("oracle sidecar round-trips") {
    TempDir dir;
    OracleFile oracle;
    oracle.config = OracleConfig{99, 4.5, 0.25, 1.5};
    oracle.relevance.set("q1", "d1", 0.75);
    oracle.relevance.set("q1", "d2", 0.125);
    oracle.relevance.set("q2", "d1", 0.5);
    const std::string p = (dir.path / "oracle.json").string();
    write_oracle(oracle, p);
    auto loaded = load_oracle(p);
    CHECK(loaded.config.seed == 99);
    CHECK(loaded.config.beta == 4.5);
    CHECK(loaded.config.gamma == 0.25);
    CHECK(loaded.config.lambda == 1.5);
    CHECK(loaded.relevance.get("q1", "d1") == 0.75);
    CHECK(loaded.relevance.get("q2", "d1") == 0.5);
    CHECK_FALSE(loaded.relevance.has("q2", "d2"));
}

TEST_CASE("synthetic generation is deterministic and self-consistent") {
    auto a = generate_synthetic(5, 30, 42);
    auto b = generate_synthetic(5, 30, 42);
    CHECK(a.queries.size() == 5);
    CHECK(a.corpus.size() == 30);
    for (const auto& q : a.queries) {
        const auto& ca = a.candidates.at(q.query_id);
        const auto& cb = b.candidates.at(q.query_id);
        REQUIRE(ca.size() == 30);
        for (std::size_t i = 0; i < 30; ++i) CHECK(ca[i].doc_id == cb[i].doc_id);
        for (const auto& [doc_id, _] : a.corpus) {
            const double rel = a.oracle.relevance.get(q.query_id, doc_id);
            CHECK(rel == b.oracle.relevance.get(q.query_id, doc_id));
            const int grade = a.qrels.grade(q.query_id, doc_id);
            CHECK(grade >= 0);
            CHECK(grade <= 3);
            const int expect = rel >= 0.85 ? 3 : rel >= 0.65 ? 2 : rel >= 0.45 ? 1 : 0;
            CHECK(grade == expect);
        }
    }
    auto c = generate_synthetic(5, 30, 43);
    bool any_diff = false;
    for (const auto& [doc_id, _] : a.corpus)
        if (a.oracle.relevance.get("q1", doc_id) != c.oracle.relevance.get("q1", doc_id))
            any_diff = true;
    CHECK(any_diff);
}

TEST_CASE("synthetic files round-trip through the loaders byte-identically") {
    TempDir dir;
    auto data = generate_synthetic(3, 20, 7);
    const std::string d1 = (dir.path / "a").string();
    const std::string d2 = (dir.path / "b").string();
    write_synthetic(data, d1);
    write_synthetic(data, d2);
    for (const char* name :
         {"corpus.jsonl", "queries.tsv", "candidates.txt", "qrels.txt", "oracle.json"})
        CHECK(slurp(d1 + "/" + name) == slurp(d2 + "/" + name));

    auto corpus = load_corpus(d1 + "/corpus.jsonl");
    auto queries = load_queries(d1 + "/queries.tsv");
    auto cands = load_candidates(d1 + "/candidates.txt", corpus, 100);
    auto qrels = load_qrels(d1 + "/qrels.txt");
    auto oracle = load_oracle(d1 + "/oracle.json");
    CHECK(corpus.size() == 20);
    CHECK(queries.size() == 3);
    for (const auto& q : queries) {
        REQUIRE(cands.at(q.query_id).size() == 20);
        for (std::size_t i = 0; i < 20; ++i)
            CHECK(cands.at(q.query_id)[i].doc_id ==
                  data.candidates.at(q.query_id)[i].doc_id);
        for (const auto& [doc_id, _] : corpus) {
            CHECK(oracle.relevance.get(q.query_id, doc_id) ==
                  data.oracle.relevance.get(q.query_id, doc_id));
            CHECK(qrels.grade(q.query_id, doc_id) == data.qrels.grade(q.query_id, doc_id));
        }
    }
}

TEST_CASE("sampler traces round-trip") {
    TempDir dir;
    WindowTrace tr;
    tr.query_id = "q7";
    tr.window_index = 2;
    tr.n = 3;
    tr.k = 2;
    tr.mode = "constrained";
    StepTrace s1;
    s1.step = 1;
    s1.s = 0.5;
    s1.filled = {{0, 2, 0.9}, {1, 0, 0.4}};
    s1.remasked = {1};
    StepTrace s2;
    s2.step = 2;
    s2.s = 0.0;
    s2.filled = {{1, 0, 0.8}, {2, 1, 0.7}};
    tr.steps = {s1, s2};
    tr.raw_slots = {2, 0, 1};
    tr.valid = true;

    WindowTrace invalid;
    invalid.query_id = "q8";
    invalid.window_index = 0;
    invalid.n = 2;
    invalid.k = 1;
    invalid.mode = "vanilla";
    StepTrace v1;
    v1.step = 1;
    v1.s = 0.0;
    v1.filled = {{0, 1, 0.5}, {1, 1, 0.5}};
    invalid.steps = {v1};
    invalid.raw_slots = {1, kMaskSlot};
    invalid.valid = false;

    const std::string p = (dir.path / "traces.jsonl").string();
    write_traces({tr, invalid}, p);
    auto loaded = load_traces(p);
    REQUIRE(loaded.size() == 2);

    CHECK(loaded[0].query_id == "q7");
    CHECK(loaded[0].window_index == 2);
    CHECK(loaded[0].n == 3);
    CHECK(loaded[0].k == 2);
    CHECK(loaded[0].mode == "constrained");
    REQUIRE(loaded[0].steps.size() == 2);
    CHECK(loaded[0].steps[0].s == 0.5);
    CHECK(loaded[0].steps[0].remasked == std::vector<std::size_t>{1});
    REQUIRE(loaded[0].steps[0].filled.size() == 2);
    CHECK(loaded[0].steps[0].filled[0].pos == 0);
    CHECK(loaded[0].steps[0].filled[0].id == 2);
    CHECK(loaded[0].steps[0].filled[0].conf == 0.9);
    CHECK(loaded[0].raw_slots == std::vector<std::size_t>{2, 0, 1});
    CHECK(loaded[0].valid);

    CHECK(loaded[1].mode == "vanilla");
    CHECK(loaded[1].raw_slots == std::vector<std::size_t>{1, kMaskSlot});
    CHECK_FALSE(loaded[1].valid);
}

TEST_CASE("training data round-trips and falls back to text features") {
    TempDir dir;
    TrainInstance inst;
    inst.query_id = "q1";
    inst.features = {{1.0, 2.0}, {3.0, 4.0}};
    inst.teacher = TeacherRanking{"q1", {1, 0}};
    const std::string p = (dir.path / "train.jsonl").string();
    write_train_data({inst}, p);
    auto loaded = load_train_data(p);
    REQUIRE(loaded.size() == 1);
    CHECK(loaded[0].query_id == "q1");
    CHECK(loaded[0].features == inst.features);
    CHECK(loaded[0].teacher.order == inst.teacher.order);

    const auto fallback = dir.file(
        "fallback.jsonl",
        R"({"query":"q2","docs":[{"doc_id":"a","text":"ten tokens"},{"doc_id":"b"}],"teacher_order":["b","a"]})"
        "\n");
    auto fb = load_train_data(fallback);
    REQUIRE(fb.size() == 1);
    REQUIRE(fb[0].features.size() == 2);
    CHECK(fb[0].features[0].size() == 3);
    CHECK(fb[0].features[0][0] == doctest::Approx(0.10));
    CHECK(fb[0].features[0][1] == doctest::Approx(0.2));
    CHECK(fb[0].teacher.order == std::vector<std::size_t>{1, 0});

    const auto bad = dir.file(
        "bad.jsonl",
        R"({"query":"q3","docs":[{"doc_id":"a","text":"x"}],"teacher_order":["ghost"]})"
        "\n");
    CHECK_THROWS_AS(load_train_data(bad), ParseError);
}

TEST_CASE("flat config parsing") {
    TempDir dir;
    const auto p = dir.file("conf.toml",
                            "# a comment\n"
                            "strategy = \"perm_samp\"\n"
                            "k = 8\n"
                            "beta = 2.5\n"
                            "  gain = linear  \n"
                            "\n");
    auto kv = load_toml(p);
    CHECK(kv.at("strategy") == "perm_samp");
    CHECK(kv.at("k") == "8");
    CHECK(kv.at("gain") == "linear");
    CHECK(kv.count("# a comment") == 0);

    auto cfg = EngineConfig::from_toml(p);
    CHECK(cfg.strategy == "perm_samp");
    CHECK(cfg.k == 8);
    CHECK(cfg.beta == 2.5);
    CHECK(cfg.gain == "linear");
    CHECK(cfg.window == 20);  // untouched default

    CHECK_THROWS_AS(load_toml(dir.file("sec.toml", "[section]\nk = 2\n")), ParseError);
    CHECK_THROWS_AS(load_toml(dir.file("noeq.toml", "just words\n")), ParseError);
}

TEST_CASE("engine config validation") {
    EngineConfig cfg;
    CHECK_NOTHROW(cfg.validate());
    cfg.strategy = "bogus";
    CHECK_THROWS_AS(cfg.validate(), ValidationError);
    cfg = EngineConfig{};
    cfg.provider = "psychic";
    CHECK_THROWS_AS(cfg.validate(), ValidationError);
    cfg = EngineConfig{};
    cfg.step_size = 0;
    CHECK_THROWS_AS(cfg.validate(), ValidationError);
    cfg = EngineConfig{};
    cfg.sampler_mode = "chaotic";
    CHECK_THROWS_AS(cfg.validate(), ValidationError);
}

TEST_CASE("missing files raise errors") {
    CHECK_THROWS(load_corpus("/nonexistent/corpus.jsonl"));
    CHECK_THROWS(load_queries("/nonexistent/queries.tsv"));
    CHECK_THROWS(load_toml("/nonexistent/conf.toml"));
}
