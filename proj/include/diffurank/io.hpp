// Copyright (c) 2026 diffurank contributors
// SPDX-License-Identifier: Apache-2.0

#ifndef DIFFURANK_IO_HPP
#define DIFFURANK_IO_HPP

#include <map>
#include <string>
#include <unordered_map>
#include <vector>

#include "diffurank/evalx.hpp"
#include "diffurank/oracle.hpp"
#include "diffurank/train.hpp"

namespace diffurank {

class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& path, std::size_t line, const std::string& what)
        : std::runtime_error(path + ":" + std::to_string(line) + ": " + what) {}
};

/// Corpus: JSON-lines {doc_id, text [, title]}; title, when present, is
/// prepended to the text.
std::unordered_map<std::string, Document> load_corpus(const std::string& path);

/// Queries: TSV "query_id \t text".
std::vector<Query> load_queries(const std::string& path);

/// First-stage candidates in TREC run format "qid Q0 docid rank score tag",
/// truncated to top_k per query preserving retrieval order. Every doc_id
/// must exist in the corpus.
std::map<std::string, std::vector<Document>> load_candidates(
    const std::string& path, const std::unordered_map<std::string, Document>& corpus,
    std::size_t top_k);

/// Qrels: "qid 0 docid grade".
Qrels load_qrels(const std::string& path);

/// TREC run lines, six decimal places for scores, queries in input order.
void write_run(const std::vector<RankedList>& results, const std::string& path,
               const std::string& tag);
std::vector<RankedList> load_run(const std::string& path);

/// Oracle sidecar emitted by the synthetic generator so the provider and
/// the qrels stay mutually consistent.
struct OracleFile {
    OracleConfig config;
    RelevanceTable relevance;
};
void write_oracle(const OracleFile& oracle, const std::string& path);
OracleFile load_oracle(const std::string& path);

struct SyntheticDataset {
    std::vector<Query> queries;
    std::unordered_map<std::string, Document> corpus;
    std::map<std::string, std::vector<Document>> candidates;
    Qrels qrels;
    OracleFile oracle;
};

/// Deterministic desk-scale benchmark: hidden rel per (q, d), graded qrels
/// by thresholding rel, candidate order = noisy rel order.
SyntheticDataset generate_synthetic(std::size_t num_queries, std::size_t num_docs,
                                    std::uint64_t seed);
void write_synthetic(const SyntheticDataset& data, const std::string& out_dir);

/// Sampler traces, JSON-lines: one line per step plus one summary line per
/// window.
void write_traces(const std::vector<WindowTrace>& traces, const std::string& path);
std::vector<WindowTrace> load_traces(const std::string& path);

/// Training data: JSON-lines {query, docs:[{doc_id,text[,features]}],
/// teacher_order:[doc_id]}.
std::vector<TrainInstance> load_train_data(const std::string& path);
void write_train_data(const std::vector<TrainInstance>& instances,
                      const std::string& path);

/// Flat TOML subset: "key = value" lines, # comments, quoted strings,
/// numbers and booleans. Section headers are rejected.
std::map<std::string, std::string> load_toml(const std::string& path);

struct EngineConfig {
    std::string strategy = "perm_assign";
    std::string provider = "oracle";
    std::size_t k = 4;
    std::size_t window = 20;
    std::size_t step_size = 10;
    std::size_t top_k = 100;
    std::uint64_t seed = 0;
    double beta = 5.0;
    double gamma = 0.0;
    double lambda = 0.0;
    std::string remote_url;
    std::string template_id = "default";
    std::string gain = "exp";
    std::string sampler_mode = "constrained";
    std::size_t jobs = 1;

    static EngineConfig from_toml(const std::string& path);
    void validate() const;
};

}  // namespace diffurank

#endif
