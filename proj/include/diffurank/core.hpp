// Copyright (c) 2026 diffurank contributors
// SPDX-License-Identifier: Apache-2.0

#ifndef DIFFURANK_CORE_HPP
#define DIFFURANK_CORE_HPP

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace diffurank {

/// Thrown when an input violates a documented precondition or invariant.
class ValidationError : public std::runtime_error {
public:
    explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

struct Query {
    std::string query_id;
    std::string text;

    Query(std::string id, std::string t) : query_id(std::move(id)), text(std::move(t)) {
        if (query_id.empty()) throw ValidationError("Query: empty query_id");
        if (text.empty()) throw ValidationError("Query: empty text");
    }
};

struct Document {
    std::string doc_id;
    std::string text;

    Document(std::string id, std::string t) : doc_id(std::move(id)), text(std::move(t)) {
        if (doc_id.empty()) throw ValidationError("Document: empty doc_id");
    }
};

/// Ordered set of short distinct labels used to tag candidate documents.
/// The default scheme is A..Z, then AA, BB, ... for lists longer than 26.
class IdentifierAlphabet {
public:
    explicit IdentifierAlphabet(std::vector<std::string> labels);

    /// Default alphabet with at least `capacity` labels.
    static IdentifierAlphabet make_default(std::size_t capacity);

    const std::vector<std::string>& labels() const { return labels_; }
    std::size_t size() const { return labels_.size(); }
    const std::string& label(std::size_t i) const { return labels_.at(i); }

    /// Index of a label, or -1 if the label is not part of the alphabet.
    int index_of(const std::string& label) const;

private:
    std::vector<std::string> labels_;
};

/// One reranking instance: a query plus identifier-tagged candidate documents.
struct CandidateList {
    Query query;
    std::vector<Document> docs;
    IdentifierAlphabet alphabet;

    CandidateList(Query q, std::vector<Document> d, IdentifierAlphabet a);

    std::size_t size() const { return docs.size(); }
    const std::string& label(std::size_t i) const { return alphabet.label(i); }
};

/// Tags docs with alphabet labels in order: doc k gets label k.
CandidateList assign_identifiers(Query query, std::vector<Document> docs,
                                 IdentifierAlphabet alphabet);
CandidateList assign_identifiers(Query query, std::vector<Document> docs);

/// Bijection from rank positions (0-based) to identifier indices.
class Permutation {
public:
    explicit Permutation(std::vector<std::size_t> mapping);

    std::size_t size() const { return mapping_.size(); }
    std::size_t operator[](std::size_t pos) const { return mapping_[pos]; }
    const std::vector<std::size_t>& mapping() const { return mapping_; }

    static Permutation identity(std::size_t n);

    bool operator==(const Permutation& other) const { return mapping_ == other.mapping_; }

private:
    std::vector<std::size_t> mapping_;
};

struct RankedEntry {
    std::string doc_id;
    double score;
    std::size_t rank;  // 1-based
};

/// Scored ranking for a single query. Ranks are consecutive from 1 and
/// scores are non-increasing with rank.
struct RankedList {
    std::string query_id;
    std::vector<RankedEntry> entries;

    void validate() const;
};

/// rank position i holds the document whose identifier index is perm[i];
/// scores use the M - i surrogate so TREC runs stay strictly decreasing.
RankedList permutation_to_ranking(const Permutation& perm, const CandidateList& cands);

/// Inverse of permutation_to_ranking for rankings over the same candidate list.
Permutation ranking_to_permutation(const RankedList& ranking, const CandidateList& cands);

/// Dense nonnegative score matrix: masked positions (rows) x identifier
/// tokens (columns).
class ProbMatrix {
public:
    ProbMatrix() : rows_(0), cols_(0) {}
    ProbMatrix(std::size_t rows, std::size_t cols);
    ProbMatrix(std::size_t rows, std::size_t cols, std::vector<double> data);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
    double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    const std::vector<double>& data() const { return data_; }

    /// Entries nonnegative, at least one strictly positive entry per row.
    void validate() const;

private:
    std::size_t rows_, cols_;
    std::vector<double> data_;
};

/// Floor added to probabilities before the log so zero cells become
/// maximally expensive instead of infinite.
inline constexpr double kCostFloor = 1e-12;

/// Square matrix of costs C_ij = -log(P_ij + floor).
class CostMatrix {
public:
    explicit CostMatrix(const ProbMatrix& probs, double floor = kCostFloor);
    CostMatrix(std::size_t n, std::vector<double> data);

    std::size_t size() const { return n_; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * n_ + c]; }
    double& operator()(std::size_t r, std::size_t c) { return data_[r * n_ + c]; }

    void validate() const;

private:
    std::size_t n_;
    std::vector<double> data_;
};

}  // namespace diffurank

#endif
