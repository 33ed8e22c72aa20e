// Copyright (c) 2026 diffurank contributors
// SPDX-License-Identifier: Apache-2.0

#include "diffurank/core.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

namespace diffurank {

IdentifierAlphabet::IdentifierAlphabet(std::vector<std::string> labels)
    : labels_(std::move(labels)) {
    if (labels_.empty()) throw ValidationError("IdentifierAlphabet: no labels");
    std::unordered_set<std::string> seen;
    for (const auto& l : labels_) {
        if (l.empty()) throw ValidationError("IdentifierAlphabet: empty label");
        if (!seen.insert(l).second)
            throw ValidationError("IdentifierAlphabet: duplicate label '" + l + "'");
    }
}

IdentifierAlphabet IdentifierAlphabet::make_default(std::size_t capacity) {
    std::vector<std::string> labels;
    labels.reserve(capacity);
    std::size_t repeat = 1;
    while (labels.size() < capacity) {
        for (char c = 'A'; c <= 'Z' && labels.size() < capacity; ++c) {
            labels.push_back(std::string(repeat, c));
        }
        ++repeat;
    }
    return IdentifierAlphabet(std::move(labels));
}

int IdentifierAlphabet::index_of(const std::string& label) const {
    auto it = std::find(labels_.begin(), labels_.end(), label);
    return it == labels_.end() ? -1 : static_cast<int>(it - labels_.begin());
}

CandidateList::CandidateList(Query q, std::vector<Document> d, IdentifierAlphabet a)
    : query(std::move(q)), docs(std::move(d)), alphabet(std::move(a)) {
    if (docs.empty()) throw ValidationError("CandidateList: no documents");
    if (docs.size() > alphabet.size())
        throw ValidationError("CandidateList: " + std::to_string(docs.size()) +
                              " docs exceed alphabet capacity " +
                              std::to_string(alphabet.size()));
    std::unordered_set<std::string> seen;
    for (const auto& doc : docs) {
        if (!seen.insert(doc.doc_id).second)
            throw ValidationError("CandidateList: duplicate doc_id '" + doc.doc_id + "'");
    }
}

CandidateList assign_identifiers(Query query, std::vector<Document> docs,
                                 IdentifierAlphabet alphabet) {
    return CandidateList(std::move(query), std::move(docs), std::move(alphabet));
}

CandidateList assign_identifiers(Query query, std::vector<Document> docs) {
    auto alphabet = IdentifierAlphabet::make_default(std::max<std::size_t>(docs.size(), 1));
    return assign_identifiers(std::move(query), std::move(docs), std::move(alphabet));
}

Permutation::Permutation(std::vector<std::size_t> mapping) : mapping_(std::move(mapping)) {
    if (mapping_.empty()) throw ValidationError("Permutation: empty mapping");
    std::vector<bool> seen(mapping_.size(), false);
    for (std::size_t idx : mapping_) {
        if (idx >= mapping_.size())
            throw ValidationError("Permutation: index " + std::to_string(idx) +
                                  " out of range for size " + std::to_string(mapping_.size()));
        if (seen[idx])
            throw ValidationError("Permutation: duplicate index " + std::to_string(idx));
        seen[idx] = true;
    }
}

Permutation Permutation::identity(std::size_t n) {
    std::vector<std::size_t> m(n);
    for (std::size_t i = 0; i < n; ++i) m[i] = i;
    return Permutation(std::move(m));
}

void RankedList::validate() const {
    std::unordered_set<std::string> seen;
    for (std::size_t i = 0; i < entries.size(); ++i) {
        const auto& e = entries[i];
        if (e.rank != i + 1)
            throw ValidationError("RankedList: rank " + std::to_string(e.rank) +
                                  " at position " + std::to_string(i));
        if (i > 0 && entries[i - 1].score < e.score)
            throw ValidationError("RankedList: scores increase at rank " +
                                  std::to_string(e.rank));
        if (!seen.insert(e.doc_id).second)
            throw ValidationError("RankedList: duplicate doc_id '" + e.doc_id + "'");
    }
}

RankedList permutation_to_ranking(const Permutation& perm, const CandidateList& cands) {
    if (perm.size() != cands.size())
        throw ValidationError("permutation_to_ranking: permutation size " +
                              std::to_string(perm.size()) + " != candidate count " +
                              std::to_string(cands.size()));
    RankedList out;
    out.query_id = cands.query.query_id;
    const std::size_t n = perm.size();
    out.entries.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        out.entries.push_back({cands.docs[perm[i]].doc_id,
                               static_cast<double>(n - i), i + 1});
    }
    return out;
}

Permutation ranking_to_permutation(const RankedList& ranking, const CandidateList& cands) {
    if (ranking.entries.size() != cands.size())
        throw ValidationError("ranking_to_permutation: size mismatch");
    std::vector<std::size_t> mapping;
    mapping.reserve(cands.size());
    for (const auto& e : ranking.entries) {
        int idx = -1;
        for (std::size_t j = 0; j < cands.size(); ++j) {
            if (cands.docs[j].doc_id == e.doc_id) {
                idx = static_cast<int>(j);
                break;
            }
        }
        if (idx < 0)
            throw ValidationError("ranking_to_permutation: doc '" + e.doc_id +
                                  "' not in candidate list");
        mapping.push_back(static_cast<std::size_t>(idx));
    }
    return Permutation(std::move(mapping));
}

ProbMatrix::ProbMatrix(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}

ProbMatrix::ProbMatrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
    if (data_.size() != rows_ * cols_)
        throw ValidationError("ProbMatrix: data size mismatch");
}

void ProbMatrix::validate() const {
    for (std::size_t r = 0; r < rows_; ++r) {
        bool positive = false;
        for (std::size_t c = 0; c < cols_; ++c) {
            double v = (*this)(r, c);
            if (!(v >= 0.0) || !std::isfinite(v))
                throw ValidationError("ProbMatrix: bad entry at row " + std::to_string(r));
            if (v > 0.0) positive = true;
        }
        if (!positive)
            throw ValidationError("ProbMatrix: all-zero row " + std::to_string(r));
    }
}

CostMatrix::CostMatrix(const ProbMatrix& probs, double floor) {
    if (probs.rows() != probs.cols())
        throw ValidationError("CostMatrix: source matrix not square");
    probs.validate();
    n_ = probs.rows();
    data_.resize(n_ * n_);
    for (std::size_t r = 0; r < n_; ++r)
        for (std::size_t c = 0; c < n_; ++c)
            data_[r * n_ + c] = -std::log(probs(r, c) + floor);
}

CostMatrix::CostMatrix(std::size_t n, std::vector<double> data)
    : n_(n), data_(std::move(data)) {
    if (data_.size() != n_ * n_) throw ValidationError("CostMatrix: data size mismatch");
}

void CostMatrix::validate() const {
    for (double v : data_)
        if (!std::isfinite(v)) throw ValidationError("CostMatrix: non-finite entry");
}

}  // namespace diffurank
