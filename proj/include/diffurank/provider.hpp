// Copyright (c) 2026 diffurank contributors
// SPDX-License-Identifier: Apache-2.0

#ifndef DIFFURANK_PROVIDER_HPP
#define DIFFURANK_PROVIDER_HPP

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "diffurank/core.hpp"

namespace diffurank {

enum class Strategy { kPointwise, kLogitsList, kPermutation };

std::string strategy_name(Strategy s);

/// Rendered prompt context handed to the mask predictor.
struct PromptContext {
    Strategy strategy;
    Query query;
    std::vector<std::pair<std::string, Document>> tagged_docs;  // (label, doc)
    std::string template_id;

    PromptContext(Strategy s, Query q,
                  std::vector<std::pair<std::string, Document>> docs,
                  std::string tmpl = "default");
};

PromptContext make_context(Strategy strategy, const CandidateList& cands,
                           const std::string& template_id = "default");

/// Which response slots are masked and what tokens they may take.
struct MaskQuery {
    std::vector<std::size_t> masked_positions;
    std::vector<std::string> allowed_tokens;  // {"0","1"} or unused identifier labels
    std::vector<std::pair<std::size_t, std::string>> filled_slots;

    void validate() const;
};

/// One probability row per masked position over the allowed token set.
struct LogitsResponse {
    ProbMatrix rows;
    std::map<std::string, std::string> provider_meta;
};

class ProviderError : public std::runtime_error {
public:
    explicit ProviderError(const std::string& what) : std::runtime_error(what) {}
};

class TransportError : public ProviderError {
public:
    using ProviderError::ProviderError;
};

class MalformedResponseError : public ProviderError {
public:
    using ProviderError::ProviderError;
};

class DimensionMismatchError : public ProviderError {
public:
    using ProviderError::ProviderError;
};

class CacheMissError : public ProviderError {
public:
    using ProviderError::ProviderError;
};

/// The mask-predictor boundary. Implementations must tolerate concurrent
/// provide() calls from independent query workers.
class LogitsProvider {
public:
    virtual ~LogitsProvider() = default;
    virtual LogitsResponse provide(const PromptContext& ctx, const MaskQuery& mq) = 0;
};

/// Canonical JSON serialization of (ctx, mq); basis for replay keys.
std::string canonical_request(const PromptContext& ctx, const MaskQuery& mq);

/// Hex digest of the canonical serialization (FNV-1a 128-bit split).
std::string request_key(const PromptContext& ctx, const MaskQuery& mq);

}  // namespace diffurank

#endif
