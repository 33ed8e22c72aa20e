// Copyright (c) 2026 diffurank contributors
// SPDX-License-Identifier: Apache-2.0

#ifndef DIFFURANK_REMOTE_HPP
#define DIFFURANK_REMOTE_HPP

#include <chrono>

#include "diffurank/provider.hpp"

namespace diffurank {

/// HTTP client for a mask-predictor server.
///
/// POST /v1/mask_logits with
///   {template_id, query_text, docs:[{label,text}], masked_positions:[int],
///    filled:[{pos,label}], allowed_tokens:[string]}
/// expecting {rows:[[float]]}.
class RemoteProvider : public LogitsProvider {
public:
    /// base_url like "http://host:port"; empty reads DIFFURANK_REMOTE_URL.
    explicit RemoteProvider(std::string base_url = "",
                            std::chrono::seconds timeout = std::chrono::seconds(30));

    LogitsResponse provide(const PromptContext& ctx, const MaskQuery& mq) override;

    const std::string& base_url() const { return base_url_; }

private:
    std::string base_url_;
    std::chrono::seconds timeout_;
};

}  // namespace diffurank

#endif
