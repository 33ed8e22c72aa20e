// Copyright (c) 2026 diffurank contributors
// SPDX-License-Identifier: Apache-2.0

#ifndef DIFFURANK_REPLAY_HPP
#define DIFFURANK_REPLAY_HPP

#include <memory>
#include <mutex>
#include <unordered_map>

#include "diffurank/provider.hpp"

namespace diffurank {

/// Serves responses recorded earlier in a JSON-lines fixture file.
/// Unknown (ctx, mq) pairs raise CacheMissError.
class ReplayProvider : public LogitsProvider {
public:
    ReplayProvider() = default;
    explicit ReplayProvider(const std::string& path);

    LogitsResponse provide(const PromptContext& ctx, const MaskQuery& mq) override;

    void put(const std::string& key, const LogitsResponse& resp);
    std::size_t size() const { return records_.size(); }

private:
    std::unordered_map<std::string, LogitsResponse> records_;
};

/// Wraps another provider and appends every (request, response) pair to a
/// JSON-lines fixture file. Re-recording a key overwrites on load.
class RecordingProvider : public LogitsProvider {
public:
    RecordingProvider(std::shared_ptr<LogitsProvider> inner, const std::string& path);
    ~RecordingProvider() override;

    LogitsResponse provide(const PromptContext& ctx, const MaskQuery& mq) override;

    /// Records one exchange; returns the replay key.
    std::string record(const PromptContext& ctx, const MaskQuery& mq,
                       const LogitsResponse& resp);

private:
    std::shared_ptr<LogitsProvider> inner_;
    std::string path_;
    std::mutex mutex_;
};

}  // namespace diffurank

#endif
