// Copyright (c) 2026 diffurank contributors
// SPDX-License-Identifier: Apache-2.0

#include "diffurank/replay.hpp"

#include <fstream>

#include "json.hpp"

namespace diffurank {

namespace {

LogitsResponse rows_from_json(const nlohmann::json& rows_json) {
    const std::size_t rows = rows_json.size();
    const std::size_t cols = rows == 0 ? 0 : rows_json.at(0).size();
    std::vector<double> data;
    data.reserve(rows * cols);
    for (const auto& row : rows_json) {
        if (row.size() != cols)
            throw MalformedResponseError("replay: ragged rows in fixture");
        for (const auto& v : row) data.push_back(v.get<double>());
    }
    return LogitsResponse{ProbMatrix(rows, cols, std::move(data)), {}};
}

nlohmann::json rows_to_json(const ProbMatrix& m) {
    auto rows = nlohmann::json::array();
    for (std::size_t r = 0; r < m.rows(); ++r) {
        auto row = nlohmann::json::array();
        for (std::size_t c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace

ReplayProvider::ReplayProvider(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ProviderError("replay: cannot open fixture file '" + path + "'");
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw ProviderError("replay: bad JSON at " + path + ":" +
                                std::to_string(lineno) + ": " + e.what());
        }
        // later records for the same key win
        records_.insert_or_assign(j.at("key").get<std::string>(),
                                  rows_from_json(j.at("rows")));
    }
}

LogitsResponse ReplayProvider::provide(const PromptContext& ctx, const MaskQuery& mq) {
    mq.validate();
    const std::string key = request_key(ctx, mq);
    auto it = records_.find(key);
    if (it == records_.end())
        throw CacheMissError("replay: no recorded response for key " + key);
    if (it->second.rows.rows() != mq.masked_positions.size() ||
        it->second.rows.cols() != mq.allowed_tokens.size())
        throw DimensionMismatchError("replay: recorded rows do not match request shape");
    return it->second;
}

void ReplayProvider::put(const std::string& key, const LogitsResponse& resp) {
    records_.insert_or_assign(key, resp);
}

RecordingProvider::RecordingProvider(std::shared_ptr<LogitsProvider> inner,
                                     const std::string& path)
    : inner_(std::move(inner)), path_(path) {
    std::ofstream out(path_, std::ios::app);
    if (!out) throw ProviderError("record: cannot open fixture file '" + path_ + "'");
}

RecordingProvider::~RecordingProvider() = default;

std::string RecordingProvider::record(const PromptContext& ctx, const MaskQuery& mq,
                                      const LogitsResponse& resp) {
    const std::string key = request_key(ctx, mq);
    nlohmann::json j;
    j["key"] = key;
    j["request"] = nlohmann::json::parse(canonical_request(ctx, mq));
    j["rows"] = rows_to_json(resp.rows);
    std::lock_guard<std::mutex> lock(mutex_);
    std::ofstream out(path_, std::ios::app);
    if (!out) throw ProviderError("record: cannot append to '" + path_ + "'");
    out << j.dump() << '\n';
    return key;
}

LogitsResponse RecordingProvider::provide(const PromptContext& ctx, const MaskQuery& mq) {
    LogitsResponse resp = inner_->provide(ctx, mq);
    record(ctx, mq, resp);
    return resp;
}

}  // namespace diffurank
