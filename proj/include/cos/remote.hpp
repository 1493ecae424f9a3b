// Copyright 2026 The CoS Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <atomic>
#include <filesystem>
#include <string>
#include <vector>

#include "cos/oracles.hpp"

namespace chainshot {

// Plain-http inference endpoint. One request per oracle call / decode step.
struct RemoteEndpoint {
    std::string url; // http://host:port/path
    int timeout_ms = 30000;
    std::string bearer_token; // sent as "Authorization: Bearer <token>" when set
    int max_concurrency = 4;
};

// POSTs {"image": <base64 PNG>, "prompt": <text>} and returns the response's
// "text" field verbatim. Timeout, non-success status, and schema violations
// all raise TransportError; a verdict is never fabricated.
std::string remote_classify(const RemoteEndpoint& endpoint, const Image& image,
                            const std::string& prompt);

class RemoteOracle : public BinaryRelevanceOracle {
public:
    explicit RemoteOracle(RemoteEndpoint endpoint) : endpoint_(std::move(endpoint)) {}

    std::string classify(const MosaicImage& mosaic, const std::string& prompt) override {
        return remote_classify(endpoint_, mosaic.pixels, prompt);
    }
    int max_concurrency() const override { return endpoint_.max_concurrency; }

private:
    RemoteEndpoint endpoint_;
};

// Adapter config for a stepwise decode server. The server must expose raw
// full-vocabulary logits; top-k logprob APIs cannot drive the combination.
struct RemoteBackendConfig {
    RemoteEndpoint endpoint;
    int vocab_size = 0;              // 0: adopt from the first response
    std::set<int> stop_tokens;
    std::vector<std::string> vocab;  // id -> token text; enables (de)tokenize

    // Flat key/value file: url, timeout-ms, bearer-token, max-concurrency,
    // vocab-size, stop-tokens (comma-separated ids), vocab-file.
    static RemoteBackendConfig load(const std::filesystem::path& path);
};

// POSTs {"frames": [<base64 PNG>...], "question": <text>, "prefix": [ids]}
// per step and parses {"logits": [...]} back. The logit count is validated
// against the declared vocab size on the first call and must stay constant.
class RemoteDecoderBackend : public StepwiseDecoderBackend {
public:
    explicit RemoteDecoderBackend(RemoteBackendConfig config);

    // 0 until the first response when the config declares no vocab size.
    int vocab_size() const override;
    std::vector<int> tokenize(const std::string& text) const override;
    std::string detokenize(std::span<const int> ids) const override;
    TokenDistribution step(const ShotSequence& frames, const std::string& question,
                           std::span<const int> prefix) override;
    std::set<int> stop_token_ids() const override { return config_.stop_tokens; }
    int max_concurrency() const override { return config_.endpoint.max_concurrency; }

private:
    RemoteBackendConfig config_;
    std::atomic<int> observed_vocab_{0};
};

} // namespace chainshot
