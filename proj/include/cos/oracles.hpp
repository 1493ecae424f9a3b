// Copyright 2026 The CoS Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <limits>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "cos/decode.hpp"
#include "cos/manifest.hpp"
#include "cos/media.hpp"

namespace chainshot {

// Yes/no relevance model: one call per mosaic, returns the raw response text.
class BinaryRelevanceOracle {
public:
    virtual ~BinaryRelevanceOracle() = default;
    virtual std::string classify(const MosaicImage& mosaic, const std::string& prompt) = 0;
    // Largest number of classify calls the implementation tolerates in flight.
    virtual int max_concurrency() const { return 1; }
};

// Stepwise generative model: full-vocabulary logits per decoding step.
// step() must be deterministic for identical inputs.
class StepwiseDecoderBackend {
public:
    virtual ~StepwiseDecoderBackend() = default;
    // Constant per instance; adapters that adopt V from the server may
    // return 0 before their first step.
    virtual int vocab_size() const = 0;
    virtual std::vector<int> tokenize(const std::string& text) const = 0;
    virtual std::string detokenize(std::span<const int> ids) const = 0;
    virtual TokenDistribution step(const ShotSequence& frames, const std::string& question,
                                   std::span<const int> prefix) = 0;
    virtual std::set<int> stop_token_ids() const = 0;
    virtual int max_concurrency() const { return 1; }
};

// Deterministic relevance oracle for tests and desk-scale runs: a mosaic is
// "yes" iff any member frame's tags intersect the keyword set. flip_rate adds
// seeded label noise; the flip decision is a pure hash of (seed, source,
// first member), so results do not depend on call order.
class MockOracle : public BinaryRelevanceOracle {
public:
    explicit MockOracle(std::set<std::string> keyword_set, double flip_rate = 0.0,
                        uint64_t seed = 0);
    static MockOracle from_manifest(const TagManifest& manifest);

    std::string classify(const MosaicImage& mosaic, const std::string& prompt) override;
    int max_concurrency() const override { return std::numeric_limits<int>::max(); }

    const std::set<std::string>& keyword_set() const { return keyword_set_; }
    double flip_rate() const { return flip_rate_; }

private:
    std::set<std::string> keyword_set_;
    double flip_rate_ = 0.0;
    uint64_t seed_ = 0;
};

std::string mock_classify(MockOracle& oracle, const MosaicImage& mosaic,
                          const std::string& prompt);

// Toy backend scoring constants. Option tokens score
//   base_logit + evidence_bonus * #frames tagged "<evidence_tag_prefix><letter>"
//              - distractor_penalty * #frames tagged distractor_tag
// against a fixed "unsure" logit; duplicated frames count per occurrence.
struct ToyBackendConfig {
    int option_count = 4;
    double base_logit = 1.0;
    double evidence_bonus = 0.5;
    double distractor_penalty = 0.1;
    double unsure_logit = 2.0;
    std::string evidence_tag_prefix = "ev_";
    std::string distractor_tag = "distractor";
    bool sentence_answer = false; // "answer is X" instead of the bare letter
    int vocab_pad = 0;            // extra inert filler tokens

    static ToyBackendConfig load(const std::filesystem::path& path);
};

// Desk-scale decoder stand-in. Scores option letters from frame tags at the
// answer position and forces the stop token afterwards; a pure function of
// (frame tags, prefix length), so repeated calls are bitwise identical.
class ToyDecoderBackend : public StepwiseDecoderBackend {
public:
    explicit ToyDecoderBackend(ToyBackendConfig config = {});

    int vocab_size() const override { return static_cast<int>(tokens_.size()); }
    std::vector<int> tokenize(const std::string& text) const override;
    std::string detokenize(std::span<const int> ids) const override;
    TokenDistribution step(const ShotSequence& frames, const std::string& question,
                           std::span<const int> prefix) override;
    std::set<int> stop_token_ids() const override { return {kStopToken}; }
    int max_concurrency() const override { return std::numeric_limits<int>::max(); }

    const ToyBackendConfig& config() const { return config_; }
    int option_token(int option) const; // token id for option letter A+option
    static constexpr int kStopToken = 0;
    static constexpr int kUnsureToken = 1;

private:
    ToyBackendConfig config_;
    std::vector<std::string> tokens_;
    int first_option_ = 0;
};

TokenDistribution toy_step(ToyDecoderBackend& backend, const ShotSequence& frames,
                           const std::string& question, std::span<const int> prefix);

} // namespace chainshot
