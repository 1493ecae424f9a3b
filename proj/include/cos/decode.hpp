// Copyright 2026 The CoS Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "cos/media.hpp"
#include "cos/subshots.hpp"

namespace chainshot {

class StepwiseDecoderBackend;

// Full-vocabulary logits for one decoding step.
struct TokenDistribution {
    std::vector<double> logits;
};

struct GenerationConfig {
    enum class Mode { greedy, sample };

    int max_new_tokens = 16;
    Mode mode = Mode::greedy;
    double temperature = 1.0; // sampling only, must be > 0
    uint64_t seed = 0;        // sampling only
    std::set<int> stop_tokens; // empty -> use the backend's stop set
};

// One conditioning context of a generation; the prefix grows append-only.
struct DecodeContext {
    const ShotSequence* frames = nullptr;
    std::string question;
    std::vector<int> prefix;
};

// Per-step record for --trace output: top combined logits plus the pick.
struct StepTrace {
    int step = 0;
    std::vector<std::pair<int, double>> top; // (token id, combined logit), best first
    int chosen = -1;
};

struct DecodeResult {
    std::string text;
    std::vector<int> tokens;
};

// Numerically stable softmax.
std::vector<double> softmax(std::span<const double> logits);

// Elementwise contrastive combination: lx + alpha*lp - alpha*ln. No
// normalization; the selection step applies softmax.
TokenDistribution combine_step(const TokenDistribution& lx, const TokenDistribution& lp,
                               const TokenDistribution& ln, double alpha);

// softmax(combine_step(...)); the probability form of the combination.
std::vector<double> combined_probability(const TokenDistribution& lx, const TokenDistribution& lp,
                                         const TokenDistribution& ln, double alpha);

// Plain auto-regressive decoding conditioned on the original sequence.
// Greedy picks the argmax (lowest token id on ties); sampling draws from
// softmax(logits/temperature) with a generator seeded from the config.
DecodeResult baseline_decode(StepwiseDecoderBackend& backend, const ShotSequence& shots,
                             const std::string& question, const GenerationConfig& config,
                             std::vector<StepTrace>* trace = nullptr);

// Contrastive decoding over three contexts in lockstep: the original
// sequence, the positive sub-shots, and the negative sub-shots. Each step
// combines the three logit vectors with the pair's weight and appends the
// selected token to all three prefixes.
DecodeResult co_reason_decode(StepwiseDecoderBackend& backend, const ShotSequence& shots,
                              const SubShotPair& pair, const std::string& question,
                              const GenerationConfig& config,
                              std::vector<StepTrace>* trace = nullptr);

} // namespace chainshot
