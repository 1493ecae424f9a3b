// Copyright 2026 The CoS Authors
// SPDX-License-Identifier: Apache-2.0

#include "cos/decode.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <random>

#include "cos/error.hpp"
#include "cos/oracles.hpp"

namespace chainshot {

namespace {

void check_generation_config(const GenerationConfig& config) {
    if (config.max_new_tokens < 1) {
        throw ArgumentError("GenerationConfig: max_new_tokens must be >= 1");
    }
    if (config.mode == GenerationConfig::Mode::sample && !(config.temperature > 0.0)) {
        throw ArgumentError("GenerationConfig: sampling temperature must be > 0");
    }
}

// vocab_size may start at 0 for adapters that adopt V from the first
// response; the first distribution then pins it for the whole generation.
void check_distribution(const TokenDistribution& dist, int& vocab_size, const char* context,
                        int step) {
    if (vocab_size == 0 && !dist.logits.empty()) {
        vocab_size = static_cast<int>(dist.logits.size());
    }
    if (static_cast<int>(dist.logits.size()) != vocab_size || vocab_size == 0) {
        throw DecodeError(context, step, "backend returned " + std::to_string(dist.logits.size()) +
                                             " logits, expected " + std::to_string(vocab_size));
    }
    for (const double v : dist.logits) {
        if (!std::isfinite(v)) {
            throw DecodeError(context, step, "backend returned a non-finite logit");
        }
    }
}

int argmax_lowest_id(const std::vector<double>& logits) {
    int best = 0;
    for (int i = 1; i < static_cast<int>(logits.size()); ++i) {
        if (logits[i] > logits[best]) best = i;
    }
    return best;
}

// 53-bit uniform in [0, 1); explicit so same-seed runs agree everywhere.
double uniform53(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

int select_token(const std::vector<double>& logits, const GenerationConfig& config,
                 std::mt19937_64& rng) {
    if (config.mode == GenerationConfig::Mode::greedy) {
        return argmax_lowest_id(logits);
    }
    std::vector<double> scaled(logits.size());
    for (size_t i = 0; i < logits.size(); ++i) {
        scaled[i] = logits[i] / config.temperature;
    }
    const std::vector<double> probs = softmax(scaled);
    const double u = uniform53(rng);
    double acc = 0.0;
    for (size_t i = 0; i < probs.size(); ++i) {
        acc += probs[i];
        if (u < acc) return static_cast<int>(i);
    }
    return static_cast<int>(probs.size()) - 1; // rounding tail
}

void push_trace(std::vector<StepTrace>* trace, int step, const std::vector<double>& logits,
                int chosen) {
    if (!trace) return;
    StepTrace t;
    t.step = step;
    t.chosen = chosen;
    std::vector<int> order(logits.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
    const size_t top_n = std::min<size_t>(5, order.size());
    std::partial_sort(order.begin(), order.begin() + top_n, order.end(), [&](int a, int b) {
        return logits[a] != logits[b] ? logits[a] > logits[b] : a < b;
    });
    for (size_t i = 0; i < top_n; ++i) {
        t.top.emplace_back(order[i], logits[order[i]]);
    }
    trace->push_back(std::move(t));
}

} // namespace

std::vector<double> softmax(std::span<const double> logits) {
    if (logits.empty()) {
        throw ArgumentError("softmax: empty logit vector");
    }
    const double max_logit = *std::max_element(logits.begin(), logits.end());
    std::vector<double> out(logits.size());
    double sum = 0.0;
    for (size_t i = 0; i < logits.size(); ++i) {
        out[i] = std::exp(logits[i] - max_logit);
        sum += out[i];
    }
    for (double& v : out) v /= sum;
    return out;
}

TokenDistribution combine_step(const TokenDistribution& lx, const TokenDistribution& lp,
                               const TokenDistribution& ln, double alpha) {
    if (lx.logits.size() != lp.logits.size() || lx.logits.size() != ln.logits.size()) {
        throw ArgumentError("combine_step: logit vector lengths differ");
    }
    if (!(alpha >= 0.0 && alpha <= 1.0)) {
        throw ArgumentError("combine_step: alpha must be in [0, 1]");
    }
    TokenDistribution out;
    out.logits.resize(lx.logits.size());
    for (size_t i = 0; i < lx.logits.size(); ++i) {
        out.logits[i] = lx.logits[i] + alpha * lp.logits[i] - alpha * ln.logits[i];
    }
    return out;
}

std::vector<double> combined_probability(const TokenDistribution& lx, const TokenDistribution& lp,
                                         const TokenDistribution& ln, double alpha) {
    return softmax(combine_step(lx, lp, ln, alpha).logits);
}

DecodeResult baseline_decode(StepwiseDecoderBackend& backend, const ShotSequence& shots,
                             const std::string& question, const GenerationConfig& config,
                             std::vector<StepTrace>* trace) {
    check_generation_config(config);
    const std::set<int> stops =
        config.stop_tokens.empty() ? backend.stop_token_ids() : config.stop_tokens;
    int vocab = backend.vocab_size();

    DecodeContext ctx{&shots, question, {}};
    std::mt19937_64 rng(config.seed);
    for (int step = 0; step < config.max_new_tokens; ++step) {
        TokenDistribution dist;
        try {
            dist = backend.step(*ctx.frames, ctx.question, ctx.prefix);
        } catch (const TransportError& e) {
            throw DecodeError("X", step, e.what(), /*transport=*/true);
        } catch (const std::exception& e) {
            throw DecodeError("X", step, e.what());
        }
        check_distribution(dist, vocab, "X", step);
        const int token = select_token(dist.logits, config, rng);
        push_trace(trace, step, dist.logits, token);
        if (stops.count(token)) break;
        ctx.prefix.push_back(token);
    }
    return {backend.detokenize(ctx.prefix), ctx.prefix};
}

DecodeResult co_reason_decode(StepwiseDecoderBackend& backend, const ShotSequence& shots,
                              const SubShotPair& pair, const std::string& question,
                              const GenerationConfig& config, std::vector<StepTrace>* trace) {
    check_generation_config(config);
    auto [positive, negative] = materialize(shots, pair);
    const std::set<int> stops =
        config.stop_tokens.empty() ? backend.stop_token_ids() : config.stop_tokens;
    int vocab = backend.vocab_size();

    struct Lane {
        const char* name;
        const ShotSequence* frames;
    };
    const Lane lanes[3] = {{"X", &shots}, {"positive", &positive}, {"negative", &negative}};

    std::vector<int> prefix; // shared by all three contexts (lockstep)
    std::mt19937_64 rng(config.seed);
    const bool concurrent = backend.max_concurrency() >= 3;

    for (int step = 0; step < config.max_new_tokens; ++step) {
        TokenDistribution dists[3];
        auto fetch = [&](int lane) {
            try {
                dists[lane] = backend.step(*lanes[lane].frames, question, prefix);
            } catch (const DecodeError&) {
                throw;
            } catch (const TransportError& e) {
                throw DecodeError(lanes[lane].name, step, e.what(), /*transport=*/true);
            } catch (const std::exception& e) {
                throw DecodeError(lanes[lane].name, step, e.what());
            }
        };
        if (concurrent) {
            std::future<void> pending[3];
            for (int lane = 0; lane < 3; ++lane) {
                pending[lane] = std::async(std::launch::async, fetch, lane);
            }
            std::exception_ptr failure;
            for (auto& f : pending) {
                try {
                    f.get();
                } catch (...) {
                    if (!failure) failure = std::current_exception();
                }
            }
            if (failure) std::rethrow_exception(failure);
        } else {
            for (int lane = 0; lane < 3; ++lane) fetch(lane);
        }
        for (int lane = 0; lane < 3; ++lane) {
            check_distribution(dists[lane], vocab, lanes[lane].name, step);
        }

        const TokenDistribution combined = combine_step(dists[0], dists[1], dists[2], pair.alpha);
        const int token = select_token(combined.logits, config, rng);
        push_trace(trace, step, combined.logits, token);
        if (stops.count(token)) break;
        prefix.push_back(token);
    }
    return {backend.detokenize(prefix), prefix};
}

} // namespace chainshot
