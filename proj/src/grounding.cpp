// Copyright 2026 The CoS Authors
// SPDX-License-Identifier: Apache-2.0

#include "cos/grounding.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <thread>

#include "cos/error.hpp"
#include "cos/oracles.hpp"

namespace chainshot {

namespace {

bool is_blank(const std::string& s) {
    return std::all_of(s.begin(), s.end(),
                       [](unsigned char c) { return std::isspace(c) != 0; });
}

} // namespace

std::vector<int> RelevanceCode::index_set() const {
    std::vector<int> indices;
    for (int i = 0; i < n; ++i) {
        if (bits[i]) indices.push_back(i);
    }
    return indices;
}

int RelevanceCode::relevant_count() const {
    return static_cast<int>(std::count(bits.begin(), bits.end(), true));
}

std::string RelevanceCode::to_bit_string() const {
    std::string out(bits.size(), '0');
    for (size_t i = 0; i < bits.size(); ++i) {
        if (bits[i]) out[i] = '1';
    }
    return out;
}

RelevanceCode RelevanceCode::from_bit_string(const std::string& bits) {
    if (bits.empty()) {
        throw ArgumentError("RelevanceCode: bit string must be non-empty");
    }
    RelevanceCode code;
    code.n = static_cast<int>(bits.size());
    code.k = 1;
    code.bits.reserve(bits.size());
    for (const char c : bits) {
        if (c != '0' && c != '1') {
            throw ArgumentError("RelevanceCode: bit string may contain only 0 and 1");
        }
        code.bits.push_back(c == '1');
    }
    code.groups = code.bits;
    return code;
}

std::string build_summary_prompt(const std::string& question) {
    if (question.empty() || is_blank(question)) {
        throw ArgumentError("build_summary_prompt: question must be non-empty");
    }
    return "Is anything in the keyword list present in the image? Just answer yes or no. " +
           question;
}

bool parse_verdict(std::string_view response) {
    size_t i = 0;
    while (i < response.size() && !std::isalpha(static_cast<unsigned char>(response[i]))) ++i;
    std::string token;
    while (i < response.size() && std::isalpha(static_cast<unsigned char>(response[i]))) {
        token += static_cast<char>(std::tolower(static_cast<unsigned char>(response[i])));
        ++i;
    }
    return token == "yes";
}

GroupVerdict classify_group(BinaryRelevanceOracle& oracle, const MosaicImage& mosaic,
                            const std::string& prompt, int group_index,
                            const RetryPolicy& retry) {
    if (mosaic.members.empty()) {
        throw ArgumentError("classify_group: mosaic has no members");
    }
    GroupVerdict verdict;
    verdict.group_index = group_index;
    for (int attempt = 0;; ++attempt) {
        try {
            verdict.raw_response = oracle.classify(mosaic, prompt);
            verdict.relevant = parse_verdict(verdict.raw_response);
            verdict.attempts = attempt + 1;
            return verdict;
        } catch (const TransportError& e) {
            if (attempt >= retry.max_retries) {
                // fail open to "irrelevant": a lost group never fabricates a positive
                verdict.relevant = false;
                verdict.raw_response.clear();
                verdict.transport_error = e.what();
                verdict.attempts = attempt + 1;
                return verdict;
            }
            if (retry.backoff_base.count() > 0) {
                std::this_thread::sleep_for(retry.backoff_base * (1 << attempt));
            }
        }
    }
}

RelevanceCode expand_verdicts(const std::vector<GroupVerdict>& verdicts, int n, int k) {
    if (n < 1 || k < 1) {
        throw ArgumentError("expand_verdicts: n and k must be >= 1");
    }
    const int m = (n + k - 1) / k;
    if (static_cast<int>(verdicts.size()) != m) {
        throw ArgumentError("expand_verdicts: expected " + std::to_string(m) + " verdicts, got " +
                            std::to_string(verdicts.size()));
    }

    RelevanceCode code;
    code.n = n;
    code.k = k;
    code.groups.assign(m, false);
    std::vector<bool> seen(m, false);
    for (const auto& v : verdicts) {
        if (v.group_index < 0 || v.group_index >= m || seen[v.group_index]) {
            throw ArgumentError("expand_verdicts: group_index values must be exactly 0.." +
                                std::to_string(m - 1));
        }
        seen[v.group_index] = true;
        code.groups[v.group_index] = v.relevant;
    }
    code.bits.resize(n);
    for (int i = 0; i < n; ++i) {
        code.bits[i] = code.groups[i / k];
    }
    return code;
}

GroundingResult ground(BinaryRelevanceOracle& oracle, const ShotSequence& shots,
                       const std::string& question, const GroundingOptions& options) {
    const std::string prompt = build_summary_prompt(question);
    const auto mosaics = compose_mosaics(shots, options.group_size);
    const int m = static_cast<int>(mosaics.size());

    GroundingResult result;
    result.groups.resize(m);

    const int jobs = std::clamp(std::min(options.parallelism, oracle.max_concurrency()), 1, m);
    std::atomic<int> next{0};
    auto worker = [&] {
        for (int g; (g = next.fetch_add(1)) < m;) {
            const auto start = std::chrono::steady_clock::now();
            GroupRecord record;
            record.verdict = classify_group(oracle, mosaics[g], prompt, g, options.retry);
            record.members = mosaics[g].members;
            record.latency_ms =
                std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
                    .count();
            result.groups[g] = std::move(record);
        }
    };

    if (jobs <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(jobs);
        for (int t = 0; t < jobs; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }

    std::vector<GroupVerdict> verdicts;
    verdicts.reserve(m);
    for (const auto& record : result.groups) {
        verdicts.push_back(record.verdict);
        result.oracle_calls += record.verdict.attempts;
    }
    result.code = expand_verdicts(verdicts, shots.size(), options.group_size);
    return result;
}

} // namespace chainshot
