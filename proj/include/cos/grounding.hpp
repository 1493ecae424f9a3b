// Copyright 2026 The CoS Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <chrono>
#include <string>
#include <vector>

#include "cos/media.hpp"

namespace chainshot {

class BinaryRelevanceOracle;

// One yes/no oracle verdict for a shot group.
struct GroupVerdict {
    int group_index = 0;
    bool relevant = false;
    std::string raw_response;
    int attempts = 1;            // oracle calls spent on this group, retries included
    std::string transport_error; // non-empty when the group failed and defaulted to irrelevant
};

// Per-shot binary relevance derived from per-group verdicts.
// Invariant: bits[i] == groups[i / k] for every shot i.
struct RelevanceCode {
    std::vector<bool> bits;
    std::vector<bool> groups;
    int n = 0;
    int k = 1;

    std::vector<int> index_set() const; // indices of task-relevant shots
    int relevant_count() const;
    std::string to_bit_string() const;
    static RelevanceCode from_bit_string(const std::string& bits); // k = 1
};

struct RetryPolicy {
    int max_retries = 3;
    std::chrono::milliseconds backoff_base{100}; // doubles per attempt
};

struct GroundingOptions {
    int group_size = 4;
    int parallelism = 4; // concurrent oracle calls, also capped by the oracle
    RetryPolicy retry;
};

struct GroupRecord {
    GroupVerdict verdict;
    std::vector<int> members;
    double latency_ms = 0.0;
};

struct GroundingResult {
    RelevanceCode code;
    std::vector<GroupRecord> groups;
    int oracle_calls = 0;
};

// Fixed query-specific prompt; no keyword extraction is performed.
std::string build_summary_prompt(const std::string& question);

// True iff the first alphabetic token of the response, lowercased, is "yes".
// Total: empty or malformed responses parse as false.
bool parse_verdict(std::string_view response);

// Classifies one group, retrying transport failures per the policy. After the
// retries are exhausted the group defaults to irrelevant; the error is kept on
// the verdict so callers can report it.
GroupVerdict classify_group(BinaryRelevanceOracle& oracle, const MosaicImage& mosaic,
                            const std::string& prompt, int group_index,
                            const RetryPolicy& retry = {});

// Expands per-group verdicts into the per-shot relevance code.
RelevanceCode expand_verdicts(const std::vector<GroupVerdict>& verdicts, int n, int k);

// Full binary summary: compose mosaics, classify every group (concurrently up
// to the configured limit), expand. Deterministic for a deterministic oracle.
GroundingResult ground(BinaryRelevanceOracle& oracle, const ShotSequence& shots,
                       const std::string& question, const GroundingOptions& options = {});

} // namespace chainshot
