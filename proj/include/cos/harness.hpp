// Copyright 2026 The CoS Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "cos/decode.hpp"
#include "cos/grounding.hpp"
#include "cos/manifest.hpp"

namespace chainshot {

class BinaryRelevanceOracle;
class StepwiseDecoderBackend;

// One multiple-choice video QA instance.
struct BenchmarkItem {
    std::string id;
    std::string frames_path; // kept verbatim; resolved against a base dir at run time
    std::string question;
    std::vector<std::string> options; // labeled A.. in order
    char answer = 'A';
    std::string duration_class; // "", "short", "medium", or "long"
};

// Loads a JSONL manifest (one object per line). Parse and validation errors
// carry the offending line number; duplicate ids are rejected.
std::vector<BenchmarkItem> load_manifest(const std::filesystem::path& path);

nlohmann::json item_to_json(const BenchmarkItem& item);

// First standalone option letter in the output, case-insensitive and
// token-delimited; nullopt when no letter appears.
std::optional<char> extract_answer(const std::string& output,
                                   const std::vector<std::string>& options);

struct ItemRecord {
    std::string id;
    std::string predicted; // "" when no letter could be extracted
    char gold = 'A';
    bool correct = false;
    std::string raw_output;
    std::optional<double> alpha;        // cos mode only
    std::optional<int> relevant_count;  // |index set|, cos mode only
    int oracle_calls = 0;
    double wall_ms = 0.0;
    std::string error; // per-item failure, scored incorrect, never aborts a run
};

struct RunReport {
    std::string mode;
    int num_shots = 0;
    int group_size = 0;
    int tile_size = 0;
    uint64_t seed = 0;
    std::optional<double> alpha_override;
    std::vector<ItemRecord> items; // sorted by id

    struct Bucket {
        int total = 0;
        int correct = 0;
        double accuracy() const { return total > 0 ? static_cast<double>(correct) / total : 0.0; }
    };
    Bucket overall;
    std::map<std::string, Bucket> by_duration; // unlabeled items fall under "unspecified"

    // include_timings=false yields the canonical form used for determinism
    // comparisons (wall-time fields excluded).
    nlohmann::json to_json(bool include_timings = true) const;
    std::string table() const; // short/medium/long/avg accuracy table
};

enum class BenchMode { baseline, cos };

struct BenchConfig {
    int num_shots = 128;
    int group_size = 4;
    int tile_size = 336;
    std::optional<double> alpha_override;
    GenerationConfig generation;
    GroundingOptions grounding;
    int jobs = 1; // concurrent items; components must tolerate the fan-out
    std::filesystem::path base_dir; // resolves relative frames_path values
    const TagManifest* tags = nullptr;
};

// Runs every item through sample -> (ground -> sub-shots -> co-reason | plain
// decode) -> extract -> score. Per-item failures are recorded as incorrect.
RunReport run_benchmark(const std::vector<BenchmarkItem>& items, BinaryRelevanceOracle* oracle,
                        StepwiseDecoderBackend& backend, const BenchConfig& config,
                        BenchMode mode);

// Synthetic QA suite: solid-color frames whose semantics live in the tag
// manifest. Exactly `relevant` shots per item carry the gold option's
// evidence tag; `distractors` shots (placed outside evidence groups) carry
// the distractor tag. Deterministic per seed.
struct SyntheticSpec {
    int items = 200;
    int shots = 64;
    int relevant = 4;
    int distractors = 40;
    int options = 4;
    int group_size = 4;
    int tile = 32; // written frame resolution
    double flip_rate = 0.0;
    uint64_t seed = 0;
};

struct SyntheticSuite {
    std::filesystem::path manifest_path; // JSONL benchmark manifest
    std::filesystem::path tags_path;     // mock oracle / tag manifest
};

SyntheticSuite generate_synthetic_suite(const SyntheticSpec& spec,
                                        const std::filesystem::path& out_dir);

// MCQ prompt handed to the decoder backend: question, lettered options, and
// a one-line answer instruction.
std::string format_question(const BenchmarkItem& item);

} // namespace chainshot
