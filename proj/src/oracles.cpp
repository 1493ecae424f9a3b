// Copyright 2026 The CoS Authors
// SPDX-License-Identifier: Apache-2.0

#include "cos/oracles.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "cos/error.hpp"

namespace chainshot {

namespace {

constexpr double kFloorLogit = -50.0;
constexpr double kForcedLogit = 50.0;

uint64_t splitmix64(uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

uint64_t fnv1a(const std::string& s) {
    uint64_t h = 0xcbf29ce484222325ULL;
    for (const char c : s) {
        h ^= static_cast<uint8_t>(c);
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r\n");
    if (begin == std::string::npos) return "";
    const auto end = s.find_last_not_of(" \t\r\n");
    return s.substr(begin, end - begin + 1);
}

} // namespace

MockOracle::MockOracle(std::set<std::string> keyword_set, double flip_rate, uint64_t seed)
    : keyword_set_(std::move(keyword_set)), flip_rate_(flip_rate), seed_(seed) {
    if (flip_rate_ < 0.0 || flip_rate_ > 1.0) {
        throw ArgumentError("MockOracle: flip_rate must be in [0, 1]");
    }
}

MockOracle MockOracle::from_manifest(const TagManifest& manifest) {
    return MockOracle(manifest.keyword_set, manifest.flip_rate, manifest.seed);
}

std::string MockOracle::classify(const MosaicImage& mosaic, const std::string& /*prompt*/) {
    bool relevant = std::any_of(mosaic.tags.begin(), mosaic.tags.end(),
                                [&](const std::string& t) { return keyword_set_.count(t) > 0; });
    if (flip_rate_ > 0.0) {
        const int first = mosaic.members.empty() ? 0 : mosaic.members.front();
        const uint64_t h =
            splitmix64(seed_ ^ fnv1a(mosaic.source) ^ (static_cast<uint64_t>(first) << 1));
        const double u = static_cast<double>(h >> 11) * 0x1.0p-53;
        if (u < flip_rate_) relevant = !relevant;
    }
    return relevant ? "yes" : "no";
}

std::string mock_classify(MockOracle& oracle, const MosaicImage& mosaic,
                          const std::string& prompt) {
    return oracle.classify(mosaic, prompt);
}

ToyBackendConfig ToyBackendConfig::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open toy backend config: " + path.string());
    }
    ToyBackendConfig config;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string text = trim(line);
        if (text.empty() || text[0] == '#') continue;
        const auto sep = text.find_first_of(":=");
        if (sep == std::string::npos) {
            throw ParseError("toy config line " + std::to_string(lineno) + ": expected 'key: value'");
        }
        const std::string key = trim(text.substr(0, sep));
        const std::string value = trim(text.substr(sep + 1));
        try {
            if (key == "option_count") config.option_count = std::stoi(value);
            else if (key == "base_logit") config.base_logit = std::stod(value);
            else if (key == "evidence_bonus") config.evidence_bonus = std::stod(value);
            else if (key == "distractor_penalty") config.distractor_penalty = std::stod(value);
            else if (key == "unsure_logit") config.unsure_logit = std::stod(value);
            else if (key == "evidence_tag_prefix") config.evidence_tag_prefix = value;
            else if (key == "distractor_tag") config.distractor_tag = value;
            else if (key == "sentence_answer") config.sentence_answer = (value == "true" || value == "1");
            else if (key == "vocab_pad") config.vocab_pad = std::stoi(value);
            else throw ParseError("toy config line " + std::to_string(lineno) + ": unknown key '" + key + "'");
        } catch (const ParseError&) {
            throw;
        } catch (const std::exception&) {
            throw ParseError("toy config line " + std::to_string(lineno) + ": bad value for '" + key + "'");
        }
    }
    return config;
}

ToyDecoderBackend::ToyDecoderBackend(ToyBackendConfig config) : config_(std::move(config)) {
    if (config_.option_count < 1 || config_.option_count > 26) {
        throw ArgumentError("ToyDecoderBackend: option_count must be in [1, 26]");
    }
    tokens_ = {"</s>", "unsure", "answer", "is"};
    first_option_ = static_cast<int>(tokens_.size());
    for (int o = 0; o < config_.option_count; ++o) {
        tokens_.push_back(std::string(1, static_cast<char>('A' + o)));
    }
    for (int p = 0; p < config_.vocab_pad; ++p) {
        tokens_.push_back("w" + std::to_string(p));
    }
    if (tokens_.size() > 64) {
        throw ArgumentError("ToyDecoderBackend: vocabulary must stay within 64 tokens");
    }
}

int ToyDecoderBackend::option_token(int option) const {
    if (option < 0 || option >= config_.option_count) {
        throw ArgumentError("ToyDecoderBackend: option out of range");
    }
    return first_option_ + option;
}

std::vector<int> ToyDecoderBackend::tokenize(const std::string& text) const {
    std::vector<int> ids;
    std::stringstream ss(text);
    std::string word;
    while (ss >> word) {
        const auto it = std::find(tokens_.begin(), tokens_.end(), word);
        ids.push_back(it == tokens_.end() ? kUnsureToken
                                          : static_cast<int>(it - tokens_.begin()));
    }
    return ids;
}

std::string ToyDecoderBackend::detokenize(std::span<const int> ids) const {
    std::string out;
    for (const int id : ids) {
        if (id < 0 || id >= vocab_size()) {
            throw ArgumentError("detokenize: token id out of range");
        }
        if (id == kStopToken) continue;
        if (!out.empty()) out += ' ';
        out += tokens_[id];
    }
    return out;
}

TokenDistribution ToyDecoderBackend::step(const ShotSequence& frames,
                                          const std::string& /*question*/,
                                          std::span<const int> prefix) {
    const int pos = static_cast<int>(prefix.size());
    const int answer_pos = config_.sentence_answer ? 2 : 0;

    TokenDistribution dist;
    dist.logits.assign(tokens_.size(), kFloorLogit);

    if (pos < answer_pos) {
        dist.logits[pos == 0 ? 2 : 3] = kForcedLogit; // "answer", then "is"
        return dist;
    }
    if (pos > answer_pos) {
        dist.logits[kStopToken] = kForcedLogit; // single-answer generations stop here
        return dist;
    }

    int distractors = 0;
    std::vector<int> evidence(config_.option_count, 0);
    for (const auto& frame : frames.shots) {
        if (frame.tags.count(config_.distractor_tag)) ++distractors;
        for (int o = 0; o < config_.option_count; ++o) {
            if (frame.tags.count(config_.evidence_tag_prefix +
                                 static_cast<char>('A' + o))) {
                ++evidence[o];
            }
        }
    }
    for (int o = 0; o < config_.option_count; ++o) {
        dist.logits[first_option_ + o] = config_.base_logit +
                                         config_.evidence_bonus * evidence[o] -
                                         config_.distractor_penalty * distractors;
    }
    dist.logits[kUnsureToken] = config_.unsure_logit;
    return dist;
}

TokenDistribution toy_step(ToyDecoderBackend& backend, const ShotSequence& frames,
                           const std::string& question, std::span<const int> prefix) {
    return backend.step(frames, question, prefix);
}

} // namespace chainshot
