// Copyright 2026 The CoS Authors
// SPDX-License-Identifier: Apache-2.0

#include "cos/remote.hpp"

#include <chrono>
#include <fstream>
#include <sstream>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "cos/base64.hpp"
#include "cos/error.hpp"
#include "cos/image_io.hpp"

namespace chainshot {

namespace {

using json = nlohmann::json;

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r\n");
    if (begin == std::string::npos) return "";
    const auto end = s.find_last_not_of(" \t\r\n");
    return s.substr(begin, end - begin + 1);
}

// "http://host:port/path" -> {"http://host:port", "/path"}
std::pair<std::string, std::string> split_url(const std::string& url) {
    const auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) {
        throw ArgumentError("endpoint URL must start with http://: " + url);
    }
    if (url.substr(0, scheme_end) != "http") {
        throw ArgumentError("only plain http endpoints are supported: " + url);
    }
    const auto path_begin = url.find('/', scheme_end + 3);
    if (path_begin == std::string::npos) {
        return {url, "/"};
    }
    return {url.substr(0, path_begin), url.substr(path_begin)};
}

double elapsed_ms_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
        .count();
}

// POST a JSON body and return the parsed JSON response, mapping every failure
// mode (connect, timeout, status, malformed body) to TransportError.
json post_json(const RemoteEndpoint& endpoint, const std::string& body) {
    const auto [base, path] = split_url(endpoint.url);
    const auto start = std::chrono::steady_clock::now();

    httplib::Client client(base);
    const auto timeout = std::chrono::milliseconds(endpoint.timeout_ms);
    client.set_connection_timeout(timeout);
    client.set_read_timeout(timeout);
    client.set_write_timeout(timeout);

    httplib::Headers headers;
    if (!endpoint.bearer_token.empty()) {
        headers.emplace("Authorization", "Bearer " + endpoint.bearer_token);
    }

    auto res = client.Post(path, headers, body, "application/json");
    if (!res) {
        throw TransportError(endpoint.url, 0, elapsed_ms_since(start),
                             httplib::to_string(res.error()));
    }
    if (res->status != 200) {
        throw TransportError(endpoint.url, res->status, elapsed_ms_since(start),
                             "non-success status");
    }
    try {
        return json::parse(res->body);
    } catch (const json::exception& e) {
        throw TransportError(endpoint.url, res->status, elapsed_ms_since(start),
                             std::string("malformed response body: ") + e.what());
    }
}

} // namespace

std::string remote_classify(const RemoteEndpoint& endpoint, const Image& image,
                            const std::string& prompt) {
    const json body{{"image", base64_encode(encode_png(image))}, {"prompt", prompt}};
    const json response = post_json(endpoint, body.dump());
    if (!response.is_object() || !response.contains("text") || !response["text"].is_string()) {
        throw TransportError(endpoint.url, 200, 0.0, "response is missing the text field");
    }
    return response["text"].get<std::string>();
}

RemoteBackendConfig RemoteBackendConfig::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open remote backend config: " + path.string());
    }
    RemoteBackendConfig config;
    std::filesystem::path vocab_file;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string text = trim(line);
        if (text.empty() || text[0] == '#') continue;
        const auto sep = text.find_first_of(":=");
        if (sep == std::string::npos) {
            throw ParseError("remote config line " + std::to_string(lineno) +
                             ": expected 'key: value'");
        }
        const std::string key = trim(text.substr(0, sep));
        const std::string value = trim(text.substr(sep + 1));
        try {
            if (key == "url") config.endpoint.url = value;
            else if (key == "timeout-ms") config.endpoint.timeout_ms = std::stoi(value);
            else if (key == "bearer-token") config.endpoint.bearer_token = value;
            else if (key == "max-concurrency") config.endpoint.max_concurrency = std::stoi(value);
            else if (key == "vocab-size") config.vocab_size = std::stoi(value);
            else if (key == "vocab-file") vocab_file = path.parent_path() / value;
            else if (key == "stop-tokens") {
                std::stringstream ss(value);
                std::string part;
                while (std::getline(ss, part, ',')) {
                    if (!trim(part).empty()) config.stop_tokens.insert(std::stoi(trim(part)));
                }
            } else {
                throw ParseError("remote config line " + std::to_string(lineno) +
                                 ": unknown key '" + key + "'");
            }
        } catch (const ParseError&) {
            throw;
        } catch (const std::exception&) {
            throw ParseError("remote config line " + std::to_string(lineno) + ": bad value for '" +
                             key + "'");
        }
    }
    if (config.endpoint.url.empty()) {
        throw ParseError("remote config " + path.string() + ": missing url");
    }
    if (!vocab_file.empty()) {
        std::ifstream vf(vocab_file);
        if (!vf) {
            throw IoError("cannot open vocab file: " + vocab_file.string());
        }
        std::string token;
        while (std::getline(vf, token)) {
            config.vocab.push_back(token);
        }
        if (config.vocab_size == 0) {
            config.vocab_size = static_cast<int>(config.vocab.size());
        }
    }
    if (!config.vocab.empty() && config.vocab_size != static_cast<int>(config.vocab.size())) {
        throw ParseError("remote config " + path.string() +
                         ": vocab-size disagrees with vocab-file length");
    }
    return config;
}

RemoteDecoderBackend::RemoteDecoderBackend(RemoteBackendConfig config)
    : config_(std::move(config)), observed_vocab_(config_.vocab_size) {
    split_url(config_.endpoint.url); // validate eagerly
}

int RemoteDecoderBackend::vocab_size() const {
    return observed_vocab_.load(); // 0 until the first response is seen
}

std::vector<int> RemoteDecoderBackend::tokenize(const std::string& text) const {
    if (config_.vocab.empty()) {
        throw ArgumentError("remote backend has no vocab table; set vocab-file to tokenize");
    }
    std::vector<int> ids;
    std::stringstream ss(text);
    std::string word;
    while (ss >> word) {
        const auto it = std::find(config_.vocab.begin(), config_.vocab.end(), word);
        if (it == config_.vocab.end()) {
            throw ArgumentError("tokenize: unknown token '" + word + "'");
        }
        ids.push_back(static_cast<int>(it - config_.vocab.begin()));
    }
    return ids;
}

std::string RemoteDecoderBackend::detokenize(std::span<const int> ids) const {
    std::string out;
    for (const int id : ids) {
        if (!out.empty()) out += ' ';
        if (config_.vocab.empty()) {
            out += std::to_string(id); // no vocab table: decimal ids
        } else {
            if (id < 0 || id >= static_cast<int>(config_.vocab.size())) {
                throw ArgumentError("detokenize: token id out of range");
            }
            out += config_.vocab[id];
        }
    }
    return out;
}

TokenDistribution RemoteDecoderBackend::step(const ShotSequence& frames,
                                             const std::string& question,
                                             std::span<const int> prefix) {
    json frame_array = json::array();
    for (const auto& frame : frames.shots) {
        if (!frame.pixels) {
            throw ArgumentError("remote step: frame without pixel data");
        }
        frame_array.push_back(base64_encode(encode_png(*frame.pixels)));
    }
    const json body{{"frames", std::move(frame_array)},
                    {"question", question},
                    {"prefix", std::vector<int>(prefix.begin(), prefix.end())}};

    const json response = post_json(config_.endpoint, body.dump());
    if (!response.is_object() || !response.contains("logits") || !response["logits"].is_array()) {
        throw TransportError(config_.endpoint.url, 200, 0.0,
                             "response is missing the logits array");
    }

    TokenDistribution dist;
    dist.logits.reserve(response["logits"].size());
    for (const auto& v : response["logits"]) {
        if (!v.is_number()) {
            throw TransportError(config_.endpoint.url, 200, 0.0, "logits must be numbers");
        }
        dist.logits.push_back(v.get<double>());
    }

    const int got = static_cast<int>(dist.logits.size());
    int expected = 0;
    if (!observed_vocab_.compare_exchange_strong(expected, got) && expected != got) {
        throw TransportError(config_.endpoint.url, 200, 0.0,
                             "logit count " + std::to_string(got) + " does not match vocab size " +
                                 std::to_string(expected));
    }
    return dist;
}

} // namespace chainshot
