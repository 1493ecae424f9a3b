// Copyright 2026 The CoS Authors
// SPDX-License-Identifier: Apache-2.0

#include "cos/manifest.hpp"

#include <fstream>
#include <sstream>

#include "cos/error.hpp"

namespace chainshot {

namespace {

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r\n");
    if (begin == std::string::npos) return "";
    const auto end = s.find_last_not_of(" \t\r\n");
    return s.substr(begin, end - begin + 1);
}

std::set<std::string> split_tags(const std::string& value) {
    std::set<std::string> tags;
    std::stringstream ss(value);
    std::string part;
    while (std::getline(ss, part, ',')) {
        part = trim(part);
        if (!part.empty()) tags.insert(part);
    }
    return tags;
}

} // namespace

TagManifest TagManifest::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open tag manifest: " + path.string());
    }
    TagManifest m;
    m.root = std::filesystem::absolute(path).parent_path();

    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string text = trim(line);
        if (text.empty() || text[0] == '#') continue;
        const auto colon = text.find(':');
        if (colon == std::string::npos) {
            throw ParseError("tag manifest line " + std::to_string(lineno) + ": expected 'key: value'");
        }
        const std::string key = trim(text.substr(0, colon));
        const std::string value = trim(text.substr(colon + 1));
        if (key == "keyword_set") {
            m.keyword_set = split_tags(value);
        } else if (key == "flip_rate") {
            try {
                m.flip_rate = std::stod(value);
            } catch (const std::exception&) {
                throw ParseError("tag manifest line " + std::to_string(lineno) + ": bad flip_rate");
            }
            if (m.flip_rate < 0.0 || m.flip_rate > 1.0) {
                throw ParseError("tag manifest line " + std::to_string(lineno) +
                                 ": flip_rate must be in [0, 1]");
            }
        } else if (key == "seed") {
            try {
                m.seed = std::stoull(value);
            } catch (const std::exception&) {
                throw ParseError("tag manifest line " + std::to_string(lineno) + ": bad seed");
            }
        } else {
            m.file_tags[key] = split_tags(value);
        }
    }
    return m;
}

std::set<std::string> TagManifest::tags_for(const std::filesystem::path& file) const {
    if (!root.empty()) {
        std::error_code ec;
        const auto abs = std::filesystem::absolute(file, ec);
        if (!ec) {
            const auto rel = std::filesystem::proximate(abs, root, ec);
            if (!ec) {
                const auto it = file_tags.find(rel.generic_string());
                if (it != file_tags.end()) return it->second;
            }
        }
    }
    const auto it = file_tags.find(file.filename().string());
    if (it != file_tags.end()) return it->second;
    return {};
}

std::string TagManifest::serialize() const {
    std::ostringstream out;
    out << "keyword_set:";
    bool first = true;
    for (const auto& kw : keyword_set) {
        out << (first ? " " : ", ") << kw;
        first = false;
    }
    out << "\n";
    out << "flip_rate: " << flip_rate << "\n";
    out << "seed: " << seed << "\n";
    for (const auto& [file, tags] : file_tags) {
        out << file << ":";
        first = true;
        for (const auto& tag : tags) {
            out << (first ? " " : ", ") << tag;
            first = false;
        }
        out << "\n";
    }
    return std::move(out).str();
}

} // namespace chainshot
