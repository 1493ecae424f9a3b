// Copyright 2026 The CoS Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <set>
#include <string>

namespace chainshot {

// Mock-component config: per-frame content tags plus the mock oracle's
// keyword set and noise knobs. Text format, one entry per line:
//
//   keyword_set: dragon, castle
//   flip_rate: 0.0
//   seed: 42
//   items/item_0000/frame_000000.png: dragon, sky
//
// File keys are paths relative to the manifest's directory (bare filenames
// also match). Lines starting with '#' and blank lines are ignored.
struct TagManifest {
    std::filesystem::path root;
    std::set<std::string> keyword_set;
    double flip_rate = 0.0;
    uint64_t seed = 0;
    std::map<std::string, std::set<std::string>> file_tags;

    static TagManifest load(const std::filesystem::path& path);

    // Tags for a frame file, matched by root-relative path, then by filename.
    std::set<std::string> tags_for(const std::filesystem::path& file) const;

    std::string serialize() const;
};

} // namespace chainshot
