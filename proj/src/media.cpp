// Copyright 2026 The CoS Authors
// SPDX-License-Identifier: Apache-2.0

#include "cos/media.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>

#include "cos/error.hpp"
#include "cos/image_io.hpp"
#include "cos/manifest.hpp"

namespace chainshot {

namespace {

// frame_000012.png -> 12; returns -1 for names outside the convention.
long long frame_number(const std::filesystem::path& p, const std::set<std::string>& exts) {
    const std::string stem = p.stem().string();
    const std::string ext = p.extension().string();
    if (!exts.count(ext)) return -1;
    constexpr std::string_view prefix = "frame_";
    if (stem.size() <= prefix.size() || stem.compare(0, prefix.size(), prefix) != 0) return -1;
    long long value = 0;
    for (size_t i = prefix.size(); i < stem.size(); ++i) {
        if (!std::isdigit(static_cast<unsigned char>(stem[i]))) return -1;
        value = value * 10 + (stem[i] - '0');
    }
    return value;
}

} // namespace

FrameDirectorySource::FrameDirectorySource(const std::filesystem::path& dir, const TagManifest* tags)
    : dir_(dir), id_(dir.generic_string()), tags_(tags) {
    std::error_code ec;
    if (!std::filesystem::is_directory(dir_, ec)) {
        throw IoError("frame directory not readable: " + dir_.string());
    }

    const std::set<std::string> exts{".png", ".ppm"};
    std::vector<std::pair<long long, std::filesystem::path>> numbered;
    for (const auto& entry : std::filesystem::directory_iterator(dir_)) {
        if (!entry.is_regular_file()) continue;
        const long long num = frame_number(entry.path(), exts);
        if (num >= 0) numbered.emplace_back(num, entry.path());
    }
    if (numbered.empty()) {
        throw IoError("no frame_*.png or frame_*.ppm files in: " + dir_.string());
    }
    std::sort(numbered.begin(), numbered.end());
    files_.reserve(numbered.size());
    for (auto& [num, path] : numbered) {
        files_.push_back(std::move(path));
    }

    std::ifstream fps_file(dir_ / "fps.txt");
    if (fps_file) {
        double value = 0.0;
        if (fps_file >> value && value > 0.0) {
            fps_ = value;
        } else {
            throw ParseError("fps.txt must contain one positive decimal number: " +
                             (dir_ / "fps.txt").string());
        }
    }
}

std::shared_ptr<const Image> FrameDirectorySource::read_frame(int index) const {
    if (index < 0 || index >= frame_count()) {
        throw ArgumentError("read_frame: index out of range for " + id_);
    }
    {
        std::lock_guard<std::mutex> lock(cache_mutex_);
        const auto it = cache_.find(index);
        if (it != cache_.end()) return it->second;
    }
    auto img = std::make_shared<const Image>(load_image_file(files_[index]));
    std::lock_guard<std::mutex> lock(cache_mutex_);
    return cache_.emplace(index, std::move(img)).first->second;
}

std::set<std::string> FrameDirectorySource::frame_tags(int index) const {
    if (!tags_ || index < 0 || index >= frame_count()) return {};
    return tags_->tags_for(files_[index]);
}

ShotSequence sample_shots(const VideoSource& video, int n) {
    if (n < 1) {
        throw ArgumentError("sample_shots: shot count must be >= 1");
    }
    const int frame_count = video.frame_count();
    if (frame_count < 1) {
        throw IoError("video source exposes no frames: " + video.id());
    }

    ShotSequence seq;
    seq.source = video.id();
    seq.shots.reserve(n);
    const double fps = video.fps();
    for (int i = 0; i < n; ++i) {
        long long src = std::llround(static_cast<double>(i) * frame_count / n);
        src = std::clamp<long long>(src, 0, frame_count - 1);
        FrameRef frame;
        frame.video_id = video.id();
        frame.index = static_cast<int>(src);
        frame.timestamp = fps > 0.0 ? static_cast<double>(src) / fps : static_cast<double>(src);
        frame.pixels = video.read_frame(frame.index);
        frame.tags = video.frame_tags(frame.index);
        seq.shots.push_back(std::move(frame));
    }
    return seq;
}

ShotSequence normalize_frames(ShotSequence shots, int tile_size) {
    if (tile_size < 1) {
        throw ArgumentError("normalize_frames: tile size must be positive");
    }
    for (auto& frame : shots.shots) {
        if (!frame.pixels || frame.pixels->empty()) {
            throw ArgumentError("normalize_frames: frame without pixel data");
        }
        if (frame.pixels->width != tile_size || frame.pixels->height != tile_size) {
            frame.pixels =
                std::make_shared<const Image>(resize_bilinear(*frame.pixels, tile_size, tile_size));
        }
    }
    return shots;
}

std::pair<int, int> mosaic_grid_shape(int group_size) {
    if (group_size < 1) {
        throw ArgumentError("mosaic_grid_shape: group size must be >= 1");
    }
    const int cols = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(group_size))));
    const int rows = (group_size + cols - 1) / cols;
    return {rows, cols};
}

std::vector<MosaicImage> compose_mosaics(const ShotSequence& shots, int group_size) {
    if (shots.empty()) {
        throw ArgumentError("compose_mosaics: empty shot sequence");
    }
    if (group_size < 1) {
        throw ArgumentError("compose_mosaics: group size must be >= 1");
    }

    const int n = shots.size();
    const int tile_w = shots.shots.front().pixels ? shots.shots.front().pixels->width : 0;
    const int tile_h = shots.shots.front().pixels ? shots.shots.front().pixels->height : 0;
    if (tile_w < 1 || tile_h < 1) {
        throw ArgumentError("compose_mosaics: frames carry no pixel data");
    }
    for (const auto& frame : shots.shots) {
        if (!frame.pixels || frame.pixels->width != tile_w || frame.pixels->height != tile_h) {
            throw ArgumentError("compose_mosaics: frames must be normalized to one resolution");
        }
    }

    const auto [rows, cols] = mosaic_grid_shape(group_size);
    const int m = (n + group_size - 1) / group_size;

    std::vector<MosaicImage> mosaics;
    mosaics.reserve(m);
    for (int s = 0; s < m; ++s) {
        MosaicImage mosaic;
        mosaic.grid_rows = rows;
        mosaic.grid_cols = cols;
        mosaic.source = shots.source;
        const int begin = s * group_size;
        const int end = std::min(begin + group_size, n);
        for (int i = begin; i < end; ++i) {
            mosaic.members.push_back(i);
            mosaic.tags.insert(shots.shots[i].tags.begin(), shots.shots[i].tags.end());
        }

        mosaic.pixels = Image(cols * tile_w, rows * tile_h);
        const int member_count = static_cast<int>(mosaic.members.size());
        for (int tile = 0; tile < rows * cols; ++tile) {
            // empty tiles repeat the group's last member frame
            const int shot = mosaic.members[std::min(tile, member_count - 1)];
            const Image& src = *shots.shots[shot].pixels;
            const int r = tile / cols;
            const int c = tile % cols;
            for (int y = 0; y < tile_h; ++y) {
                std::memcpy(mosaic.pixels.row(r * tile_h + y) +
                                static_cast<size_t>(c) * tile_w * 3,
                            src.row(y), src.row_bytes());
            }
        }
        mosaics.push_back(std::move(mosaic));
    }
    return mosaics;
}

FrameRef make_black_frame(int height, int width) {
    if (height < 1 || width < 1) {
        throw ArgumentError("make_black_frame: dimensions must be positive");
    }
    FrameRef frame;
    frame.video_id = kBlackVideoId;
    frame.index = 0;
    frame.timestamp = 0.0;
    frame.pixels = std::make_shared<const Image>(Image::solid(width, height, 0, 0, 0));
    return frame;
}

} // namespace chainshot
