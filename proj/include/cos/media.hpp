// Copyright 2026 The CoS Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <memory>
#include <mutex>
#include <set>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "cos/image.hpp"

namespace chainshot {

struct TagManifest;

// video_id of synthesized black fallback frames; never a real source id.
inline constexpr const char* kBlackVideoId = "__black__";

// One decoded video frame plus its position in the source frame stream.
struct FrameRef {
    std::string video_id;
    int index = 0;          // 0-based position in the source stream
    double timestamp = 0.0; // seconds from video start
    std::shared_ptr<const Image> pixels;
    std::set<std::string> tags; // content labels; only mock components read these
};

// Ordered shots sampled from one video.
struct ShotSequence {
    std::vector<FrameRef> shots;
    std::string source;

    int size() const { return static_cast<int>(shots.size()); }
    bool empty() const { return shots.empty(); }
};

// A group of consecutive shots composed into one grid raster.
struct MosaicImage {
    Image pixels;
    std::vector<int> members; // consecutive, strictly increasing global shot indices
    int grid_rows = 0;
    int grid_cols = 0;
    std::string source;
    std::set<std::string> tags; // union of member tags, mock oracle input only
};

// Abstract frame provider: a decoded video or a directory of still frames.
class VideoSource {
public:
    virtual ~VideoSource() = default;
    virtual const std::string& id() const = 0;
    virtual int frame_count() const = 0;
    virtual double fps() const { return 1.0; }
    virtual std::shared_ptr<const Image> read_frame(int index) const = 0;
    virtual std::set<std::string> frame_tags(int /*index*/) const { return {}; }
};

// Frames from a directory of `frame_%06d.<ext>` files (png or ppm), sorted
// numerically. An optional `fps.txt` sidecar holds one decimal number.
class FrameDirectorySource : public VideoSource {
public:
    explicit FrameDirectorySource(const std::filesystem::path& dir,
                                  const TagManifest* tags = nullptr);

    const std::string& id() const override { return id_; }
    int frame_count() const override { return static_cast<int>(files_.size()); }
    double fps() const override { return fps_; }
    std::shared_ptr<const Image> read_frame(int index) const override;
    std::set<std::string> frame_tags(int index) const override;

private:
    std::filesystem::path dir_;
    std::string id_;
    double fps_ = 1.0;
    std::vector<std::filesystem::path> files_;
    const TagManifest* tags_ = nullptr;
    mutable std::mutex cache_mutex_;
    mutable std::unordered_map<int, std::shared_ptr<const Image>> cache_;
};

// Uniformly samples n shots at source indices round(i*F/n), clamped to
// [0, F-1]. Duplicates appear when n exceeds the frame count.
ShotSequence sample_shots(const VideoSource& video, int n);

// Resizes every frame to tile_size x tile_size so mosaics tile cleanly.
ShotSequence normalize_frames(ShotSequence shots, int tile_size);

// Grid shape used for a given group size: cols = ceil(sqrt(k)),
// rows = ceil(k / cols), tiles placed row-major in temporal order.
std::pair<int, int> mosaic_grid_shape(int group_size); // {rows, cols}

// Composes every group of k consecutive shots into one grid image. The final
// partial group pads empty tiles by repeating its last member frame.
std::vector<MosaicImage> compose_mosaics(const ShotSequence& shots, int group_size);

// All-zero frame used as the negative-sequence fallback.
FrameRef make_black_frame(int height, int width);

} // namespace chainshot
