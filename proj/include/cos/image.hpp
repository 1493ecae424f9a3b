// Copyright 2026 The CoS Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace chainshot {

// Interleaved 8-bit RGB raster, row-major, top-left origin.
struct Image {
    int width = 0;
    int height = 0;
    int channels = 3;
    std::vector<uint8_t> data;

    Image() = default;
    Image(int w, int h);

    static Image solid(int w, int h, uint8_t r, uint8_t g, uint8_t b);

    size_t row_bytes() const { return static_cast<size_t>(width) * static_cast<size_t>(channels); }
    uint8_t* row(int y) { return data.data() + static_cast<size_t>(y) * row_bytes(); }
    const uint8_t* row(int y) const { return data.data() + static_cast<size_t>(y) * row_bytes(); }
    bool empty() const { return data.empty(); }

    bool operator==(const Image&) const = default;
};

// Bilinear resample to the given output size. No-op copy when sizes match.
Image resize_bilinear(const Image& src, int out_width, int out_height);

} // namespace chainshot
