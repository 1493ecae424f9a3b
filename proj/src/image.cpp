// Copyright 2026 The CoS Authors
// SPDX-License-Identifier: Apache-2.0

#include "cos/image.hpp"

#include <algorithm>
#include <cmath>

#include "cos/error.hpp"

namespace chainshot {

Image::Image(int w, int h) : width(w), height(h) {
    if (w < 1 || h < 1) {
        throw ArgumentError("Image: dimensions must be positive");
    }
    data.assign(static_cast<size_t>(w) * static_cast<size_t>(h) * 3, 0);
}

Image Image::solid(int w, int h, uint8_t r, uint8_t g, uint8_t b) {
    Image img(w, h);
    for (size_t i = 0; i < img.data.size(); i += 3) {
        img.data[i] = r;
        img.data[i + 1] = g;
        img.data[i + 2] = b;
    }
    return img;
}

Image resize_bilinear(const Image& src, int out_width, int out_height) {
    if (src.empty()) {
        throw ArgumentError("resize_bilinear: empty source image");
    }
    if (out_width < 1 || out_height < 1) {
        throw ArgumentError("resize_bilinear: output dimensions must be positive");
    }
    if (src.width == out_width && src.height == out_height) {
        return src;
    }

    Image out(out_width, out_height);
    const double sx = static_cast<double>(src.width) / out_width;
    const double sy = static_cast<double>(src.height) / out_height;

    for (int y = 0; y < out_height; ++y) {
        // pixel-center mapping
        double fy = (y + 0.5) * sy - 0.5;
        fy = std::clamp(fy, 0.0, static_cast<double>(src.height - 1));
        const int y0 = static_cast<int>(fy);
        const int y1 = std::min(y0 + 1, src.height - 1);
        const double wy = fy - y0;

        for (int x = 0; x < out_width; ++x) {
            double fx = (x + 0.5) * sx - 0.5;
            fx = std::clamp(fx, 0.0, static_cast<double>(src.width - 1));
            const int x0 = static_cast<int>(fx);
            const int x1 = std::min(x0 + 1, src.width - 1);
            const double wx = fx - x0;

            const uint8_t* r0 = src.row(y0);
            const uint8_t* r1 = src.row(y1);
            uint8_t* dst = out.row(y) + static_cast<size_t>(x) * 3;
            for (int c = 0; c < 3; ++c) {
                const double top = r0[x0 * 3 + c] * (1.0 - wx) + r0[x1 * 3 + c] * wx;
                const double bot = r1[x0 * 3 + c] * (1.0 - wx) + r1[x1 * 3 + c] * wx;
                dst[c] = static_cast<uint8_t>(std::lround(top * (1.0 - wy) + bot * wy));
            }
        }
    }
    return out;
}

} // namespace chainshot
