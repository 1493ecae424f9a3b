// Copyright 2026 The CoS Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "cos/image.hpp"

namespace chainshot {

// In-memory PNG codec (8-bit RGB; reads convert palette/gray/alpha inputs).
std::string encode_png(const Image& img);
Image decode_png(std::string_view bytes);

// Binary PPM (P6), maxval 255.
std::string encode_ppm(const Image& img);
Image decode_ppm(std::string_view bytes);

// Dispatch by file extension (.png / .ppm).
Image load_image_file(const std::filesystem::path& path);
void save_image_file(const std::filesystem::path& path, const Image& img);

} // namespace chainshot
