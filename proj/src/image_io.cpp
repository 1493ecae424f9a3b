// Copyright 2026 The CoS Authors
// SPDX-License-Identifier: Apache-2.0

#include "cos/image_io.hpp"

#include <png.h>

#include <cctype>
#include <csetjmp>
#include <cstring>
#include <fstream>
#include <sstream>

#include "cos/error.hpp"

namespace chainshot {

namespace {

struct PngReadCursor {
    const uint8_t* data;
    size_t size;
    size_t offset;
};

void png_read_from_memory(png_structp png, png_bytep out, png_size_t count) {
    auto* cur = static_cast<PngReadCursor*>(png_get_io_ptr(png));
    if (cur->offset + count > cur->size) {
        png_error(png, "read past end of PNG buffer");
    }
    std::memcpy(out, cur->data + cur->offset, count);
    cur->offset += count;
}

void png_write_to_string(png_structp png, png_bytep data, png_size_t count) {
    auto* out = static_cast<std::string*>(png_get_io_ptr(png));
    out->append(reinterpret_cast<const char*>(data), count);
}

void png_flush_noop(png_structp) {}

std::string read_binary_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open file: " + path.string());
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    if (!in.good() && !in.eof()) {
        throw IoError("failed reading file: " + path.string());
    }
    return std::move(buf).str();
}

void write_binary_file(const std::filesystem::path& path, const std::string& bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IoError("cannot open file for writing: " + path.string());
    }
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) {
        throw IoError("failed writing file: " + path.string());
    }
}

} // namespace

std::string encode_png(const Image& img) {
    if (img.empty()) {
        throw ArgumentError("encode_png: empty image");
    }
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!png) {
        throw IoError("encode_png: png_create_write_struct failed");
    }
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_write_struct(&png, nullptr);
        throw IoError("encode_png: png_create_info_struct failed");
    }

    std::string out;
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw IoError("encode_png: libpng write failure");
    }
    png_set_write_fn(png, &out, png_write_to_string, png_flush_noop);
    png_set_IHDR(png, info, static_cast<png_uint_32>(img.width), static_cast<png_uint_32>(img.height),
                 8, PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
                 PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    for (int y = 0; y < img.height; ++y) {
        png_write_row(png, const_cast<png_bytep>(img.row(y)));
    }
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
    return out;
}

Image decode_png(std::string_view bytes) {
    if (bytes.size() < 8 || png_sig_cmp(reinterpret_cast<png_const_bytep>(bytes.data()), 0, 8) != 0) {
        throw ParseError("decode_png: not a PNG stream");
    }
    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!png) {
        throw IoError("decode_png: png_create_read_struct failed");
    }
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_read_struct(&png, nullptr, nullptr);
        throw IoError("decode_png: png_create_info_struct failed");
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw ParseError("decode_png: corrupt PNG stream");
    }

    PngReadCursor cursor{reinterpret_cast<const uint8_t*>(bytes.data()), bytes.size(), 0};
    png_set_read_fn(png, &cursor, png_read_from_memory);
    png_read_info(png, info);

    // Normalize everything to 8-bit RGB.
    png_set_expand(png);
    png_set_strip_16(png);
    png_set_strip_alpha(png);
    if (png_get_color_type(png, info) == PNG_COLOR_TYPE_GRAY ||
        png_get_color_type(png, info) == PNG_COLOR_TYPE_GRAY_ALPHA) {
        png_set_gray_to_rgb(png);
    }
    png_read_update_info(png, info);

    const int width = static_cast<int>(png_get_image_width(png, info));
    const int height = static_cast<int>(png_get_image_height(png, info));
    if (png_get_channels(png, info) != 3) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw ParseError("decode_png: unexpected channel count after conversion");
    }

    Image img(width, height);
    for (int y = 0; y < height; ++y) {
        png_read_row(png, img.row(y), nullptr);
    }
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);
    return img;
}

std::string encode_ppm(const Image& img) {
    if (img.empty()) {
        throw ArgumentError("encode_ppm: empty image");
    }
    std::string out = "P6\n" + std::to_string(img.width) + " " + std::to_string(img.height) + "\n255\n";
    out.append(reinterpret_cast<const char*>(img.data.data()), img.data.size());
    return out;
}

Image decode_ppm(std::string_view bytes) {
    size_t pos = 0;
    auto skip_space = [&] {
        while (pos < bytes.size()) {
            if (std::isspace(static_cast<unsigned char>(bytes[pos]))) {
                ++pos;
            } else if (bytes[pos] == '#') {
                while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
            } else {
                break;
            }
        }
    };
    auto read_int = [&]() -> int {
        skip_space();
        size_t start = pos;
        while (pos < bytes.size() && std::isdigit(static_cast<unsigned char>(bytes[pos]))) ++pos;
        if (start == pos) {
            throw ParseError("decode_ppm: malformed header");
        }
        return std::stoi(std::string(bytes.substr(start, pos - start)));
    };

    if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != '6') {
        throw ParseError("decode_ppm: not a binary PPM stream");
    }
    pos = 2;
    const int width = read_int();
    const int height = read_int();
    const int maxval = read_int();
    if (maxval != 255) {
        throw ParseError("decode_ppm: only maxval 255 is supported");
    }
    ++pos; // single whitespace after maxval
    const size_t need = static_cast<size_t>(width) * static_cast<size_t>(height) * 3;
    if (width < 1 || height < 1 || pos + need > bytes.size()) {
        throw ParseError("decode_ppm: truncated pixel data");
    }
    Image img(width, height);
    std::memcpy(img.data.data(), bytes.data() + pos, need);
    return img;
}

Image load_image_file(const std::filesystem::path& path) {
    const std::string ext = path.extension().string();
    const std::string bytes = read_binary_file(path);
    try {
        if (ext == ".png") return decode_png(bytes);
        if (ext == ".ppm") return decode_ppm(bytes);
    } catch (const ParseError& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
    throw IoError("unsupported image extension '" + ext + "': " + path.string());
}

void save_image_file(const std::filesystem::path& path, const Image& img) {
    const std::string ext = path.extension().string();
    if (ext == ".png") {
        write_binary_file(path, encode_png(img));
    } else if (ext == ".ppm") {
        write_binary_file(path, encode_ppm(img));
    } else {
        throw IoError("unsupported image extension '" + ext + "': " + path.string());
    }
}

} // namespace chainshot
