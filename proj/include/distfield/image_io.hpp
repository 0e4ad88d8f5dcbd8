#pragma once

#include <png.h>

#include <cstdio>
#include <fstream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "distfield/error.hpp"
#include "distfield/image.hpp"

namespace distfield {

inline std::vector<uint8_t> quantize(const GrayImage& img) {
    std::vector<uint8_t> bytes(img.data.size());
    for (size_t i = 0; i < img.data.size(); ++i) {
        double v = std::clamp(img.data[i], 0.0, 1.0) * 255.0;
        bytes[i] = uint8_t(std::lround(v));
    }
    return bytes;
}

// --- PNG (8-bit grayscale) ---

inline void savePng(const GrayImage& img, const std::string& path) {
    std::FILE* fp = std::fopen(path.c_str(), "wb");
    if (!fp) throw IoError("cannot write " + path);
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info || setjmp(png_jmpbuf(png))) {
        if (png) png_destroy_write_struct(&png, info ? &info : nullptr);
        std::fclose(fp);
        throw IoError("libpng write failure: " + path);
    }
    png_init_io(png, fp);
    png_set_IHDR(png, info, png_uint_32(img.width), png_uint_32(img.height), 8,
                 PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
                 PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    std::vector<uint8_t> bytes = quantize(img);
    for (int y = 0; y < img.height; ++y)
        png_write_row(png, bytes.data() + size_t(y) * img.width);
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
    std::fclose(fp);
}

inline void savePngMask(const FingerMask& mask, const std::string& path) {
    GrayImage img(mask.width, mask.height);
    for (size_t i = 0; i < mask.bits.size(); ++i) img.data[i] = mask.bits[i] ? 1.0 : 0.0;
    savePng(img, path);
}

inline GrayImage loadPng(const std::string& path) {
    std::FILE* fp = std::fopen(path.c_str(), "rb");
    if (!fp) throw IoError("cannot read " + path);
    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info || setjmp(png_jmpbuf(png))) {
        if (png) png_destroy_read_struct(&png, info ? &info : nullptr, nullptr);
        std::fclose(fp);
        throw IoError("libpng read failure: " + path);
    }
    png_init_io(png, fp);
    png_read_info(png, info);
    // normalize anything to 8-bit gray
    png_set_strip_16(png);
    png_set_strip_alpha(png);
    int color = png_get_color_type(png, info);
    if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
    if (color & PNG_COLOR_MASK_COLOR || color == PNG_COLOR_TYPE_PALETTE)
        png_set_rgb_to_gray(png, 1, -1.0, -1.0);
    if (png_get_bit_depth(png, info) < 8) png_set_expand_gray_1_2_4_to_8(png);
    png_read_update_info(png, info);
    int w = int(png_get_image_width(png, info));
    int h = int(png_get_image_height(png, info));
    std::vector<uint8_t> row(png_get_rowbytes(png, info));
    GrayImage img(w, h);
    for (int y = 0; y < h; ++y) {
        png_read_row(png, row.data(), nullptr);
        for (int x = 0; x < w; ++x) img.at(x, y) = row[x] / 255.0;
    }
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);
    std::fclose(fp);
    return img;
}

inline FingerMask loadPngMask(const std::string& path) {
    GrayImage img = loadPng(path);
    FingerMask mask(img.width, img.height);
    for (size_t i = 0; i < img.data.size(); ++i) mask.bits[i] = img.data[i] >= 0.5 ? 1 : 0;
    return mask;
}

// --- PGM (P2 ascii / P5 binary) ---

inline void savePgm(const GrayImage& img, const std::string& path, bool binary = true) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot write " + path);
    std::vector<uint8_t> bytes = quantize(img);
    f << (binary ? "P5" : "P2") << "\n" << img.width << " " << img.height << "\n255\n";
    if (binary) {
        f.write(reinterpret_cast<const char*>(bytes.data()), std::streamsize(bytes.size()));
    } else {
        for (int y = 0; y < img.height; ++y) {
            for (int x = 0; x < img.width; ++x)
                f << int(bytes[size_t(y) * img.width + x]) << (x + 1 == img.width ? '\n' : ' ');
        }
    }
    if (!f) throw IoError("write failed: " + path);
}

inline GrayImage loadPgm(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot read " + path);
    auto nextToken = [&f, &path]() {
        std::string tok;
        while (f >> tok) {
            if (tok[0] == '#') {
                std::string rest;
                std::getline(f, rest);
                continue;
            }
            return tok;
        }
        throw IoError("truncated PGM: " + path);
    };
    std::string magic = nextToken();
    if (magic != "P2" && magic != "P5") throw IoError("not a PGM: " + path);
    int w = std::stoi(nextToken());
    int h = std::stoi(nextToken());
    int maxv = std::stoi(nextToken());
    if (w <= 0 || h <= 0 || maxv <= 0 || maxv > 255) throw IoError("bad PGM header: " + path);
    GrayImage img(w, h);
    if (magic == "P5") {
        f.get();  // single whitespace after maxval
        std::vector<uint8_t> bytes(size_t(w) * h);
        f.read(reinterpret_cast<char*>(bytes.data()), std::streamsize(bytes.size()));
        if (!f) throw IoError("truncated PGM: " + path);
        for (size_t i = 0; i < bytes.size(); ++i) img.data[i] = double(bytes[i]) / maxv;
    } else {
        for (size_t i = 0; i < img.data.size(); ++i) img.data[i] = std::stod(nextToken()) / maxv;
    }
    return img;
}

inline bool hasSuffix(const std::string& s, const std::string& suffix) {
    return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

inline GrayImage loadImage(const std::string& path) {
    if (hasSuffix(path, ".pgm")) return loadPgm(path);
    return loadPng(path);
}

inline void saveImage(const GrayImage& img, const std::string& path) {
    if (hasSuffix(path, ".pgm")) savePgm(img, path);
    else savePng(img, path);
}

}  // namespace distfield
