#pragma once

#include <cstdint>
#include <vector>

#include "distfield/common.hpp"
#include "distfield/error.hpp"

namespace distfield {

// Single-channel raster, 500 ppi semantics. Stored intensities live in [0,1];
// pixel (x, y) samples the continuous plane at exactly (x, y).
struct GrayImage {
    int width = 0;
    int height = 0;
    std::vector<double> data;  // row-major, width*height

    GrayImage() = default;
    GrayImage(int w, int h, double fill = 0.0) : width(w), height(h), data(size_t(w) * h, fill) {
        if (w <= 0 || h <= 0) throw DimensionMismatch("image dimensions must be positive");
    }

    double& at(int x, int y) { return data[size_t(y) * width + x]; }
    double at(int x, int y) const { return data[size_t(y) * width + x]; }

    bool sameSize(const GrayImage& o) const { return width == o.width && height == o.height; }

    // Bilinear sample at a continuous position; outside [0,W-1]x[0,H-1]
    // returns `background`.
    double sample(double x, double y, double background = 0.0) const {
        if (x < 0.0 || y < 0.0 || x > width - 1 || y > height - 1) return background;
        int x0 = int(x), y0 = int(y);
        if (x0 == width - 1) x0--;
        if (y0 == height - 1) y0--;
        double fx = x - x0, fy = y - y0;
        double v00 = at(x0, y0), v10 = at(x0 + 1, y0);
        double v01 = at(x0, y0 + 1), v11 = at(x0 + 1, y0 + 1);
        return (1 - fy) * ((1 - fx) * v00 + fx * v10) + fy * ((1 - fx) * v01 + fx * v11);
    }
};

// Binary fingerprint-region raster paired with a GrayImage.
struct FingerMask {
    int width = 0;
    int height = 0;
    std::vector<uint8_t> bits;  // row-major, 0/1

    FingerMask() = default;
    FingerMask(int w, int h, uint8_t fill = 0) : width(w), height(h), bits(size_t(w) * h, fill) {
        if (w <= 0 || h <= 0) throw DimensionMismatch("mask dimensions must be positive");
    }

    uint8_t& at(int x, int y) { return bits[size_t(y) * width + x]; }
    uint8_t at(int x, int y) const { return bits[size_t(y) * width + x]; }

    bool inside(double x, double y) const {
        if (x < 0.0 || y < 0.0 || x > width - 1 || y > height - 1) return false;
        // Bilinear occupancy >= 0.5 keeps warped masks crisp.
        int x0 = int(x), y0 = int(y);
        if (x0 == width - 1) x0--;
        if (y0 == height - 1) y0--;
        double fx = x - x0, fy = y - y0;
        double v = (1 - fy) * ((1 - fx) * at(x0, y0) + fx * at(x0 + 1, y0)) +
                   fy * ((1 - fx) * at(x0, y0 + 1) + fx * at(x0 + 1, y0 + 1));
        return v >= 0.5;
    }

    size_t count() const {
        size_t n = 0;
        for (uint8_t b : bits) n += b;
        return n;
    }
};

// Mask at distortion-field resolution (one flag per 16x16 block).
struct GridMask {
    int w = 0;
    int h = 0;
    std::vector<uint8_t> on;

    GridMask() = default;
    GridMask(int gw, int gh, uint8_t fill = 0) : w(gw), h(gh), on(size_t(gw) * gh, fill) {}

    uint8_t& at(int i, int j) { return on[size_t(j) * w + i]; }
    uint8_t at(int i, int j) const { return on[size_t(j) * w + i]; }

    size_t count() const {
        size_t n = 0;
        for (uint8_t b : on) n += b;
        return n;
    }
};

// A block belongs to the grid mask when at least 50% of its pixels are inside.
inline GridMask maskToGrid(const FingerMask& mask, int blockSize) {
    int gw = (mask.width + blockSize - 1) / blockSize;
    int gh = (mask.height + blockSize - 1) / blockSize;
    GridMask g(gw, gh);
    for (int j = 0; j < gh; ++j) {
        for (int i = 0; i < gw; ++i) {
            int x0 = i * blockSize, y0 = j * blockSize;
            int x1 = std::min(mask.width, x0 + blockSize);
            int y1 = std::min(mask.height, y0 + blockSize);
            int in = 0;
            for (int y = y0; y < y1; ++y)
                for (int x = x0; x < x1; ++x) in += mask.at(x, y);
            g.at(i, j) = (2 * in >= blockSize * blockSize) ? 1 : 0;
        }
    }
    return g;
}

// Zero-mean/unit-variance view of an image, statistics taken over mask pixels.
// The same affine map is applied to every pixel, inside the mask or not.
inline GrayImage normalizedView(const GrayImage& img, const FingerMask& mask) {
    if (img.width != mask.width || img.height != mask.height)
        throw DimensionMismatch("image/mask size");
    double sum = 0.0, sum2 = 0.0;
    size_t n = 0;
    for (size_t i = 0; i < img.data.size(); ++i) {
        if (mask.bits[i]) {
            sum += img.data[i];
            sum2 += img.data[i] * img.data[i];
            ++n;
        }
    }
    if (n == 0) throw EmptyMask("normalizedView");
    double mean = sum / double(n);
    double var = sum2 / double(n) - mean * mean;
    if (var < 1e-12) throw DegenerateImage("zero intensity variance over mask");
    double inv = 1.0 / std::sqrt(var);
    GrayImage out(img.width, img.height);
    for (size_t i = 0; i < img.data.size(); ++i) out.data[i] = (img.data[i] - mean) * inv;
    return out;
}

// Chebyshev (square structuring element) erosion by `radius` pixels.
inline FingerMask erodeMask(const FingerMask& m, int radius) {
    if (radius <= 0) return m;
    FingerMask tmp(m.width, m.height), out(m.width, m.height);
    // separable min filter: rows then columns
    for (int y = 0; y < m.height; ++y) {
        for (int x = 0; x < m.width; ++x) {
            uint8_t v = 1;
            for (int dx = -radius; dx <= radius && v; ++dx) {
                int xx = x + dx;
                if (xx < 0 || xx >= m.width || !m.at(xx, y)) v = 0;
            }
            tmp.at(x, y) = v;
        }
    }
    for (int y = 0; y < m.height; ++y) {
        for (int x = 0; x < m.width; ++x) {
            uint8_t v = 1;
            for (int dy = -radius; dy <= radius && v; ++dy) {
                int yy = y + dy;
                if (yy < 0 || yy >= m.height || !tmp.at(x, yy)) v = 0;
            }
            out.at(x, y) = v;
        }
    }
    return out;
}

inline FingerMask dilateMask(const FingerMask& m, int radius) {
    if (radius <= 0) return m;
    FingerMask tmp(m.width, m.height), out(m.width, m.height);
    for (int y = 0; y < m.height; ++y) {
        for (int x = 0; x < m.width; ++x) {
            uint8_t v = 0;
            for (int dx = -radius; dx <= radius && !v; ++dx) {
                int xx = x + dx;
                if (xx >= 0 && xx < m.width && m.at(xx, y)) v = 1;
            }
            tmp.at(x, y) = v;
        }
    }
    for (int y = 0; y < m.height; ++y) {
        for (int x = 0; x < m.width; ++x) {
            uint8_t v = 0;
            for (int dy = -radius; dy <= radius && !v; ++dy) {
                int yy = y + dy;
                if (yy >= 0 && yy < m.height && tmp.at(x, yy)) v = 1;
            }
            out.at(x, y) = v;
        }
    }
    return out;
}

inline FingerMask closeMask(const FingerMask& m, int radius) {
    return erodeMask(dilateMask(m, radius), radius);
}

inline GridMask erodeGridMask(const GridMask& m, int radius) {
    FingerMask f(m.w, m.h);
    f.bits = m.on;
    FingerMask e = erodeMask(f, radius);
    GridMask out(m.w, m.h);
    out.on = e.bits;
    return out;
}

// Keep only the largest 8-connected component of true pixels.
inline FingerMask largestComponent(const FingerMask& m) {
    FingerMask out(m.width, m.height);
    std::vector<int32_t> label(m.bits.size(), -1);
    std::vector<size_t> stack;
    int32_t best = -1;
    size_t bestSize = 0;
    int32_t cur = 0;
    for (size_t s = 0; s < m.bits.size(); ++s) {
        if (!m.bits[s] || label[s] >= 0) continue;
        size_t size = 0;
        stack.push_back(s);
        label[s] = cur;
        while (!stack.empty()) {
            size_t p = stack.back();
            stack.pop_back();
            ++size;
            int x = int(p % m.width), y = int(p / m.width);
            for (int dy = -1; dy <= 1; ++dy) {
                for (int dx = -1; dx <= 1; ++dx) {
                    if (!dx && !dy) continue;
                    int xx = x + dx, yy = y + dy;
                    if (xx < 0 || yy < 0 || xx >= m.width || yy >= m.height) continue;
                    size_t q = size_t(yy) * m.width + xx;
                    if (m.bits[q] && label[q] < 0) {
                        label[q] = cur;
                        stack.push_back(q);
                    }
                }
            }
        }
        if (size > bestSize) {
            bestSize = size;
            best = cur;
        }
        ++cur;
    }
    if (best < 0) return out;  // empty stays empty
    for (size_t i = 0; i < m.bits.size(); ++i) out.bits[i] = (label[i] == best) ? 1 : 0;
    return out;
}

inline int componentCount(const FingerMask& m) {
    std::vector<uint8_t> seen(m.bits.size(), 0);
    std::vector<size_t> stack;
    int comps = 0;
    for (size_t s = 0; s < m.bits.size(); ++s) {
        if (!m.bits[s] || seen[s]) continue;
        ++comps;
        stack.push_back(s);
        seen[s] = 1;
        while (!stack.empty()) {
            size_t p = stack.back();
            stack.pop_back();
            int x = int(p % m.width), y = int(p / m.width);
            for (int dy = -1; dy <= 1; ++dy) {
                for (int dx = -1; dx <= 1; ++dx) {
                    if (!dx && !dy) continue;
                    int xx = x + dx, yy = y + dy;
                    if (xx < 0 || yy < 0 || xx >= m.width || yy >= m.height) continue;
                    size_t q = size_t(yy) * m.width + xx;
                    if (m.bits[q] && !seen[q]) {
                        seen[q] = 1;
                        stack.push_back(q);
                    }
                }
            }
        }
    }
    return comps;
}

// Fingerprint segmentation: Sobel gradient magnitude threshold, largest
// 8-connected component, morphological close. Thresholds intensities in
// [0,1]; Sobel kernels are divided by 8 so responses are per-pixel slopes.
inline FingerMask segmentFingerprint(const GrayImage& img, double threshold = 0.08,
                                     int closeRadius = 2) {
    FingerMask raw(img.width, img.height);
    for (int y = 1; y + 1 < img.height; ++y) {
        for (int x = 1; x + 1 < img.width; ++x) {
            double gx = (img.at(x + 1, y - 1) + 2 * img.at(x + 1, y) + img.at(x + 1, y + 1) -
                         img.at(x - 1, y - 1) - 2 * img.at(x - 1, y) - img.at(x - 1, y + 1)) / 8.0;
            double gy = (img.at(x - 1, y + 1) + 2 * img.at(x, y + 1) + img.at(x + 1, y + 1) -
                         img.at(x - 1, y - 1) - 2 * img.at(x, y - 1) - img.at(x + 1, y - 1)) / 8.0;
            raw.at(x, y) = (std::sqrt(gx * gx + gy * gy) > threshold) ? 1 : 0;
        }
    }
    FingerMask mask = closeMask(largestComponent(raw), closeRadius);
    if (mask.count() == 0) throw EmptyMask("segmentFingerprint: no fingerprint region found");
    return largestComponent(mask);
}

}  // namespace distfield
