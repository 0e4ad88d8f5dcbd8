#pragma once

#include <fstream>
#include <string>
#include <vector>

#include "distfield/common.hpp"
#include "distfield/error.hpp"
#include "distfield/image.hpp"

namespace distfield {

constexpr int kBlockSize = 16;

// Dense displacement field on a coarse grid, one vector per blockSize x
// blockSize image block, in pixels. Direction is FROM the distorted input
// TOWARD the rectification target. Vector (i, j) is anchored at the block
// center ((i + 0.5) * blockSize, (j + 0.5) * blockSize).
struct DistortionField {
    int gridW = 0;
    int gridH = 0;
    int blockSize = kBlockSize;
    std::vector<Vec2> vectors;  // row-major

    DistortionField() = default;
    DistortionField(int gw, int gh, int bs = kBlockSize)
        : gridW(gw), gridH(gh), blockSize(bs), vectors(size_t(gw) * gh) {
        if (gw <= 0 || gh <= 0 || bs <= 0) throw DimensionMismatch("field grid dimensions");
    }

    Vec2& at(int i, int j) { return vectors[size_t(j) * gridW + i]; }
    Vec2 at(int i, int j) const { return vectors[size_t(j) * gridW + i]; }

    Vec2 anchor(int i, int j) const {
        return {(i + 0.5) * blockSize, (j + 0.5) * blockSize};
    }

    bool sameGrid(const DistortionField& o) const {
        return gridW == o.gridW && gridH == o.gridH && blockSize == o.blockSize;
    }

    bool allFinite() const {
        for (const Vec2& v : vectors)
            if (!std::isfinite(v.x) || !std::isfinite(v.y)) return false;
        return true;
    }
};

inline DistortionField makeFieldFor(int width, int height, int blockSize = kBlockSize) {
    return DistortionField((width + blockSize - 1) / blockSize,
                           (height + blockSize - 1) / blockSize, blockSize);
}

// Projects out the rigid part of a field: the mask-weighted translation plus
// the infinitesimal rotation about the masked centroid. The result has
// exactly zero mask-weighted mean displacement and zero mask-weighted moment,
// and the operation is idempotent. Large rigid motion between capture frames
// is handled earlier by fit_rigid; what remains here is a small residual.
inline DistortionField removeDc(const DistortionField& field, const GridMask& mask) {
    if (mask.w != field.gridW || mask.h != field.gridH)
        throw GridMismatch("removeDc mask/field grid");
    double n = double(mask.count());
    if (n == 0) throw EmptyMask("removeDc");

    Vec2 centroid{0, 0};
    for (int j = 0; j < field.gridH; ++j)
        for (int i = 0; i < field.gridW; ++i)
            if (mask.at(i, j)) centroid += field.anchor(i, j);
    centroid = centroid * (1.0 / n);

    Vec2 meanDisp{0, 0};
    for (int j = 0; j < field.gridH; ++j)
        for (int i = 0; i < field.gridW; ++i)
            if (mask.at(i, j)) meanDisp += field.at(i, j);
    meanDisp = meanDisp * (1.0 / n);

    double num = 0.0, den = 0.0;
    for (int j = 0; j < field.gridH; ++j) {
        for (int i = 0; i < field.gridW; ++i) {
            if (!mask.at(i, j)) continue;
            Vec2 r = field.anchor(i, j) - centroid;
            Vec2 v = field.at(i, j) - meanDisp;
            num += r.cross(v);
            den += r.squaredNorm();
        }
    }
    double omega = (den > 0.0) ? num / den : 0.0;

    DistortionField out(field.gridW, field.gridH, field.blockSize);
    for (int j = 0; j < field.gridH; ++j) {
        for (int i = 0; i < field.gridW; ++i) {
            Vec2 r = field.anchor(i, j) - centroid;
            out.at(i, j) = field.at(i, j) - meanDisp - omega * r.rot90();
        }
    }
    return out;
}

struct DcMoments {
    Vec2 mean;
    double moment = 0.0;
};

// Mask-weighted mean displacement and mean moment about the masked centroid.
inline DcMoments dcMoments(const DistortionField& field, const GridMask& mask) {
    double n = double(mask.count());
    if (n == 0) throw EmptyMask("dcMoments");
    Vec2 centroid{0, 0};
    for (int j = 0; j < field.gridH; ++j)
        for (int i = 0; i < field.gridW; ++i)
            if (mask.at(i, j)) centroid += field.anchor(i, j);
    centroid = centroid * (1.0 / n);
    DcMoments m;
    for (int j = 0; j < field.gridH; ++j) {
        for (int i = 0; i < field.gridW; ++i) {
            if (!mask.at(i, j)) continue;
            m.mean += field.at(i, j);
            m.moment += (field.anchor(i, j) - centroid).cross(field.at(i, j));
        }
    }
    m.mean = m.mean * (1.0 / n);
    m.moment /= n;
    return m;
}

// Per-pixel 2-channel raster produced from a block-grid field.
struct DenseField {
    int width = 0;
    int height = 0;
    std::vector<Vec2> vectors;

    DenseField() = default;
    DenseField(int w, int h) : width(w), height(h), vectors(size_t(w) * h) {}

    Vec2& at(int x, int y) { return vectors[size_t(y) * width + x]; }
    Vec2 at(int x, int y) const { return vectors[size_t(y) * width + x]; }
};

// Bilinear interpolation of each channel from block centers; replicate
// outside the center lattice. Values at block centers are unchanged.
inline DenseField upsampleField(const DistortionField& field, int outW, int outH) {
    int bs = field.blockSize;
    if (outW <= 0 || outH <= 0 || std::abs(outW - field.gridW * bs) >= bs ||
        std::abs(outH - field.gridH * bs) >= bs)
        throw DimensionMismatch("upsampleField output size inconsistent with grid");
    DenseField out(outW, outH);
    double half = 0.5 * bs;
    parallelFor(outH, [&](int y) {
        double gy = (y - half) / bs + 0.0;  // grid coordinate of pixel row
        double cy = std::clamp(gy, 0.0, double(field.gridH - 1));
        int j0 = int(cy);
        if (j0 == field.gridH - 1 && field.gridH > 1) j0--;
        double fy = cy - j0;
        for (int x = 0; x < outW; ++x) {
            double gx = (x - half) / bs;
            double cx = std::clamp(gx, 0.0, double(field.gridW - 1));
            int i0 = int(cx);
            if (i0 == field.gridW - 1 && field.gridW > 1) i0--;
            double fx = cx - i0;
            int i1 = std::min(i0 + 1, field.gridW - 1);
            int j1 = std::min(j0 + 1, field.gridH - 1);
            Vec2 v = (1 - fy) * ((1 - fx) * field.at(i0, j0) + fx * field.at(i1, j0)) +
                     fy * ((1 - fx) * field.at(i0, j1) + fx * field.at(i1, j1));
            out.at(x, y) = v;
        }
    });
    return out;
}

// "DFLD" container: magic, u32 version=1, u32 gridW, u32 gridH, u32 blockSize,
// then gridW*gridH*2 little-endian f32 (x then y, row-major).
inline std::string encodeDfld(const DistortionField& f) {
    std::string out;
    out.reserve(20 + f.vectors.size() * 8);
    out += "DFLD";
    putU32(out, 1);
    putU32(out, uint32_t(f.gridW));
    putU32(out, uint32_t(f.gridH));
    putU32(out, uint32_t(f.blockSize));
    for (const Vec2& v : f.vectors) {
        putF32(out, float(v.x));
        putF32(out, float(v.y));
    }
    return out;
}

inline DistortionField decodeDfld(const std::string& blob) {
    if (blob.size() < 20 || blob.compare(0, 4, "DFLD") != 0)
        throw IoError("not a DFLD blob");
    size_t pos = 4;
    uint32_t version = getU32(blob, pos);
    if (version != 1) throw IoError("unsupported DFLD version");
    uint32_t gw = getU32(blob, pos), gh = getU32(blob, pos), bs = getU32(blob, pos);
    if (blob.size() != 20 + size_t(gw) * gh * 8) throw IoError("truncated DFLD blob");
    DistortionField f{int(gw), int(gh), int(bs)};
    for (Vec2& v : f.vectors) {
        v.x = getF32(blob, pos);
        v.y = getF32(blob, pos);
    }
    return f;
}

inline void saveDfld(const DistortionField& f, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path);
    std::string blob = encodeDfld(f);
    out.write(blob.data(), std::streamsize(blob.size()));
    if (!out) throw IoError("write failed: " + path);
}

inline DistortionField loadDfld(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read " + path);
    std::string blob((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return decodeDfld(blob);
}

}  // namespace distfield
