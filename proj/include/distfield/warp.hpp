#pragma once

#include <functional>
#include <utility>

#include "distfield/common.hpp"
#include "distfield/error.hpp"
#include "distfield/field.hpp"
#include "distfield/image.hpp"

namespace distfield {

// Bilinear sample of a dense vector raster with edge replication.
inline Vec2 sampleDense(const DenseField& f, double x, double y) {
    double cx = std::clamp(x, 0.0, double(f.width - 1));
    double cy = std::clamp(y, 0.0, double(f.height - 1));
    int x0 = int(cx), y0 = int(cy);
    if (x0 == f.width - 1 && f.width > 1) x0--;
    if (y0 == f.height - 1 && f.height > 1) y0--;
    double fx = cx - x0, fy = cy - y0;
    int x1 = std::min(x0 + 1, f.width - 1), y1 = std::min(y0 + 1, f.height - 1);
    return (1 - fy) * ((1 - fx) * f.at(x0, y0) + fx * f.at(x1, y0)) +
           fy * ((1 - fx) * f.at(x0, y1) + fx * f.at(x1, y1));
}

// Creates the distorted version of an image from a displacement map given on
// the distorted grid: D(p) = N(p + u(p)). `displacement` is any continuous
// displacement function (TPS closed form, upsampled raster, ...).
inline std::pair<GrayImage, FingerMask> applyFieldForward(
    const GrayImage& normal, const FingerMask& mask,
    const std::function<Vec2(double, double)>& displacement) {
    if (normal.width != mask.width || normal.height != mask.height)
        throw DimensionMismatch("applyFieldForward image/mask");
    GrayImage out(normal.width, normal.height);
    FingerMask outMask(normal.width, normal.height);
    parallelFor(normal.height, [&](int y) {
        for (int x = 0; x < normal.width; ++x) {
            Vec2 u = displacement(double(x), double(y));
            double sx = x + u.x, sy = y + u.y;
            out.at(x, y) = normal.sample(sx, sy, 0.0);
            outMask.at(x, y) = mask.inside(sx, sy) ? 1 : 0;
        }
    });
    return {std::move(out), std::move(outMask)};
}

// Rectification by backward warping. The field maps distorted positions
// toward the target, so each output pixel q reads the input at q - u*(q),
// where u* approximates the displacement pulled back to the output grid via
// two fixed-point refinements of u*(q) = u(q - u*(q)).
inline std::pair<GrayImage, FingerMask> rectify(const GrayImage& image, const FingerMask& mask,
                                                const DistortionField& field) {
    if (image.width != mask.width || image.height != mask.height)
        throw DimensionMismatch("rectify image/mask");
    int expectW = field.gridW * field.blockSize, expectH = field.gridH * field.blockSize;
    if (std::abs(image.width - expectW) >= field.blockSize ||
        std::abs(image.height - expectH) >= field.blockSize)
        throw DimensionMismatch("rectify field grid does not match image");

    DenseField u = upsampleField(field, image.width, image.height);
    GrayImage out(image.width, image.height);
    FingerMask outMask(image.width, image.height);
    parallelFor(image.height, [&](int y) {
        for (int x = 0; x < image.width; ++x) {
            Vec2 star = u.at(x, y);
            for (int it = 0; it < 2; ++it) star = sampleDense(u, x - star.x, y - star.y);
            double sx = x - star.x, sy = y - star.y;
            out.at(x, y) = image.sample(sx, sy, 0.0);
            outMask.at(x, y) = mask.inside(sx, sy) ? 1 : 0;
        }
    });
    return {std::move(out), std::move(outMask)};
}

// Solves p + u(p) = target for p by fixed-point iteration; used to push
// points (minutiae) through a forward displacement function.
inline Vec2 invertDisplacementAt(const std::function<Vec2(double, double)>& displacement,
                                 const Vec2& target, int iterations = 8) {
    Vec2 p = target - displacement(target.x, target.y);
    for (int it = 0; it < iterations; ++it) p = target - displacement(p.x, p.y);
    return p;
}

}  // namespace distfield
