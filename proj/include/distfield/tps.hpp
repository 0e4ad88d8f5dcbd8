#pragma once

#include <Eigen/Dense>
#include <vector>

#include "distfield/common.hpp"
#include "distfield/error.hpp"
#include "distfield/field.hpp"

namespace distfield {

// Thin-plate spline kernel U(r) = r^2 log r, with U(0) = 0.
inline double tpsKernel(double r2) {
    if (r2 <= 0.0) return 0.0;
    return 0.5 * r2 * std::log(r2);  // r^2 log r = r^2 * log(r^2) / 2
}

// One thin-plate spline per displacement channel over shared anchors:
//   f(p) = a0 + a1*x + a2*y + sum_i w_i * U(|p - anchor_i|)
// Fitted and evaluated in centered/scaled coordinates: the kernel term the
// rescaling introduces collapses into the affine part under the TPS side
// conditions, so the interpolant is unchanged while the system conditioning
// no longer degrades with anchor count and image size.
struct ThinPlateSpline {
    std::vector<Vec2> anchors;        // normalized coordinates
    std::vector<Vec2> kernelWeights;  // w_i, one 2-vector per anchor
    Vec2 affine[3];                   // a0, a1 (x slope), a2 (y slope)
    Vec2 center;                      // coordinate normalization
    double scale = 1.0;

    Vec2 normalize(const Vec2& p) const { return (p - center) * (1.0 / scale); }

    Vec2 eval(const Vec2& p) const {
        Vec2 q = normalize(p);
        Vec2 out = affine[0] + q.x * affine[1] + q.y * affine[2];
        for (size_t i = 0; i < anchors.size(); ++i)
            out += tpsKernel((q - anchors[i]).squaredNorm()) * kernelWeights[i];
        return out;
    }
};

// Exact interpolation for regularization 0; larger values trade fidelity at
// the anchors for smoothness (useful with noisy minutiae). Regularization is
// in pixel units regardless of the internal coordinate normalization.
inline ThinPlateSpline tpsFit(const std::vector<Vec2>& anchors, const std::vector<Vec2>& values,
                              double regularization = 0.0) {
    size_t n = anchors.size();
    if (n != values.size()) throw DimensionMismatch("tpsFit anchors/values");
    if (n < 3) throw SingularSystem("tpsFit needs >= 3 anchors");
    if (regularization < 0.0) throw SingularSystem("negative regularization");
    for (size_t i = 0; i < n; ++i)
        for (size_t j = i + 1; j < n; ++j)
            if ((anchors[i] - anchors[j]).squaredNorm() <= 0.0)
                throw SingularSystem("duplicate anchors");

    ThinPlateSpline tps;
    tps.center = {0, 0};
    for (const Vec2& a : anchors) tps.center += a;
    tps.center = tps.center * (1.0 / double(n));
    double rms = 0.0;
    for (const Vec2& a : anchors) rms += (a - tps.center).squaredNorm();
    rms = std::sqrt(rms / double(n));
    tps.scale = rms > 0.0 ? rms : 1.0;
    tps.anchors.resize(n);
    for (size_t i = 0; i < n; ++i) tps.anchors[i] = (anchors[i] - tps.center) * (1.0 / tps.scale);

    double lambda = regularization / (tps.scale * tps.scale);
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n + 3, n + 3);
    Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(n + 3, 2);
    for (size_t i = 0; i < n; ++i) {
        for (size_t j = 0; j < n; ++j)
            A(i, j) = tpsKernel((tps.anchors[i] - tps.anchors[j]).squaredNorm());
        A(i, i) += lambda;
        A(i, n) = A(n, i) = 1.0;
        A(i, n + 1) = A(n + 1, i) = tps.anchors[i].x;
        A(i, n + 2) = A(n + 2, i) = tps.anchors[i].y;
        rhs(i, 0) = values[i].x;
        rhs(i, 1) = values[i].y;
    }

    Eigen::FullPivLU<Eigen::MatrixXd> lu(A);
    if (!lu.isInvertible())
        throw SingularSystem("collinear or otherwise degenerate anchor set");
    Eigen::MatrixXd sol = lu.solve(rhs);

    tps.kernelWeights.resize(n);
    for (size_t i = 0; i < n; ++i) tps.kernelWeights[i] = {sol(i, 0), sol(i, 1)};
    for (int k = 0; k < 3; ++k) tps.affine[k] = {sol(n + k, 0), sol(n + k, 1)};
    return tps;
}

// Evaluates the spline at every block center ((i+0.5)*bs, (j+0.5)*bs).
inline DistortionField tpsEvalDense(const ThinPlateSpline& tps, int gridW, int gridH,
                                    int blockSize = kBlockSize) {
    DistortionField field(gridW, gridH, blockSize);
    parallelFor(gridH, [&](int j) {
        for (int i = 0; i < gridW; ++i) field.at(i, j) = tps.eval(field.anchor(i, j));
    });
    return field;
}

// Full-resolution evaluation, one vector per pixel.
inline DenseField tpsEvalRaster(const ThinPlateSpline& tps, int width, int height) {
    DenseField out(width, height);
    parallelFor(height, [&](int y) {
        for (int x = 0; x < width; ++x) out.at(x, y) = tps.eval({double(x), double(y)});
    });
    return out;
}

}  // namespace distfield
