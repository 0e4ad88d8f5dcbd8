#pragma once

#include <vector>

#include "distfield/common.hpp"
#include "distfield/error.hpp"
#include "distfield/image.hpp"
#include "distfield/minutiae.hpp"

namespace distfield {

// Rotation (angle phi) plus translation, pixels.
struct RigidTransform {
    double phi = 0.0;
    Vec2 t;

    Vec2 apply(const Vec2& p) const {
        double c = std::cos(phi), s = std::sin(phi);
        return {c * p.x - s * p.y + t.x, s * p.x + c * p.y + t.y};
    }
};

// Weighted least-squares rigid transform minimizing
//   sum_i w_i || (R * src_i + t) - dst_i ||^2.
// Closed form: weighted centroid subtraction, then the rotation angle from
// atan2 of the cross/dot terms of the weighted cross-covariance.
inline RigidTransform fitRigid(const MinutiaSet& src, const MinutiaSet& dst,
                               const std::vector<double>& weights) {
    if (src.size() != dst.size() || src.size() != weights.size())
        throw DimensionMismatch("fitRigid point/weight counts");
    if (src.size() < 2) throw DegenerateConfiguration("fitRigid needs >= 2 pairs");

    double wsum = 0.0;
    for (double w : weights) {
        if (w < 0.0) throw DegenerateConfiguration("negative weight");
        wsum += w;
    }
    if (wsum <= 0.0) throw DegenerateConfiguration("all weights zero");

    Vec2 cs{0, 0}, cd{0, 0};
    for (size_t i = 0; i < src.size(); ++i) {
        cs += weights[i] * src.points[i];
        cd += weights[i] * dst.points[i];
    }
    cs = cs * (1.0 / wsum);
    cd = cd * (1.0 / wsum);

    double dot = 0.0, cross = 0.0, spread = 0.0;
    for (size_t i = 0; i < src.size(); ++i) {
        Vec2 s = src.points[i] - cs;
        Vec2 d = dst.points[i] - cd;
        dot += weights[i] * s.dot(d);
        cross += weights[i] * s.cross(d);
        spread += weights[i] * (s.squaredNorm() + d.squaredNorm());
    }
    if (spread <= 1e-18 || (std::abs(dot) < 1e-18 && std::abs(cross) < 1e-18))
        throw DegenerateConfiguration("weighted points coincide");

    RigidTransform rt;
    rt.phi = std::atan2(cross, dot);
    double c = std::cos(rt.phi), s = std::sin(rt.phi);
    rt.t = {cd.x - (c * cs.x - s * cs.y), cd.y - (s * cs.x + c * cs.y)};
    return rt;
}

inline double rigidResidual(const MinutiaSet& src, const MinutiaSet& dst,
                            const std::vector<double>& weights, const RigidTransform& rt) {
    double r = 0.0;
    for (size_t i = 0; i < src.size(); ++i)
        r += weights[i] * (rt.apply(src.points[i]) - dst.points[i]).squaredNorm();
    return r;
}

// One sparse displacement sample: the displacement from a point on the
// distorted image toward its rigid-aligned normal-image partner.
struct SparseSample {
    Vec2 anchor;        // position on the distorted image (P_i^D)
    Vec2 displacement;  // (R * P_i^N + t) - P_i^D
};

// Rigidly aligns the normal minutiae onto the distorted ones (weights are
// mask-membership indicators of the distorted positions) and returns the
// residual non-rigid displacements. Pure rigid motion yields all zeros.
inline std::vector<SparseSample> sparseField(const MinutiaSet& normalPoints,
                                             const MinutiaSet& distortedPoints,
                                             const FingerMask& distortedMask) {
    if (normalPoints.size() != distortedPoints.size())
        throw DimensionMismatch("sparseField point counts");
    std::vector<double> weights(distortedPoints.size());
    for (size_t i = 0; i < distortedPoints.size(); ++i) {
        const Vec2& p = distortedPoints.points[i];
        weights[i] = distortedMask.inside(p.x, p.y) ? 1.0 : 0.0;
    }
    RigidTransform rt = fitRigid(normalPoints, distortedPoints, weights);
    std::vector<SparseSample> out(normalPoints.size());
    for (size_t i = 0; i < normalPoints.size(); ++i) {
        out[i].anchor = distortedPoints.points[i];
        out[i].displacement = rt.apply(normalPoints.points[i]) - distortedPoints.points[i];
    }
    return out;
}

}  // namespace distfield
