#pragma once

#include "distfield/error.hpp"
#include "distfield/field.hpp"
#include "distfield/image.hpp"

namespace distfield {

struct LossBreakdown {
    double reg = 0.0;
    double smo = 0.0;
    double total = 0.0;
    double lambdaSmo = 1.0;
};

// L_reg: mean over in-mask grid cells of the squared displacement error,
// both components of a cell contributing to the same cell count.
inline double lossReg(const DistortionField& est, const DistortionField& gt,
                      const GridMask& mask) {
    if (!est.sameGrid(gt) || mask.w != est.gridW || mask.h != est.gridH)
        throw GridMismatch("lossReg grids");
    size_t n = mask.count();
    if (n == 0) throw EmptyMask("lossReg");
    double sum = 0.0;
    for (int j = 0; j < est.gridH; ++j)
        for (int i = 0; i < est.gridW; ++i)
            if (mask.at(i, j)) sum += (est.at(i, j) - gt.at(i, j)).squaredNorm();
    return sum / double(n);
}

// L_smo: mean squared forward-difference gradient of both channels, replicate
// boundary (the difference past the last row/column is zero), averaged over
// all h*w grid cells.
inline double lossSmo(const DistortionField& est) {
    if (est.gridW < 2 || est.gridH < 2) throw GridTooSmall("lossSmo needs >= 2x2");
    double sum = 0.0;
    for (int j = 0; j < est.gridH; ++j) {
        for (int i = 0; i < est.gridW; ++i) {
            if (i + 1 < est.gridW) sum += (est.at(i + 1, j) - est.at(i, j)).squaredNorm();
            if (j + 1 < est.gridH) sum += (est.at(i, j + 1) - est.at(i, j)).squaredNorm();
        }
    }
    return sum / double(est.gridW * est.gridH);
}

inline LossBreakdown lossTotal(const DistortionField& est, const DistortionField& gt,
                               const GridMask& mask, double lambdaSmo = 1.0) {
    LossBreakdown lb;
    lb.lambdaSmo = lambdaSmo;
    lb.reg = lossReg(est, gt, mask);
    lb.smo = lossSmo(est);
    lb.total = lb.reg + lambdaSmo * lb.smo;
    return lb;
}

// d(lossTotal)/d(est), same grid layout as the field.
inline DistortionField lossTotalGrad(const DistortionField& est, const DistortionField& gt,
                                     const GridMask& mask, double lambdaSmo = 1.0) {
    if (!est.sameGrid(gt) || mask.w != est.gridW || mask.h != est.gridH)
        throw GridMismatch("lossTotalGrad grids");
    size_t n = mask.count();
    if (n == 0) throw EmptyMask("lossTotalGrad");
    if (est.gridW < 2 || est.gridH < 2) throw GridTooSmall("lossTotalGrad");

    DistortionField g(est.gridW, est.gridH, est.blockSize);
    double wReg = 2.0 / double(n);
    for (int j = 0; j < est.gridH; ++j)
        for (int i = 0; i < est.gridW; ++i)
            if (mask.at(i, j)) g.at(i, j) = wReg * (est.at(i, j) - gt.at(i, j));

    double wSmo = 2.0 * lambdaSmo / double(est.gridW * est.gridH);
    for (int j = 0; j < est.gridH; ++j) {
        for (int i = 0; i < est.gridW; ++i) {
            if (i + 1 < est.gridW) {
                Vec2 d = wSmo * (est.at(i + 1, j) - est.at(i, j));
                g.at(i + 1, j) += d;
                g.at(i, j) -= d;
            }
            if (j + 1 < est.gridH) {
                Vec2 d = wSmo * (est.at(i, j + 1) - est.at(i, j));
                g.at(i, j + 1) += d;
                g.at(i, j) -= d;
            }
        }
    }
    return g;
}

}  // namespace distfield
