#pragma once

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <string>
#include <vector>

#include "distfield/common.hpp"
#include "distfield/error.hpp"
#include "distfield/field.hpp"
#include "distfield/image.hpp"

namespace distfield {

// L_reg^R: the evaluation variant of the regression loss, per-cell Euclidean
// norm instead of squared norm, averaged over in-mask cells.
inline double regErrorRoot(const DistortionField& est, const DistortionField& gt,
                           const GridMask& mask) {
    if (!est.sameGrid(gt) || mask.w != est.gridW || mask.h != est.gridH)
        throw GridMismatch("regErrorRoot grids");
    size_t n = mask.count();
    if (n == 0) throw EmptyMask("regErrorRoot");
    double sum = 0.0;
    for (int j = 0; j < est.gridH; ++j)
        for (int i = 0; i < est.gridW; ++i)
            if (mask.at(i, j)) sum += (est.at(i, j) - gt.at(i, j)).norm();
    return sum / double(n);
}

constexpr int kNumBins = 7;

inline std::array<double, kNumBins + 1> defaultBinEdges() {
    return {0.0, 3.0, 6.0, 9.0, 12.0, 15.0, 18.0, std::numeric_limits<double>::infinity()};
}

// Per-bin regression error, cells assigned by ground-truth distortion
// magnitude. Empty bins report count 0 and a NaN mean ("absent").
struct BinnedErrorReport {
    std::array<double, kNumBins + 1> binEdges{};
    std::array<double, kNumBins> perBinMeanError{};
    std::array<long, kNumBins> perBinCellCount{};
    double overallMeanError = 0.0;
};

inline BinnedErrorReport binByDistortion(const DistortionField& est, const DistortionField& gt,
                                         const GridMask& mask,
                                         const std::array<double, kNumBins + 1>& edges) {
    if (!est.sameGrid(gt) || mask.w != est.gridW || mask.h != est.gridH)
        throw GridMismatch("binByDistortion grids");
    if (mask.count() == 0) throw EmptyMask("binByDistortion");
    for (int i = 0; i < kNumBins; ++i)
        if (!(edges[i] < edges[i + 1])) throw BadEdges("bin edges must be strictly increasing");

    BinnedErrorReport report;
    report.binEdges = edges;
    std::array<double, kNumBins> sums{};
    double total = 0.0;
    long totalCount = 0;
    for (int j = 0; j < est.gridH; ++j) {
        for (int i = 0; i < est.gridW; ++i) {
            if (!mask.at(i, j)) continue;
            double mag = gt.at(i, j).norm();
            int bin = kNumBins - 1;
            for (int b = 0; b < kNumBins; ++b) {
                if (mag >= edges[b] && mag < edges[b + 1]) {
                    bin = b;
                    break;
                }
            }
            double err = (est.at(i, j) - gt.at(i, j)).norm();
            sums[size_t(bin)] += err;
            report.perBinCellCount[size_t(bin)]++;
            total += err;
            ++totalCount;
        }
    }
    for (int b = 0; b < kNumBins; ++b)
        report.perBinMeanError[size_t(b)] =
            report.perBinCellCount[size_t(b)] > 0
                ? sums[size_t(b)] / double(report.perBinCellCount[size_t(b)])
                : std::numeric_limits<double>::quiet_NaN();
    report.overallMeanError = total / double(totalCount);
    return report;
}

// Fig.-7-style wrong-vector rule: wrong iff the angle difference exceeds 45
// degrees or the relative difference norm exceeds 1.2. Cells where
// min(|est|, |gt|) < epsilonV are judged by the ratio criterion alone with
// the denominator clamped to epsilonV.
struct WrongVectorResult {
    GridMask wrong;       // 1 = wrong estimate (only meaningful inside mask)
    double wrongFraction = 0.0;
};

inline WrongVectorResult wrongVectorMask(const DistortionField& est, const DistortionField& gt,
                                         const GridMask& mask, double angleThresholdDeg = 45.0,
                                         double ratioThreshold = 1.2, double epsilonV = 0.5) {
    if (!est.sameGrid(gt) || mask.w != est.gridW || mask.h != est.gridH)
        throw GridMismatch("wrongVectorMask grids");
    size_t n = mask.count();
    if (n == 0) throw EmptyMask("wrongVectorMask");

    WrongVectorResult res;
    res.wrong = GridMask(est.gridW, est.gridH);
    size_t wrongCount = 0;
    for (int j = 0; j < est.gridH; ++j) {
        for (int i = 0; i < est.gridW; ++i) {
            if (!mask.at(i, j)) continue;
            Vec2 ve = est.at(i, j), vg = gt.at(i, j);
            double ne = ve.norm(), ng = vg.norm();
            double minNorm = std::min(ne, ng);
            bool wrong;
            double ratio = (ve - vg).norm() / std::max(minNorm, epsilonV);
            if (minNorm < epsilonV) {
                wrong = ratio > ratioThreshold;
            } else {
                double cosang = std::clamp(ve.dot(vg) / (ne * ng), -1.0, 1.0);
                double angleDeg = std::acos(cosang) * 180.0 / kPi;  // wrapped to [0, 180]
                wrong = angleDeg > angleThresholdDeg || ratio > ratioThreshold;
            }
            if (wrong) {
                res.wrong.at(i, j) = 1;
                ++wrongCount;
            }
        }
    }
    res.wrongFraction = double(wrongCount) / double(n);
    return res;
}

// Matcher proxy: normalized cross-correlation over the intersection mask
// eroded by 3 blocks. Flags (and scores 0) overlaps below 100 px.
struct ProxyScore {
    double score = 0.0;
    bool emptyOverlap = false;
};

inline ProxyScore proxyMatchScore(const GrayImage& a, const GrayImage& b, const FingerMask& maskA,
                                  const FingerMask& maskB, int blockSize = kBlockSize) {
    if (!a.sameSize(b) || a.width != maskA.width || a.height != maskA.height ||
        maskA.width != maskB.width || maskA.height != maskB.height)
        throw DimensionMismatch("proxyMatchScore inputs");
    FingerMask inter(maskA.width, maskA.height);
    for (size_t i = 0; i < inter.bits.size(); ++i)
        inter.bits[i] = (maskA.bits[i] && maskB.bits[i]) ? 1 : 0;
    inter = erodeMask(inter, 3 * blockSize);

    size_t n = inter.count();
    if (n < 100) return {0.0, true};

    double meanA = 0.0, meanB = 0.0;
    for (size_t i = 0; i < inter.bits.size(); ++i) {
        if (!inter.bits[i]) continue;
        meanA += a.data[i];
        meanB += b.data[i];
    }
    meanA /= double(n);
    meanB /= double(n);
    double cov = 0.0, varA = 0.0, varB = 0.0;
    for (size_t i = 0; i < inter.bits.size(); ++i) {
        if (!inter.bits[i]) continue;
        double da = a.data[i] - meanA, db = b.data[i] - meanB;
        cov += da * db;
        varA += da * da;
        varB += db * db;
    }
    if (varA <= 0.0 || varB <= 0.0) return {0.0, true};
    return {cov / std::sqrt(varA * varB), false};
}

// ---------------------------------------------------------------------------
// Report emission
// ---------------------------------------------------------------------------

struct SampleReport {
    uint64_t seed = 0;
    double regRoot = 0.0;
    BinnedErrorReport bins;
    double wrongFraction = 0.0;
    double nccBefore = 0.0;
    double nccAfter = 0.0;
    bool emptyFlag = false;  // any EmptyMask/EmptyOverlap condition hit
};

inline std::string formatG17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

// Writes summary.csv (one row per sample) and bins.csv (edge table plus
// cell-weighted aggregate per bin). Absent per-bin means are empty cells.
inline void emitReport(const std::vector<SampleReport>& reports,
                       const std::array<double, kNumBins + 1>& edges, const std::string& outDir) {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(outDir, ec);

    std::ofstream summary(fs::path(outDir) / "summary.csv");
    if (!summary) throw IoError("cannot write summary.csv in " + outDir);
    summary << "seed,reg_error_root";
    for (int b = 1; b <= kNumBins; ++b) summary << ",bin" << b << "_mean";
    summary << ",wrong_fraction,ncc_before,ncc_after,empty_flag\n";
    for (const SampleReport& r : reports) {
        summary << r.seed << "," << formatG17(r.regRoot);
        for (int b = 0; b < kNumBins; ++b) {
            summary << ",";
            if (r.bins.perBinCellCount[size_t(b)] > 0)
                summary << formatG17(r.bins.perBinMeanError[size_t(b)]);
        }
        summary << "," << formatG17(r.wrongFraction) << "," << formatG17(r.nccBefore) << ","
                << formatG17(r.nccAfter) << "," << (r.emptyFlag ? 1 : 0) << "\n";
    }
    if (!summary) throw IoError("summary.csv write failed");

    std::ofstream bins(fs::path(outDir) / "bins.csv");
    if (!bins) throw IoError("cannot write bins.csv in " + outDir);
    bins << "bin,edge_lo,edge_hi,cell_count,mean_error\n";
    for (int b = 0; b < kNumBins; ++b) {
        double sum = 0.0;
        long count = 0;
        for (const SampleReport& r : reports) {
            if (r.bins.perBinCellCount[size_t(b)] > 0) {
                sum += r.bins.perBinMeanError[size_t(b)] * double(r.bins.perBinCellCount[size_t(b)]);
                count += r.bins.perBinCellCount[size_t(b)];
            }
        }
        bins << (b + 1) << "," << formatG17(edges[size_t(b)]) << ","
             << formatG17(edges[size_t(b) + 1]) << "," << count << ",";
        if (count > 0) bins << formatG17(sum / double(count));
        bins << "\n";
    }
    if (!bins) throw IoError("bins.csv write failed");
}

}  // namespace distfield
