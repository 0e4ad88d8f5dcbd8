// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. Criterion 5/6 share one desk-scale training run; its report is
// emitted to ./acceptance_report regardless of the outcome.

#include <distfield/distfield.hpp>

#include <chrono>
#include <cstdarg>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "oracles.hpp"

using namespace distfield;
using Clock = std::chrono::steady_clock;

namespace {

int g_failures = 0;

void criterion(int idx, const char* name, bool pass, const std::string& detail) {
    std::printf("[%s] C%d %s: %s\n", pass ? "PASS" : "FAIL", idx, name, detail.c_str());
    std::fflush(stdout);
    if (!pass) ++g_failures;
}

double seconds(Clock::time_point a, Clock::time_point b) {
    return std::chrono::duration<double>(b - a).count();
}

std::string fmt(const char* f, ...) {
    char buf[512];
    va_list ap;
    va_start(ap, f);
    std::vsnprintf(buf, sizeof buf, f, ap);
    va_end(ap);
    return buf;
}

// --- C1: geometry -----------------------------------------------------------

void c1Geometry() {
    auto t0 = Clock::now();
    bool pass = true;
    std::string why;

    // TPS exact interpolation, 100 random configurations of 10-60 anchors
    Rng rng(1001);
    double worstTps = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        int n = 10 + int(rng.below(51));
        std::vector<Vec2> anchors, values;
        while (int(anchors.size()) < n) {
            Vec2 p{rng.uniform(0, 128), rng.uniform(0, 128)};
            bool clash = false;
            for (const Vec2& q : anchors)
                if ((p - q).squaredNorm() < 1.0) clash = true;
            if (clash) continue;
            anchors.push_back(p);
            values.push_back({rng.uniform(-10, 10), rng.uniform(-10, 10)});
        }
        ThinPlateSpline tps = tpsFit(anchors, values, 0.0);
        for (size_t i = 0; i < anchors.size(); ++i)
            worstTps = std::max(worstTps, (tps.eval(anchors[i]) - values[i]).norm());
    }
    if (worstTps > 1e-6) { pass = false; why += " tps=" + fmt("%.2e", worstTps); }

    // fit_rigid recovers planted transforms
    double worstPhi = 0.0;
    for (int trial = 0; trial < 50; ++trial) {
        MinutiaSet src;
        int n = 3 + int(rng.below(20));
        for (int i = 0; i < n; ++i) src.add(i, rng.uniform(0, 128), rng.uniform(0, 128));
        RigidTransform planted{rng.uniform(-kPi * 0.9, kPi * 0.9),
                               {rng.uniform(-20, 20), rng.uniform(-20, 20)}};
        MinutiaSet dst;
        for (int i = 0; i < n; ++i) {
            Vec2 p = planted.apply(src.points[i]);
            dst.add(i, p.x, p.y);
        }
        RigidTransform got = fitRigid(src, dst, std::vector<double>(n, 1.0));
        worstPhi = std::max(worstPhi, std::abs(got.phi - planted.phi));
    }
    if (worstPhi > 1e-9) { pass = false; why += " phi=" + fmt("%.2e", worstPhi); }

    // sparse_field vanishes under pure rigid motion
    double worstSparse = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
        MinutiaSet normal;
        int n = 5 + int(rng.below(30));
        for (int i = 0; i < n; ++i) normal.add(i, rng.uniform(20, 108), rng.uniform(20, 108));
        RigidTransform g{rng.uniform(-0.5, 0.5), {rng.uniform(-10, 10), rng.uniform(-10, 10)}};
        MinutiaSet distorted;
        for (int i = 0; i < n; ++i) {
            Vec2 p = g.apply(normal.points[i]);
            distorted.add(i, p.x, p.y);
        }
        FingerMask mask(128, 128, 1);
        for (const SparseSample& s : sparseField(normal, distorted, mask))
            worstSparse = std::max(worstSparse, s.displacement.norm());
    }
    if (worstSparse > 1e-6) { pass = false; why += " sparse=" + fmt("%.2e", worstSparse); }

    // remove_dc idempotence
    double worstIdem = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        DistortionField f(8, 8, 16);
        for (Vec2& v : f.vectors) v = {rng.uniform(-15, 15), rng.uniform(-15, 15)};
        GridMask mask(8, 8);
        for (uint8_t& b : mask.on) b = rng.uniform() < 0.7 ? 1 : 0;
        if (mask.count() == 0) mask.at(4, 4) = 1;
        DistortionField once = removeDc(f, mask);
        DistortionField twice = removeDc(once, mask);
        for (size_t i = 0; i < once.vectors.size(); ++i)
            worstIdem = std::max(worstIdem, (once.vectors[i] - twice.vectors[i]).norm());
    }
    if (worstIdem > 1e-9) { pass = false; why += " idem=" + fmt("%.2e", worstIdem); }

    double dt = seconds(t0, Clock::now());
    if (dt >= 10.0) { pass = false; why += fmt(" runtime=%.1fs", dt); }
    criterion(1, "geometry suite", pass,
              fmt("tps %.1e px, phi %.1e rad, sparse %.1e px, idem %.1e, %.1f s", worstTps,
                  worstPhi, worstSparse, worstIdem, dt) + why);
}

// --- C2: gradient check ------------------------------------------------------

void c2GradientCheck() {
    auto t0 = Clock::now();
    NetworkConfig cfg;
    cfg.inputSize = 32;
    cfg.baseChannels = 4;
    cfg.numResidualBlocks = 1;
    cfg.pyramidDilations = {1, 2};
    cfg.includeGapBranch = true;
    Network net(cfg);
    net.initParams(7);
    // Operating point with every rectifier decisively on or off: central
    // differences at the pinned eps=1e-3 measure the smooth local derivative
    // only when no unit argument crosses zero inside the sweep.
    Rng r2(11);
    for (const auto& e : net.params.entries) {
        double* p = net.params.values.data() + e.offset;
        if (e.shape.size() == 4) continue;
        if (e.name.size() >= 2 && e.name.compare(e.name.size() - 2, 2, ".g") == 0)
            for (size_t i = 0; i < e.count; ++i) p[i] = r2.uniform(0.8, 1.2);
        else if (e.name.find(".norm") != std::string::npos)
            for (size_t i = 0; i < e.count; ++i) p[i] = (i % 4 == 0) ? -6.0 : 6.0;
        else
            for (size_t i = 0; i < e.count; ++i) p[i] = r2.uniform(-0.3, 0.3);
    }

    GrayImage img(32, 32);
    FingerMask mask(32, 32);
    for (int y = 0; y < 32; ++y)
        for (int x = 0; x < 32; ++x) {
            img.at(x, y) = 0.5 + 0.5 * std::sin(0.7 * x + 0.3 * y + 0.0125 * x * y);
            double dx = x - 15.5, dy = y - 15.5;
            mask.at(x, y) = (dx * dx + dy * dy < 15 * 15) ? 1 : 0;
        }
    GrayImage norm = normalizedView(img, mask);
    DistortionField gt(2, 2, 16);
    gt.at(0, 0) = {1.0, -2.0};
    gt.at(1, 0) = {0.5, 0.25};
    gt.at(0, 1) = {-1.0, 0.0};
    gt.at(1, 1) = {2.0, 1.0};

    net.params.zeroGrads();
    net.lossAndGradients(norm, mask, gt, 1.0);
    std::vector<double> analytic = net.params.grads;

    const double eps = 1e-3;
    double worst = 0.0;
    std::string worstName = "-";
    for (const auto& e : net.params.entries) {
        double num = 0.0, denA = 0.0, denN = 0.0;
        for (size_t k = 0; k < e.count; ++k) {
            size_t i = e.offset + k;
            double save = net.params.values[i];
            net.params.values[i] = save + eps;
            double lp = net.lossAndGradients(norm, mask, gt, 1.0).total;
            net.params.values[i] = save - eps;
            double lm = net.lossAndGradients(norm, mask, gt, 1.0).total;
            net.params.values[i] = save;
            double fd = (lp - lm) / (2 * eps);
            num += (analytic[i] - fd) * (analytic[i] - fd);
            denA += analytic[i] * analytic[i];
            denN += fd * fd;
        }
        double rel = std::sqrt(num) / std::max(std::sqrt(std::max(denA, denN)), 1e-12);
        if (rel > worst) {
            worst = rel;
            worstName = e.name;
        }
    }
    double dt = seconds(t0, Clock::now());
    bool pass = worst <= 1e-3 && dt < 120.0;
    criterion(2, "gradient check", pass,
              fmt("worst group rel %.2e (%s), %zu params, eps 1e-3, %.0f s", worst,
                  worstName.c_str(), net.parameterCount(), dt));
}

// --- C3: loss contracts ------------------------------------------------------

void c3LossContracts() {
    Rng rng(3003);
    double worstReg = 0.0, worstSmo = 0.0, worstTotal = 0.0;
    for (int trial = 0; trial < 50; ++trial) {
        DistortionField est(8, 8, 16), gt(8, 8, 16);
        for (Vec2& v : est.vectors) v = {rng.uniform(-10, 10), rng.uniform(-10, 10)};
        for (Vec2& v : gt.vectors) v = {rng.uniform(-10, 10), rng.uniform(-10, 10)};
        GridMask mask(8, 8);
        for (uint8_t& b : mask.on) b = rng.uniform() < 0.6 ? 1 : 0;
        if (mask.count() == 0) mask.at(0, 0) = 1;
        worstReg = std::max(worstReg,
                            std::abs(lossReg(est, gt, mask) - oracles::naiveLossReg(est, gt, mask)));
        worstSmo = std::max(worstSmo, std::abs(lossSmo(est) - oracles::naiveLossSmo(est)));
        LossBreakdown lb = lossTotal(est, gt, mask, 1.0);
        worstTotal = std::max(worstTotal, std::abs(lb.total - (lb.reg + 1.0 * lb.smo)));
    }
    bool pass = worstReg <= 1e-12 && worstSmo <= 1e-12 && worstTotal <= 1e-12;
    criterion(3, "loss contracts", pass,
              fmt("reg vs oracle %.1e, smo vs oracle %.1e, total-identity %.1e, lambda 1.0",
                  worstReg, worstSmo, worstTotal));
}

// --- C4: warp/rectify round trip ---------------------------------------------

void c4WarpRectify() {
    auto t0 = Clock::now();
    int passCount = 0;
    double worst = 1.0;
    const int cases = 50;
    std::vector<double> scores(cases);
    parallelFor(cases, [&](int i) {
        uint64_t seed = 4000 + uint64_t(i);
        Rng rng(seed);
        SynthFingerprint fp = synthFingerprint(seed, 256, 256);
        DistortionPrototype proto;
        proto.kind = DistortionKind(rng.below(kDistortionKindCount));
        proto.falloff = rng.uniform(64, 110);
        proto.magnitude = std::min(rng.uniform(5.0, 20.0), 0.3 * proto.falloff);
        proto.center = {rng.uniform(96, 160), rng.uniform(96, 160)};
        DistortionField field = synthDistortion(proto, 16, 16);
        DenseField dense = upsampleField(field, 256, 256);
        auto [distorted, distortedMask] = applyFieldForward(
            fp.image, fp.mask, [&](double x, double y) { return sampleDense(dense, x, y); });
        auto [rect, rectMask] = rectify(distorted, distortedMask, field);
        ProxyScore ncc = proxyMatchScore(rect, fp.image, rectMask, fp.mask);
        scores[size_t(i)] = ncc.emptyOverlap ? -1.0 : ncc.score;
    });
    for (double s : scores) {
        worst = std::min(worst, s);
        if (s >= 0.95) ++passCount;
    }
    bool pass = passCount == cases;
    criterion(4, "warp/rectify round trip", pass,
              fmt("%d/%d cases NCC >= 0.95, worst %.4f, %.0f s", passCount, cases, worst,
                  seconds(t0, Clock::now())));
}

// --- C5 + C6: desk-scale learning and Fig.-5-style comparison -----------------

NetworkConfig deskConfig() {
    NetworkConfig cfg;
    cfg.inputSize = 128;
    cfg.baseChannels = 16;
    cfg.numResidualBlocks = 3;
    cfg.pyramidDilations = {1, 2, 4};
    cfg.includeGapBranch = true;
    return cfg;
}

void c5Learning() {
    auto t0 = Clock::now();

    // overfit probe: 4 samples, 500 epochs, train error <= 1 px
    std::vector<TrainingSample> tiny(4);
    parallelFor(4, [&](int i) { tiny[size_t(i)] = generateSample(uint64_t(i), 128).sample; });
    NetworkConfig overCfg;
    overCfg.inputSize = 128;
    overCfg.baseChannels = 8;
    overCfg.numResidualBlocks = 2;
    overCfg.pyramidDilations = {1, 2};
    Network overNet(overCfg);
    TrainOptions overOpts;
    overOpts.epochs = 500;
    overOpts.seed = 0;
    overOpts.batchSize = 4;
    overOpts.valFraction = 0.0;
    train(overNet, tiny, overOpts);
    double overfitErr = meanRegRoot(overNet, tiny);

    // desk run: 512 samples at 128x128, 50 epochs, seed 0
    Network net(deskConfig());
    std::vector<TrainingSample> data(512);
    parallelFor(512, [&](int i) { data[size_t(i)] = generateSample(uint64_t(i), 128).sample; });
    TrainOptions opts;
    opts.epochs = 50;
    opts.seed = 0;
    opts.batchSize = 4;
    opts.valFraction = 0.1;
    TrainResult result = train(net, data, opts);
    size_t trainCount = 512 - size_t(std::llround(512 * opts.valFraction));

    std::vector<TrainingSample> valSet(data.begin() + trainCount, data.end());
    double zeroBase = 0.0;
    for (const TrainingSample& s : valSet) {
        DistortionField zero(s.gtField.gridW, s.gtField.gridH, s.gtField.blockSize);
        zeroBase += regErrorRoot(zero, s.gtField, maskToGrid(s.mask, s.gtField.blockSize));
    }
    zeroBase /= double(valSet.size());
    double heldOut = meanRegRoot(net, valSet);

    // soft translation-equivariance probe (reported, not asserted): shift one
    // held-out sample by exactly one block and compare interior L_reg
    double equivChange = 0.0;
    {
        const TrainingSample& s = valSet.front();
        int S = s.distorted.width, B = s.gtField.blockSize;
        GrayImage shiftedImg(S, S, 0.0);
        FingerMask shiftedMask(S, S, 0);
        for (int y = 0; y < S; ++y)
            for (int x = B; x < S; ++x) {
                shiftedImg.at(x, y) = s.distorted.at(x - B, y);
                shiftedMask.at(x, y) = s.mask.at(x - B, y);
            }
        int G = s.gtField.gridW;
        DistortionField shiftedGt(G, G, B);
        GridMask gm = maskToGrid(s.mask, B);
        GridMask interior(G, G, 0);
        for (int j = 0; j < G; ++j)
            for (int i = 1; i < G; ++i) {
                shiftedGt.at(i, j) = s.gtField.at(i - 1, j);
                interior.at(i, j) = gm.at(i - 1, j);
            }
        interior = erodeGridMask(interior, 1);
        if (interior.count() > 0) {
            DistortionField estBase = net.forward(normalizedView(s.distorted, s.mask), s.mask);
            DistortionField estBaseShift(G, G, B);
            for (int j = 0; j < G; ++j)
                for (int i = 1; i < G; ++i) estBaseShift.at(i, j) = estBase.at(i - 1, j);
            DistortionField estShift =
                net.forward(normalizedView(shiftedImg, shiftedMask), shiftedMask);
            double a = lossReg(estBaseShift, shiftedGt, interior);
            double b = lossReg(estShift, shiftedGt, interior);
            equivChange = std::abs(a - b) / std::max(a, 1e-9);
        }
    }

    double dt = seconds(t0, Clock::now());
    bool pass = heldOut <= 0.5 * zeroBase && overfitErr <= 1.0 && dt < 1800.0;
    criterion(5, "desk-scale learning", pass,
              fmt("held-out L_reg^R %.3f px vs zero baseline %.3f px (ratio %.3f <= 0.5), "
                  "overfit %.3f px <= 1.0, best epoch %d, %.1f min; one-block shift probe: "
                  "interior L_reg changes %.0f%% (reported only)",
                  heldOut, zeroBase, heldOut / zeroBase, overfitErr, result.bestEpoch, dt / 60.0,
                  100.0 * equivChange));
}

void c6BinComparison() {
    // C6 trains its own regressor (the 50-epoch protocol above is pinned to
    // criterion 5; this comparison only fixes k = 8 and the bin protocol)
    Network net(deskConfig());
    std::vector<TrainingSample> data(1024);
    parallelFor(1024, [&](int i) { data[size_t(i)] = generateSample(uint64_t(i), 128).sample; });
    TrainOptions opts;
    opts.epochs = 50;
    opts.seed = 0;
    opts.batchSize = 4;
    opts.valFraction = 0.05;
    train(net, data, opts);
    size_t trainCount = 1024 - size_t(std::llround(1024 * opts.valFraction));

    std::vector<DistortionField> trainFields;
    for (size_t i = 0; i < trainCount; ++i) trainFields.push_back(data[i].gtField);
    PcaModel pca = pcaFit(trainFields, 8);

    // dedicated held-out set with mixed prototypes
    std::vector<TrainingSample> evalSet(256);
    parallelFor(256, [&](int i) {
        evalSet[size_t(i)] = generateSample(100000 + uint64_t(i), 128).sample;
    });

    std::array<double, kNumBins + 1> edges = defaultBinEdges();
    std::array<double, kNumBins> netSum{}, pcaSum{};
    std::array<long, kNumBins> cellCount{};
    std::vector<SampleReport> reports;
    int nccPairs = 0, nccImproved = 0;
    for (size_t i = 0; i < evalSet.size(); ++i) {
        const TrainingSample& s = evalSet[i];
        GridMask gm = maskToGrid(s.mask, s.gtField.blockSize);
        GrayImage norm = normalizedView(s.distorted, s.mask);
        DistortionField est = net.forward(norm, s.mask);
        DistortionField oracle = pcaOracleRectify(pca, s.gtField);
        BinnedErrorReport bn = binByDistortion(est, s.gtField, gm, edges);
        BinnedErrorReport bp = binByDistortion(oracle, s.gtField, gm, edges);
        for (int b = 0; b < kNumBins; ++b) {
            if (bn.perBinCellCount[size_t(b)] > 0) {
                netSum[size_t(b)] += bn.perBinMeanError[size_t(b)] * bn.perBinCellCount[size_t(b)];
                pcaSum[size_t(b)] += bp.perBinMeanError[size_t(b)] * bp.perBinCellCount[size_t(b)];
                cellCount[size_t(b)] += bn.perBinCellCount[size_t(b)];
            }
        }

        SampleReport r;
        r.seed = 100000 + i;
        r.regRoot = regErrorRoot(est, s.gtField, gm);
        r.bins = bn;
        r.wrongFraction = wrongVectorMask(est, s.gtField, gm).wrongFraction;
        auto [rect, rectMask] = rectify(s.distorted, s.mask, est);
        FingerMask normalMask = segmentFingerprint(s.normal);
        ProxyScore before = proxyMatchScore(s.distorted, s.normal, s.mask, normalMask);
        ProxyScore after = proxyMatchScore(rect, s.normal, rectMask, normalMask);
        r.nccBefore = before.score;
        r.nccAfter = after.score;
        r.emptyFlag = before.emptyOverlap || after.emptyOverlap;
        if (!r.emptyFlag) {
            ++nccPairs;
            if (after.score > before.score) ++nccImproved;
        }
        reports.push_back(r);
    }

    // emit the report regardless of the comparison outcome
    std::string outDir = "acceptance_report";
    emitReport(reports, edges, outDir);
    {
        std::ofstream f(std::filesystem::path(outDir) / "bins_pca.csv");
        f << "bin,edge_lo,edge_hi,cell_count,net_mean_error,pca_oracle_mean_error\n";
        for (int b = 0; b < kNumBins; ++b) {
            f << (b + 1) << "," << formatG17(edges[size_t(b)]) << ","
              << formatG17(edges[size_t(b) + 1]) << "," << cellCount[size_t(b)];
            if (cellCount[size_t(b)] > 0)
                f << "," << formatG17(netSum[size_t(b)] / cellCount[size_t(b)]) << ","
                  << formatG17(pcaSum[size_t(b)] / cellCount[size_t(b)]);
            else
                f << ",,";
            f << "\n";
        }
    }

    // top two comparison-grade distortion bins (>= 20 held-out cells; the
    // fold-free desk-scale warps leave the 15-18 and 18+ px bins empty)
    const long kMinCells = 20;
    bool pass = true;
    std::string detail;
    int checked = 0;
    for (int b = kNumBins - 1; b >= 0 && checked < 2; --b) {
        if (cellCount[size_t(b)] < kMinCells) continue;
        ++checked;
        double netMean = netSum[size_t(b)] / cellCount[size_t(b)];
        double pcaMean = pcaSum[size_t(b)] / cellCount[size_t(b)];
        pass = pass && netMean < pcaMean;
        detail += fmt("bin%d [%g,%g): net %.3f vs pca-oracle %.3f (%ld cells); ", b + 1,
                      edges[size_t(b)], edges[size_t(b) + 1], netMean, pcaMean,
                      cellCount[size_t(b)]);
    }
    pass = pass && checked == 2;
    detail += fmt("NCC improved on %d/%d pairs; report in ./%s", nccImproved, nccPairs,
                  outDir.c_str());
    criterion(6, "dense vs PCA oracle on large distortions", pass, detail);
}

// --- C7: augmentation invariance ----------------------------------------------

void c7Augmentation() {
    Rng rng(7007);
    double worst = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
        DistortionField est(8, 8, 16), gt(8, 8, 16);
        for (Vec2& v : est.vectors) v = {rng.uniform(-10, 10), rng.uniform(-10, 10)};
        for (Vec2& v : gt.vectors) v = {rng.uniform(-10, 10), rng.uniform(-10, 10)};
        GridMask mask(8, 8);
        for (uint8_t& b : mask.on) b = rng.uniform() < 0.6 ? 1 : 0;
        if (mask.count() == 0) mask.at(3, 3) = 1;
        LossBreakdown base = lossTotal(est, gt, mask, 1.0);
        for (const AugmentOp& op : augmentGroup()) {
            LossBreakdown moved = lossTotal(op.apply(est), op.apply(gt), op.apply(mask), 1.0);
            worst = std::max(worst, std::abs(moved.reg - base.reg));
            worst = std::max(worst, std::abs(moved.smo - base.smo));
        }
    }
    criterion(7, "augmentation loss invariance", worst <= 1e-9,
              fmt("worst deviation %.2e over 8 elements x 20 field pairs", worst));
}

// --- C8: PCA suite -------------------------------------------------------------

void c8Pca() {
    Rng rng(8008);
    auto smoothField = [&rng]() {
        DistortionField f(6, 6, 16);
        for (int b = 0; b < 3; ++b) {
            Vec2 c{rng.uniform(0, 96), rng.uniform(0, 96)};
            Vec2 dir{rng.uniform(-6, 6), rng.uniform(-6, 6)};
            double radius = rng.uniform(20, 50);
            for (int j = 0; j < 6; ++j)
                for (int i = 0; i < 6; ++i) {
                    Vec2 p = f.anchor(i, j);
                    f.at(i, j) += std::exp(-(p - c).squaredNorm() / (radius * radius)) * dir;
                }
        }
        return f;
    };
    std::vector<DistortionField> fields;
    for (int i = 0; i < 40; ++i) fields.push_back(smoothField());
    PcaModel m = pcaFit(fields, 8);

    double ortho = 0.0;
    for (size_t a = 0; a < m.k(); ++a)
        for (size_t b = 0; b <= a; ++b) {
            double dot = 0.0;
            for (size_t i = 0; i < m.dim(); ++i) dot += m.components[a][i] * m.components[b][i];
            ortho = std::max(ortho, std::abs(dot - (a == b ? 1.0 : 0.0)));
        }

    bool monotone = true;
    for (int t = 0; t < 20; ++t) {
        DistortionField probe = smoothField();
        double prev = std::numeric_limits<double>::infinity();
        for (size_t k = 1; k <= m.k(); ++k) {
            std::vector<double> c = pcaProject(m, probe);
            c.resize(k);
            DistortionField rec = pcaReconstruct(m, c);
            double err = 0.0;
            for (size_t i = 0; i < rec.vectors.size(); ++i)
                err += (rec.vectors[i] - probe.vectors[i]).squaredNorm();
            if (err > prev + 1e-9) monotone = false;
            prev = err;
        }
    }

    double inSpanErr = 0.0;
    {
        std::vector<double> v = m.meanField;
        for (size_t i = 0; i < v.size(); ++i)
            v[i] += 1.25 * m.components[0][i] - 0.5 * m.components[2][i];
        DistortionField inSpan = unvectorizeField(v, 6, 6, 16);
        DistortionField rec = pcaOracleRectify(m, inSpan);
        for (size_t i = 0; i < rec.vectors.size(); ++i)
            inSpanErr = std::max(inSpanErr, (rec.vectors[i] - inSpan.vectors[i]).norm());
    }

    bool pass = ortho <= 1e-8 && monotone && inSpanErr <= 1e-6;
    criterion(8, "PCA suite", pass,
              fmt("orthonormality defect %.2e, monotone %s, in-span error %.2e", ortho,
                  monotone ? "yes" : "NO", inSpanErr));
}

// --- C9: wrong-vector rule -------------------------------------------------------

void c9WrongVector() {
    GridMask one(1, 1, 1);
    auto vecField = [](double x, double y) {
        DistortionField f(1, 1, 16);
        f.at(0, 0) = {x, y};
        return f;
    };
    auto rot = [&](double deg, double scale) {
        double a = deg * kPi / 180.0;
        return vecField(6 * scale * std::cos(a), 6 * scale * std::sin(a));
    };
    DistortionField gt = vecField(6, 0);

    bool ok = true;
    // 44/46 degree boundary pair at equal norms
    ok = ok && wrongVectorMask(rot(44, 1.0), gt, one).wrongFraction == 0.0;
    ok = ok && wrongVectorMask(rot(46, 1.0), gt, one).wrongFraction == 1.0;
    // ratio rule: same direction, 2.3x magnitude -> |e-g|/min = 1.3 > 1.2
    ok = ok && wrongVectorMask(vecField(6 * 2.3, 0), gt, one).wrongFraction == 1.0;
    // 2.1x -> 1.1 <= 1.2 -> correct
    ok = ok && wrongVectorMask(vecField(6 * 2.1, 0), gt, one).wrongFraction == 0.0;
    // opposite direction -> wrong by angle
    ok = ok && wrongVectorMask(vecField(-6, 0), gt, one).wrongFraction == 1.0;
    // exact equality -> correct
    ok = ok && wrongVectorMask(gt, gt, one).wrongFraction == 0.0;
    criterion(9, "wrong-vector rule (45 deg / 1.2)", ok, "boundary pairs behave as specified");
}

// --- C10: determinism, formats, CLI smoke ---------------------------------------

void c10DeterminismFormats() {
    namespace fs = std::filesystem;
    bool pass = true;
    std::string detail;

    // dataset regeneration byte-identical
    fs::path dirA = fs::temp_directory_path() / "distfield_acc_a";
    fs::path dirB = fs::temp_directory_path() / "distfield_acc_b";
    fs::remove_all(dirA);
    fs::remove_all(dirB);
    writeDataset(dirA.string(), 2, 128, 77);
    writeDataset(dirB.string(), 2, 128, 77);
    bool same = true;
    for (auto& entry : fs::recursive_directory_iterator(dirA)) {
        if (!entry.is_regular_file()) continue;
        fs::path rel = fs::relative(entry.path(), dirA);
        std::ifstream fa(entry.path(), std::ios::binary), fb(dirB / rel, std::ios::binary);
        std::string a((std::istreambuf_iterator<char>(fa)), std::istreambuf_iterator<char>());
        std::string b((std::istreambuf_iterator<char>(fb)), std::istreambuf_iterator<char>());
        if (a != b || a.empty()) same = false;
    }
    pass = pass && same;
    detail += fmt("dataset regen %s; ", same ? "byte-identical" : "DIFFERS");

    // DFLD + checkpoint bit-exact round trips
    Rng rng(10101);
    DistortionField f(8, 8, 16);
    for (Vec2& v : f.vectors) v = {rng.uniform(-20, 20), rng.uniform(-20, 20)};
    std::string blob = encodeDfld(f);
    bool dfldOk = encodeDfld(decodeDfld(blob)) == blob;
    NetworkConfig cfg;
    cfg.inputSize = 32;
    cfg.baseChannels = 4;
    cfg.numResidualBlocks = 1;
    cfg.pyramidDilations = {1, 2};
    Network net(cfg);
    net.initParams(5);
    bool dfnnOk = Network::decode(net.encode()).encode() == net.encode();
    pass = pass && dfldOk && dfnnOk;
    detail += fmt("DFLD %s, DFNN %s; ", dfldOk ? "bit-exact" : "FAIL", dfnnOk ? "bit-exact" : "FAIL");

    // end-to-end CLI smoke: synth 16 -> train 5 epochs -> eval
    fs::path work = fs::temp_directory_path() / "distfield_acc_cli";
    fs::remove_all(work);
    fs::create_directories(work);
    {
        std::ofstream cf(work / "net.cfg");
        cf << "baseChannels=4\nnumResidualBlocks=1\npyramidDilations=1,2\nbatchSize=4\n";
    }
    std::string cli = DISTFIELD_CLI_PATH;
    auto run = [&](const std::string& args) {
        std::string cmd = cli + " " + args + " >/dev/null 2>&1";
        return WEXITSTATUS(std::system(cmd.c_str()));
    };
    int rc1 = run("synth --count 16 --size 128 --seed 0 --out " + (work / "ds").string());
    int rc2 = run("train --data " + (work / "ds").string() + " --config " +
                  (work / "net.cfg").string() + " --epochs 5 --seed 0 --out " +
                  (work / "m.dfnn").string());
    int rc3 = run("eval --data " + (work / "ds").string() + " --model " + (work / "m.dfnn").string() +
                  " --out " + (work / "report").string());
    bool cliOk = rc1 == 0 && rc2 == 0 && (rc3 == 0 || rc3 == 2) &&
                 fs::exists(work / "report" / "summary.csv");
    pass = pass && cliOk;
    detail += fmt("CLI smoke rc=%d/%d/%d %s", rc1, rc2, rc3, cliOk ? "ok" : "FAIL");

    fs::remove_all(dirA);
    fs::remove_all(dirB);
    fs::remove_all(work);
    criterion(10, "determinism & formats", pass, detail);
}

}  // namespace

int main() {
    auto t0 = Clock::now();
    c1Geometry();
    c2GradientCheck();
    c3LossContracts();
    c4WarpRectify();
    c5Learning();
    c6BinComparison();
    c7Augmentation();
    c8Pca();
    c9WrongVector();
    c10DeterminismFormats();
    std::printf("%d/10 criteria passed (%.1f min total)\n", 10 - g_failures,
                seconds(t0, Clock::now()) / 60.0);
    return g_failures == 0 ? 0 : 1;
}
