#pragma once

#include <array>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "distfield/common.hpp"
#include "distfield/error.hpp"
#include "distfield/field.hpp"
#include "distfield/image.hpp"
#include "distfield/image_io.hpp"
#include "distfield/minutiae.hpp"
#include "distfield/rigid.hpp"
#include "distfield/tps.hpp"
#include "distfield/warp.hpp"

namespace distfield {

// ---------------------------------------------------------------------------
// Synthetic normal fingerprints
// ---------------------------------------------------------------------------

// Deterministic synthetic fingerprint: ridges are the sign-thresholded
// response of an oriented sinusoid whose phase is a random low-order
// polynomial plus 0-2 singular points, smoothed once. Ridge period lands in
// [8, 12] px (the 500 ppi spacing), the mask is an ellipse-like support and
// the minutiae are 20-60 random points inside the eroded mask.
struct SynthFingerprint {
    GrayImage image;
    FingerMask mask;
    MinutiaSet minutiae;
};

inline SynthFingerprint synthFingerprint(uint64_t seed, int width, int height) {
    if (width < 64 || height < 64) throw DimensionMismatch("synthFingerprint needs >= 64 px");
    Rng rng(seed * 0x9E3779B97F4A7C15ull + 0xA5A5A5A5ull);

    double period = rng.uniform(9.0, 11.0);
    double freq = 1.0 / period;  // cycles/px, inside [1/12, 1/8]
    double theta = rng.uniform(0.0, kPi);
    double ct = std::cos(theta), st = std::sin(theta);

    // Low-order polynomial phase warp in normalized coordinates; amplitude is
    // kept small so the local frequency stays within the ridge band.
    std::array<double, 6> c;
    for (double& v : c) v = rng.uniform(-1.0, 1.0);
    double warpAmp = 0.06 * width;

    int nSingular = int(rng.below(3));  // 0, 1 or 2
    std::array<Vec2, 2> singular;
    std::array<double, 2> winding;
    for (int k = 0; k < nSingular; ++k) {
        singular[k] = {width * rng.uniform(0.3, 0.7), height * rng.uniform(0.3, 0.7)};
        winding[k] = rng.uniform() < 0.5 ? 1.0 : -1.0;
    }

    // Ellipse-like mask with a mild radial perturbation.
    Vec2 mc{width * rng.uniform(0.46, 0.54), height * rng.uniform(0.46, 0.54)};
    double ax = width * rng.uniform(0.30, 0.42);
    double ay = height * rng.uniform(0.33, 0.45);
    double p2 = rng.uniform(-0.05, 0.05), p3 = rng.uniform(-0.05, 0.05);
    double phi0 = rng.uniform(0.0, 2.0 * kPi);

    FingerMask mask(width, height);
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
            double dx = (x - mc.x) / ax, dy = (y - mc.y) / ay;
            double r = std::sqrt(dx * dx + dy * dy);
            double phi = std::atan2(dy, dx);
            double rim = 1.0 + p2 * std::cos(2 * phi + phi0) + p3 * std::sin(3 * phi);
            mask.at(x, y) = (r <= rim) ? 1 : 0;
        }
    }
    mask = largestComponent(mask);

    GrayImage ridgesBinary(width, height, 1.0);
    for (int y = 0; y < height; ++y) {
        double eta = (y - 0.5 * height) / height;
        for (int x = 0; x < width; ++x) {
            double xi = (x - 0.5 * width) / width;
            double poly = c[0] * xi * xi + c[1] * xi * eta + c[2] * eta * eta +
                          c[3] * xi * xi * eta + c[4] * xi * eta * eta +
                          c[5] * (xi * xi * xi - eta * eta * eta) * 0.5;
            double u = x * ct + y * st + warpAmp * poly;
            double phase = 2.0 * kPi * freq * u;
            for (int k = 0; k < nSingular; ++k)
                phase += winding[k] * std::atan2(y - singular[k].y, x - singular[k].x);
            // dark ridges on light valleys
            ridgesBinary.at(x, y) = std::cos(phase) > 0.0 ? 0.0 : 1.0;
        }
    }

    // smoothed once: 3x3 box
    GrayImage img(width, height, 1.0);
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
            double sum = 0.0;
            int n = 0;
            for (int dy = -1; dy <= 1; ++dy) {
                for (int dx = -1; dx <= 1; ++dx) {
                    int xx = x + dx, yy = y + dy;
                    if (xx < 0 || yy < 0 || xx >= width || yy >= height) continue;
                    sum += ridgesBinary.at(xx, yy);
                    ++n;
                }
            }
            img.at(x, y) = mask.at(x, y) ? sum / n : 1.0;
        }
    }

    // Minutiae: 20-60 distinct points in the eroded mask.
    int count = 20 + int(rng.below(41));
    FingerMask inner = erodeMask(mask, std::max(4, width / 32));
    MinutiaSet minutiae;
    int placed = 0, guard = 0;
    while (placed < count && guard < 100000) {
        ++guard;
        double x = rng.uniform(0.0, width - 1.0);
        double y = rng.uniform(0.0, height - 1.0);
        if (!inner.inside(x, y)) continue;
        bool tooClose = false;
        for (const Vec2& p : minutiae.points)
            if ((p - Vec2{x, y}).squaredNorm() < 9.0) tooClose = true;
        if (tooClose) continue;
        minutiae.add(placed, x, y);
        ++placed;
    }
    if (placed < 3) throw DegenerateConfiguration("could not place minutiae");

    return {std::move(img), std::move(mask), std::move(minutiae)};
}

// ---------------------------------------------------------------------------
// Parametric distortion prototypes (the 10 rubbing/torque types)
// ---------------------------------------------------------------------------

enum class DistortionKind {
    PushUp, PushDown, PushLeft, PushRight,
    PushUpLeft, PushUpRight, PushDownLeft, PushDownRight,
    TorqueCw, TorqueCcw,
};

constexpr int kDistortionKindCount = 10;

inline const char* kindName(DistortionKind k) {
    switch (k) {
        case DistortionKind::PushUp: return "push-up";
        case DistortionKind::PushDown: return "push-down";
        case DistortionKind::PushLeft: return "push-left";
        case DistortionKind::PushRight: return "push-right";
        case DistortionKind::PushUpLeft: return "push-up-left";
        case DistortionKind::PushUpRight: return "push-up-right";
        case DistortionKind::PushDownLeft: return "push-down-left";
        case DistortionKind::PushDownRight: return "push-down-right";
        case DistortionKind::TorqueCw: return "torque-cw";
        case DistortionKind::TorqueCcw: return "torque-ccw";
    }
    return "?";
}

inline DistortionKind kindFromName(const std::string& name) {
    for (int i = 0; i < kDistortionKindCount; ++i)
        if (name == kindName(DistortionKind(i))) return DistortionKind(i);
    throw IoError("unknown distortion kind: " + name);
}

struct DistortionPrototype {
    DistortionKind kind = DistortionKind::PushRight;
    double magnitude = 0.0;  // px, >= 0
    Vec2 center;
    double falloff = 1.0;  // Gaussian radius, px, > 0

    Vec2 displacementAt(const Vec2& p) const {
        Vec2 d = p - center;
        double g = magnitude * std::exp(-d.squaredNorm() / (falloff * falloff));
        constexpr double s = 0.7071067811865476;
        switch (kind) {
            case DistortionKind::PushUp: return {0.0, -g};
            case DistortionKind::PushDown: return {0.0, g};
            case DistortionKind::PushLeft: return {-g, 0.0};
            case DistortionKind::PushRight: return {g, 0.0};
            case DistortionKind::PushUpLeft: return {-g * s, -g * s};
            case DistortionKind::PushUpRight: return {g * s, -g * s};
            case DistortionKind::PushDownLeft: return {-g * s, g * s};
            case DistortionKind::PushDownRight: return {g * s, g * s};
            case DistortionKind::TorqueCw:
            case DistortionKind::TorqueCcw: {
                double r = d.norm();
                if (r <= 0.0) return {0.0, 0.0};
                Vec2 tangent = d.rot90() * (1.0 / r);  // counterclockwise in raster axes
                return (kind == DistortionKind::TorqueCcw ? g : -g) * tangent;
            }
        }
        return {0.0, 0.0};
    }
};

// Evaluates the prototype at block centers and removes the DC component over
// the full grid.
inline DistortionField synthDistortion(const DistortionPrototype& proto, int gridW, int gridH,
                                       int blockSize = kBlockSize) {
    if (proto.magnitude < 0.0 || proto.falloff <= 0.0)
        throw DegenerateConfiguration("bad prototype parameters");
    DistortionField field(gridW, gridH, blockSize);
    for (int j = 0; j < gridH; ++j)
        for (int i = 0; i < gridW; ++i) field.at(i, j) = proto.displacementAt(field.anchor(i, j));
    GridMask full(gridW, gridH, 1);
    return removeDc(field, full);
}

// ---------------------------------------------------------------------------
// Training pairs
// ---------------------------------------------------------------------------

struct TrainingSample {
    GrayImage distorted;
    FingerMask mask;          // mask of the distorted image (M^D)
    DistortionField gtField;  // distorted -> normal, DC removed
    GrayImage normal;         // held out for evaluation only
};

namespace detail {

// Finds p with p + u(p) = target by damped Gauss-Newton with a numeric
// Jacobian. Plain fixed-point iteration is not contractive near torque
// centers, where the tangential field folds.
inline Vec2 invertForwardMap(const std::function<Vec2(double, double)>& u, const Vec2& target) {
    Vec2 p = target - u(target.x, target.y);
    double best = 1e300;
    Vec2 bestP = p;
    for (int it = 0; it < 40; ++it) {
        Vec2 r = p + u(p.x, p.y) - target;
        double rn = r.squaredNorm();
        if (rn < best) {
            best = rn;
            bestP = p;
        }
        if (rn < 1e-18) break;
        const double h = 0.25;
        Vec2 ux = (u(p.x + h, p.y) - u(p.x - h, p.y)) * (0.5 / h);
        Vec2 uy = (u(p.x, p.y + h) - u(p.x, p.y - h)) * (0.5 / h);
        // J = I + [ux uy]
        double a = 1.0 + ux.x, b = uy.x, cc = ux.y, d = 1.0 + uy.y;
        double det = a * d - b * cc;
        Vec2 step;
        if (std::abs(det) < 1e-9) {
            step = r;  // gradient-ish fallback
        } else {
            step = {(d * r.x - b * r.y) / det, (-cc * r.x + a * r.y) / det};
        }
        double lambda = 1.0;
        for (int ls = 0; ls < 8; ++ls) {
            Vec2 cand = p - lambda * step;
            if ((cand + u(cand.x, cand.y) - target).squaredNorm() < rn) {
                p = cand;
                break;
            }
            lambda *= 0.5;
            if (ls == 7) p = p - 0.1 * step;
        }
    }
    return best < 1e-12 ? p : bestP;
}

}  // namespace detail

// Builds a training pair the way the ground truth is defined: the normal
// image is warped forward into the distorted one (dense TPS evaluation of
// the generating field, full resolution), the minutiae are pushed through
// the same map, and the stored ground truth is the minutiae + TPS + DC
// removal reconstruction, not the generating field itself.
inline TrainingSample makePair(const GrayImage& normal, const FingerMask& mask,
                               const MinutiaSet& minutiae, const DistortionField& field,
                               MinutiaSet* distortedMinutiaeOut = nullptr) {
    if (normal.width != mask.width || normal.height != mask.height)
        throw DimensionMismatch("makePair image/mask");
    if (minutiae.size() < 3) throw DegenerateConfiguration("makePair needs >= 3 minutiae");

    // densify the generating field (anchors at block centers)
    std::vector<Vec2> anchors, values;
    anchors.reserve(field.vectors.size());
    values.reserve(field.vectors.size());
    for (int j = 0; j < field.gridH; ++j) {
        for (int i = 0; i < field.gridW; ++i) {
            anchors.push_back(field.anchor(i, j));
            values.push_back(field.at(i, j));
        }
    }
    ThinPlateSpline dense = tpsFit(anchors, values, 0.0);
    auto u = [&dense](double x, double y) { return dense.eval({x, y}); };

    auto [distorted, distortedMaskRaw] = applyFieldForward(normal, mask, u);
    FingerMask distortedMask = largestComponent(distortedMaskRaw);
    if (distortedMask.count() == 0) throw EmptyMask("makePair produced an empty mask");

    MinutiaSet distortedMinutiae;
    for (size_t i = 0; i < minutiae.size(); ++i) {
        Vec2 p = detail::invertForwardMap(u, minutiae.points[i]);
        distortedMinutiae.add(minutiae.ids[i], p.x, p.y);
    }

    std::vector<SparseSample> sparse = sparseField(minutiae, distortedMinutiae, distortedMask);
    std::vector<Vec2> sAnchors(sparse.size()), sValues(sparse.size());
    for (size_t i = 0; i < sparse.size(); ++i) {
        sAnchors[i] = sparse[i].anchor;
        sValues[i] = sparse[i].displacement;
    }
    ThinPlateSpline gtTps = tpsFit(sAnchors, sValues, 0.0);
    DistortionField gt = tpsEvalDense(gtTps, field.gridW, field.gridH, field.blockSize);
    GridMask gridMask = maskToGrid(distortedMask, field.blockSize);
    if (gridMask.count() == 0) throw EmptyMask("makePair grid mask empty");
    gt = removeDc(gt, gridMask);

    if (distortedMinutiaeOut) *distortedMinutiaeOut = std::move(distortedMinutiae);
    return {std::move(distorted), std::move(distortedMask), std::move(gt), GrayImage(normal)};
}

// ---------------------------------------------------------------------------
// 8-element augmentation group ({identity, hflip} x {0, 90, 180, 270})
// ---------------------------------------------------------------------------

namespace detail {

template <typename Raster>
Raster hflipRaster(const Raster& src) {
    Raster dst = src;
    int W = src.width, H = src.height;
    for (int y = 0; y < H; ++y)
        for (int x = 0; x < W; ++x) dst.at(x, y) = src.at(W - 1 - x, y);
    return dst;
}

// Quarter-turn as an array operation: dst(x, y) = src(S-1-y, x).
template <typename Raster>
Raster rotRaster(const Raster& src) {
    Raster dst = src;
    int S = src.width;
    for (int y = 0; y < S; ++y)
        for (int x = 0; x < S; ++x) dst.at(x, y) = src.at(S - 1 - y, x);
    return dst;
}

}  // namespace detail

// One group element: optional horizontal flip applied first, then `quarter`
// quarter turns. Field vectors are rotated/reflected with the same
// orthogonal map that moves their anchors.
struct AugmentOp {
    bool hflip = false;
    int quarter = 0;  // 0..3

    AugmentOp inverse() const {
        // Flip-carrying elements are reflections, hence involutions.
        if (!hflip) return {false, (4 - quarter) % 4};
        return {true, quarter};
    }

    Vec2 mapVector(const Vec2& v) const {
        Vec2 r = hflip ? Vec2{-v.x, v.y} : v;
        for (int k = 0; k < quarter; ++k) r = {r.y, -r.x};  // matches dst(x,y)=src(S-1-y,x)
        return r;
    }

    GrayImage apply(const GrayImage& img) const {
        GrayImage out = hflip ? detail::hflipRaster(img) : img;
        for (int k = 0; k < quarter; ++k) out = detail::rotRaster(out);
        return out;
    }

    FingerMask apply(const FingerMask& m) const {
        FingerMask out = hflip ? detail::hflipRaster(m) : m;
        for (int k = 0; k < quarter; ++k) out = detail::rotRaster(out);
        return out;
    }

    GridMask apply(const GridMask& m) const {
        GridMask out = m;
        if (hflip) {
            for (int y = 0; y < m.h; ++y)
                for (int x = 0; x < m.w; ++x) out.at(x, y) = m.at(m.w - 1 - x, y);
        }
        for (int k = 0; k < quarter; ++k) {
            GridMask tmp = out;
            for (int y = 0; y < m.h; ++y)
                for (int x = 0; x < m.w; ++x) out.at(x, y) = tmp.at(m.w - 1 - y, x);
        }
        return out;
    }

    DistortionField apply(const DistortionField& f) const {
        if (f.gridW != f.gridH) throw NonSquareInput("augment needs a square grid");
        DistortionField out = f;
        if (hflip) {
            for (int j = 0; j < f.gridH; ++j)
                for (int i = 0; i < f.gridW; ++i) {
                    Vec2 v = f.at(f.gridW - 1 - i, j);
                    out.at(i, j) = {-v.x, v.y};
                }
        }
        for (int k = 0; k < quarter; ++k) {
            DistortionField tmp = out;
            for (int j = 0; j < f.gridH; ++j)
                for (int i = 0; i < f.gridW; ++i) {
                    Vec2 v = tmp.at(f.gridW - 1 - j, i);
                    out.at(i, j) = {v.y, -v.x};
                }
        }
        return out;
    }

    TrainingSample apply(const TrainingSample& s) const {
        if (s.distorted.width != s.distorted.height)
            throw NonSquareInput("augment needs square rasters");
        return {apply(s.distorted), apply(s.mask), apply(s.gtField), apply(s.normal)};
    }
};

inline const std::array<AugmentOp, 8>& augmentGroup() {
    static const std::array<AugmentOp, 8> ops = {{
        {false, 0}, {false, 1}, {false, 2}, {false, 3},
        {true, 0}, {true, 1}, {true, 2}, {true, 3},
    }};
    return ops;
}

inline std::vector<TrainingSample> augment(const TrainingSample& s) {
    std::vector<TrainingSample> out;
    out.reserve(8);
    for (const AugmentOp& op : augmentGroup()) out.push_back(op.apply(s));
    return out;
}

// ---------------------------------------------------------------------------
// Dataset archive
// ---------------------------------------------------------------------------

struct SampleMeta {
    uint64_t seed = 0;
    DistortionKind kind = DistortionKind::PushRight;
    double magnitude = 0.0;
    double falloff = 0.0;
    Vec2 center;
};

// Prototype parameters for one seed. Magnitude is capped at 0.45 * falloff
// so the forward warp stays fold-free away from torque centers.
inline DistortionPrototype drawPrototype(uint64_t seed, int size, SampleMeta* meta = nullptr) {
    Rng rng(seed * 0x51ED2701B8F0C395ull + 17u);
    DistortionPrototype proto;
    proto.kind = DistortionKind(rng.below(kDistortionKindCount));
    proto.falloff = size * rng.uniform(0.16, 0.50);
    proto.magnitude = std::min(rng.uniform(5.0, 30.0), 0.45 * proto.falloff);
    bool torque = proto.kind == DistortionKind::TorqueCw || proto.kind == DistortionKind::TorqueCcw;
    if (torque) proto.magnitude = std::min(proto.magnitude, 15.0);
    proto.center = {size * rng.uniform(0.22, 0.78), size * rng.uniform(0.22, 0.78)};
    if (meta) *meta = {seed, proto.kind, proto.magnitude, proto.falloff, proto.center};
    return proto;
}

struct GeneratedSample {
    TrainingSample sample;
    SampleMeta meta;
    MinutiaSet normalMinutiae;
    MinutiaSet distortedMinutiae;
};

inline GeneratedSample generateSample(uint64_t seed, int size) {
    GeneratedSample g;
    SynthFingerprint fp = synthFingerprint(seed, size, size);
    DistortionPrototype proto = drawPrototype(seed, size, &g.meta);
    DistortionField field = synthDistortion(proto, (size + kBlockSize - 1) / kBlockSize,
                                            (size + kBlockSize - 1) / kBlockSize);
    g.sample = makePair(fp.image, fp.mask, fp.minutiae, field, &g.distortedMinutiae);
    g.normalMinutiae = std::move(fp.minutiae);
    return g;
}

inline std::string sampleDirName(uint64_t seed) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "sample_%05llu", (unsigned long long)seed);
    return buf;
}

inline void writeDataset(const std::string& dir, int count, int size, uint64_t baseSeed) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    std::vector<std::string> manifestRows(size_t(std::max(count, 0)));
    parallelFor(count, [&](int i) {
        uint64_t seed = baseSeed + uint64_t(i);
        GeneratedSample g = generateSample(seed, size);
        fs::path sdir = fs::path(dir) / sampleDirName(seed);
        fs::create_directories(sdir);
        savePng(g.sample.normal, (sdir / "normal.png").string());
        savePng(g.sample.distorted, (sdir / "distorted.png").string());
        savePngMask(g.sample.mask, (sdir / "mask.png").string());
        saveDfld(g.sample.gtField, (sdir / "gt.dfld").string());
        saveMinutiaCsv(g.normalMinutiae, (sdir / "minutiae_normal.csv").string());
        saveMinutiaCsv(g.distortedMinutiae, (sdir / "minutiae_distorted.csv").string());
        char row[256];
        std::snprintf(row, sizeof row, "%llu,%s,%.17g,%.17g,%.17g,%.17g\n",
                      (unsigned long long)g.meta.seed, kindName(g.meta.kind), g.meta.magnitude,
                      g.meta.falloff, g.meta.center.x, g.meta.center.y);
        manifestRows[size_t(i)] = row;
    });
    std::ofstream manifest(fs::path(dir) / "manifest.csv");
    if (!manifest) throw IoError("cannot write manifest in " + dir);
    manifest << "seed,kind,magnitude,falloff,center_x,center_y\n";
    for (const std::string& row : manifestRows) manifest << row;
    if (!manifest) throw IoError("manifest write failed in " + dir);
}

struct Dataset {
    std::vector<TrainingSample> samples;
    std::vector<SampleMeta> meta;
};

inline Dataset readDataset(const std::string& dir) {
    namespace fs = std::filesystem;
    std::ifstream manifest(fs::path(dir) / "manifest.csv");
    if (!manifest) throw IoError("cannot read manifest in " + dir);
    std::string line;
    if (!std::getline(manifest, line) || line.rfind("seed,", 0) != 0)
        throw IoError("bad manifest header in " + dir);
    Dataset ds;
    while (std::getline(manifest, line)) {
        if (line.empty()) continue;
        SampleMeta meta;
        std::istringstream ss(line);
        std::string tok;
        std::getline(ss, tok, ',');
        meta.seed = std::stoull(tok);
        std::getline(ss, tok, ',');
        meta.kind = kindFromName(tok);
        std::getline(ss, tok, ',');
        meta.magnitude = std::stod(tok);
        std::getline(ss, tok, ',');
        meta.falloff = std::stod(tok);
        std::getline(ss, tok, ',');
        meta.center.x = std::stod(tok);
        std::getline(ss, tok, ',');
        meta.center.y = std::stod(tok);
        ds.meta.push_back(meta);
    }
    ds.samples.resize(ds.meta.size());
    parallelFor(int(ds.meta.size()), [&](int i) {
        fs::path sdir = fs::path(dir) / sampleDirName(ds.meta[size_t(i)].seed);
        TrainingSample s;
        s.normal = loadPng((sdir / "normal.png").string());
        s.distorted = loadPng((sdir / "distorted.png").string());
        s.mask = loadPngMask((sdir / "mask.png").string());
        s.gtField = loadDfld((sdir / "gt.dfld").string());
        ds.samples[size_t(i)] = std::move(s);
    });
    return ds;
}

}  // namespace distfield
