#pragma once

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "distfield/common.hpp"
#include "distfield/error.hpp"
#include "distfield/field.hpp"
#include "distfield/image.hpp"
#include "distfield/losses.hpp"
#include "distfield/tensor.hpp"

namespace distfield {

// Architecture knobs left open by the reference design; the displacement
// unit is pinned at one vector per 16x16 block (four stride-2 stages).
struct NetworkConfig {
    int inputSize = 128;
    int baseChannels = 16;
    int numResidualBlocks = 4;
    std::vector<int> pyramidDilations = {1, 2, 4};
    bool includeGapBranch = true;
    int blockSize = kBlockSize;

    void validate() const {
        if (blockSize != kBlockSize) throw ShapeMismatch("network block size is fixed at 16");
        if (inputSize <= 0 || inputSize % blockSize != 0)
            throw ShapeMismatch("inputSize must be a positive multiple of 16");
        if (baseChannels < 4) throw ShapeMismatch("baseChannels must be >= 4");
        if (pyramidDilations.empty()) throw ShapeMismatch("pyramidDilations empty");
        for (size_t i = 1; i < pyramidDilations.size(); ++i)
            if (pyramidDilations[i] <= pyramidDilations[i - 1])
                throw ShapeMismatch("pyramidDilations must be strictly increasing");
        if (pyramidDilations.front() < 1) throw ShapeMismatch("dilation must be >= 1");
        if (numResidualBlocks < 0) throw ShapeMismatch("negative residual block count");
    }

    int gridSize() const { return inputSize / blockSize; }

    std::string toText() const {
        std::ostringstream ss;
        ss << "inputSize=" << inputSize << "\n";
        ss << "baseChannels=" << baseChannels << "\n";
        ss << "numResidualBlocks=" << numResidualBlocks << "\n";
        ss << "pyramidDilations=";
        for (size_t i = 0; i < pyramidDilations.size(); ++i)
            ss << (i ? "," : "") << pyramidDilations[i];
        ss << "\n";
        ss << "includeGapBranch=" << (includeGapBranch ? 1 : 0) << "\n";
        ss << "blockSize=" << blockSize << "\n";
        return ss.str();
    }

    static NetworkConfig fromText(const std::string& text) {
        NetworkConfig cfg;
        std::istringstream ss(text);
        std::string line;
        while (std::getline(ss, line)) {
            if (line.empty()) continue;
            size_t eq = line.find('=');
            if (eq == std::string::npos) throw IoError("bad config line: " + line);
            std::string key = line.substr(0, eq), val = line.substr(eq + 1);
            if (key == "inputSize") cfg.inputSize = std::stoi(val);
            else if (key == "baseChannels") cfg.baseChannels = std::stoi(val);
            else if (key == "numResidualBlocks") cfg.numResidualBlocks = std::stoi(val);
            else if (key == "includeGapBranch") cfg.includeGapBranch = std::stoi(val) != 0;
            else if (key == "blockSize") cfg.blockSize = std::stoi(val);
            else if (key == "pyramidDilations") {
                cfg.pyramidDilations.clear();
                std::istringstream ds(val);
                std::string tok;
                while (std::getline(ds, tok, ',')) cfg.pyramidDilations.push_back(std::stoi(tok));
            } else {
                throw IoError("unknown config key: " + key);
            }
        }
        cfg.validate();
        return cfg;
    }
};

// ---------------------------------------------------------------------------
// Blocks
// ---------------------------------------------------------------------------

struct DownBlock {
    Conv2d conv;
    ChanNorm norm;
    Relu relu;

    void init(ParamStore& ps, const std::string& name, int cin, int cout) {
        conv.init(ps, name + ".conv", cin, cout, 3, 2, 1, 1, /*bias=*/false);
        norm.init(ps, name + ".norm", cout);
    }

    Tensor forward(const ParamStore& ps, Tape* t, const Tensor& x) const {
        return relu.forward(t, norm.forward(ps, t, conv.forward(ps, t, x)));
    }

    Tensor backward(ParamStore& ps, Tape& t, const Tensor& dy) const {
        return conv.backward(ps, t, norm.backward(ps, t, relu.backward(t, dy)));
    }
};

struct ResBlock {
    Conv2d conv1, conv2;
    ChanNorm norm1, norm2;
    Relu relu1, relu2;

    void init(ParamStore& ps, const std::string& name, int channels) {
        conv1.init(ps, name + ".conv1", channels, channels, 3, 1, 1, 1, /*bias=*/false);
        norm1.init(ps, name + ".norm1", channels);
        conv2.init(ps, name + ".conv2", channels, channels, 3, 1, 1, 1, /*bias=*/false);
        norm2.init(ps, name + ".norm2", channels);
    }

    Tensor forward(const ParamStore& ps, Tape* t, const Tensor& x) const {
        Tensor y = relu1.forward(t, norm1.forward(ps, t, conv1.forward(ps, t, x)));
        y = norm2.forward(ps, t, conv2.forward(ps, t, y));
        for (size_t i = 0; i < y.size(); ++i) y.v[i] += x.v[i];
        return relu2.forward(t, y);
    }

    Tensor backward(ParamStore& ps, Tape& t, const Tensor& dy) const {
        Tensor ds = relu2.backward(t, dy);
        Tensor dmid = conv2.backward(ps, t, norm2.backward(ps, t, ds));
        Tensor dx = conv1.backward(ps, t, norm1.backward(ps, t, relu1.backward(t, dmid)));
        for (size_t i = 0; i < dx.size(); ++i) dx.v[i] += ds.v[i];
        return dx;
    }
};

// Coordinate attention: channel attention factored into two 1D positional
// encodings pooled along height and width, fused through a shared bottleneck
// and re-expanded to per-channel per-coordinate gates in (0,1). The
// bottleneck is norm-free: its pooled sequence is only H+W long and spatial
// statistics over so few values are unstable.
struct CoordAtt {
    int channels = 0, mid = 0;
    Conv2d reduce, gateH, gateW;
    Relu relu;
    Sigmoid sigH, sigW;

    void init(ParamStore& ps, const std::string& name, int c) {
        channels = c;
        mid = std::max(4, c / 4);
        reduce.init(ps, name + ".reduce", c, mid, 1, 1, 0);
        gateH.init(ps, name + ".gateH", mid, c, 1, 1, 0);
        gateW.init(ps, name + ".gateW", mid, c, 1, 1, 0);
    }

    Tensor forward(const ParamStore& ps, Tape* t, const Tensor& x) const {
        int H = x.h, W = x.w;
        Tensor z(channels, H + W, 1);
        for (int c = 0; c < channels; ++c) {
            for (int j = 0; j < H; ++j) {
                double s = 0.0;
                for (int i = 0; i < W; ++i) s += x.at(c, j, i);
                z.at(c, j, 0) = s / W;
            }
            for (int i = 0; i < W; ++i) {
                double s = 0.0;
                for (int j = 0; j < H; ++j) s += x.at(c, j, i);
                z.at(c, H + i, 0) = s / H;
            }
        }
        Tensor m = relu.forward(t, reduce.forward(ps, t, z));
        Tensor mh(mid, H, 1), mw(mid, W, 1);
        for (int c = 0; c < mid; ++c) {
            for (int j = 0; j < H; ++j) mh.at(c, j, 0) = m.at(c, j, 0);
            for (int i = 0; i < W; ++i) mw.at(c, i, 0) = m.at(c, H + i, 0);
        }
        Tensor ah = sigH.forward(t, gateH.forward(ps, t, mh));
        Tensor aw = sigW.forward(t, gateW.forward(ps, t, mw));
        Tensor y(channels, H, W);
        for (int c = 0; c < channels; ++c)
            for (int j = 0; j < H; ++j)
                for (int i = 0; i < W; ++i)
                    y.at(c, j, i) = x.at(c, j, i) * ah.at(c, j, 0) * aw.at(c, i, 0);
        if (t) {
            t->push(x);
            t->push(ah);
            t->push(aw);
        }
        return y;
    }

    Tensor backward(ParamStore& ps, Tape& t, const Tensor& dy) const {
        Tensor aw = t.pop();
        Tensor ah = t.pop();
        Tensor x = t.pop();
        int H = x.h, W = x.w;
        Tensor dx(channels, H, W);
        Tensor dah(channels, H, 1), daw(channels, W, 1);
        for (int c = 0; c < channels; ++c) {
            for (int j = 0; j < H; ++j) {
                double a = ah.at(c, j, 0);
                for (int i = 0; i < W; ++i) {
                    double g = dy.at(c, j, i);
                    dx.at(c, j, i) = g * a * aw.at(c, i, 0);
                    dah.at(c, j, 0) += g * x.at(c, j, i) * aw.at(c, i, 0);
                    daw.at(c, i, 0) += g * x.at(c, j, i) * a;
                }
            }
        }
        Tensor dmw = gateW.backward(ps, t, sigW.backward(t, daw));
        Tensor dmh = gateH.backward(ps, t, sigH.backward(t, dah));
        Tensor dm(mid, H + W, 1);
        for (int c = 0; c < mid; ++c) {
            for (int j = 0; j < H; ++j) dm.at(c, j, 0) = dmh.at(c, j, 0);
            for (int i = 0; i < W; ++i) dm.at(c, H + i, 0) = dmw.at(c, i, 0);
        }
        Tensor dz = reduce.backward(ps, t, relu.backward(t, dm));
        for (int c = 0; c < channels; ++c) {
            for (int j = 0; j < H; ++j) {
                double g = dz.at(c, j, 0) / W;
                for (int i = 0; i < W; ++i) dx.at(c, j, i) += g;
            }
            for (int i = 0; i < W; ++i) {
                double g = dz.at(c, H + i, 0) / H;
                for (int j = 0; j < H; ++j) dx.at(c, j, i) += g;
            }
        }
        return dx;
    }
};

// Spatial pyramid: 1x1 branch, atrous 3x3 branches, optional global-average-
// pooling branch broadcast back, concatenated and fused by a 1x1 conv. The
// fusion has no normalization: per-channel spatial normalization would cancel
// the GAP branch's spatially constant contribution.
struct Pyramid {
    int cin = 0, cb = 0;
    std::vector<int> dilations;
    bool gap = true;
    Conv2d conv1x1;
    ChanNorm norm1x1;
    std::vector<Conv2d> atrous;
    std::vector<ChanNorm> atrousNorm;
    Conv2d gapConv;
    Conv2d fuse;
    Relu relu;

    void init(ParamStore& ps, const std::string& name, int ci, int branchWidth,
              const std::vector<int>& dils, bool withGap) {
        cin = ci;
        cb = branchWidth;
        dilations = dils;
        gap = withGap;
        conv1x1.init(ps, name + ".b0", ci, cb, 1, 1, 0, 1, /*bias=*/false);
        norm1x1.init(ps, name + ".b0n", cb);
        atrous.resize(dils.size());
        atrousNorm.resize(dils.size());
        for (size_t i = 0; i < dils.size(); ++i) {
            atrous[i].init(ps, name + ".d" + std::to_string(dils[i]), ci, cb, 3, 1, dils[i],
                           dils[i], /*bias=*/false);
            atrousNorm[i].init(ps, name + ".d" + std::to_string(dils[i]) + "n", cb);
        }
        if (gap) gapConv.init(ps, name + ".gap", ci, cb, 1, 1, 0);
        int branches = 1 + int(dils.size()) + (gap ? 1 : 0);
        fuse.init(ps, name + ".fuse", cb * branches, cb, 1, 1, 0);
    }

    int branchCount() const { return 1 + int(dilations.size()) + (gap ? 1 : 0); }

    Tensor forward(const ParamStore& ps, Tape* t, const Tensor& x) const {
        int H = x.h, W = x.w;
        Tensor cat(cb * branchCount(), H, W);
        int slot = 0;
        auto put = [&](const Tensor& b) {
            std::copy(b.v.begin(), b.v.end(), cat.v.begin() + size_t(slot) * cb * H * W);
            ++slot;
        };
        put(relu.forward(t, norm1x1.forward(ps, t, conv1x1.forward(ps, t, x))));
        for (size_t i = 0; i < atrous.size(); ++i)
            put(relu.forward(t, atrousNorm[i].forward(ps, t, atrous[i].forward(ps, t, x))));
        if (gap) {
            Tensor pooled(cin, 1, 1);
            for (int c = 0; c < cin; ++c) {
                double s = 0.0;
                for (int j = 0; j < H; ++j)
                    for (int i = 0; i < W; ++i) s += x.at(c, j, i);
                pooled.at(c, 0, 0) = s / double(H * W);
            }
            // no spatial statistics to normalize on a 1x1 map
            Tensor g = relu.forward(t, gapConv.forward(ps, t, pooled));
            Tensor b(cb, H, W);
            for (int c = 0; c < cb; ++c)
                for (int j = 0; j < H; ++j)
                    for (int i = 0; i < W; ++i) b.at(c, j, i) = g.at(c, 0, 0);
            put(b);
        }
        return relu.forward(t, fuse.forward(ps, t, cat));
    }

    Tensor backward(ParamStore& ps, Tape& t, const Tensor& dy) const {
        Tensor dcat = fuse.backward(ps, t, relu.backward(t, dy));
        int H = dy.h, W = dy.w;
        auto slice = [&](int slot) {
            Tensor b(cb, H, W);
            std::copy(dcat.v.begin() + size_t(slot) * cb * H * W,
                      dcat.v.begin() + size_t(slot + 1) * cb * H * W, b.v.begin());
            return b;
        };
        Tensor dx(cin, H, W);
        auto add = [&](const Tensor& d) {
            for (size_t i = 0; i < dx.size(); ++i) dx.v[i] += d.v[i];
        };
        int slot = branchCount() - 1;
        if (gap) {
            Tensor db = slice(slot--);
            Tensor dg(cb, 1, 1);
            for (int c = 0; c < cb; ++c) {
                double s = 0.0;
                for (int j = 0; j < H; ++j)
                    for (int i = 0; i < W; ++i) s += db.at(c, j, i);
                dg.at(c, 0, 0) = s;
            }
            Tensor dpooled = gapConv.backward(ps, t, relu.backward(t, dg));
            double invHW = 1.0 / double(H * W);
            for (int c = 0; c < cin; ++c) {
                double g = dpooled.at(c, 0, 0) * invHW;
                for (int j = 0; j < H; ++j)
                    for (int i = 0; i < W; ++i) dx.at(c, j, i) += g;
            }
        }
        for (int i = int(atrous.size()) - 1; i >= 0; --i)
            add(atrous[size_t(i)].backward(
                ps, t, atrousNorm[size_t(i)].backward(ps, t, relu.backward(t, slice(slot--)))));
        add(conv1x1.backward(ps, t, norm1x1.backward(ps, t, relu.backward(t, slice(slot--)))));
        return dx;
    }
};

// ---------------------------------------------------------------------------
// The distortion regression network
// ---------------------------------------------------------------------------

class Network {
public:
    NetworkConfig cfg;
    ParamStore params;

    explicit Network(const NetworkConfig& config) : cfg(config) {
        cfg.validate();
        int C = cfg.baseChannels;
        int widths[5] = {1, C, 2 * C, 4 * C, 8 * C};
        for (int d = 0; d < 4; ++d)
            down_[d].init(params, "down" + std::to_string(d), widths[d], widths[d + 1]);
        catChannels_ = 8 * C + 1;  // + scaled mask
        att1_.init(params, "att1", catChannels_);
        res_.resize(size_t(cfg.numResidualBlocks));
        for (int r = 0; r < cfg.numResidualBlocks; ++r)
            res_[size_t(r)].init(params, "res" + std::to_string(r), catChannels_);
        branchWidth_ = 4 * C;
        pyramid_.init(params, "pyramid", catChannels_, branchWidth_, cfg.pyramidDilations,
                      cfg.includeGapBranch);
        att2_.init(params, "att2", branchWidth_);
        headConv_.init(params, "head.conv", branchWidth_, std::max(2, branchWidth_ / 2), 3, 1, 1,
                       1, /*bias=*/false);
        headNorm_.init(params, "head.norm", std::max(2, branchWidth_ / 2));
        outConv_.init(params, "head.out", std::max(2, branchWidth_ / 2), 2, 3, 1, 1);
    }

    size_t parameterCount() const { return params.values.size(); }

    // Fan-in-scaled uniform init for conv kernels, unit gains, zero biases.
    void initParams(uint64_t seed) {
        Rng rng(seed ^ 0xC0FFEE123456789ull);
        for (const ParamStore::Entry& e : params.entries) {
            double* p = params.values.data() + e.offset;
            if (e.shape.size() == 4) {
                int fanIn = e.shape[1] * e.shape[2] * e.shape[3];
                double a = std::sqrt(6.0 / fanIn);
                for (size_t i = 0; i < e.count; ++i) p[i] = rng.uniform(-a, a);
            } else if (e.name.size() >= 2 && e.name.compare(e.name.size() - 2, 2, ".g") == 0) {
                for (size_t i = 0; i < e.count; ++i) p[i] = 1.0;
            } else {
                for (size_t i = 0; i < e.count; ++i) p[i] = 0.0;
            }
        }
    }

    // image: the normalized view (zero mean, unit variance over the mask).
    DistortionField forward(const GrayImage& image, const FingerMask& mask) const {
        Tensor out = forwardImpl(nullptr, image, mask);
        if (!out.allFinite()) throw NonFiniteActivation("network output");
        return toField(out);
    }

    // Gradients of lossTotal w.r.t. every parameter tensor, accumulated into
    // params.grads. Returns the loss and, optionally, the estimated field.
    LossBreakdown lossAndGradients(const GrayImage& image, const FingerMask& mask,
                                   const DistortionField& gt, double lambdaSmo = 1.0,
                                   DistortionField* estOut = nullptr) {
        Tape tape;
        Tensor out = forwardImpl(&tape, image, mask);
        if (!out.allFinite()) throw NonFiniteActivation("network output");
        DistortionField est = toField(out);
        GridMask gridMask = maskToGrid(mask, cfg.blockSize);
        LossBreakdown lb = lossTotal(est, gt, gridMask, lambdaSmo);
        DistortionField dEst = lossTotalGrad(est, gt, gridMask, lambdaSmo);

        int G = cfg.gridSize();
        Tensor dOut(2, G, G);
        for (int j = 0; j < G; ++j) {
            for (int i = 0; i < G; ++i) {
                dOut.at(0, j, i) = dEst.at(i, j).x;
                dOut.at(1, j, i) = dEst.at(i, j).y;
            }
        }
        backwardImpl(tape, dOut);
        for (double g : params.grads)
            if (!std::isfinite(g)) throw NonFiniteGradient("parameter gradient");
        if (estOut) *estOut = std::move(est);
        return lb;
    }

    // --- "DFNN" checkpoint: magic, version, config echo, named f32 tensors ---

    std::string encode() const {
        std::string out = "DFNN";
        putU32(out, 1);
        std::string cfgText = cfg.toText();
        putU32(out, uint32_t(cfgText.size()));
        out += cfgText;
        putU32(out, uint32_t(params.entries.size()));
        for (const ParamStore::Entry& e : params.entries) {
            putU32(out, uint32_t(e.name.size()));
            out += e.name;
            putU32(out, uint32_t(e.shape.size()));
            for (int d : e.shape) putU32(out, uint32_t(d));
            const double* p = params.values.data() + e.offset;
            for (size_t i = 0; i < e.count; ++i) putF32(out, float(p[i]));
        }
        return out;
    }

    static Network decode(const std::string& blob) {
        if (blob.size() < 12 || blob.compare(0, 4, "DFNN") != 0) throw IoError("not a DFNN blob");
        size_t pos = 4;
        if (getU32(blob, pos) != 1) throw IoError("unsupported DFNN version");
        uint32_t cfgLen = getU32(blob, pos);
        if (pos + cfgLen > blob.size()) throw IoError("truncated DFNN config");
        NetworkConfig cfg = NetworkConfig::fromText(blob.substr(pos, cfgLen));
        pos += cfgLen;
        Network net(cfg);
        uint32_t count = getU32(blob, pos);
        if (count != net.params.entries.size()) throw ModelConfigMismatch("tensor count");
        for (const ParamStore::Entry& e : net.params.entries) {
            uint32_t nameLen = getU32(blob, pos);
            if (pos + nameLen > blob.size() || blob.compare(pos, nameLen, e.name) != 0)
                throw ModelConfigMismatch("tensor name order");
            pos += nameLen;
            uint32_t ndim = getU32(blob, pos);
            if (ndim != e.shape.size()) throw ModelConfigMismatch("tensor rank");
            for (int d : e.shape)
                if (getU32(blob, pos) != uint32_t(d)) throw ModelConfigMismatch("tensor shape");
            if (pos + e.count * 4 > blob.size()) throw IoError("truncated DFNN data");
            double* p = net.params.values.data() + e.offset;
            for (size_t i = 0; i < e.count; ++i) p[i] = getF32(blob, pos);
        }
        if (pos != blob.size()) throw IoError("trailing bytes in DFNN blob");
        return net;
    }

    void save(const std::string& path) const {
        std::ofstream f(path, std::ios::binary);
        if (!f) throw IoError("cannot write " + path);
        std::string blob = encode();
        f.write(blob.data(), std::streamsize(blob.size()));
        if (!f) throw IoError("write failed: " + path);
    }

    static Network load(const std::string& path) {
        std::ifstream f(path, std::ios::binary);
        if (!f) throw IoError("cannot read " + path);
        std::string blob((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
        return decode(blob);
    }

private:
    DownBlock down_[4];
    CoordAtt att1_;
    std::vector<ResBlock> res_;
    Pyramid pyramid_;
    CoordAtt att2_;
    Conv2d headConv_;
    ChanNorm headNorm_;
    Relu headRelu_;
    Conv2d outConv_;
    int catChannels_ = 0;
    int branchWidth_ = 0;

    DistortionField toField(const Tensor& out) const {
        int G = cfg.gridSize();
        DistortionField f(G, G, cfg.blockSize);
        for (int j = 0; j < G; ++j)
            for (int i = 0; i < G; ++i) f.at(i, j) = {out.at(0, j, i), out.at(1, j, i)};
        return f;
    }

    Tensor forwardImpl(Tape* tape, const GrayImage& image, const FingerMask& mask) const {
        if (image.width != cfg.inputSize || image.height != cfg.inputSize)
            throw ShapeMismatch("input image must be inputSize x inputSize");
        if (mask.width != image.width || mask.height != image.height)
            throw ShapeMismatch("mask size");
        int S = cfg.inputSize, G = cfg.gridSize();
        Tensor x(1, S, S);
        for (int y = 0; y < S; ++y)
            for (int i = 0; i < S; ++i) x.at(0, y, i) = image.at(i, y);

        for (int d = 0; d < 4; ++d) x = down_[d].forward(params, tape, x);

        // mask joins after downsampling: it constrains the estimate, it does
        // not describe image texture
        GridMask gm = maskToGrid(mask, cfg.blockSize);
        Tensor cat(catChannels_, G, G);
        std::copy(x.v.begin(), x.v.end(), cat.v.begin());
        for (int j = 0; j < G; ++j)
            for (int i = 0; i < G; ++i)
                cat.at(catChannels_ - 1, j, i) = gm.at(i, j) ? 1.0 : 0.0;

        Tensor t = att1_.forward(params, tape, cat);
        for (const ResBlock& r : res_) t = r.forward(params, tape, t);
        t = pyramid_.forward(params, tape, t);
        t = att2_.forward(params, tape, t);
        t = headRelu_.forward(tape, headNorm_.forward(params, tape, headConv_.forward(params, tape, t)));
        return outConv_.forward(params, tape, t);
    }

    void backwardImpl(Tape& tape, const Tensor& dOut) {
        Tensor d = outConv_.backward(params, tape, dOut);
        d = headConv_.backward(params, tape,
                               headNorm_.backward(params, tape, headRelu_.backward(tape, d)));
        d = att2_.backward(params, tape, d);
        d = pyramid_.backward(params, tape, d);
        for (auto it = res_.rbegin(); it != res_.rend(); ++it) d = it->backward(params, tape, d);
        d = att1_.backward(params, tape, d);
        // drop the mask channel
        int G = cfg.gridSize();
        Tensor dimg(catChannels_ - 1, G, G);
        std::copy(d.v.begin(), d.v.begin() + dimg.size(), dimg.v.begin());
        d = std::move(dimg);
        for (int b = 3; b >= 0; --b) d = down_[b].backward(params, tape, d);
    }
};

// Stable bit-level hash of a field (determinism regression checks).
inline uint64_t fieldHash(const DistortionField& f) {
    uint64_t h = 1469598103934665603ull;
    auto mix = [&h](double d) {
        uint64_t bits;
        std::memcpy(&bits, &d, 8);
        for (int i = 0; i < 8; ++i) {
            h ^= (bits >> (8 * i)) & 0xff;
            h *= 1099511628211ull;
        }
    };
    for (const Vec2& v : f.vectors) {
        mix(v.x);
        mix(v.y);
    }
    return h;
}

}  // namespace distfield
