#pragma once

#include <Eigen/Core>
#include <string>
#include <vector>

#include "distfield/common.hpp"
#include "distfield/error.hpp"

namespace distfield {

// Dense CHW activation tensor, double precision throughout so gradient
// checks against central differences are meaningful.
struct Tensor {
    int c = 0, h = 0, w = 0;
    std::vector<double> v;

    Tensor() = default;
    Tensor(int cc, int hh, int ww) : c(cc), h(hh), w(ww), v(size_t(cc) * hh * ww, 0.0) {}

    double& at(int ch, int y, int x) { return v[(size_t(ch) * h + y) * w + x]; }
    double at(int ch, int y, int x) const { return v[(size_t(ch) * h + y) * w + x]; }
    size_t size() const { return v.size(); }
    int spatial() const { return h * w; }

    bool allFinite() const {
        for (double x : v)
            if (!std::isfinite(x)) return false;
        return true;
    }
};

using MatRM = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapRM = Eigen::Map<MatRM>;
using CMapRM = Eigen::Map<const MatRM>;

// Named parameter tensors in one flat buffer (simplifies the optimizer and
// the finite-difference sweep).
struct ParamStore {
    struct Entry {
        std::string name;
        std::vector<int> shape;
        size_t offset = 0;
        size_t count = 0;
    };

    std::vector<Entry> entries;
    std::vector<double> values;
    std::vector<double> grads;

    size_t add(const std::string& name, std::vector<int> shape) {
        size_t count = 1;
        for (int d : shape) count *= size_t(d);
        size_t offset = values.size();
        entries.push_back({name, std::move(shape), offset, count});
        values.resize(offset + count, 0.0);
        grads.resize(offset + count, 0.0);
        return entries.size() - 1;
    }

    const Entry& entry(size_t idx) const { return entries[idx]; }
    double* val(size_t idx) { return values.data() + entries[idx].offset; }
    const double* val(size_t idx) const { return values.data() + entries[idx].offset; }
    double* grad(size_t idx) { return grads.data() + entries[idx].offset; }

    void zeroGrads() { std::fill(grads.begin(), grads.end(), 0.0); }
};

// LIFO activation cache: layers push what backward needs during the forward
// pass and pop it in exact reverse order.
struct Tape {
    std::vector<Tensor> stack;

    void push(Tensor t) { stack.push_back(std::move(t)); }
    Tensor pop() {
        Tensor t = std::move(stack.back());
        stack.pop_back();
        return t;
    }
};

// ---------------------------------------------------------------------------
// Layers
// ---------------------------------------------------------------------------

struct Conv2d {
    int cin = 0, cout = 0, k = 1, stride = 1, pad = 0, dil = 1;
    bool hasBias = true;  // convs feeding a ChanNorm skip the redundant bias
    size_t wIdx = 0, bIdx = 0;

    void init(ParamStore& ps, const std::string& name, int ci, int co, int kk, int s, int p,
              int d = 1, bool bias = true) {
        cin = ci; cout = co; k = kk; stride = s; pad = p; dil = d; hasBias = bias;
        wIdx = ps.add(name + ".w", {co, ci, kk, kk});
        if (hasBias) bIdx = ps.add(name + ".b", {co});
    }

    int outDim(int in) const { return (in + 2 * pad - dil * (k - 1) - 1) / stride + 1; }

    Eigen::MatrixXd im2col(const Tensor& x, int oh, int ow) const {
        Eigen::MatrixXd cols(size_t(cin) * k * k, size_t(oh) * ow);
        for (int oy = 0; oy < oh; ++oy) {
            for (int ox = 0; ox < ow; ++ox) {
                size_t col = size_t(oy) * ow + ox;
                double* dst = cols.data() + col * cols.rows();
                for (int ci = 0; ci < cin; ++ci) {
                    for (int ky = 0; ky < k; ++ky) {
                        int iy = oy * stride - pad + ky * dil;
                        for (int kx = 0; kx < k; ++kx) {
                            int ix = ox * stride - pad + kx * dil;
                            *dst++ = (iy >= 0 && iy < x.h && ix >= 0 && ix < x.w)
                                         ? x.at(ci, iy, ix)
                                         : 0.0;
                        }
                    }
                }
            }
        }
        return cols;
    }

    Tensor forward(const ParamStore& ps, Tape* tape, const Tensor& x) const {
        if (x.c != cin) throw ShapeMismatch("conv input channels");
        int oh = outDim(x.h), ow = outDim(x.w);
        if (oh <= 0 || ow <= 0) throw ShapeMismatch("conv output collapsed");
        Eigen::MatrixXd cols = im2col(x, oh, ow);
        Tensor y(cout, oh, ow);
        CMapRM W(ps.val(wIdx), cout, size_t(cin) * k * k);
        MapRM Y(y.v.data(), cout, size_t(oh) * ow);
        Y.noalias() = W * cols;
        if (hasBias) {
            const double* b = ps.val(bIdx);
            for (int co = 0; co < cout; ++co) Y.row(co).array() += b[co];
        }
        if (tape) {
            Tensor shape(1, 1, 2);
            shape.v[0] = x.h;
            shape.v[1] = x.w;
            tape->push(std::move(shape));
            Tensor colsT(1, int(cols.rows()), int(cols.cols()));
            std::copy(cols.data(), cols.data() + cols.size(), colsT.v.begin());
            tape->push(std::move(colsT));
        }
        return y;
    }

    Tensor backward(ParamStore& ps, Tape& tape, const Tensor& dy) const {
        Tensor colsT = tape.pop();
        Tensor shape = tape.pop();
        int xh = int(shape.v[0]), xw = int(shape.v[1]);
        int oh = dy.h, ow = dy.w;
        Eigen::Map<const Eigen::MatrixXd> cols(colsT.v.data(), colsT.h, colsT.w);
        CMapRM dY(dy.v.data(), cout, size_t(oh) * ow);

        MapRM dW(ps.grad(wIdx), cout, size_t(cin) * k * k);
        dW.noalias() += dY * cols.transpose();
        if (hasBias) {
            double* db = ps.grad(bIdx);
            for (int co = 0; co < cout; ++co) db[co] += dY.row(co).sum();
        }

        CMapRM W(ps.val(wIdx), cout, size_t(cin) * k * k);
        Eigen::MatrixXd dCols = W.transpose() * dY;

        Tensor dx(cin, xh, xw);
        for (int oy = 0; oy < oh; ++oy) {
            for (int ox = 0; ox < ow; ++ox) {
                size_t col = size_t(oy) * ow + ox;
                const double* src = dCols.data() + col * dCols.rows();
                for (int ci = 0; ci < cin; ++ci) {
                    for (int ky = 0; ky < k; ++ky) {
                        int iy = oy * stride - pad + ky * dil;
                        for (int kx = 0; kx < k; ++kx) {
                            int ix = ox * stride - pad + kx * dil;
                            double g = *src++;
                            if (iy >= 0 && iy < xh && ix >= 0 && ix < xw)
                                dx.at(ci, iy, ix) += g;
                        }
                    }
                }
            }
        }
        return dx;
    }
};

// Per-channel normalization over spatial positions (batch-free) with learned
// scale and shift.
struct ChanNorm {
    static constexpr double kEps = 1e-5;
    int channels = 0;
    size_t gIdx = 0, bIdx = 0;

    void init(ParamStore& ps, const std::string& name, int c) {
        channels = c;
        gIdx = ps.add(name + ".g", {c});
        bIdx = ps.add(name + ".b", {c});
    }

    Tensor forward(const ParamStore& ps, Tape* tape, const Tensor& x) const {
        if (x.c != channels) throw ShapeMismatch("norm channels");
        int n = x.spatial();
        Tensor y(x.c, x.h, x.w);
        Tensor xhat(x.c, x.h, x.w);
        Tensor inv(1, 1, x.c);
        const double* g = ps.val(gIdx);
        const double* b = ps.val(bIdx);
        for (int c = 0; c < x.c; ++c) {
            const double* xc = x.v.data() + size_t(c) * n;
            double mean = 0.0;
            for (int i = 0; i < n; ++i) mean += xc[i];
            mean /= n;
            double var = 0.0;
            for (int i = 0; i < n; ++i) var += (xc[i] - mean) * (xc[i] - mean);
            var /= n;
            double is = 1.0 / std::sqrt(var + kEps);
            inv.v[c] = is;
            double* hc = xhat.v.data() + size_t(c) * n;
            double* yc = y.v.data() + size_t(c) * n;
            for (int i = 0; i < n; ++i) {
                hc[i] = (xc[i] - mean) * is;
                yc[i] = g[c] * hc[i] + b[c];
            }
        }
        if (tape) {
            tape->push(std::move(inv));
            tape->push(std::move(xhat));
        }
        return y;
    }

    Tensor backward(ParamStore& ps, Tape& tape, const Tensor& dy) const {
        Tensor xhat = tape.pop();
        Tensor inv = tape.pop();
        int n = dy.spatial();
        Tensor dx(dy.c, dy.h, dy.w);
        const double* g = ps.val(gIdx);
        double* dg = ps.grad(gIdx);
        double* db = ps.grad(bIdx);
        for (int c = 0; c < dy.c; ++c) {
            const double* dyc = dy.v.data() + size_t(c) * n;
            const double* hc = xhat.v.data() + size_t(c) * n;
            double sumDy = 0.0, sumDyH = 0.0;
            for (int i = 0; i < n; ++i) {
                sumDy += dyc[i];
                sumDyH += dyc[i] * hc[i];
            }
            db[c] += sumDy;
            dg[c] += sumDyH;
            double mDy = sumDy / n, mDyH = sumDyH / n;
            double gis = g[c] * inv.v[c];
            double* dxc = dx.v.data() + size_t(c) * n;
            for (int i = 0; i < n; ++i) dxc[i] = gis * (dyc[i] - mDy - hc[i] * mDyH);
        }
        return dx;
    }
};

struct Relu {
    Tensor forward(Tape* tape, const Tensor& x) const {
        Tensor y(x.c, x.h, x.w);
        for (size_t i = 0; i < x.size(); ++i) y.v[i] = x.v[i] > 0.0 ? x.v[i] : 0.0;
        if (tape) tape->push(y);
        return y;
    }

    Tensor backward(Tape& tape, const Tensor& dy) const {
        Tensor y = tape.pop();
        Tensor dx(dy.c, dy.h, dy.w);
        for (size_t i = 0; i < dy.size(); ++i) dx.v[i] = y.v[i] > 0.0 ? dy.v[i] : 0.0;
        return dx;
    }
};

struct Sigmoid {
    Tensor forward(Tape* tape, const Tensor& x) const {
        Tensor y(x.c, x.h, x.w);
        for (size_t i = 0; i < x.size(); ++i) y.v[i] = 1.0 / (1.0 + std::exp(-x.v[i]));
        if (tape) tape->push(y);
        return y;
    }

    Tensor backward(Tape& tape, const Tensor& dy) const {
        Tensor y = tape.pop();
        Tensor dx(dy.c, dy.h, dy.w);
        for (size_t i = 0; i < dy.size(); ++i) dx.v[i] = dy.v[i] * y.v[i] * (1.0 - y.v[i]);
        return dx;
    }
};

}  // namespace distfield
