#pragma once

#include <algorithm>
#include <numeric>
#include <vector>

#include "distfield/common.hpp"
#include "distfield/error.hpp"
#include "distfield/eval_metrics.hpp"
#include "distfield/network.hpp"
#include "distfield/synth.hpp"

namespace distfield {

// Adam with decoupled weight decay and cosine learning-rate decay.
struct AdamW {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    double weightDecay = 1e-4;
    long totalSteps = 1;

    std::vector<double> m, v;
    long t = 0;

    void reset(size_t n) {
        m.assign(n, 0.0);
        v.assign(n, 0.0);
        t = 0;
    }

    double currentLr() const {
        double frac = totalSteps > 0 ? double(t) / double(totalSteps) : 1.0;
        return lr * 0.5 * (1.0 + std::cos(kPi * std::min(frac, 1.0)));
    }

    void step(std::vector<double>& params, const std::vector<double>& grads) {
        double lrT = currentLr();
        ++t;
        double bc1 = 1.0 - std::pow(beta1, double(t));
        double bc2 = 1.0 - std::pow(beta2, double(t));
        for (size_t i = 0; i < params.size(); ++i) {
            double g = grads[i];
            m[i] = beta1 * m[i] + (1.0 - beta1) * g;
            v[i] = beta2 * v[i] + (1.0 - beta2) * g * g;
            double mhat = m[i] / bc1;
            double vhat = v[i] / bc2;
            params[i] -= lrT * (mhat / (std::sqrt(vhat) + eps) + weightDecay * params[i]);
        }
    }
};

struct TrainOptions {
    int epochs = 50;
    double learningRate = 1e-3;
    uint64_t seed = 0;
    int batchSize = 4;
    double lambdaSmo = 1.0;
    double valFraction = 0.1;
    double weightDecay = 1e-4;
};

struct EpochLog {
    int epoch = 0;
    LossBreakdown train;      // epoch mean
    double valRegRoot = 0.0;  // NaN when there is no validation split
};

struct TrainResult {
    std::vector<double> bestParams;
    std::vector<EpochLog> log;
    int bestEpoch = -1;  // -1: initialization (epochs == 0 or no improvement)
    double bestValRegRoot = 0.0;
};

// Deterministic training: fixed initialization, fixed shuffle order, and a
// fixed augmentation schedule (each sample is shown under one element of the
// 8-element group per epoch, cycling through all of them across epochs).
inline TrainResult train(Network& net, const std::vector<TrainingSample>& dataset,
                         const TrainOptions& opts) {
    if (dataset.empty()) throw InsufficientSamples("train needs a nonempty dataset");
    net.initParams(opts.seed);

    size_t n = dataset.size();
    size_t nVal = size_t(std::llround(double(n) * opts.valFraction));
    if (nVal >= n) nVal = n - 1;
    size_t nTrain = n - nVal;
    std::vector<const TrainingSample*> trainSet, valSet;
    for (size_t i = 0; i < nTrain; ++i) trainSet.push_back(&dataset[i]);
    for (size_t i = nTrain; i < n; ++i) valSet.push_back(&dataset[i]);

    AdamW opt;
    opt.lr = opts.learningRate;
    opt.weightDecay = opts.weightDecay;
    long stepsPerEpoch = long((nTrain + size_t(opts.batchSize) - 1) / size_t(opts.batchSize));
    opt.totalSteps = std::max(1l, stepsPerEpoch * opts.epochs);
    opt.reset(net.params.values.size());

    TrainResult result;
    result.bestParams = net.params.values;
    result.bestValRegRoot = std::numeric_limits<double>::infinity();

    Rng shuffleRng(opts.seed ^ 0x517CC1B727220A95ull);

    std::vector<size_t> order(nTrain);
    std::iota(order.begin(), order.end(), size_t(0));

    double initialTotal = -1.0;
    int badEpochs = 0;
    const auto& group = augmentGroup();

    for (int epoch = 0; epoch < opts.epochs; ++epoch) {
        // Fisher-Yates with the deterministic stream
        for (size_t i = nTrain; i > 1; --i) {
            size_t j = size_t(shuffleRng.below(i));
            std::swap(order[i - 1], order[j]);
        }

        LossBreakdown epochMean;
        epochMean.lambdaSmo = opts.lambdaSmo;
        size_t seen = 0;

        for (size_t start = 0; start < nTrain; start += size_t(opts.batchSize)) {
            size_t stop = std::min(nTrain, start + size_t(opts.batchSize));
            net.params.zeroGrads();
            for (size_t b = start; b < stop; ++b) {
                const TrainingSample& s = *trainSet[order[b]];
                const AugmentOp& op = group[(size_t(epoch) + b) % group.size()];
                TrainingSample a = op.apply(s);
                GrayImage norm = normalizedView(a.distorted, a.mask);
                LossBreakdown lb =
                    net.lossAndGradients(norm, a.mask, a.gtField, opts.lambdaSmo);
                epochMean.reg += lb.reg;
                epochMean.smo += lb.smo;
                epochMean.total += lb.total;
                ++seen;
            }
            double inv = 1.0 / double(stop - start);
            for (double& g : net.params.grads) g *= inv;
            opt.step(net.params.values, net.params.grads);
        }

        epochMean.reg /= double(seen);
        epochMean.smo /= double(seen);
        epochMean.total /= double(seen);

        EpochLog log;
        log.epoch = epoch;
        log.train = epochMean;
        log.valRegRoot = std::numeric_limits<double>::quiet_NaN();
        if (!valSet.empty()) {
            double sum = 0.0;
            for (const TrainingSample* s : valSet) {
                GrayImage norm = normalizedView(s->distorted, s->mask);
                DistortionField est = net.forward(norm, s->mask);
                sum += regErrorRoot(est, s->gtField, maskToGrid(s->mask, s->gtField.blockSize));
            }
            log.valRegRoot = sum / double(valSet.size());
            if (log.valRegRoot < result.bestValRegRoot) {
                result.bestValRegRoot = log.valRegRoot;
                result.bestParams = net.params.values;
                result.bestEpoch = epoch;
            }
        } else {
            result.bestParams = net.params.values;
            result.bestEpoch = epoch;
        }
        result.log.push_back(log);

        if (initialTotal < 0.0) initialTotal = epochMean.total;
        bool bad = !std::isfinite(epochMean.total) || epochMean.total > 10.0 * initialTotal;
        badEpochs = bad ? badEpochs + 1 : 0;
        if (badEpochs >= 3) throw DivergenceDetected("training loss diverged");
    }

    net.params.values = result.bestParams;
    return result;
}

// Mean L_reg^R of a model over a sample list (each sample scored on its own
// grid mask).
inline double meanRegRoot(const Network& net, const std::vector<TrainingSample>& samples) {
    double sum = 0.0;
    for (const TrainingSample& s : samples) {
        GrayImage norm = normalizedView(s.distorted, s.mask);
        DistortionField est = net.forward(norm, s.mask);
        sum += regErrorRoot(est, s.gtField, maskToGrid(s.mask, s.gtField.blockSize));
    }
    return samples.empty() ? 0.0 : sum / double(samples.size());
}

}  // namespace distfield
