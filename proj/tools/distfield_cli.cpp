// distfield: synthesize distorted-fingerprint datasets, train the dense
// distortion regressor, rectify single images, fit the PCA baseline, and run
// the evaluation protocol.

#include <CLI11.hpp>
#include <distfield/distfield.hpp>

#include <array>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;
using namespace distfield;

namespace {

constexpr int kExitUsage = 64;

// Flat key=value run configuration. Unknown keys are rejected and every run
// echoes the fully resolved configuration into its output directory.
struct RunConfig {
    NetworkConfig net;
    int epochs = 50;
    double learningRate = 1e-3;
    int batchSize = 4;
    double lambdaSmo = 1.0;
    double valFraction = 0.1;
    double weightDecay = 1e-4;
    uint64_t seed = 0;
    std::array<double, kNumBins + 1> binEdges = defaultBinEdges();

    void apply(const std::string& key, const std::string& value) {
        if (key == "inputSize") net.inputSize = std::stoi(value);
        else if (key == "baseChannels") net.baseChannels = std::stoi(value);
        else if (key == "numResidualBlocks") net.numResidualBlocks = std::stoi(value);
        else if (key == "includeGapBranch") net.includeGapBranch = std::stoi(value) != 0;
        else if (key == "blockSize") net.blockSize = std::stoi(value);
        else if (key == "pyramidDilations") {
            net.pyramidDilations.clear();
            std::istringstream ss(value);
            std::string tok;
            while (std::getline(ss, tok, ',')) net.pyramidDilations.push_back(std::stoi(tok));
        } else if (key == "epochs") epochs = std::stoi(value);
        else if (key == "learningRate") learningRate = std::stod(value);
        else if (key == "batchSize") batchSize = std::stoi(value);
        else if (key == "lambdaSmo") lambdaSmo = std::stod(value);
        else if (key == "valFraction") valFraction = std::stod(value);
        else if (key == "weightDecay") weightDecay = std::stod(value);
        else if (key == "seed") seed = std::stoull(value);
        else if (key == "binEdges") {
            std::istringstream ss(value);
            std::string tok;
            size_t i = 0;
            while (std::getline(ss, tok, ',')) {
                if (i >= binEdges.size()) throw IoError("too many bin edges");
                binEdges[i++] = (tok == "inf") ? std::numeric_limits<double>::infinity()
                                               : std::stod(tok);
            }
            if (i != binEdges.size()) throw IoError("need exactly 8 bin edges");
        } else {
            throw IoError("unknown config key: " + key);
        }
    }

    void loadFile(const std::string& path) {
        std::ifstream f(path);
        if (!f) throw IoError("cannot read config " + path);
        std::string line;
        while (std::getline(f, line)) {
            if (line.empty() || line[0] == '#') continue;
            size_t eq = line.find('=');
            if (eq == std::string::npos) throw IoError("bad config line: " + line);
            apply(line.substr(0, eq), line.substr(eq + 1));
        }
    }

    std::string toText() const {
        std::ostringstream ss;
        ss << net.toText();
        ss << "epochs=" << epochs << "\n";
        ss << "learningRate=" << formatG17(learningRate) << "\n";
        ss << "batchSize=" << batchSize << "\n";
        ss << "lambdaSmo=" << formatG17(lambdaSmo) << "\n";
        ss << "valFraction=" << formatG17(valFraction) << "\n";
        ss << "weightDecay=" << formatG17(weightDecay) << "\n";
        ss << "seed=" << seed << "\n";
        ss << "binEdges=";
        for (size_t i = 0; i < binEdges.size(); ++i) {
            if (i) ss << ",";
            if (std::isinf(binEdges[i])) ss << "inf";
            else ss << formatG17(binEdges[i]);
        }
        ss << "\n";
        return ss.str();
    }
};

void echoConfig(const RunConfig& cfg, const fs::path& outDir, const std::string& command) {
    std::error_code ec;
    fs::create_directories(outDir, ec);
    std::ofstream f(outDir / ("resolved_config_" + command + ".txt"));
    if (!f) throw IoError("cannot echo config into " + outDir.string());
    f << cfg.toText();
}

GrayImage reflectivePad(const GrayImage& img, int W, int H) {
    GrayImage out(W, H);
    for (int y = 0; y < H; ++y) {
        int sy = y < img.height ? y : 2 * img.height - 2 - y;
        for (int x = 0; x < W; ++x) {
            int sx = x < img.width ? x : 2 * img.width - 2 - x;
            out.at(x, y) = img.at(sx, sy);
        }
    }
    return out;
}

int cmdSynth(int count, int size, uint64_t seed, const std::string& out, const RunConfig& cfg) {
    writeDataset(out, count, size, seed);
    echoConfig(cfg, out, "synth");
    std::cout << "wrote " << count << " samples to " << out << "\n";
    return 0;
}

int cmdTrain(const std::string& dataDir, const std::string& out, const RunConfig& cfg) {
    Dataset ds = readDataset(dataDir);
    if (ds.samples.empty()) throw InsufficientSamples("dataset is empty");
    RunConfig resolved = cfg;
    resolved.net.inputSize = ds.samples[0].distorted.width;
    resolved.net.validate();

    Network net(resolved.net);
    TrainOptions opts;
    opts.epochs = resolved.epochs;
    opts.learningRate = resolved.learningRate;
    opts.seed = resolved.seed;
    opts.batchSize = resolved.batchSize;
    opts.lambdaSmo = resolved.lambdaSmo;
    opts.valFraction = resolved.valFraction;
    opts.weightDecay = resolved.weightDecay;

    TrainResult result = train(net, ds.samples, opts);
    net.save(out);

    fs::path outDir = fs::path(out).has_parent_path() ? fs::path(out).parent_path() : fs::path(".");
    echoConfig(resolved, outDir, "train");
    std::ofstream log(outDir / "train_log.csv");
    log << "epoch,loss_reg,loss_smo,loss_total,val_reg_root\n";
    for (const EpochLog& e : result.log)
        log << e.epoch << "," << formatG17(e.train.reg) << "," << formatG17(e.train.smo) << ","
            << formatG17(e.train.total) << "," << formatG17(e.valRegRoot) << "\n";

    std::cout << "parameters: " << net.parameterCount() << "\n";
    std::cout << "best epoch: " << result.bestEpoch
              << " val L_reg^R: " << result.bestValRegRoot << "\n";
    std::cout << "saved " << out << "\n";
    return 0;
}

int cmdRectify(const std::string& modelPath, const std::string& imagePath,
               const std::string& maskPath, const std::string& outPrefix, const RunConfig& cfg) {
    Network net = Network::load(modelPath);
    GrayImage input = loadImage(imagePath);

    int W = input.width, H = input.height;
    int bs = net.cfg.blockSize;
    int padW = (W + bs - 1) / bs * bs, padH = (H + bs - 1) / bs * bs;
    GrayImage padded = (padW != W || padH != H) ? reflectivePad(input, padW, padH) : input;

    FingerMask mask;
    if (!maskPath.empty()) {
        FingerMask loaded = loadPngMask(maskPath);
        if (loaded.width != W || loaded.height != H) throw DimensionMismatch("mask size");
        mask = FingerMask(padW, padH);
        for (int y = 0; y < H; ++y)
            for (int x = 0; x < W; ++x) mask.at(x, y) = loaded.at(x, y);
        mask = largestComponent(mask);
        if (mask.count() == 0) throw EmptyMask("provided mask is empty");
    } else {
        mask = segmentFingerprint(padded);
    }

    if (padded.width != net.cfg.inputSize || padded.height != net.cfg.inputSize)
        throw ModelConfigMismatch("image size " + std::to_string(padW) + "x" +
                                  std::to_string(padH) + " does not match model input " +
                                  std::to_string(net.cfg.inputSize));

    GrayImage norm = normalizedView(padded, mask);
    DistortionField field = net.forward(norm, mask);
    std::cout << "L_smo: " << formatG17(lossSmo(field)) << "\n";

    auto [rectified, rectMask] = rectify(padded, mask, field);
    GrayImage cropped(W, H);
    for (int y = 0; y < H; ++y)
        for (int x = 0; x < W; ++x) cropped.at(x, y) = rectified.at(x, y);
    saveImage(cropped, outPrefix + ".png");
    saveDfld(field, outPrefix + ".dfld");

    fs::path outDir = fs::path(outPrefix).has_parent_path() ? fs::path(outPrefix).parent_path()
                                                            : fs::path(".");
    echoConfig(cfg, outDir, "rectify");
    return 0;
}

int cmdPca(const std::string& dataDir, int k, const std::string& out, const RunConfig& cfg) {
    Dataset ds = readDataset(dataDir);
    std::vector<DistortionField> fields;
    fields.reserve(ds.samples.size());
    for (const TrainingSample& s : ds.samples) fields.push_back(s.gtField);
    PcaModel model = pcaFit(fields, k);
    saveDpca(model, out);
    fs::path outDir = fs::path(out).has_parent_path() ? fs::path(out).parent_path() : fs::path(".");
    echoConfig(cfg, outDir, "pca");
    std::cout << "retained " << model.k() << " components\n";
    return 0;
}

int cmdEval(const std::string& dataDir, const std::string& modelPath, const std::string& pcaPath,
            int pcaK, const std::string& outDir, const RunConfig& cfg) {
    Dataset ds = readDataset(dataDir);
    Network net = Network::load(modelPath);
    PcaModel pca;
    bool havePca = !pcaPath.empty();
    if (havePca) pca = loadDpca(pcaPath);

    std::vector<SampleReport> reports;
    std::vector<BinnedErrorReport> pcaBins;
    bool anyEmpty = false;

    for (size_t i = 0; i < ds.samples.size(); ++i) {
        const TrainingSample& s = ds.samples[i];
        SampleReport r;
        r.seed = ds.meta[i].seed;
        try {
            GridMask gm = maskToGrid(s.mask, s.gtField.blockSize);
            GrayImage norm = normalizedView(s.distorted, s.mask);
            DistortionField est = net.forward(norm, s.mask);
            r.regRoot = regErrorRoot(est, s.gtField, gm);
            r.bins = binByDistortion(est, s.gtField, gm, cfg.binEdges);
            r.wrongFraction = wrongVectorMask(est, s.gtField, gm).wrongFraction;

            auto [rectified, rectMask] = rectify(s.distorted, s.mask, est);
            FingerMask normalMask = segmentFingerprint(s.normal);
            ProxyScore before = proxyMatchScore(s.distorted, s.normal, s.mask, normalMask);
            ProxyScore after = proxyMatchScore(rectified, s.normal, rectMask, normalMask);
            r.nccBefore = before.score;
            r.nccAfter = after.score;
            r.emptyFlag = before.emptyOverlap || after.emptyOverlap;

            if (havePca) {
                std::vector<double> coeffs = pcaProject(pca, s.gtField);
                coeffs.resize(std::min<size_t>(coeffs.size(), size_t(pcaK)));
                DistortionField oracle = pcaReconstruct(pca, coeffs);
                pcaBins.push_back(binByDistortion(oracle, s.gtField, gm, cfg.binEdges));
            }
        } catch (const EmptyMask&) {
            r.emptyFlag = true;
        }
        anyEmpty = anyEmpty || r.emptyFlag;
        reports.push_back(r);
    }

    emitReport(reports, cfg.binEdges, outDir);
    if (havePca) {
        std::ofstream f(fs::path(outDir) / "bins_pca.csv");
        f << "bin,edge_lo,edge_hi,cell_count,mean_error\n";
        for (int b = 0; b < kNumBins; ++b) {
            double sum = 0.0;
            long count = 0;
            for (const BinnedErrorReport& rep : pcaBins) {
                if (rep.perBinCellCount[size_t(b)] > 0) {
                    sum += rep.perBinMeanError[size_t(b)] * double(rep.perBinCellCount[size_t(b)]);
                    count += rep.perBinCellCount[size_t(b)];
                }
            }
            f << (b + 1) << "," << formatG17(cfg.binEdges[size_t(b)]) << ","
              << formatG17(cfg.binEdges[size_t(b) + 1]) << "," << count << ",";
            if (count > 0) f << formatG17(sum / double(count));
            f << "\n";
        }
    }
    echoConfig(cfg, outDir, "eval");
    std::cout << "evaluated " << reports.size() << " samples -> " << outDir << "\n";
    return anyEmpty ? 2 : 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"dense fingerprint distortion-field estimation and rectification"};
    app.require_subcommand(1);

    std::string configPath, dataDir, outPath, modelPath, imagePath, maskPath, pcaPath;
    int count = 512, size = 128, k = 8;
    uint64_t seed = 0;
    int epochs = -1;

    CLI::App* synth = app.add_subcommand("synth", "generate a synthetic dataset");
    synth->add_option("--count", count, "number of samples");
    synth->add_option("--size", size, "image side, px");
    synth->add_option("--seed", seed, "base seed");
    synth->add_option("--out", outPath, "output directory")->required();
    synth->add_option("--config", configPath, "key=value config file");

    CLI::App* trainCmd = app.add_subcommand("train", "train the distortion regressor");
    trainCmd->add_option("--data", dataDir, "dataset directory")->required();
    trainCmd->add_option("--config", configPath, "key=value config file");
    trainCmd->add_option("--epochs", epochs, "override epoch count");
    trainCmd->add_option("--seed", seed, "training seed");
    trainCmd->add_option("--out", outPath, "output model path (.dfnn)")->required();

    CLI::App* rect = app.add_subcommand("rectify", "rectify a single image");
    rect->add_option("--model", modelPath, "model checkpoint (.dfnn)")->required();
    rect->add_option("--image", imagePath, "input image (png/pgm)")->required();
    rect->add_option("--mask", maskPath, "mask image (optional; segmented if absent)");
    rect->add_option("--out", outPath, "output prefix")->required();
    rect->add_option("--config", configPath, "key=value config file");

    CLI::App* evalCmd = app.add_subcommand("eval", "run the evaluation protocol");
    evalCmd->add_option("--data", dataDir, "dataset directory")->required();
    evalCmd->add_option("--model", modelPath, "model checkpoint (.dfnn)")->required();
    evalCmd->add_option("--pca", pcaPath, "PCA baseline (.dpca)");
    evalCmd->add_option("--k", k, "PCA components to use");
    evalCmd->add_option("--out", outPath, "report directory")->required();
    evalCmd->add_option("--config", configPath, "key=value config file");

    CLI::App* pcaCmd = app.add_subcommand("pca", "fit the PCA distortion baseline");
    pcaCmd->add_option("--data", dataDir, "dataset directory")->required();
    pcaCmd->add_option("--k", k, "component count");
    pcaCmd->add_option("--out", outPath, "output model path (.dpca)")->required();
    pcaCmd->add_option("--config", configPath, "key=value config file");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);  // exits 0
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << e.what() << "\n";
        return kExitUsage;
    }

    try {
        RunConfig cfg;
        if (!configPath.empty()) cfg.loadFile(configPath);
        if (seed != 0 || app.got_subcommand("synth") || app.got_subcommand("train")) {
            // command-line seed wins when given
            if (synth->count("--seed") || trainCmd->count("--seed")) cfg.seed = seed;
        }
        if (epochs >= 0) cfg.epochs = epochs;

        if (app.got_subcommand("synth")) return cmdSynth(count, size, cfg.seed, outPath, cfg);
        if (app.got_subcommand("train")) return cmdTrain(dataDir, outPath, cfg);
        if (app.got_subcommand("rectify"))
            return cmdRectify(modelPath, imagePath, maskPath, outPath, cfg);
        if (app.got_subcommand("eval"))
            return cmdEval(dataDir, modelPath, pcaPath, k, outPath, cfg);
        if (app.got_subcommand("pca")) return cmdPca(dataDir, k, outPath, cfg);
    } catch (const EmptyMask& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
