#include <distfield/distfield.hpp>
#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

namespace fs = std::filesystem;

namespace {

const std::string kCli = DISTFIELD_CLI_PATH;

int runCli(const std::string& args) {
    std::string cmd = kCli + " " + args + " >/dev/null 2>&1";
    int status = std::system(cmd.c_str());
    return WEXITSTATUS(status);
}

std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    return std::string((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
}

class CliPipeline : public ::testing::Test {
protected:
    static fs::path base() { return fs::temp_directory_path() / "distfield_cli_test"; }

    static void SetUpTestSuite() {
        fs::remove_all(base());
        fs::create_directories(base());
        std::ofstream cfg(base() / "net.cfg");
        cfg << "baseChannels=4\nnumResidualBlocks=1\npyramidDilations=1,2\n"
            << "epochs=1\nbatchSize=2\nvalFraction=0.25\n";
    }

    static void TearDownTestSuite() { fs::remove_all(base()); }
};

TEST_F(CliPipeline, HelpExitsZeroUnknownFlagExits64) {
    EXPECT_EQ(runCli("--help"), 0);
    EXPECT_EQ(runCli("synth --help"), 0);
    EXPECT_EQ(runCli("--no-such-flag"), 64);
    EXPECT_EQ(runCli("synth --bogus 3 --out /tmp/x"), 64);
}

TEST_F(CliPipeline, UnknownConfigKeyRejected) {
    fs::path bad = base() / "bad.cfg";
    std::ofstream(bad) << "baseChannels=4\nnotAKey=1\n";
    EXPECT_EQ(runCli("synth --count 0 --size 128 --seed 1 --config " + bad.string() + " --out " +
                     (base() / "bad_ds").string()),
              1);
}

TEST_F(CliPipeline, CountZeroWritesManifestOnly) {
    fs::path dir = base() / "empty_ds";
    EXPECT_EQ(runCli("synth --count 0 --size 128 --seed 5 --out " + dir.string()), 0);
    EXPECT_TRUE(fs::exists(dir / "manifest.csv"));
    std::string manifest = slurp(dir / "manifest.csv");
    EXPECT_EQ(manifest, "seed,kind,magnitude,falloff,center_x,center_y\n");
}

TEST_F(CliPipeline, SynthIsByteDeterministic) {
    fs::path a = base() / "ds_a", b = base() / "ds_b";
    ASSERT_EQ(runCli("synth --count 2 --size 128 --seed 3 --out " + a.string()), 0);
    ASSERT_EQ(runCli("synth --count 2 --size 128 --seed 3 --out " + b.string()), 0);
    for (auto& entry : fs::recursive_directory_iterator(a)) {
        if (!entry.is_regular_file()) continue;
        fs::path rel = fs::relative(entry.path(), a);
        if (rel.string().rfind("resolved_config", 0) == 0) continue;
        EXPECT_EQ(slurp(entry.path()), slurp(b / rel)) << rel;
    }
}

TEST_F(CliPipeline, FullPipelineSmoke) {
    fs::path ds = base() / "ds";
    fs::path model = base() / "model.dfnn";
    fs::path pca = base() / "model.dpca";
    fs::path report = base() / "report";
    std::string cfg = (base() / "net.cfg").string();

    ASSERT_EQ(runCli("synth --count 4 --size 128 --seed 0 --out " + ds.string()), 0);
    ASSERT_TRUE(fs::exists(ds / "sample_00000" / "distorted.png"));
    ASSERT_TRUE(fs::exists(ds / "sample_00003" / "minutiae_distorted.csv"));

    ASSERT_EQ(runCli("train --data " + ds.string() + " --config " + cfg + " --epochs 1 --seed 0 --out " +
                     model.string()),
              0);
    ASSERT_TRUE(fs::exists(model));
    ASSERT_TRUE(fs::exists(base() / "train_log.csv"));
    ASSERT_TRUE(fs::exists(base() / "resolved_config_train.txt"));

    ASSERT_EQ(runCli("pca --data " + ds.string() + " --k 2 --out " + pca.string()), 0);
    ASSERT_TRUE(fs::exists(pca));

    ASSERT_EQ(runCli("rectify --model " + model.string() + " --image " +
                     (ds / "sample_00000" / "distorted.png").string() + " --mask " +
                     (ds / "sample_00000" / "mask.png").string() + " --out " +
                     (base() / "rect").string()),
              0);
    EXPECT_TRUE(fs::exists(base() / "rect.png"));
    EXPECT_TRUE(fs::exists(base() / "rect.dfld"));

    int evalCode = runCli("eval --data " + ds.string() + " --model " + model.string() + " --pca " +
                          pca.string() + " --k 2 --out " + report.string());
    EXPECT_TRUE(evalCode == 0 || evalCode == 2) << evalCode;  // 2 = EmptyOverlap samples reported
    EXPECT_TRUE(fs::exists(report / "summary.csv"));
    EXPECT_TRUE(fs::exists(report / "bins.csv"));
    EXPECT_TRUE(fs::exists(report / "bins_pca.csv"));

    std::string summary = slurp(report / "summary.csv");
    int rows = -1;  // exclude header
    for (char c : summary)
        if (c == '\n') ++rows;
    EXPECT_EQ(rows, 4);
}

TEST_F(CliPipeline, TrainEpochsZeroWritesInitCheckpoint) {
    fs::path ds = base() / "ds";
    fs::path model = base() / "model_init.dfnn";
    std::string cfg = (base() / "net.cfg").string();
    ASSERT_TRUE(fs::exists(ds / "manifest.csv"));
    EXPECT_EQ(runCli("train --data " + ds.string() + " --config " + cfg +
                     " --epochs 0 --seed 0 --out " + model.string()),
              0);
    EXPECT_TRUE(fs::exists(model));
}

TEST_F(CliPipeline, RectifyWithZeroFieldModelIsIdentity) {
    fs::path ds = base() / "ds";
    fs::path model = base() / "model_zero.dfnn";
    {
        distfield::NetworkConfig cfg;
        cfg.inputSize = 128;
        cfg.baseChannels = 4;
        cfg.numResidualBlocks = 1;
        cfg.pyramidDilations = {1, 2};
        distfield::Network net(cfg);  // all-zero params -> zero field
        net.save(model.string());
    }
    fs::path input = ds / "sample_00001" / "distorted.png";
    fs::path mask = ds / "sample_00001" / "mask.png";
    ASSERT_EQ(runCli("rectify --model " + model.string() + " --image " + input.string() +
                     " --mask " + mask.string() + " --out " + (base() / "rzero").string()),
              0);
    EXPECT_EQ(slurp(base() / "rzero.png"), slurp(input));
    distfield::DistortionField field = distfield::loadDfld((base() / "rzero.dfld").string());
    for (const distfield::Vec2& v : field.vectors) EXPECT_EQ(v.norm(), 0.0);
}

TEST_F(CliPipeline, RectifyBlankImageWithoutMaskExitsTwo) {
    fs::path model = base() / "model_zero.dfnn";
    ASSERT_TRUE(fs::exists(model));
    fs::path blank = base() / "blank.png";
    distfield::savePng(distfield::GrayImage(128, 128, 1.0), blank.string());
    EXPECT_EQ(runCli("rectify --model " + model.string() + " --image " + blank.string() +
                     " --out " + (base() / "rblank").string()),
              2);
    EXPECT_EQ(runCli("rectify --model " + model.string() + " --image " +
                     (base() / "nonexistent.png").string() + " --out " + (base() / "rx").string()),
              1);
}

}  // namespace
