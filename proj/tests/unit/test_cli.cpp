#include <gtest/gtest.h>

#include <cmath>

#include "support/cli_helpers.hpp"
#include "xcc/cli/dataset.hpp"
#include "xcc/cli/synth.hpp"
#include "xcc/cxp/resize.hpp"

using namespace xcc;
using namespace xcc::cli;
using namespace testing_support;

namespace {

std::vector<std::string> small_synth(const fs::path& out, const std::string& seed = "3") {
    return {"--seed", seed, "--out", out.string(), "--set", "synth.train=16", "--set", "synth.val=6",
            "--set", "synth.test=6", "--set", "synth.size=32", "synth"};
}

}  // namespace

TEST(Config, DefaultsOverridesAndSeed) {
    const Json c = load_config({}, {"train.lr=0.01", "model.preset=canonical", "seg.channels=[2,4,4,8]"}, 42);
    EXPECT_EQ(c.at("train").at("lr"), 0.01);
    EXPECT_EQ(c.at("model").at("preset"), "canonical");
    EXPECT_EQ(c.at("seg").at("channels").size(), 4u);
    EXPECT_EQ(config_seed(c), 42u);
}

TEST(Config, StrictKeysAndTypes) {
    EXPECT_THROW(load_config({}, {"train.learning_rate=0.1"}, {}), ValueError);
    EXPECT_THROW(load_config({}, {"nosuch.key=1"}, {}), ValueError);
    EXPECT_THROW(load_config({}, {"train.epochs=2.5"}, {}), ValueError);
    EXPECT_THROW(load_config({}, {"train.ce_only=3"}, {}), ValueError);
    EXPECT_THROW(load_config({}, {"train"}, {}), ValueError);
    EXPECT_NO_THROW(load_config({}, {"train.lr=1"}, {}));  // integer literal for a float key
}

TEST(Config, EchoReplaysToTheSameConfig) {
    const fs::path dir = scratch_dir("config_echo");
    const Json c = load_config({}, {"train.epochs=3", "explain.method=score-cam"}, 9);
    write_file(dir / "c.json", config_echo(c));
    EXPECT_EQ(load_config(dir / "c.json", {}, {}), c);
    write_file(dir / "bad.json", R"({"train": {"epoch": 3}})");
    EXPECT_THROW(load_config(dir / "bad.json", {}, {}), ValueError);
}

TEST(Config, ConvertersValidate) {
    const Json c = load_config({}, {}, {});
    EXPECT_EQ(model_config(c).image_size(), 64u);
    EXPECT_EQ(train_config(c).seed, 1u);
    EXPECT_THROW(train_config(load_config({}, {"train.phi=sometimes"}, {})), ValueError);
    EXPECT_THROW(train_config(load_config({}, {"train.schedule=alternate"}, {})), ValueError);
}

TEST(Splits, StratifiedCountsAndDeterminism) {
    for (std::size_t n : {10u, 17u, 101u}) {
        std::vector<SampleRecord> recs;
        for (std::size_t i = 0; i < n; ++i) recs.push_back({std::to_string(i), "", static_cast<int>(i % 3 == 0), {}, {}, {}});
        auto a = recs, b = recs;
        assign_splits(a, 0.8, 0.1, 5);
        assign_splits(b, 0.8, 0.1, 5);
        for (int label : {0, 1}) {
            std::size_t total = 0, tr = 0, va = 0;
            for (const auto& r : a) {
                if (r.label != label) continue;
                ++total;
                tr += r.split == Split::train;
                va += r.split == Split::val;
            }
            EXPECT_LE(std::abs(static_cast<double>(tr) - 0.8 * total), 1.0);
            EXPECT_LE(std::abs(static_cast<double>(va) - 0.1 * total), 1.0);
        }
        for (std::size_t i = 0; i < n; ++i) EXPECT_EQ(a[i].split, b[i].split);
    }
}

TEST(Synth, CountsBoxesAndPatchEnergy) {
    SynthConfig cfg;
    cfg.size = 32;
    cfg.train = 11;
    cfg.val = 4;
    cfg.test = 4;
    const auto corpus = generate_corpus(cfg, 2);
    ASSERT_EQ(corpus.size(), 19u);
    std::size_t positives = 0;
    for (const SynthSample& s : corpus) {
        EXPECT_EQ(s.sample.image.height, 32u);
        for (Real v : s.sample.image.pixels) {
            EXPECT_GE(v, 0);
            EXPECT_LE(v, 1);
        }
        if (s.record.label == 0) {
            EXPECT_FALSE(s.record.box);
            continue;
        }
        ++positives;
        ASSERT_TRUE(s.record.box);
        const PatchBox& b = *s.record.box;
        EXPECT_LE(b.row + b.height, 32u);
        EXPECT_LE(b.col + b.width, 32u);
        double inside = 0;
        for (std::size_t r = b.row; r < b.row + b.height; ++r)
            for (std::size_t c = b.col; c < b.col + b.width; ++c) {
                const double d = s.sample.image.at(r, c) - s.sample.base.at(r, c);
                inside += d;
            }
        EXPECT_GT(inside, 0.0);
    }
    EXPECT_EQ(positives, 5u + 2 + 2);
}

TEST(Synth, CommandIsByteReproducible) {
    const fs::path a = scratch_dir("synth_a"), b = scratch_dir("synth_b"), c = scratch_dir("synth_c");
    ASSERT_EQ(xcc_run(small_synth(a)), 0);
    ASSERT_EQ(xcc_run(small_synth(b)), 0);
    ASSERT_EQ(xcc_run(small_synth(c, "4")), 0);
    const auto ta = tree_bytes(a), tb = tree_bytes(b);
    EXPECT_EQ(ta.size(), 28u + 3);  // images, manifest, boxes, config echo
    EXPECT_EQ(ta, tb);
    EXPECT_NE(ta.at("pneumonia/train_0000.pgm"), tree_bytes(c).at("pneumonia/train_0000.pgm"));
    const DatasetManifest m = load_dataset(a, 0);
    EXPECT_EQ(m.select(Split::train).size(), 16u);
    EXPECT_EQ(load_split(m, Split::test, 32).size(), 6u);
    EXPECT_EQ(load_split(m, Split::test, 16).images[0].height, 16u);
}

TEST(Dataset, DirectoryScanWithoutManifest) {
    const fs::path src = scratch_dir("scan_src");
    ASSERT_EQ(xcc_run(small_synth(src)), 0);
    fs::remove(src / kManifestName);
    const DatasetManifest m = load_dataset(src, 7);
    EXPECT_EQ(m.samples.size(), 28u);
    std::size_t train = m.select(Split::train).size();
    EXPECT_NEAR(static_cast<double>(train), 0.8 * 28, 2.0);
    EXPECT_THROW(load_dataset(src / "missing", 7), Error);
}

TEST(ExitCodes, InputErrors) {
    const fs::path out = scratch_dir("exit_input");
    EXPECT_EQ(xcc_run({}), kInputError);
    EXPECT_EQ(xcc_run({"bogus"}), kInputError);
    EXPECT_EQ(xcc_run({"--out", out.string(), "--set", "synth.nope=1", "synth"}), kInputError);
    EXPECT_EQ(xcc_run({"--out", out.string(), "train", "--data", (out / "none").string()}), kInputError);
}

TEST(ExitCodes, MissingSplitIsInputError) {
    const fs::path data = scratch_dir("exit_split");
    ASSERT_EQ(xcc_run({"--out", data.string(), "--set", "synth.train=8", "--set", "synth.val=0", "--set", "synth.test=0",
                       "--set", "synth.size=32", "synth"}),
              0);
    EXPECT_EQ(xcc_run({"--out", (data / "run").string(), "--set", "model.image_size=32", "train", "--data", data.string()}),
              kInputError);
}

TEST(ExitCodes, CheckpointErrors) {
    const fs::path dir = scratch_dir("exit_ckpt");
    write_file(dir / "junk.ckpt", "not a checkpoint");
    ASSERT_EQ(xcc_run(small_synth(dir / "data")), 0);
    EXPECT_EQ(xcc_run({"--out", (dir / "e").string(), "eval", "--ckpt", (dir / "junk.ckpt").string(), "--data",
                       (dir / "data").string()}),
              kCheckpointError);
    EXPECT_EQ(xcc_run({"--out", (dir / "e").string(), "eval", "--ckpt", (dir / "absent.ckpt").string(), "--data",
                       (dir / "data").string()}),
              kCheckpointError);
}

TEST(ExitCodes, LimeIsReservedAndUnimplemented) {
    const fs::path dir = scratch_dir("exit_lime");
    EXPECT_EQ(xcc_run({"--out", dir.string(), "explain", "--ckpt", "x.ckpt", "--method", "lime"}), kUnimplemented);
    EXPECT_EQ(xcc_run({"--out", dir.string(), "explain", "--ckpt", "x.ckpt", "--method", "grad-cam,lime"}),
              kUnimplemented);
}

TEST(ExitCodes, NonFiniteLossAborts) {
    const fs::path data = scratch_dir("exit_nan");
    ASSERT_EQ(xcc_run(small_synth(data)), 0);
    EXPECT_EQ(xcc_run({"--out", (data / "run").string(), "--set", "model.image_size=32", "--set", "train.lr=1e30",
                       "--set", "train.epochs=2", "train", "--data", data.string()}),
              kNumericAbort);
}

TEST(Preprocess, CorruptImageIsRecordedAndExitsTwo) {
    const fs::path data = scratch_dir("pre_corrupt");
    ASSERT_EQ(xcc_run(small_synth(data)), 0);
    write_file(data / "normal/train_0000.pgm", "P5\n32 32\n255\nshort");
    const fs::path out = data / "out";
    EXPECT_EQ(xcc_run({"--out", out.string(), "--set", "preprocess.target_size=32", "preprocess", "--data", data.string()}),
              kInputError);
    const std::string failures = read_file(out / "failures.json");
    EXPECT_NE(failures.find("normal/train_0000"), std::string::npos);
    EXPECT_EQ(load_dataset(out, 0).samples.size(), 27u);
}

TEST(Preprocess, StagesOffIsResizeOnlyAndReproducible) {
    const fs::path data = scratch_dir("pre_resize");
    auto synth = small_synth(data);
    synth[synth.size() - 2] = "synth.size=40";
    ASSERT_EQ(xcc_run(synth), 0);
    const std::vector<std::string> common{"--set", "preprocess.target_size=32", "--set", "preprocess.enhance=false"};
    auto args = [&](const fs::path& out) {
        std::vector<std::string> a{"--out", out.string()};
        a.insert(a.end(), common.begin(), common.end());
        a.insert(a.end(), {"preprocess", "--data", data.string()});
        return a;
    };
    ASSERT_EQ(xcc_run(args(data / "p1")), 0);
    ASSERT_EQ(xcc_run(args(data / "p2")), 0);
    EXPECT_EQ(tree_bytes(data / "p1"), tree_bytes(data / "p2"));
    const GrayImage src = read_pgm(data / "pneumonia/val_0001.pgm");
    const GrayImage out = read_pgm(data / "p1/pneumonia/val_0001.pgm");
    const GrayImage ref = resize_bicubic(src, 32, 32);
    ASSERT_EQ(out.pixels.size(), ref.pixels.size());
    for (std::size_t k = 0; k < ref.pixels.size(); ++k) EXPECT_EQ(to_level(out.pixels[k]), to_level(ref.pixels[k]));
}

TEST(OutRoot, FlagThenEnvironmentThenDefault) {
    EXPECT_EQ(resolve_out("given", "train"), fs::path("given"));
    ::setenv(kOutRootEnv, "/tmp/xcc_root", 1);
    EXPECT_EQ(resolve_out("", "train"), fs::path("/tmp/xcc_root/train"));
    ::unsetenv(kOutRootEnv);
    EXPECT_EQ(resolve_out("", "eval"), fs::path("xcc_out/eval"));
}
