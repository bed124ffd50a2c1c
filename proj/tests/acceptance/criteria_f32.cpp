#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>

#include <json.hpp>

#include "acceptance/criteria.hpp"
#include "support/cli_helpers.hpp"
#include "xcc/ada/gan.hpp"
#include "xcc/cli/config.hpp"
#include "xcc/cli/dataset.hpp"
#include "xcc/cxp/phantoms.hpp"
#include "xcc/cxp/segmentation.hpp"
#include "xcc/explain/cam.hpp"
#include "xcc/fusion/checkpoint.hpp"

namespace acceptance {

using namespace xcc;
using namespace testing_support;
using nlohmann::json;

namespace {

constexpr unsigned kSeeds[] = {1, 2, 3, 4, 5};

std::string fmt(const char* f, double v) {
    char buf[96];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n == 0 ? NAN : n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double mean(const std::vector<double>& v) {
    double s = 0;
    for (double x : v) s += x;
    return v.empty() ? NAN : s / static_cast<double>(v.size());
}

std::string list(const std::vector<double>& v, const char* f = "%.2f") {
    std::string out;
    for (double x : v) out += (out.empty() ? "" : "/") + fmt(f, x);
    return out;
}

json read_json(const fs::path& p) { return json::parse(read_file(p)); }

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

void must(int code, const std::string& what) {
    if (code != 0) throw std::runtime_error(what + " exited with " + std::to_string(code));
}

}  // namespace

std::vector<SeedRun> existing_runs(const fs::path& work) {
    std::vector<SeedRun> runs;
    for (unsigned seed : kSeeds) {
        const fs::path dir = work / "e2e" / std::to_string(seed);
        if (fs::exists(dir / "combined/model.ckpt")) runs.push_back({seed, dir / "data", dir / "combined", dir / "ce_only"});
    }
    return runs;
}

Outcome end_to_end(const fs::path& work, std::vector<SeedRun>& runs) {
    std::vector<double> acc, acc_ce, secs;
    for (unsigned seed : kSeeds) {
        SeedRun r{seed, work / "e2e" / std::to_string(seed) / "data", work / "e2e" / std::to_string(seed) / "combined",
                  work / "e2e" / std::to_string(seed) / "ce_only"};
        const std::string s = std::to_string(seed);
        must(xcc_run({"--seed", s, "--out", r.data.string(), "synth"}), "synth");
        auto t0 = std::chrono::steady_clock::now();
        must(xcc_run({"--seed", s, "--out", r.combined.string(), "train", "--data", r.data.string()}), "train");
        secs.push_back(seconds_since(t0));
        must(xcc_run({"--seed", s, "--out", r.ce_only.string(), "train", "--data", r.data.string(), "--phi", "fixed:0"}),
             "train (ce-only)");
        for (const fs::path& run : {r.combined, r.ce_only}) {
            must(xcc_run({"--seed", s, "--out", (run / "eval").string(), "eval", "--ckpt", (run / "model.ckpt").string(),
                          "--data", r.data.string(), "--split", "test"}),
                 "eval");
            (run == r.combined ? acc : acc_ce).push_back(read_json(run / "eval/metrics.json").at("accuracy"));
        }
        runs.push_back(r);
    }
    const double med = median(acc), med_time = median(secs);
    const bool pass = med >= 0.95 && med_time <= 300 && mean(acc_ce) <= mean(acc);
    return {pass, "test acc " + list(acc, "%.3f") + " (median " + fmt("%.3f", med) + "), CE-only " + list(acc_ce, "%.3f") +
                      " (mean " + fmt("%.3f", mean(acc_ce)) + " vs " + fmt("%.3f", mean(acc)) + "), train time median " +
                      fmt("%.0fs", med_time)};
}

Outcome gan_smoke() {
    RngStream rng(801);
    std::vector<GrayImage> reals;
    for (std::size_t i = 0; i < 64; ++i) {
        RngStream r = rng.split(i);
        reals.push_back(make_blob_sample(BlobSpec{32, 0.03}, static_cast<int>(i % 2), r).image);
    }
    AdaConfig cfg;
    cfg.steps = 1000;
    cfg.resolution = 32;
    auto t0 = std::chrono::steady_clock::now();
    const AdaTrainResult a = train_ada(reals, cfg);
    const double secs = seconds_since(t0);
    const AdaTrainResult b = train_ada(reals, cfg);
    bool finite = a.curve.size() == 1000, same = a.curve.size() == b.curve.size();
    for (std::size_t i = 0; i < a.curve.size(); ++i) {
        finite = finite && std::isfinite(a.curve[i].d_loss) && std::isfinite(a.curve[i].g_loss) && std::isfinite(a.curve[i].reg);
        same = same && a.curve[i].d_loss == b.curve[i].d_loss && a.curve[i].g_loss == b.curve[i].g_loss &&
               a.curve[i].reg == b.curve[i].reg;
    }
    auto image_means = [](const std::vector<GrayImage>& imgs) {
        std::vector<double> m;
        for (const GrayImage& g : imgs) {
            double s = 0;
            for (Real v : g.pixels) s += v;
            m.push_back(s / static_cast<double>(g.pixels.size()));
        }
        return m;
    };
    RngStream srng(802);
    const std::vector<double> real_means = image_means(reals), fake_means = image_means(a.generator.sample(64, srng));
    const double mr = mean(real_means), mf = mean(fake_means);
    double var = 0;
    for (double m : real_means) var += (m - mr) * (m - mr);
    const double sd = std::sqrt(var / static_cast<double>(real_means.size()));
    const bool pass = finite && same && std::abs(mf - mr) <= 3 * sd && secs <= 180;
    return {pass, std::string("losses ") + (finite ? "finite" : "NOT finite") + ", rerun " +
                      (same ? "bit-identical" : "DIFFERS") + ", |mean gen - mean real| = " + fmt("%.4f", std::abs(mf - mr)) +
                      " vs 3 sd = " + fmt("%.4f", 3 * sd) + ", " + fmt("%.0fs", secs) + " per run"};
}

Outcome segmentation(const fs::path& work) {
    std::vector<double> iou;
    for (unsigned seed : kSeeds) {
        const fs::path out = work / "seg" / std::to_string(seed);
        must(xcc_run({"--seed", std::to_string(seed), "--out", out.string(), "train-seg"}), "train-seg");
        iou.push_back(read_json(out / "seg_report.json").at("seg_mean_iou"));
    }
    // mask-and-crop invariants on random masks
    RngStream rng(901);
    std::size_t violations = 0;
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t h = 8 + rng.below(40), w = 8 + rng.below(40);
        GrayImage img(h, w);
        for (Real& v : img.pixels) v = static_cast<Real>(rng.uniform());
        BinaryMask m(h, w);
        const double density = rng.uniform(0.01, 0.5);
        for (auto& bit : m.bits) bit = rng.uniform() < density;
        m.at(rng.below(h), rng.below(w)) = 1;
        const GrayImage crop = apply_mask_and_crop(img, m);
        std::size_t r0 = h, c0 = w, r1 = 0, c1 = 0;
        for (std::size_t r = 0; r < h; ++r)
            for (std::size_t c = 0; c < w; ++c)
                if (m.at(r, c)) r0 = std::min(r0, r), c0 = std::min(c0, c), r1 = std::max(r1, r), c1 = std::max(c1, c);
        // tight box, masked pixels kept, unmasked pixels zero
        if (crop.height != r1 - r0 + 1 || crop.width != c1 - c0 + 1) {
            ++violations;
            continue;
        }
        for (std::size_t r = r0; r <= r1; ++r)
            for (std::size_t c = c0; c <= c1; ++c)
                if (crop.at(r - r0, c - c0) != (m.at(r, c) ? img.at(r, c) : Real(0))) ++violations;
    }
    const double med = median(iou);
    return {med >= 0.8 && violations == 0, "holdout IoU " + list(iou, "%.3f") + " (median " + fmt("%.3f", med) +
                                               "), mask-and-crop violations " + std::to_string(violations) + "/200 masks"};
}

Outcome explainability(const fs::path& work, const std::vector<SeedRun>& runs) {
    if (runs.empty()) return {false, "no trained models (criterion 7 did not run)"};
    std::vector<double> gc, gcpp, sc;
    for (const SeedRun& r : runs) {
        const fs::path out = work / "explain" / std::to_string(r.seed);
        must(xcc_run({"--seed", std::to_string(r.seed), "--out", out.string(), "explain", "--ckpt",
                      (r.combined / "model.ckpt").string(), "--data", r.data.string(), "--split", "test", "--method",
                      "grad-cam,grad-cam++,score-cam"}),
             "explain");
        const json loc = read_json(out / "localization.json");
        gc.push_back(loc.at("grad-cam").at("hit_rate"));
        gcpp.push_back(loc.at("grad-cam++").at("hit_rate"));
        sc.push_back(loc.at("score-cam").at("hit_rate"));
    }
    // range and tape checks on the first model
    Checkpoint ckpt = load_checkpoint(runs[0].combined / "model.ckpt");
    const json meta = json::parse(ckpt.config);
    RngStream init(ckpt.seed);
    const XccConfig mc = cli::model_config(meta.at("config"));
    XccNet net(mc, init);
    restore(ckpt, net.state());
    const cli::DatasetManifest m = cli::load_dataset(runs[0].data, 0);
    const LabeledSet test = cli::load_split(m, cli::Split::test, mc.image_size());
    bool in_range = true;
    std::size_t tape_nodes = 0;
    const std::size_t layer = net.sfx().blocks().size() - 1;
    for (std::size_t i = 0; i < std::min<std::size_t>(10, test.size()); ++i) {
        for (CamMethod method : {CamMethod::grad_cam, CamMethod::grad_cam_pp, CamMethod::score_cam})
            for (double v : compute_cam(net, test.images[i], method, layer, 1).grid) in_range = in_range && v >= 0 && v <= 1;
        Tape tape;
        TapeScope scope(tape);
        score_cam(net, test.images[i], layer, 1);
        tape_nodes += tape.size();
    }
    const double mg = median(gc), mp = median(gcpp), ms = median(sc);
    const bool pass = mg >= 0.8 && std::abs(mp - mg) <= 0.10 && ms >= 0.6 && in_range && tape_nodes == 0;
    return {pass, "hit rate medians grad-cam " + fmt("%.2f", mg) + " [" + list(gc) + "], grad-cam++ " + fmt("%.2f", mp) +
                      " [" + list(gcpp) + "], score-cam " + fmt("%.2f", ms) + " [" + list(sc) + "]; maps in [0,1]: " +
                      (in_range ? "yes" : "NO") + "; score-cam tape nodes " + std::to_string(tape_nodes)};
}

Outcome persistence(const fs::path& work) {
    // checkpoint round trip through the file system
    RngStream ra(1101), rb(1102);
    XccNet a(XccConfig::toy(32), ra), b(XccConfig::toy(32), rb);
    LabeledSet probe;
    RngStream pr(1103);
    for (std::size_t i = 0; i < 8; ++i) {
        RngStream r = pr.split(i);
        probe.images.push_back(make_blob_sample(BlobSpec{32, 0.03}, static_cast<int>(i % 2), r).image);
        probe.labels.push_back(static_cast<int>(i % 2));
    }
    train_xccnet(a, probe, probe, [] {
        TrainConfig c;
        c.epochs = 1;
        c.batch = 4;
        return c;
    }());
    const fs::path ck = work / "persist" / "roundtrip.ckpt";
    fs::create_directories(ck.parent_path());
    save_checkpoint(ck, capture(a.state(), 1, "{}"));
    restore(load_checkpoint(ck), b.state());
    const Tensor pa = a.predict(probe.batch(0, 8)), pb = b.predict(probe.batch(0, 8));
    const bool roundtrip = std::equal(pa.data().begin(), pa.data().end(), pb.data().begin()) &&
                           encode_checkpoint(load_checkpoint(ck)) == read_file(ck);

    // every command twice from scratch; all artifacts must match byte for byte
    const std::vector<std::string> cfg{
        "--seed", "11", "--set", "synth.size=32", "--set", "synth.train=48", "--set", "synth.val=12", "--set",
        "synth.test=12", "--set", "model.image_size=32", "--set", "train.epochs=2", "--set", "seg.size=32", "--set",
        "seg.phantoms=8", "--set", "seg.holdout=4", "--set", "seg.epochs=2", "--set", "rib.pairs=8", "--set",
        "rib.epochs=2", "--set", "gan.steps=20", "--set", "gan.sample_every=10", "--set", "gan.count=4", "--set",
        "preprocess.target_size=32", "--set", "preprocess.segment=true", "--set", "preprocess.rib_suppress=true"};
    auto pipeline = [&](const fs::path& root) {
        auto run = [&](const std::string& out, std::vector<std::string> tail) {
            std::vector<std::string> args = cfg;
            args.insert(args.end(), {"--out", (root / out).string()});
            args.insert(args.end(), tail.begin(), tail.end());
            must(xcc_run(args), tail.front());
        };
        const std::string data = (root / "data").string();
        run("data", {"synth"});
        run("seg", {"train-seg"});
        run("gan", {"train-gan", "--data", data});
        run("pre", {"preprocess", "--data", data, "--seg-ckpt", (root / "seg/seg.ckpt").string(), "--rib-ckpt",
                    (root / "seg/rib.ckpt").string()});
        run("train", {"train", "--data", data});
        run("eval", {"eval", "--ckpt", (root / "train/model.ckpt").string(), "--data", data, "--split", "test"});
        run("explain", {"explain", "--ckpt", (root / "train/model.ckpt").string(), "--data", data, "--split", "test",
                        "--method", "grad-cam,grad-cam++,score-cam"});
    };
    const fs::path r1 = work / "persist" / "run1", r2 = work / "persist" / "run2";
    pipeline(r1);
    pipeline(r2);
    std::string differing;
    std::size_t files = 0;
    for (const char* cmd : {"data", "seg", "gan", "pre", "train", "eval", "explain"}) {
        const auto t1 = tree_bytes(r1 / cmd), t2 = tree_bytes(r2 / cmd);
        files += t1.size();
        if (t1 != t2 || t1.empty()) differing += std::string(" ") + cmd;
    }
    return {roundtrip && differing.empty(),
            std::string("checkpoint round trip ") + (roundtrip ? "bit-identical" : "DIFFERS") + "; 7 commands, " +
                std::to_string(files) + " artifacts " + (differing.empty() ? "byte-identical" : "differ in:" + differing)};
}

}  // namespace acceptance
