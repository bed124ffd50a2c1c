#include "xcc/cli/commands.hpp"

#include <cstdio>
#include <cstdlib>
#include <iostream>

#include <CLI11.hpp>

#include "xcc/ada/augment.hpp"
#include "xcc/cxp/resize.hpp"
#include "xcc/cli/dataset.hpp"
#include "xcc/cli/synth.hpp"
#include "xcc/explain/cam.hpp"
#include "xcc/fusion/checkpoint.hpp"

namespace xcc::cli {

namespace fs = std::filesystem;
using OJson = nlohmann::ordered_json;

std::filesystem::path resolve_out(const std::string& flag, const std::string& command) {
    if (!flag.empty()) return flag;
    if (const char* root = std::getenv(kOutRootEnv); root != nullptr && *root != '\0') return fs::path(root) / command;
    return fs::path("xcc_out") / command;
}

namespace {

struct Context {
    Json cfg;
    fs::path out;
    std::uint64_t seed() const { return config_seed(cfg); }
    void prepare() const {
        fs::create_directories(out);
        write_file(out / "config.json", config_echo(cfg));
    }
};

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

void log(const std::string& msg) { std::cerr << "xcc: " << msg << "\n"; }

Checkpoint load_kind(const fs::path& path, const std::string& kind, Json& meta) {
    Checkpoint ckpt = load_checkpoint(path);
    meta = Json::parse(ckpt.config, nullptr, false);
    if (meta.is_discarded() || !meta.is_object() || meta.value("kind", "") != kind) {
        throw CheckpointError(path.string() + " is not a " + kind + " checkpoint");
    }
    return ckpt;
}

XccNet load_model(const fs::path& path, Json& meta) {
    const Checkpoint ckpt = load_kind(path, "xccnet", meta);
    RngStream rng(ckpt.seed);
    XccNet net(model_config(meta.at("config")), rng);
    restore(ckpt, net.state());
    return net;
}

// synth ----------------------------------------------------------------------

int cmd_synth(const Context& ctx) {
    ctx.prepare();
    const DatasetManifest m = write_corpus(generate_corpus(synth_config(ctx.cfg), ctx.seed()), ctx.out);
    log("wrote " + std::to_string(m.samples.size()) + " images to " + ctx.out.string());
    return kOk;
}

// preprocess -----------------------------------------------------------------

int cmd_preprocess(const Context& ctx, const std::string& data, const std::string& seg_path, const std::string& rib_path) {
    const PreprocessConfig pcfg = preprocess_config(ctx.cfg);
    const DatasetManifest in = load_dataset(data, ctx.seed());
    SegModel seg;
    RibModel rib;
    PreprocessModels models;
    if (pcfg.segment) {
        if (seg_path.empty()) throw ValueError("preprocess.segment needs --seg-ckpt");
        Json meta;
        const Checkpoint c = load_kind(seg_path, "seg", meta);
        RngStream rng(c.seed);
        seg = SegModel(meta.at("channels").get<std::vector<std::size_t>>(), rng);
        NamedTensors p;
        seg.params(p);
        restore(c, p);
        models.seg = &seg;
    }
    if (pcfg.rib_suppress) {
        if (rib_path.empty()) throw ValueError("preprocess.rib_suppress needs --rib-ckpt");
        Json meta;
        const Checkpoint c = load_kind(rib_path, "rib", meta);
        RngStream rng(c.seed);
        rib = RibModel(meta.at("filters").get<std::vector<std::size_t>>(), rng);
        NamedTensors p;
        rib.params(p);
        restore(c, p);
        models.rib = &rib;
    }
    ctx.prepare();
    DatasetManifest out;
    out.root = ctx.out;
    std::string provenance;
    OJson failures = OJson::array();
    for (const SampleRecord& r : in.samples) {
        try {
            const PreprocessResult res = preprocess(read_pgm(in.root / r.path), pcfg, models);
            fs::create_directories((ctx.out / r.path).parent_path());
            write_pgm(ctx.out / r.path, res.image);
            provenance += provenance_jsonl(r.id, res);
            out.samples.push_back(r);
        } catch (const Error& e) {
            log("preprocess failed for " + r.id + ": " + e.what());
            failures.push_back({{"id", r.id}, {"path", r.path}, {"error", e.what()}});
        }
    }
    write_file(ctx.out / "provenance.jsonl", provenance);
    write_file(ctx.out / "failures.json", failures.dump(2) + "\n");
    write_file(ctx.out / kManifestName, out.to_json());
    return failures.empty() ? kOk : kInputError;
}

// train-seg ------------------------------------------------------------------

int cmd_train_seg(const Context& ctx) {
    const Json& s = ctx.cfg.at("seg");
    const std::size_t size = s.at("size"), count = s.at("phantoms"), holdout = s.at("holdout");
    RngStream root(ctx.seed());
    RngStream train_rng = root.split(20), hold_rng = root.split(21);
    std::vector<std::pair<GrayImage, BinaryMask>> pairs;
    for (std::size_t i = 0; i < count; ++i) {
        LungPhantom p = make_lung_phantom(size, train_rng);
        pairs.emplace_back(std::move(p.image), std::move(p.mask));
    }
    ctx.prepare();
    const SegConfig scfg = seg_config(ctx.cfg);
    const SegTrainResult seg = train_segmentator(pairs, scfg);
    double iou = 0;
    for (std::size_t i = 0; i < holdout; ++i) {
        const LungPhantom p = make_lung_phantom(size, hold_rng);
        iou += mask_iou(segment_lungs(p.image, seg.model), p.mask);
    }
    iou = holdout > 0 ? iou / static_cast<double>(holdout) : 0.0;
    NamedTensors sp;
    seg.model.params(sp);
    save_checkpoint(ctx.out / "seg.ckpt",
                    capture(sp, ctx.seed(), Json{{"kind", "seg"}, {"channels", scfg.channels}}.dump()));
    std::string curve = "epoch,loss\n";
    for (std::size_t e = 0; e < seg.epoch_loss.size(); ++e) curve += std::to_string(e + 1) + fmt(",%.9g\n", seg.epoch_loss[e]);
    write_file(ctx.out / "seg_curve.csv", curve);

    const RibConfig rcfg = rib_config(ctx.cfg);
    const RibTrainResult rib = train_rib_suppressor(rcfg);
    NamedTensors rp;
    rib.model.params(rp);
    save_checkpoint(ctx.out / "rib.ckpt",
                    capture(rp, ctx.seed(), Json{{"kind", "rib"}, {"filters", rcfg.filters}}.dump()));
    curve = "epoch,loss\n";
    for (std::size_t e = 0; e < rib.epoch_loss.size(); ++e) curve += std::to_string(e + 1) + fmt(",%.9g\n", rib.epoch_loss[e]);
    write_file(ctx.out / "rib_curve.csv", curve);

    OJson report{{"seg_holdout", holdout}, {"seg_mean_iou", iou},
                 {"seg_final_loss", seg.epoch_loss.empty() ? 0.0 : seg.epoch_loss.back()},
                 {"rib_final_loss", rib.epoch_loss.empty() ? 0.0 : rib.epoch_loss.back()}};
    write_file(ctx.out / "seg_report.json", report.dump(2) + "\n");
    log("segmentation holdout IoU " + fmt("%.4f", iou));
    return kOk;
}

// train-gan ------------------------------------------------------------------

int cmd_train_gan(const Context& ctx, const std::string& data) {
    const AdaConfig acfg = ada_config(ctx.cfg);
    const int cls = ctx.cfg.at("gan").at("class");
    const std::size_t count = ctx.cfg.at("gan").at("count");
    if (cls != 0 && cls != 1) throw ValueError("gan.class must be 0 or 1");
    const DatasetManifest m = load_dataset(data, ctx.seed());
    std::vector<GrayImage> reals;
    for (const SampleRecord* r : m.select(Split::train)) {
        if (r->label != cls || r->origin != Origin::real) continue;
        GrayImage g = read_pgm(m.root / r->path);
        if (g.height != acfg.resolution || g.width != acfg.resolution) g = resize_bicubic(g, acfg.resolution, acfg.resolution);
        reals.push_back(std::move(g));
    }
    ctx.prepare();
    const AdaTrainResult res = train_ada(reals, acfg);
    NamedTensors gp;
    res.generator.params(gp);
    save_checkpoint(ctx.out / "generator.ckpt",
                    capture(gp, ctx.seed(), Json{{"kind", "generator"}, {"gan", ctx.cfg.at("gan")}}.dump()));
    std::string curve = "step,d_loss,g_loss,reg,total\n";
    for (const AdaCurvePoint& p : res.curve) {
        curve += std::to_string(p.step) + fmt(",%.9g", p.d_loss) + fmt(",%.9g", p.g_loss) + fmt(",%.9g", p.reg) +
                 fmt(",%.9g\n", p.total);
    }
    write_file(ctx.out / "gan_curve.csv", curve);
    for (const auto& [step, grid] : res.sample_grids) write_pgm(ctx.out / ("grid_step" + std::to_string(step) + ".pgm"), grid);

    const fs::path dir = ctx.out / class_dir(cls);
    fs::create_directories(dir);
    const ImageSampler sampler = generator_sampler(res.generator, ctx.seed());
    DatasetManifest synth;
    synth.root = ctx.out;
    for (std::size_t i = 0; i < count; ++i) {
        char name[64];
        std::snprintf(name, sizeof name, "synthetic_%04zu", i);
        SampleRecord r;
        r.id = std::string(class_dir(cls)) + "/" + name;
        r.path = r.id + ".pgm";
        r.label = cls;
        r.origin = Origin::synthetic;
        r.split = Split::train;
        write_pgm(ctx.out / r.path, sampler(i));
        synth.samples.push_back(std::move(r));
    }
    write_file(ctx.out / "synthetic_manifest.json", synth.to_json());
    log("trained " + std::to_string(acfg.steps) + " steps on " + std::to_string(reals.size()) + " images");
    return kOk;
}

// train ----------------------------------------------------------------------

OJson curve_json(const std::vector<EpochRecord>& curve) {
    OJson out = OJson::array();
    for (const EpochRecord& r : curve) {
        out.push_back({r.epoch, r.phi, r.lr, r.l_global, r.l_ce, r.l_combined, r.val_acc});
    }
    return out;
}

std::vector<EpochRecord> curve_from_json(const Json& j) {
    std::vector<EpochRecord> out;
    for (const Json& row : j) {
        out.push_back({row.at(0).get<std::size_t>(), row.at(1).get<double>(), row.at(2).get<double>(),
                       row.at(3).get<double>(), row.at(4).get<double>(), row.at(5).get<double>(),
                       row.at(6).get<double>()});
    }
    return out;
}

int cmd_train(const Context& ctx, const std::string& data, const std::string& resume) {
    const DatasetManifest m = load_dataset(data, ctx.seed());
    Json run_cfg = ctx.cfg;
    std::vector<EpochRecord> history;
    std::size_t done = 0;
    std::optional<Checkpoint> prior;
    if (!resume.empty()) {
        Json meta;
        prior = load_kind(resume, "xccnet", meta);
        run_cfg["model"] = meta.at("config").at("model");
        done = meta.at("epochs_done");
        history = curve_from_json(meta.at("curve"));
    }
    const XccConfig mcfg = model_config(run_cfg);
    TrainConfig tcfg = train_config(run_cfg);
    tcfg.first_epoch = done + 1;
    const LabeledSet train = load_split(m, Split::train, mcfg.image_size());
    const LabeledSet val = load_split(m, Split::val, mcfg.image_size());

    Context run{run_cfg, ctx.out};
    run.prepare();
    RngStream init(ctx.seed());
    XccNet net(mcfg, init);
    if (prior) restore(*prior, net.state());
    const TrainResult res = train_xccnet(net, train, val, tcfg);
    history.insert(history.end(), res.curve.begin(), res.curve.end());
    done += tcfg.epochs;

    OJson meta{{"kind", "xccnet"}, {"config", run_cfg}, {"epochs_done", done}, {"best_epoch", res.best_epoch},
               {"curve", curve_json(history)}};
    save_checkpoint(ctx.out / "model.ckpt", capture(net.state(), ctx.seed(), meta.dump()));
    write_file(ctx.out / "curves.csv", curves_csv(history));
    OJson report{{"epochs_done", done}, {"best_epoch", res.best_epoch}, {"best_val_acc", res.best_val_acc},
                 {"train_size", train.size()}, {"val_size", val.size()}};
    write_file(ctx.out / "train_report.json", report.dump(2) + "\n");
    log("best epoch " + std::to_string(res.best_epoch) + ", val acc " + fmt("%.4f", res.best_val_acc));
    return kOk;
}

// eval -----------------------------------------------------------------------

int cmd_eval(const Context& ctx, const std::string& ckpt, const std::string& data, const std::string& split_text) {
    Json meta;
    XccNet net = load_model(ckpt, meta);
    const Split split = parse_split(split_text);
    const DatasetManifest m = load_dataset(data, ctx.seed());
    const LabeledSet set = load_split(m, split, net.config().image_size());
    ctx.prepare();
    const Evaluation ev = evaluate(net, set);
    write_file(ctx.out / "metrics.csv", metrics_csv_header() + "\n" + metrics_csv_row(split_name(split), ev.metrics) + "\n");
    write_file(ctx.out / "metrics.json", metrics_json(split_name(split), ev.metrics));
    std::string preds = "id,label,prob,pred\n";
    const auto records = m.select(split);
    for (std::size_t i = 0; i < records.size(); ++i) {
        preds += records[i]->id + "," + std::to_string(records[i]->label) + fmt(",%.9g", ev.probs[i]) + "," +
                 std::to_string(decide(ev.probs[i])) + "\n";
    }
    write_file(ctx.out / "predictions.csv", preds);
    log(std::string(split_name(split)) + " accuracy " + fmt("%.4f", ev.metrics.accuracy));
    return kOk;
}

// explain --------------------------------------------------------------------

std::string file_tag(CamMethod m) {
    switch (m) {
        case CamMethod::grad_cam: return "gradcam";
        case CamMethod::grad_cam_pp: return "gradcampp";
        case CamMethod::score_cam: return "scorecam";
    }
    return "cam";
}

int cmd_explain(const Context& ctx, const std::string& ckpt, const std::vector<std::string>& images,
                const std::string& data, const std::string& split_text, const std::string& methods_text) {
    const Json& e = ctx.cfg.at("explain");
    std::vector<CamMethod> methods;
    std::string list = methods_text.empty() ? e.at("method").get<std::string>() : methods_text;
    for (std::size_t start = 0; start <= list.size();) {
        const std::size_t comma = std::min(list.find(',', start), list.size());
        const std::string name = list.substr(start, comma - start);
        if (name == "lime") throw UnimplementedError("explain method 'lime' is reserved and not implemented");
        methods.push_back(parse_cam_method(name));
        start = comma + 1;
    }
    Json meta;
    XccNet net = load_model(ckpt, meta);
    const long layer_cfg = e.at("layer");
    const std::size_t blocks = net.sfx().blocks().size();
    const std::size_t layer = layer_cfg < 0 ? blocks - 1 : static_cast<std::size_t>(layer_cfg);
    const int cls = e.at("class");
    const double alpha = e.at("alpha");
    const std::size_t size = net.config().image_size();

    struct Item {
        std::string tag;
        GrayImage image;
        std::optional<PatchBox> box;
        int label = -1;
    };
    std::vector<Item> items;
    for (const std::string& p : images) items.push_back({fs::path(p).stem().string(), read_pgm(p), std::nullopt, -1});
    if (!data.empty()) {
        const DatasetManifest m = load_dataset(data, ctx.seed());
        for (const SampleRecord* r : m.select(parse_split(split_text))) {
            std::string tag = r->id;
            std::replace(tag.begin(), tag.end(), '/', '_');
            items.push_back({tag, read_pgm(m.root / r->path), r->box, r->label});
        }
    }
    if (items.empty()) throw ValueError("explain needs --image or --data");
    ctx.prepare();
    OJson report = OJson::object();
    for (CamMethod method : methods) {
        std::size_t boxed = 0, hits = 0;
        for (Item& it : items) {
            if (it.image.height != size || it.image.width != size) {
                const double sy = static_cast<double>(size) / static_cast<double>(it.image.height);
                const double sx = static_cast<double>(size) / static_cast<double>(it.image.width);
                if (it.box) {
                    it.box = PatchBox{static_cast<std::size_t>(it.box->row * sy), static_cast<std::size_t>(it.box->col * sx),
                                      static_cast<std::size_t>(std::ceil(it.box->height * sy)),
                                      static_cast<std::size_t>(std::ceil(it.box->width * sx))};
                }
                it.image = resize_bicubic(it.image, size, size);
            }
            const CamMap cam = compute_cam(net, it.image, method, layer, cls);
            const std::string base = it.tag + "_" + file_tag(method);
            GrayImage raw(cam.height, cam.width);
            for (std::size_t k = 0; k < raw.pixels.size(); ++k) raw.pixels[k] = static_cast<Real>(cam.grid[k]);
            write_pgm(ctx.out / (base + ".pgm"), raw);
            write_ppm(ctx.out / (base + "_overlay.ppm"), overlay(it.image, cam, alpha));
            write_file(ctx.out / (base + ".json"), cam_sidecar_json(cam, it.image.height, it.image.width));
            if (it.box && it.label == 1) {
                ++boxed;
                const auto [r, c] = cam.argmax_in_image(it.image.height, it.image.width);
                if (it.box->contains(static_cast<std::size_t>(r), static_cast<std::size_t>(c))) ++hits;
            }
        }
        if (boxed > 0) {
            report[cam_method_name(method)] = {{"layer", layer}, {"class", cls}, {"images", boxed}, {"hits", hits},
                                               {"hit_rate", static_cast<double>(hits) / static_cast<double>(boxed)}};
        }
    }
    if (!report.empty()) write_file(ctx.out / "localization.json", report.dump(2) + "\n");
    log("explained " + std::to_string(items.size()) + " images");
    return kOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args) {
    CLI::App app{"XCCNet desk-scale pipeline"};
    app.require_subcommand(1);
    std::string config_path, out_flag;
    std::optional<std::uint64_t> seed;
    std::vector<std::string> overrides;
    app.add_option("--config", config_path, "JSON run config")->check(CLI::ExistingFile);
    app.add_option("--seed", seed, "Random seed (overrides the config)");
    app.add_option("--out", out_flag, "Output directory");
    app.add_option("--set", overrides, "Config override key.path=value (repeatable)");
    app.fallthrough();

    std::string data, ckpt, resume, phi, split = "test", seg_ckpt, rib_ckpt, method;
    std::vector<std::string> images;
    auto* synth = app.add_subcommand("synth", "Write the blob / blob+patch corpus");
    auto* pre = app.add_subcommand("preprocess", "Run the preprocessing pipeline over a dataset");
    pre->add_option("--data", data, "Dataset directory or manifest")->required();
    pre->add_option("--seg-ckpt", seg_ckpt, "Segmentation checkpoint");
    pre->add_option("--rib-ckpt", rib_ckpt, "Rib suppressor checkpoint");
    auto* tseg = app.add_subcommand("train-seg", "Train the lung segmentator and rib suppressor on phantoms");
    auto* tgan = app.add_subcommand("train-gan", "Train the augmentation GAN on one class");
    tgan->add_option("--data", data, "Dataset directory or manifest")->required();
    auto* train = app.add_subcommand("train", "Train XCCNet");
    train->add_option("--data", data, "Dataset directory or manifest")->required();
    train->add_option("--resume", resume, "Continue from a model checkpoint");
    train->add_option("--phi", phi, "Phi schedule: reciprocal or fixed:<v>");
    auto* eval = app.add_subcommand("eval", "Evaluate a checkpoint on one split");
    eval->add_option("--ckpt", ckpt, "Model checkpoint")->required();
    eval->add_option("--data", data, "Dataset directory or manifest")->required();
    eval->add_option("--split", split, "train, val or test");
    auto* explain = app.add_subcommand("explain", "Class activation maps");
    explain->add_option("--ckpt", ckpt, "Model checkpoint")->required();
    explain->add_option("--image", images, "PGM image (repeatable)");
    explain->add_option("--data", data, "Dataset directory or manifest");
    explain->add_option("--split", split, "Split used with --data");
    explain->add_option("--method", method, "grad-cam, grad-cam++, score-cam (comma list); lime is reserved");

    std::vector<std::string> argv_rev(args.rbegin(), args.rend());
    try {
        app.parse(argv_rev);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kInputError;
    }
    try {
        if (!phi.empty()) overrides.push_back("train.phi=" + phi);
        const CLI::App* cmd = app.get_subcommands().front();
        Context ctx{load_config(config_path, overrides, seed), resolve_out(out_flag, cmd->get_name())};
        if (cmd == synth) return cmd_synth(ctx);
        if (cmd == pre) return cmd_preprocess(ctx, data, seg_ckpt, rib_ckpt);
        if (cmd == tseg) return cmd_train_seg(ctx);
        if (cmd == tgan) return cmd_train_gan(ctx, data);
        if (cmd == train) return cmd_train(ctx, data, resume);
        if (cmd == eval) return cmd_eval(ctx, ckpt, data, split);
        if (cmd == explain) return cmd_explain(ctx, ckpt, images, data, split, method);
        return kInputError;
    } catch (const UnimplementedError& e) {
        log(std::string("unimplemented: ") + e.what());
        return kUnimplemented;
    } catch (const CheckpointError& e) {
        log(std::string("checkpoint error: ") + e.what());
        return kCheckpointError;
    } catch (const NumericError& e) {
        log(std::string("numeric abort: ") + e.what());
        return kNumericAbort;
    } catch (const Error& e) {
        log(std::string("error: ") + e.what());
        return kInputError;
    } catch (const nlohmann::json::exception& e) {
        log(std::string("config error: ") + e.what());
        return kInputError;
    } catch (const fs::filesystem_error& e) {
        log(std::string("io error: ") + e.what());
        return kInputError;
    }
}

int run_cli(int argc, char** argv) { return run_cli(std::vector<std::string>(argv + 1, argv + argc)); }

}  // namespace xcc::cli
