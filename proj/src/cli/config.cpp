#include "xcc/cli/config.hpp"

namespace xcc::cli {

Json default_config() {
    return Json::parse(R"({
  "seed": 1,
  "synth": {"size": 64, "train": 600, "val": 100, "test": 100, "noise": 0.03},
  "preprocess": {"target_size": 64, "clahe_tiles": 8, "clahe_clip": 2.0, "bicubic_a": -0.5,
                 "enhance": true, "segment": false, "rib_suppress": false, "mask_threshold": 0.5},
  "seg": {"channels": [4, 8, 8, 16], "epochs": 25, "batch": 4, "lr": 0.003, "phantoms": 50, "size": 64, "holdout": 20},
  "rib": {"filters": [4, 4, 4, 4, 4], "pairs": 48, "size": 32, "epochs": 20, "batch": 4, "lr": 0.003},
  "gan": {"z_dim": 64, "mapping_layers": 3, "resolution": 32, "channels": 16, "lambda_reg": 0.001,
          "lr_g": 0.002, "lr_d": 0.002, "beta1": 0.5, "steps": 1000, "batch": 8, "sample_every": 250,
          "class": 1, "count": 64},
  "model": {"preset": "toy", "image_size": 64, "sfx_filters": [8, 16], "sfx_dim": 64, "dilation": 2, "dropout": 0.1,
            "patch_size": 16, "dim": 64, "heads": 4, "blocks": 2, "cotfx_dim": 64, "proj_dim": 128, "hidden": 32},
  "train": {"lr": 0.001, "plateau_factor": 0.3, "plateau_patience": 2, "beta1": 0.9, "beta2": 0.999, "eps": 1e-8,
            "l1": 1e-6, "l2": 1e-5, "epochs": 8, "batch": 16, "phi": "reciprocal", "tau": 0.5,
            "norm": "anchors", "ce_only": false, "schedule": "joint", "recalibrate_bn": true, "restore_best": true},
  "explain": {"method": "grad-cam", "layer": -1, "class": 1, "alpha": 0.4}
})");
}

namespace {

bool same_kind(const Json& a, const Json& b) {
    if (a.is_number() && b.is_number()) {
        // integers stay integers; floats accept either
        return a.is_number_float() || !b.is_number_float();
    }
    return a.type() == b.type();
}

}  // namespace

void merge_strict(Json& base, const Json& overlay, const std::string& where) {
    if (!overlay.is_object()) throw ValueError("config" + (where.empty() ? "" : " section '" + where + "'") + " must be an object");
    for (auto it = overlay.begin(); it != overlay.end(); ++it) {
        const std::string key = where.empty() ? it.key() : where + "." + it.key();
        if (!base.contains(it.key())) throw ValueError("unknown config key '" + key + "'");
        Json& dst = base[it.key()];
        if (dst.is_object()) {
            merge_strict(dst, it.value(), key);
        } else if (!same_kind(dst, it.value())) {
            throw ValueError("config key '" + key + "' expects " + std::string(dst.type_name()) + ", got " +
                             it.value().type_name());
        } else {
            dst = it.value();
        }
    }
}

void apply_override(Json& cfg, const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0) throw ValueError("override '" + assignment + "' is not key=value");
    const std::string path = assignment.substr(0, eq), text = assignment.substr(eq + 1);
    Json value = Json::parse(text, nullptr, false);
    if (value.is_discarded()) value = text;
    // build the nested overlay for the dotted path
    Json overlay = value;
    std::size_t end = path.size();
    while (true) {
        const auto dot = path.rfind('.', end - 1);
        const std::string key = path.substr(dot == std::string::npos ? 0 : dot + 1, end - (dot == std::string::npos ? 0 : dot + 1));
        overlay = Json{{key, overlay}};
        if (dot == std::string::npos) break;
        end = dot;
    }
    merge_strict(cfg, overlay);
}

Json load_config(const std::filesystem::path& file, const std::vector<std::string>& overrides,
                 const std::optional<std::uint64_t>& seed) {
    Json cfg = default_config();
    if (!file.empty()) {
        Json user = Json::parse(read_file(file), nullptr, false);
        if (user.is_discarded()) throw ValueError("config " + file.string() + " is not valid JSON");
        merge_strict(cfg, user);
    }
    for (const std::string& o : overrides) apply_override(cfg, o);
    if (seed) cfg["seed"] = *seed;
    if (!cfg["seed"].is_number_unsigned()) throw ValueError("seed must be a non-negative integer");
    return cfg;
}

std::string config_echo(const Json& cfg) { return cfg.dump(2) + "\n"; }

std::uint64_t config_seed(const Json& cfg) { return cfg.at("seed").get<std::uint64_t>(); }

SynthConfig synth_config(const Json& cfg) {
    const Json& s = cfg.at("synth");
    SynthConfig out{s.at("size"), s.at("train"), s.at("val"), s.at("test"), s.at("noise")};
    if (out.size < 32) throw ValueError("synth.size must be >= 32");
    return out;
}

PreprocessConfig preprocess_config(const Json& cfg) {
    const Json& s = cfg.at("preprocess");
    PreprocessConfig out;
    out.target_size = s.at("target_size");
    out.clahe_tiles = s.at("clahe_tiles");
    out.clahe_clip = s.at("clahe_clip");
    out.bicubic_a = s.at("bicubic_a");
    out.enhance = s.at("enhance");
    out.segment = s.at("segment");
    out.rib_suppress = s.at("rib_suppress");
    out.mask_threshold = s.at("mask_threshold");
    out.validate();
    return out;
}

SegConfig seg_config(const Json& cfg) {
    const Json& s = cfg.at("seg");
    SegConfig out;
    out.channels = s.at("channels").get<std::vector<std::size_t>>();
    out.epochs = s.at("epochs");
    out.batch = s.at("batch");
    out.lr = s.at("lr");
    out.seed = config_seed(cfg);
    return out;
}

RibConfig rib_config(const Json& cfg) {
    const Json& s = cfg.at("rib");
    RibConfig out;
    out.filters = s.at("filters").get<std::vector<std::size_t>>();
    out.pairs = s.at("pairs");
    out.size = s.at("size");
    out.epochs = s.at("epochs");
    out.batch = s.at("batch");
    out.lr = s.at("lr");
    out.seed = config_seed(cfg);
    return out;
}

AdaConfig ada_config(const Json& cfg) {
    const Json& s = cfg.at("gan");
    AdaConfig out;
    out.z_dim = s.at("z_dim");
    out.mapping_layers = s.at("mapping_layers");
    out.resolution = s.at("resolution");
    out.channels = s.at("channels");
    out.lambda_reg = s.at("lambda_reg");
    out.lr_g = s.at("lr_g");
    out.lr_d = s.at("lr_d");
    out.beta1 = s.at("beta1");
    out.steps = s.at("steps");
    out.batch = s.at("batch");
    out.sample_every = s.at("sample_every");
    out.seed = config_seed(cfg);
    out.validate();
    return out;
}

XccConfig model_config(const Json& cfg) {
    const Json& s = cfg.at("model");
    const std::string preset = s.at("preset");
    if (preset == "canonical") return XccConfig::canonical();
    if (preset != "toy") throw ValueError("model.preset must be toy or canonical");
    XccConfig out = XccConfig::toy(s.at("image_size"));
    out.sfx.filters = s.at("sfx_filters").get<std::vector<std::size_t>>();
    out.sfx.sfx_dim = s.at("sfx_dim");
    out.sfx.dilation = s.at("dilation");
    out.sfx.dropout = s.at("dropout");
    out.cotfx.patch_size = s.at("patch_size");
    out.cotfx.dim = s.at("dim");
    out.cotfx.heads = s.at("heads");
    out.cotfx.blocks = s.at("blocks");
    out.cotfx.cotfx_dim = s.at("cotfx_dim");
    out.proj_dim = s.at("proj_dim");
    out.hidden = s.at("hidden");
    out.validate();
    return out;
}

TrainConfig train_config(const Json& cfg) {
    const Json& s = cfg.at("train");
    TrainConfig out;
    out.lr = s.at("lr");
    out.plateau_factor = s.at("plateau_factor");
    out.plateau_patience = s.at("plateau_patience");
    out.beta1 = s.at("beta1");
    out.beta2 = s.at("beta2");
    out.eps = s.at("eps");
    out.l1 = s.at("l1");
    out.l2 = s.at("l2");
    out.epochs = s.at("epochs");
    out.batch = s.at("batch");
    out.seed = config_seed(cfg);
    out.phi = PhiSchedule::parse(s.at("phi"));
    out.loss.tau = s.at("tau");
    const std::string norm = s.at("norm");
    if (norm == "anchors") out.loss.norm = ContrastiveNorm::anchors;
    else if (norm == "ordered_pairs") out.loss.norm = ContrastiveNorm::ordered_pairs;
    else throw ValueError("train.norm must be anchors or ordered_pairs");
    out.ce_only = s.at("ce_only");
    const std::string schedule = s.at("schedule");
    if (schedule == "joint") out.schedule = BranchSchedule::joint;
    else if (schedule == "alternate") out.schedule = BranchSchedule::alternate;
    else throw ValueError("train.schedule must be joint or alternate");
    out.recalibrate_bn = s.at("recalibrate_bn");
    out.restore_best = s.at("restore_best");
    out.validate();
    return out;
}

}  // namespace xcc::cli
