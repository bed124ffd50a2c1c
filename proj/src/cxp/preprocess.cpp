#include "xcc/cxp/preprocess.hpp"

#include <json.hpp>

#include "xcc/cxp/clahe.hpp"
#include "xcc/cxp/resize.hpp"

namespace xcc::inline XCC_PRECISION_NS {

void PreprocessConfig::validate() const {
    if (target_size < 32) throw ValueError("target_size must be >= 32");
    if (!(clahe_clip >= 1.0)) throw ValueError("clahe clip must be >= 1");
    if (clahe_tiles == 0) throw ValueError("clahe tiles must be positive");
}

namespace {

StageRecord record(const char* stage, bool enabled, const GrayImage& in, const GrayImage& out) {
    return StageRecord{stage, enabled, in.height, in.width, out.height, out.width, {}};
}

}  // namespace

PreprocessResult preprocess(const GrayImage& img, const PreprocessConfig& cfg, const PreprocessModels& models) {
    cfg.validate();
    if (cfg.segment && models.seg == nullptr) throw ValueError("segmentation enabled but no segmentator given");
    if (cfg.rib_suppress && models.rib == nullptr) throw ValueError("rib suppression enabled but no model given");
    check_unit_range(img, "input");

    PreprocessResult res;
    const std::size_t n = cfg.target_size;

    GrayImage cur = resize_bicubic(img, n, n, cfg.bicubic_a);
    res.stages.push_back(record("resize", true, img, cur));

    GrayImage next = cfg.enhance ? clahe(cur, cfg.clahe_tiles, cfg.clahe_tiles, cfg.clahe_clip) : cur;
    res.stages.push_back(record("clahe", cfg.enhance, cur, next));
    cur = std::move(next);

    if (cfg.segment) {
        BinaryMask mask = segment_lungs(cur, *models.seg, cfg.mask_threshold, &res.mask_fallback);
        StageRecord seg = record("segment", true, cur, cur);
        if (res.mask_fallback) seg.note = "empty mask; using the full image";
        res.stages.push_back(seg);
        next = apply_mask_and_crop(cur, mask);
        res.stages.push_back(record("mask_crop", true, cur, next));
        cur = std::move(next);
        next = resize_bicubic(cur, n, n, cfg.bicubic_a);
        res.stages.push_back(record("resize_target", true, cur, next));
        cur = std::move(next);
    } else {
        res.stages.push_back(record("segment", false, cur, cur));
        res.stages.push_back(record("mask_crop", false, cur, cur));
        res.stages.push_back(record("resize_target", false, cur, cur));
    }

    next = cfg.rib_suppress ? suppress_ribs(cur, *models.rib) : cur;
    res.stages.push_back(record("rib_suppress", cfg.rib_suppress, cur, next));
    res.image = std::move(next);
    check_unit_range(res.image, "output");
    return res;
}

std::string provenance_jsonl(const std::string& source, const PreprocessResult& res) {
    std::string out;
    for (std::size_t i = 0; i < res.stages.size(); ++i) {
        const StageRecord& s = res.stages[i];
        nlohmann::json j{{"source", source},   {"index", i},        {"stage", s.stage},
                         {"enabled", s.enabled}, {"in", {s.in_h, s.in_w}}, {"out", {s.out_h, s.out_w}}};
        if (!s.note.empty()) j["warning"] = s.note;
        out += j.dump();
        out += '\n';
    }
    return out;
}

}  // namespace xcc::inline XCC_PRECISION_NS
