#pragma once

#include <string>
#include <vector>

#include "xcc/cxp/image.hpp"
#include "xcc/cxp/rib.hpp"
#include "xcc/cxp/segmentation.hpp"

namespace xcc::inline XCC_PRECISION_NS {

struct PreprocessConfig {
    std::size_t target_size = 256;
    std::size_t clahe_tiles = 8;
    double clahe_clip = 2.0;
    double bicubic_a = -0.5;
    bool enhance = true;
    bool segment = true;
    bool rib_suppress = true;
    double mask_threshold = 0.5;

    /// Throws ValueError when target_size < 32 or clip < 1.
    void validate() const;
};

/// Frozen models for the learned stages. Either may be null when its stage
/// is disabled.
struct PreprocessModels {
    const SegModel* seg = nullptr;
    const RibModel* rib = nullptr;
};

struct StageRecord {
    std::string stage;
    bool enabled = true;
    std::size_t in_h = 0, in_w = 0, out_h = 0, out_w = 0;
    std::string note;  // e.g. the empty-mask fallback warning
};

struct PreprocessResult {
    GrayImage image;
    std::vector<StageRecord> stages;
    bool mask_fallback = false;
};

/// resize -> clahe -> segment -> mask/crop -> resize to target -> rib
/// suppression, in that fixed order. Disabled stages pass the image through
/// and are still recorded. Running the pipeline on its own output is not
/// idempotent.
PreprocessResult preprocess(const GrayImage& img, const PreprocessConfig& cfg, const PreprocessModels& models);

/// One JSON object per stage, newline-terminated.
std::string provenance_jsonl(const std::string& source, const PreprocessResult& res);

}  // namespace xcc::inline XCC_PRECISION_NS
