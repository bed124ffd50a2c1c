#pragma once

#include "xcc/cotfx/cotfx.hpp"
#include "xcc/cotfx/losses.hpp"
#include "xcc/sfx/sfx.hpp"

namespace xcc::inline XCC_PRECISION_NS {

enum class FeatureSource { sfx, cotfx, fused };

const char* source_name(FeatureSource s);

/// A batch of feature rows [N, dim] tagged with the branch that produced it.
struct FeatureBatch {
    Tensor values;
    FeatureSource source = FeatureSource::sfx;
    std::size_t dim() const { return values.dim(1); }
};

/// Concatenation along the feature axis, sfx first. Throws ValueError on
/// wrong source tags and ShapeError on mismatched batch sizes.
FeatureBatch fuse(const FeatureBatch& sfx, const FeatureBatch& cotfx);

/// fused -> hidden -> ReLU -> 1 -> sigmoid.
struct ClassifierHead {
    Linear fc1, fc2;

    ClassifierHead() = default;
    ClassifierHead(std::size_t in, std::size_t hidden, RngStream& rng);
    /// [N, in] -> probabilities [N, 1].
    Tensor operator()(const Tensor& fused) const;
    /// Pre-sigmoid score [N, 1].
    Tensor logit(const Tensor& fused) const;
    void params(NamedTensors& out, const std::string& prefix = "head") const;
};

/// Label from a probability: pneumonia (1) when p >= 0.5.
inline int decide(double p) { return p >= 0.5 ? 1 : 0; }

struct XccConfig {
    SfxConfig sfx;
    CotfxConfig cotfx;
    std::size_t proj_dim = 128;
    std::size_t hidden = 32;  // canonical: 256

    std::size_t image_size() const { return sfx.image_size; }
    void validate() const;
    static XccConfig toy(std::size_t image_size = 64);
    static XccConfig canonical();
};

struct XccOutput {
    FeatureBatch sfx, cotfx, fused;
    Tensor prob;  // [N, 1]
};

class XccNet {
 public:
    XccNet() = default;
    XccNet(const XccConfig& cfg, RngStream& rng);

    XccOutput forward(const Tensor& images, Mode mode, RngStream& rng);
    /// Eval-mode probabilities [N, 1].
    Tensor predict(const Tensor& images);
    /// Eval-mode pre-sigmoid scores [N, 1].
    Tensor logits(const Tensor& images);
    /// Eval-mode scores with the SFx branch resumed from the conv activation
    /// of block `layer`; the CoTFx branch still reads `images`.
    Tensor logits_from_sfx(const Tensor& activation, std::size_t layer, const Tensor& images);

    /// Trainable parameters, grouped by the prefixes sfx, cotfx, proj, head.
    NamedTensors params() const;
    /// Parameters plus non-trainable state (batch-norm running statistics).
    NamedTensors state() const;

    const XccConfig& config() const { return cfg_; }
    SfxModel& sfx() { return sfx_; }
    CotfxModel& cotfx() { return cotfx_; }
    ProjectionHeads& proj() { return proj_; }
    ClassifierHead& head() { return head_; }

 private:
    XccConfig cfg_;
    SfxModel sfx_;
    CotfxModel cotfx_;
    ProjectionHeads proj_;
    ClassifierHead head_;
};

}  // namespace xcc::inline XCC_PRECISION_NS
