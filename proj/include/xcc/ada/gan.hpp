#pragma once

#include <functional>
#include <map>
#include <vector>

#include "xcc/cxp/image.hpp"
#include "xcc/tensor/layers.hpp"

namespace xcc::inline XCC_PRECISION_NS {

struct AdaConfig {
    std::size_t z_dim = 64;
    std::size_t mapping_layers = 3;
    std::size_t resolution = 32;  // power of two, >= 8
    std::size_t channels = 16;    // synthesis / discriminator width at 4x4 and 8x8; halved above
    double lambda_reg = 1e-3;
    double lr_g = 2e-3;
    double lr_d = 2e-3;
    double beta1 = 0.5;
    std::size_t steps = 1000;
    std::size_t batch = 8;
    std::size_t sample_every = 0;  // 0: no intermediate sample grids
    std::uint64_t seed = 3;

    void validate() const;
};

/// z -> w multilayer perceptron, leaky ReLU between layers.
class MappingNet {
 public:
    MappingNet() = default;
    MappingNet(std::size_t dim, std::size_t layers, RngStream& rng);
    Tensor operator()(const Tensor& z) const;
    void params(NamedTensors& out, const std::string& prefix) const;
    std::vector<Linear>& layers() { return layers_; }

 private:
    std::vector<Linear> layers_;
};

/// Learned 4x4 constant, then one stage per resolution 4, 8, ..., R. Every
/// stage is (upsample x2 except the first) -> 3x3 conv -> leaky ReLU ->
/// AdaIN, whose per-channel mean and std come from an affine map of w1
/// (first half of the stages) or w2 (second half). Head: 1x1 conv + sigmoid.
class Generator {
 public:
    Generator() = default;
    Generator(const AdaConfig& cfg, RngStream& rng);

    Tensor map(const Tensor& z) const { return mapping_(z); }
    /// [N, z_dim] -> images [N, 1, R, R]; `w_out` receives the style batch.
    Tensor forward(const Tensor& z, Tensor* w_out = nullptr) const;
    Tensor synthesize(const Tensor& w) const;
    /// `count` images from standard-normal noise drawn from `rng`.
    std::vector<GrayImage> sample(std::size_t count, RngStream& rng) const;

    void params(NamedTensors& out, const std::string& prefix = "gen") const;
    std::size_t z_dim() const { return z_dim_; }
    std::size_t resolution() const { return resolution_; }
    std::size_t stages() const { return convs_.size(); }
    /// Number of leading stages driven by w1.
    std::size_t w1_stages() const { return convs_.size() / 2; }

 private:
    std::size_t z_dim_ = 0, resolution_ = 0;
    MappingNet mapping_;
    Tensor seed_;  // [1, C * 16]
    std::size_t seed_channels_ = 0;
    std::vector<Conv2d> convs_;
    std::vector<Linear> styles_;  // w half -> [mean | std] per stage
    Conv2d head_;
};

/// Convs with leaky ReLU and 2x2 average pooling down to 4x4, then a
/// linear map to one logit per image.
class Discriminator {
 public:
    Discriminator() = default;
    Discriminator(const AdaConfig& cfg, RngStream& rng);
    /// [N, 1, R, R] -> logits [N, 1].
    Tensor forward(const Tensor& x) const;
    void params(NamedTensors& out, const std::string& prefix = "disc") const;

 private:
    std::vector<Conv2d> convs_;
    Linear out_;
};

struct GanLosses {
    Tensor d_loss;  // -mean log D(real) - mean log(1 - D(fake))
    Tensor g_loss;  // -mean log D(fake)
};

/// D = sigmoid(logit), logs guarded by the shared BCE clamp.
GanLosses gan_losses(const Tensor& d_real_logits, const Tensor& d_fake_logits);

/// lambda * mean over rows of (||w||_2 - 1)^2.
Tensor style_norm_penalty(const Tensor& w, Real lambda);
Tensor ada_total_loss(const Tensor& d_loss, const Tensor& g_loss, const Tensor& w, Real lambda);

struct AdaCurvePoint {
    std::size_t step = 0;
    double d_loss = 0, g_loss = 0, reg = 0, total = 0;
};

struct AdaTrainResult {
    Generator generator;
    Discriminator discriminator;
    std::vector<AdaCurvePoint> curve;
    std::vector<std::pair<std::size_t, GrayImage>> sample_grids;
};

/// Alternating discriminator / generator Adam steps on the real set. Throws
/// NumericError naming the step when any loss is not finite.
AdaTrainResult train_ada(const std::vector<GrayImage>& real, const AdaConfig& cfg);

/// Tiles images (all of one size) into a near-square grid.
GrayImage image_grid(const std::vector<GrayImage>& images);

}  // namespace xcc::inline XCC_PRECISION_NS
