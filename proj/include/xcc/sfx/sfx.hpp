#pragma once

#include <vector>

#include "xcc/tensor/layers.hpp"

namespace xcc::inline XCC_PRECISION_NS {

struct SfxConfig {
    std::vector<std::size_t> filters{8, 16};  // canonical: 32, 64, 128, 256, 512
    std::size_t image_size = 64;
    std::size_t sfx_dim = 64;                 // canonical: 2304
    std::size_t dilation = 2;
    double dropout = 0.1;

    /// Flattened size after the last block.
    std::size_t flatten_dim() const;
    void validate() const;
    static SfxConfig canonical();
};

/// conv 3x3 (dilated, same padding) -> ReLU -> batch norm -> 2x2 max-pool -> dropout.
struct SfxBlock {
    Conv2d conv;
    BatchNorm2d norm;
    Real dropout = Real(0.1);

    SfxBlock() = default;
    SfxBlock(std::size_t in, std::size_t out, std::size_t dilation, double dropout, RngStream& rng);
    Tensor operator()(const Tensor& x, Mode mode, RngStream& rng);
    /// ReLU(conv(x)), the block's conv activation.
    Tensor activation(const Tensor& x) const;
    /// The rest of the block applied to its conv activation.
    Tensor finish(const Tensor& a, Mode mode, RngStream& rng);
    void params(NamedTensors& out, const std::string& prefix) const;
    void buffers(NamedTensors& out, const std::string& prefix) const;
};

/// Stacked blocks, flatten, linear projection to sfx_dim.
class SfxModel {
 public:
    SfxModel() = default;
    SfxModel(const SfxConfig& cfg, RngStream& rng);

    /// [N, 1, S, S] -> [N, sfx_dim]. Train mode updates batch-norm running
    /// statistics and draws dropout masks from `rng`.
    Tensor forward(const Tensor& x, Mode mode, RngStream& rng);
    /// Eval-mode forward.
    Tensor forward(const Tensor& x);
    /// Output of block `upto` (0-based), before the projection.
    Tensor features(const Tensor& x, std::size_t upto, Mode mode, RngStream& rng);
    /// Blocks `start`.. and the projection applied to an intermediate map.
    Tensor forward_from(const Tensor& h, std::size_t start, Mode mode, RngStream& rng);
    /// Conv activation of block `layer` (eval mode for earlier blocks).
    Tensor conv_activation(const Tensor& x, std::size_t layer);
    /// Eval-mode output given the conv activation of block `layer`.
    Tensor forward_from_activation(const Tensor& a, std::size_t layer);

    /// Replaces the batch-norm running statistics with their average over
    /// `batches` (batch statistics, no dropout). Call under NoGradScope.
    void recalibrate_batchnorm(const std::vector<Tensor>& batches);

    void params(NamedTensors& out, const std::string& prefix = "sfx") const;
    void buffers(NamedTensors& out, const std::string& prefix = "sfx") const;
    const SfxConfig& config() const { return cfg_; }
    std::vector<SfxBlock>& blocks() { return blocks_; }

 private:
    void check_input(const Tensor& x) const;

    SfxConfig cfg_;
    std::vector<SfxBlock> blocks_;
    Linear proj_;
};

/// Receptive field (in input pixels) after each block for 3x3 convs with
/// the given dilation followed by 2x2 stride-2 pooling.
std::vector<std::size_t> sfx_receptive_fields(std::size_t blocks, std::size_t dilation);

}  // namespace xcc::inline XCC_PRECISION_NS
