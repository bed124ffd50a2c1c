#pragma once

#include <vector>

#include "xcc/tensor/layers.hpp"

namespace xcc::inline XCC_PRECISION_NS {

struct CotfxConfig {
    std::size_t image_size = 64;
    std::size_t patch_size = 16;
    std::size_t dim = 64;       // canonical: 256
    std::size_t heads = 4;      // canonical: 12
    std::size_t blocks = 2;     // canonical: 12
    std::size_t cotfx_dim = 64; // canonical: 512

    std::size_t num_patches() const { return (image_size / patch_size) * (image_size / patch_size); }
    void validate() const;
    static CotfxConfig canonical();
};

/// Linear patch embedding plus a learned positional table.
struct PatchEmbedder {
    std::size_t patch_size = 16;
    Linear embed;    // ps^2 -> dim
    Tensor pos;      // [T, dim]

    PatchEmbedder() = default;
    PatchEmbedder(std::size_t patch_size, std::size_t tokens, std::size_t dim, RngStream& rng);
    /// images [N, 1, H, W] -> tokens [N*T, dim], row-major patch order.
    Tensor operator()(const Tensor& images) const;
    void params(NamedTensors& out, const std::string& prefix) const;
};

/// Pre-norm encoder block: h = x + O(MHA(LN1 x)); y = h + W2 relu(W1 LN2 h).
struct TransformerBlock {
    LayerNorm ln1, ln2;
    Linear q, k, v, o;
    Linear fc1, fc2;
    std::size_t heads = 1;

    TransformerBlock() = default;
    TransformerBlock(std::size_t dim, std::size_t heads, RngStream& rng);
    /// x [B*T, dim] -> [B*T, dim]. `attention` receives [B, heads, T, T] when given.
    Tensor operator()(const Tensor& x, std::size_t batch, std::vector<Real>* attention = nullptr) const;
    /// Multi-head attention sublayer alone (no norm, no residual).
    Tensor attend(const Tensor& x, std::size_t batch, std::vector<Real>* attention = nullptr) const;
    void params(NamedTensors& out, const std::string& prefix) const;
};

class CotfxModel {
 public:
    CotfxModel() = default;
    CotfxModel(const CotfxConfig& cfg, RngStream& rng);

    /// [N, 1, S, S] -> [N, cotfx_dim].
    Tensor forward(const Tensor& images) const;
    /// Encoder tokens after the last block, [N*T, dim].
    Tensor tokens(const Tensor& images) const;

    void params(NamedTensors& out, const std::string& prefix = "cotfx") const;
    const CotfxConfig& config() const { return cfg_; }
    PatchEmbedder& embedder() { return embed_; }
    const std::vector<TransformerBlock>& blocks() const { return blocks_; }

 private:
    CotfxConfig cfg_;
    PatchEmbedder embed_;
    std::vector<TransformerBlock> blocks_;
    LayerNorm final_ln_;
    Linear head1_, head2_;
};

}  // namespace xcc::inline XCC_PRECISION_NS
