#include "xcc/cotfx/cotfx.hpp"

namespace xcc::inline XCC_PRECISION_NS {

void CotfxConfig::validate() const {
    if (patch_size == 0 || image_size % patch_size != 0) {
        throw ShapeError("image size " + std::to_string(image_size) + " not divisible by patch size " +
                         std::to_string(patch_size));
    }
    if (heads == 0 || dim % heads != 0) throw ValueError("dim must be divisible by the head count");
    if (blocks == 0 || cotfx_dim == 0) throw ValueError("cotfx needs blocks > 0 and cotfx_dim > 0");
}

CotfxConfig CotfxConfig::canonical() {
    return CotfxConfig{256, 16, 256, 12, 12, 512};
}

PatchEmbedder::PatchEmbedder(std::size_t ps, std::size_t tokens, std::size_t dim, RngStream& rng)
    : patch_size(ps), embed(ps * ps, dim, rng, Init::xavier), pos(init_param({tokens, dim}, Init::xavier, tokens, dim, rng)) {}

Tensor PatchEmbedder::operator()(const Tensor& images) const {
    Tensor p = patchify(images, patch_size);
    if (p.dim(0) != images.dim(0) * pos.dim(0)) throw ShapeError("patch count does not match the positional table");
    return add_rows_tiled(embed(p), pos);
}

void PatchEmbedder::params(NamedTensors& out, const std::string& prefix) const {
    embed.params(out, prefix + ".embed");
    out.emplace_back(prefix + ".pos", pos);
}

TransformerBlock::TransformerBlock(std::size_t dim, std::size_t h, RngStream& rng)
    : ln1(dim),
      ln2(dim),
      q(dim, dim, rng, Init::xavier),
      k(dim, dim, rng, Init::xavier),
      v(dim, dim, rng, Init::xavier),
      o(dim, dim, rng, Init::xavier),
      fc1(dim, 4 * dim, rng),
      fc2(4 * dim, dim, rng, Init::xavier),
      heads(h) {}

Tensor TransformerBlock::attend(const Tensor& x, std::size_t batch, std::vector<Real>* attention) const {
    return o(multihead_attention(q(x), k(x), v(x), batch, heads, attention));
}

Tensor TransformerBlock::operator()(const Tensor& x, std::size_t batch, std::vector<Real>* attention) const {
    Tensor h = add(x, attend(ln1(x), batch, attention));
    return add(h, fc2(relu(fc1(ln2(h)))));
}

void TransformerBlock::params(NamedTensors& out, const std::string& prefix) const {
    ln1.params(out, prefix + ".ln1");
    q.params(out, prefix + ".q");
    k.params(out, prefix + ".k");
    v.params(out, prefix + ".v");
    o.params(out, prefix + ".o");
    ln2.params(out, prefix + ".ln2");
    fc1.params(out, prefix + ".fc1");
    fc2.params(out, prefix + ".fc2");
}

CotfxModel::CotfxModel(const CotfxConfig& cfg, RngStream& rng) : cfg_(cfg) {
    cfg_.validate();
    embed_ = PatchEmbedder(cfg_.patch_size, cfg_.num_patches(), cfg_.dim, rng);
    for (std::size_t b = 0; b < cfg_.blocks; ++b) blocks_.emplace_back(cfg_.dim, cfg_.heads, rng);
    final_ln_ = LayerNorm(cfg_.dim);
    head1_ = Linear(cfg_.dim, cfg_.dim, rng);
    head2_ = Linear(cfg_.dim, cfg_.cotfx_dim, rng, Init::xavier);
}

Tensor CotfxModel::tokens(const Tensor& images) const {
    if (images.rank() != 4 || images.dim(2) != cfg_.image_size || images.dim(3) != cfg_.image_size) {
        throw ShapeError("cotfx input must be [N,1," + std::to_string(cfg_.image_size) + "," +
                         std::to_string(cfg_.image_size) + "]");
    }
    Tensor h = embed_(images);
    for (const auto& b : blocks_) h = b(h, images.dim(0));
    return h;
}

Tensor CotfxModel::forward(const Tensor& images) const {
    Tensor pooled = mean_tokens(final_ln_(tokens(images)), images.dim(0));
    return head2_(relu(head1_(pooled)));
}

void CotfxModel::params(NamedTensors& out, const std::string& prefix) const {
    embed_.params(out, prefix + ".patch");
    for (std::size_t b = 0; b < blocks_.size(); ++b) blocks_[b].params(out, prefix + ".block" + std::to_string(b));
    final_ln_.params(out, prefix + ".ln");
    head1_.params(out, prefix + ".head1");
    head2_.params(out, prefix + ".head2");
}

}  // namespace xcc::inline XCC_PRECISION_NS
