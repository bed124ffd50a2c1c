#include "xcc/sfx/sfx.hpp"

namespace xcc::inline XCC_PRECISION_NS {

void SfxConfig::validate() const {
    if (filters.empty()) throw ValueError("sfx needs at least one block");
    if (sfx_dim == 0) throw ValueError("sfx_dim must be positive");
    if (dilation == 0) throw ValueError("dilation must be positive");
    if (dropout < 0 || dropout >= 1) throw ValueError("dropout must be in [0, 1)");
    const std::size_t div = std::size_t{1} << filters.size();
    if (image_size < div || image_size % div != 0) {
        throw ShapeError("sfx image size must be divisible by " + std::to_string(div));
    }
}

std::size_t SfxConfig::flatten_dim() const {
    const std::size_t side = image_size >> filters.size();
    return filters.back() * side * side;
}

SfxConfig SfxConfig::canonical() {
    SfxConfig c;
    c.filters = {32, 64, 128, 256, 512};
    c.image_size = 256;
    c.sfx_dim = 2304;
    return c;
}

SfxBlock::SfxBlock(std::size_t in, std::size_t out, std::size_t dilation, double rate, RngStream& rng)
    : conv(in, out, 3, rng, dilation), norm(out), dropout(static_cast<Real>(rate)) {}

Tensor SfxBlock::operator()(const Tensor& x, Mode mode, RngStream& rng) {
    if (x.dim(x.rank() - 1) < 2 || x.dim(x.rank() - 2) < 2) throw ShapeError("sfx block needs spatial dims >= 2");
    return finish(activation(x), mode, rng);
}

Tensor SfxBlock::activation(const Tensor& x) const { return relu(conv(x)); }

Tensor SfxBlock::finish(const Tensor& a, Mode mode, RngStream& rng) {
    return xcc::dropout(maxpool2d(norm(a, mode)), dropout, rng, mode);
}

void SfxBlock::params(NamedTensors& out, const std::string& prefix) const {
    conv.params(out, prefix + ".conv");
    norm.params(out, prefix + ".bn");
}

void SfxBlock::buffers(NamedTensors& out, const std::string& prefix) const { norm.buffers(out, prefix + ".bn"); }

SfxModel::SfxModel(const SfxConfig& cfg, RngStream& rng) : cfg_(cfg) {
    cfg_.validate();
    std::size_t in = 1;
    for (std::size_t f : cfg_.filters) {
        blocks_.emplace_back(in, f, cfg_.dilation, cfg_.dropout, rng);
        in = f;
    }
    proj_ = Linear(cfg_.flatten_dim(), cfg_.sfx_dim, rng, Init::xavier);
}

void SfxModel::check_input(const Tensor& x) const {
    if (x.rank() != 4 || x.dim(1) != 1 || x.dim(2) != cfg_.image_size || x.dim(3) != cfg_.image_size) {
        throw ShapeError("sfx input must be [N,1," + std::to_string(cfg_.image_size) + "," +
                         std::to_string(cfg_.image_size) + "]");
    }
}

Tensor SfxModel::features(const Tensor& x, std::size_t upto, Mode mode, RngStream& rng) {
    check_input(x);
    Tensor h = x;
    for (std::size_t i = 0; i <= upto && i < blocks_.size(); ++i) h = blocks_[i](h, mode, rng);
    return h;
}

Tensor SfxModel::forward(const Tensor& x, Mode mode, RngStream& rng) {
    return forward_from(features(x, 0, mode, rng), 1, mode, rng);
}

Tensor SfxModel::forward_from(const Tensor& h0, std::size_t start, Mode mode, RngStream& rng) {
    Tensor h = h0;
    for (std::size_t i = start; i < blocks_.size(); ++i) h = blocks_[i](h, mode, rng);
    const std::size_t n = h.dim(0);
    if (h.numel() / n != cfg_.flatten_dim()) throw ShapeError("sfx: intermediate map does not match block " + std::to_string(start));
    return proj_(reshape(h, {n, h.numel() / n}));
}

Tensor SfxModel::forward(const Tensor& x) {
    RngStream unused;
    return forward(x, Mode::eval, unused);
}

Tensor SfxModel::conv_activation(const Tensor& x, std::size_t layer) {
    if (layer >= blocks_.size()) throw ValueError("sfx has no block " + std::to_string(layer));
    RngStream unused;
    check_input(x);
    return blocks_[layer].activation(layer == 0 ? x : features(x, layer - 1, Mode::eval, unused));
}

Tensor SfxModel::forward_from_activation(const Tensor& a, std::size_t layer) {
    if (layer >= blocks_.size()) throw ValueError("sfx has no block " + std::to_string(layer));
    RngStream unused;
    return forward_from(blocks_[layer].finish(a, Mode::eval, unused), layer + 1, Mode::eval, unused);
}

void SfxModel::recalibrate_batchnorm(const std::vector<Tensor>& batches) {
    if (batches.empty()) return;
    std::vector<Real> momentum;
    for (SfxBlock& b : blocks_) momentum.push_back(b.norm.state.momentum);
    // momentum 1/(k+1): the first batch overwrites, later ones average in
    for (std::size_t k = 0; k < batches.size(); ++k) {
        Tensor h = batches[k];
        for (SfxBlock& b : blocks_) {
            b.norm.state.momentum = Real(1) / static_cast<Real>(k + 1);
            h = maxpool2d(b.norm(relu(b.conv(h)), Mode::train));
        }
    }
    for (std::size_t i = 0; i < blocks_.size(); ++i) blocks_[i].norm.state.momentum = momentum[i];
}

void SfxModel::params(NamedTensors& out, const std::string& prefix) const {
    for (std::size_t i = 0; i < blocks_.size(); ++i) blocks_[i].params(out, prefix + ".block" + std::to_string(i));
    proj_.params(out, prefix + ".proj");
}

void SfxModel::buffers(NamedTensors& out, const std::string& prefix) const {
    for (std::size_t i = 0; i < blocks_.size(); ++i) blocks_[i].buffers(out, prefix + ".block" + std::to_string(i));
}

std::vector<std::size_t> sfx_receptive_fields(std::size_t blocks, std::size_t dilation) {
    std::vector<std::size_t> out;
    std::size_t rf = 1, jump = 1;
    for (std::size_t b = 0; b < blocks; ++b) {
        rf += 2 * dilation * jump;  // 3x3 conv, effective extent 2d + 1
        rf += jump;                 // 2x2 pool
        jump *= 2;
        out.push_back(rf);
    }
    return out;
}

}  // namespace xcc::inline XCC_PRECISION_NS
