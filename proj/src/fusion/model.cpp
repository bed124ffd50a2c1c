#include "xcc/fusion/model.hpp"

namespace xcc::inline XCC_PRECISION_NS {

const char* source_name(FeatureSource s) {
    switch (s) {
        case FeatureSource::sfx: return "sfx";
        case FeatureSource::cotfx: return "cotfx";
        case FeatureSource::fused: return "fused";
    }
    return "?";
}

FeatureBatch fuse(const FeatureBatch& sfx, const FeatureBatch& cotfx) {
    if (sfx.source != FeatureSource::sfx || cotfx.source != FeatureSource::cotfx) {
        throw ValueError(std::string("fuse expects (sfx, cotfx), got (") + source_name(sfx.source) + ", " +
                         source_name(cotfx.source) + ")");
    }
    if (sfx.values.rank() != 2 || cotfx.values.rank() != 2 || sfx.values.dim(0) != cotfx.values.dim(0)) {
        throw ShapeError("fuse: batch sizes differ");
    }
    return {concat(sfx.values, cotfx.values, 1), FeatureSource::fused};
}

ClassifierHead::ClassifierHead(std::size_t in, std::size_t hidden, RngStream& rng)
    : fc1(in, hidden, rng), fc2(hidden, 1, rng, Init::xavier) {}

Tensor ClassifierHead::operator()(const Tensor& fused) const {
    if (fused.rank() != 2 || fused.dim(1) != fc1.in_features()) {
        throw ShapeError("classifier expects [N, " + std::to_string(fc1.in_features()) + "], got " +
                         shape_str(fused.shape()));
    }
    return sigmoid(logit(fused));
}

Tensor ClassifierHead::logit(const Tensor& fused) const {
    if (fused.rank() != 2 || fused.dim(1) != fc1.in_features()) {
        throw ShapeError("classifier expects [N, " + std::to_string(fc1.in_features()) + "], got " +
                         shape_str(fused.shape()));
    }
    return fc2(relu(fc1(fused)));
}

void ClassifierHead::params(NamedTensors& out, const std::string& prefix) const {
    fc1.params(out, prefix + ".fc1");
    fc2.params(out, prefix + ".fc2");
}

void XccConfig::validate() const {
    sfx.validate();
    cotfx.validate();
    if (sfx.image_size != cotfx.image_size) throw ValueError("sfx and cotfx image sizes differ");
    if (proj_dim == 0 || hidden == 0) throw ValueError("proj_dim and hidden must be positive");
}

XccConfig XccConfig::toy(std::size_t image_size) {
    XccConfig c;
    c.sfx.image_size = image_size;
    c.cotfx.image_size = image_size;
    return c;
}

XccConfig XccConfig::canonical() {
    XccConfig c;
    c.sfx = SfxConfig::canonical();
    c.cotfx = CotfxConfig::canonical();
    c.hidden = 256;
    return c;
}

XccNet::XccNet(const XccConfig& cfg, RngStream& rng) : cfg_(cfg) {
    cfg_.validate();
    RngStream s = rng.split(1), c = rng.split(2), p = rng.split(3), h = rng.split(4);
    sfx_ = SfxModel(cfg_.sfx, s);
    cotfx_ = CotfxModel(cfg_.cotfx, c);
    proj_ = ProjectionHeads(cfg_.sfx.sfx_dim, cfg_.cotfx.cotfx_dim, cfg_.proj_dim, p);
    head_ = ClassifierHead(cfg_.sfx.sfx_dim + cfg_.cotfx.cotfx_dim, cfg_.hidden, h);
}

XccOutput XccNet::forward(const Tensor& images, Mode mode, RngStream& rng) {
    XccOutput out;
    out.sfx = {sfx_.forward(images, mode, rng), FeatureSource::sfx};
    out.cotfx = {cotfx_.forward(images), FeatureSource::cotfx};
    out.fused = fuse(out.sfx, out.cotfx);
    out.prob = head_(out.fused.values);
    return out;
}

Tensor XccNet::predict(const Tensor& images) {
    NoGradScope no_grad;
    RngStream unused;
    return forward(images, Mode::eval, unused).prob;
}

Tensor XccNet::logits_from_sfx(const Tensor& activation, std::size_t layer, const Tensor& images) {
    FeatureBatch sfx{sfx_.forward_from_activation(activation, layer), FeatureSource::sfx};
    FeatureBatch cotfx{cotfx_.forward(images), FeatureSource::cotfx};
    return head_.logit(fuse(sfx, cotfx).values);
}

Tensor XccNet::logits(const Tensor& images) {
    return logits_from_sfx(sfx_.conv_activation(images, 0), 0, images);
}

NamedTensors XccNet::params() const {
    NamedTensors out;
    sfx_.params(out);
    cotfx_.params(out);
    proj_.params(out);
    head_.params(out);
    return out;
}

NamedTensors XccNet::state() const {
    NamedTensors out = params();
    sfx_.buffers(out);
    return out;
}

}  // namespace xcc::inline XCC_PRECISION_NS
