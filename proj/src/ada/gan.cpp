#include "xcc/ada/gan.hpp"

#include <algorithm>
#include <cmath>

#include "xcc/fusion/optim.hpp"

namespace xcc::inline XCC_PRECISION_NS {

void AdaConfig::validate() const {
    if (lambda_reg < 0) throw ValueError("lambda_reg must be >= 0");
    if (resolution < 8 || (resolution & (resolution - 1)) != 0) throw ValueError("resolution must be a power of two >= 8");
    if (z_dim < 2 || z_dim % 2 != 0) throw ValueError("z_dim must be even and >= 2");
    if (channels < 2 || channels % 2 != 0) throw ValueError("channels must be even and >= 2");
    if (mapping_layers == 0) throw ValueError("mapping needs at least one layer");
    if (batch == 0) throw ValueError("batch must be positive");
}

namespace {

Tensor leaky(const Tensor& x) { return pointwise(x, Activation::leaky_relu); }

std::size_t width_at(std::size_t res, std::size_t channels) { return res <= 8 ? channels : channels / 2; }

}  // namespace

MappingNet::MappingNet(std::size_t dim, std::size_t layers, RngStream& rng) {
    for (std::size_t i = 0; i < layers; ++i) layers_.emplace_back(dim, dim, rng);
}

Tensor MappingNet::operator()(const Tensor& z) const {
    Tensor h = z;
    for (std::size_t i = 0; i < layers_.size(); ++i) {
        h = layers_[i](h);
        if (i + 1 < layers_.size()) h = leaky(h);
    }
    return h;
}

void MappingNet::params(NamedTensors& out, const std::string& prefix) const {
    for (std::size_t i = 0; i < layers_.size(); ++i) layers_[i].params(out, prefix + ".fc" + std::to_string(i));
}

Generator::Generator(const AdaConfig& cfg, RngStream& rng) : z_dim_(cfg.z_dim), resolution_(cfg.resolution) {
    cfg.validate();
    mapping_ = MappingNet(cfg.z_dim, cfg.mapping_layers, rng);
    seed_channels_ = width_at(4, cfg.channels);
    seed_ = init_param({1, seed_channels_ * 16}, Init::xavier, 1, 1, rng);
    std::size_t in = seed_channels_;
    for (std::size_t res = 4; res <= cfg.resolution; res *= 2) {
        const std::size_t out = width_at(res, cfg.channels);
        convs_.emplace_back(in, out, 3, rng);
        Linear style(cfg.z_dim / 2, 2 * out, rng, Init::xavier);
        // small weights around mean 0, std 1
        for (Real& v : style.weight.data()) v = static_cast<Real>(0.1 * v);
        for (std::size_t k = 0; k < out; ++k) style.bias[out + k] = 1;
        styles_.push_back(std::move(style));
        in = out;
    }
    head_ = Conv2d(in, 1, 1, rng);
}

Tensor Generator::synthesize(const Tensor& w) const {
    const std::size_t n = w.dim(0);
    const std::size_t half = z_dim_ / 2;
    Tensor w1 = slice(w, 1, 0, half), w2 = slice(w, 1, half, z_dim_);
    Tensor h = reshape(matmul(Tensor::ones({n, 1}), seed_), {n, seed_channels_, 4, 4});
    for (std::size_t s = 0; s < convs_.size(); ++s) {
        if (s > 0) h = upsample_nearest2x(h);
        h = leaky(convs_[s](h));
        const std::size_t c = convs_[s].weight.dim(0);
        Tensor ms = styles_[s](s < w1_stages() ? w1 : w2);
        h = adain(h, slice(ms, 1, 0, c), slice(ms, 1, c, 2 * c));
    }
    return sigmoid(head_(h));
}

Tensor Generator::forward(const Tensor& z, Tensor* w_out) const {
    Tensor w = mapping_(z);
    if (w_out != nullptr) *w_out = w;
    return synthesize(w);
}

std::vector<GrayImage> Generator::sample(std::size_t count, RngStream& rng) const {
    NoGradScope no_grad;
    Tensor z(Shape{count, z_dim_});
    for (Real& v : z.data()) v = static_cast<Real>(rng.normal());
    Tensor imgs = forward(z);
    std::vector<GrayImage> out;
    const std::size_t px = resolution_ * resolution_;
    for (std::size_t i = 0; i < count; ++i) {
        GrayImage g(resolution_, resolution_);
        std::copy(imgs.ptr() + i * px, imgs.ptr() + (i + 1) * px, g.pixels.begin());
        out.push_back(std::move(g));
    }
    return out;
}

void Generator::params(NamedTensors& out, const std::string& prefix) const {
    mapping_.params(out, prefix + ".mapping");
    out.emplace_back(prefix + ".const", seed_);
    for (std::size_t s = 0; s < convs_.size(); ++s) {
        convs_[s].params(out, prefix + ".stage" + std::to_string(s) + ".conv");
        styles_[s].params(out, prefix + ".stage" + std::to_string(s) + ".style");
    }
    head_.params(out, prefix + ".head");
}

Discriminator::Discriminator(const AdaConfig& cfg, RngStream& rng) {
    cfg.validate();
    std::size_t in = 1;
    for (std::size_t res = cfg.resolution; res > 4; res /= 2) {
        const std::size_t out = width_at(res / 2, cfg.channels);
        convs_.emplace_back(in, out, 3, rng);
        in = out;
    }
    out_ = Linear(in * 16, 1, rng, Init::xavier);
}

Tensor Discriminator::forward(const Tensor& x) const {
    Tensor h = x;
    for (const Conv2d& c : convs_) h = avgpool2d(leaky(c(h)));
    return out_(reshape(h, {x.dim(0), h.numel() / x.dim(0)}));
}

void Discriminator::params(NamedTensors& out, const std::string& prefix) const {
    for (std::size_t i = 0; i < convs_.size(); ++i) convs_[i].params(out, prefix + ".conv" + std::to_string(i));
    out_.params(out, prefix + ".out");
}

GanLosses gan_losses(const Tensor& d_real_logits, const Tensor& d_fake_logits) {
    Tensor d_real = sigmoid(d_real_logits), d_fake = sigmoid(d_fake_logits);
    Tensor ones_r = Tensor::ones(d_real.shape()), ones_f = Tensor::ones(d_fake.shape());
    Tensor zeros_f = Tensor::zeros(d_fake.shape());
    return {add(bce_loss(d_real, ones_r), bce_loss(d_fake, zeros_f)), bce_loss(d_fake, ones_f)};
}

Tensor style_norm_penalty(const Tensor& w, Real lambda) {
    return scale(mean(square(add_scalar(row_norms(w), Real(-1)))), lambda);
}

Tensor ada_total_loss(const Tensor& d_loss, const Tensor& g_loss, const Tensor& w, Real lambda) {
    if (lambda < 0) throw ValueError("lambda must be >= 0");
    return add(add(d_loss, g_loss), style_norm_penalty(w, lambda));
}

namespace {

Tensor real_batch(const std::vector<GrayImage>& real, std::size_t n, RngStream& rng) {
    const std::size_t r = real[0].height, px = r * r;
    Tensor x(Shape{n, 1, r, r});
    for (std::size_t i = 0; i < n; ++i) {
        const GrayImage& g = real[rng.below(real.size())];
        std::copy(g.pixels.begin(), g.pixels.end(), x.ptr() + i * px);
    }
    return x;
}

Tensor noise(std::size_t n, std::size_t dim, RngStream& rng) {
    Tensor z(Shape{n, dim});
    for (Real& v : z.data()) v = static_cast<Real>(rng.normal());
    return z;
}

void require_finite(double v, const char* what) {
    if (!std::isfinite(v)) throw NumericError(std::string(what) + " not finite", -1);
}

}  // namespace

AdaTrainResult train_ada(const std::vector<GrayImage>& real, const AdaConfig& cfg) {
    cfg.validate();
    if (real.size() < 16) throw ValueError("train_ada needs at least 16 real images");
    for (const GrayImage& g : real) {
        if (g.height != cfg.resolution || g.width != cfg.resolution) {
            throw ShapeError("real images must be " + std::to_string(cfg.resolution) + "x" +
                             std::to_string(cfg.resolution));
        }
    }
    RngStream root(cfg.seed);
    RngStream init_rng = root.split(1), data_rng = root.split(2), z_rng = root.split(3);
    AdaTrainResult res{Generator(cfg, init_rng), Discriminator(cfg, init_rng), {}, {}};
    NamedTensors gp, dp;
    res.generator.params(gp);
    res.discriminator.params(dp);
    Adam g_opt(gp, AdamConfig{cfg.lr_g, cfg.beta1, 0.999});
    Adam d_opt(dp, AdamConfig{cfg.lr_d, cfg.beta1, 0.999});
    const Real lambda = static_cast<Real>(cfg.lambda_reg);
    RngStream sample_rng = root.split(4);

    for (std::size_t step = 1; step <= cfg.steps; ++step) {
        AdaCurvePoint pt;
        pt.step = step;
        try {
            {
                Tensor fake;
                {
                    NoGradScope no_grad;
                    fake = res.generator.forward(noise(cfg.batch, cfg.z_dim, z_rng));
                }
                Tape tape;
                TapeScope scope(tape);
                d_opt.zero_grad();
                GanLosses l = gan_losses(res.discriminator.forward(real_batch(real, cfg.batch, data_rng)),
                                         res.discriminator.forward(fake));
                pt.d_loss = l.d_loss.item();
                require_finite(pt.d_loss, "discriminator loss");
                tape.backward(l.d_loss);
                d_opt.step();
            }
            Tape tape;
            TapeScope scope(tape);
            g_opt.zero_grad();
            Tensor w;
            Tensor fake = res.generator.forward(noise(cfg.batch, cfg.z_dim, z_rng), &w);
            Tensor g_loss = bce_loss(sigmoid(res.discriminator.forward(fake)), Tensor::ones({cfg.batch, 1}));
            Tensor reg = style_norm_penalty(w, lambda);
            pt.g_loss = g_loss.item();
            pt.reg = reg.item();
            require_finite(pt.g_loss, "generator loss");
            require_finite(pt.reg, "style penalty");
            tape.backward(add(g_loss, reg));
            g_opt.step();
        } catch (const NumericError& e) {
            throw NumericError("ada step " + std::to_string(step) + ": " + e.what(), e.node());
        }
        pt.total = pt.d_loss + pt.g_loss + pt.reg;
        res.curve.push_back(pt);
        if (cfg.sample_every > 0 && step % cfg.sample_every == 0) {
            RngStream fixed = sample_rng;
            res.sample_grids.emplace_back(step, image_grid(res.generator.sample(16, fixed)));
        }
    }
    return res;
}

GrayImage image_grid(const std::vector<GrayImage>& images) {
    if (images.empty()) return {};
    const std::size_t h = images[0].height, w = images[0].width;
    const std::size_t cols = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(images.size()))));
    const std::size_t rows = (images.size() + cols - 1) / cols;
    GrayImage grid(rows * h, cols * w);
    for (std::size_t i = 0; i < images.size(); ++i) {
        if (images[i].height != h || images[i].width != w) throw ShapeError("image_grid: mixed sizes");
        const std::size_t r0 = (i / cols) * h, c0 = (i % cols) * w;
        for (std::size_t r = 0; r < h; ++r)
            for (std::size_t c = 0; c < w; ++c) grid.at(r0 + r, c0 + c) = images[i].at(r, c);
    }
    return grid;
}

}  // namespace xcc::inline XCC_PRECISION_NS
