#include "xcc/cxp/segmentation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "xcc/fusion/optim.hpp"

namespace xcc::inline XCC_PRECISION_NS {

SegModel::SegModel(std::vector<std::size_t> channels, RngStream& rng) : channels_(std::move(channels)) {
    if (channels_.empty()) throw ValueError("segmentator needs at least one stage");
    std::size_t in = 1;
    for (std::size_t c : channels_) {
        enc_.emplace_back(in, c, rng);
        in = c;
    }
    bottleneck_ = ResidualBlock(in, in, rng);
    for (std::size_t s = channels_.size(); s-- > 0;) {
        const std::size_t c = channels_[s];
        up_w_.push_back(init_param({in, c, 2, 2}, Init::he, in, c * 4, rng));
        up_b_.push_back(init_param({c}, Init::zeros, 0, 0, rng));
        dec_.emplace_back(2 * c, c, rng);
        in = c;
    }
    head_ = Conv2d(in, 1, 1, rng);
}

Tensor SegModel::forward(const Tensor& x) const {
    const std::size_t levels = channels_.size();
    const std::size_t div = std::size_t{1} << levels;
    if (x.rank() != 4 || x.dim(2) % div != 0 || x.dim(3) % div != 0) {
        throw ShapeError("segmentator input must be [N,1,H,W] with H, W divisible by " + std::to_string(div));
    }
    std::vector<Tensor> skips;
    Tensor h = x;
    for (const auto& block : enc_) {
        h = block(h);
        skips.push_back(h);
        h = maxpool2d(h);
    }
    h = bottleneck_(h);
    for (std::size_t i = 0; i < levels; ++i) {
        h = conv_transpose2x2(h, up_w_[i], up_b_[i]);
        h = dec_[i](concat(h, skips[levels - 1 - i], 1));
    }
    return sigmoid(head_(h));
}

void SegModel::params(NamedTensors& out, const std::string& prefix) const {
    for (std::size_t i = 0; i < enc_.size(); ++i) enc_[i].params(out, prefix + ".enc" + std::to_string(i));
    bottleneck_.params(out, prefix + ".mid");
    for (std::size_t i = 0; i < dec_.size(); ++i) {
        out.emplace_back(prefix + ".up" + std::to_string(i) + ".weight", up_w_[i]);
        out.emplace_back(prefix + ".up" + std::to_string(i) + ".bias", up_b_[i]);
        dec_[i].params(out, prefix + ".dec" + std::to_string(i));
    }
    head_.params(out, prefix + ".head");
}

Tensor segmentation_loss(const Tensor& probs, const Tensor& target) { return bce_loss(probs, target); }

SegTrainResult train_segmentator(const std::vector<std::pair<GrayImage, BinaryMask>>& pairs, const SegConfig& cfg) {
    if (pairs.size() < 2) throw ValueError("segmentator training needs at least 2 pairs");
    const std::size_t H = pairs[0].first.height, W = pairs[0].first.width;
    for (const auto& [img, mask] : pairs) {
        if (img.height != H || img.width != W || mask.height != H || mask.width != W) {
            throw ShapeError("segmentation pairs must share one size and match their masks");
        }
    }
    RngStream rng(cfg.seed);
    RngStream init_rng = rng.split(1), order_rng = rng.split(2);
    SegTrainResult res{SegModel(cfg.channels, init_rng), {}};
    NamedTensors params;
    res.model.params(params);
    Adam opt(params, AdamConfig{cfg.lr});

    const std::size_t batch = std::max<std::size_t>(1, std::min(cfg.batch, pairs.size()));
    std::vector<std::size_t> order(pairs.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[order_rng.below(i)]);
        double total = 0;
        std::size_t batches = 0;
        for (std::size_t start = 0; start < order.size(); start += batch) {
            const std::size_t n = std::min(batch, order.size() - start);
            Tensor x(Shape{n, 1, H, W}), y(Shape{n, 1, H, W});
            for (std::size_t b = 0; b < n; ++b) {
                const auto& [img, mask] = pairs[order[start + b]];
                std::copy(img.pixels.begin(), img.pixels.end(), x.ptr() + b * H * W);
                for (std::size_t k = 0; k < H * W; ++k) y[b * H * W + k] = mask.bits[k];
            }
            Tape tape;
            TapeScope scope(tape);
            opt.zero_grad();
            Tensor loss = segmentation_loss(res.model.forward(x), y);
            if (!std::isfinite(loss.item())) {
                throw NumericError("segmentator loss not finite at epoch " + std::to_string(epoch), loss.node());
            }
            tape.backward(loss);
            opt.step();
            total += loss.item();
            ++batches;
        }
        res.epoch_loss.push_back(total / static_cast<double>(batches));
    }
    res.model.final_loss = res.epoch_loss.empty() ? 0.0 : res.epoch_loss.back();
    return res;
}

BinaryMask threshold_mask(const Tensor& probs, std::size_t h, std::size_t w, double threshold, bool* fallback) {
    if (probs.numel() != h * w) throw ShapeError("threshold_mask: probability map size mismatch");
    BinaryMask m(h, w);
    for (std::size_t i = 0; i < h * w; ++i) m.bits[i] = probs[i] >= threshold ? 1 : 0;
    const bool empty = m.count() == 0;
    if (empty) std::fill(m.bits.begin(), m.bits.end(), std::uint8_t{1});
    if (fallback != nullptr) *fallback = empty;
    return m;
}

BinaryMask segment_lungs(const GrayImage& img, const SegModel& model, double threshold, bool* fallback) {
    NoGradScope no_grad;
    return threshold_mask(model.forward(img.to_tensor()), img.height, img.width, threshold, fallback);
}

GrayImage apply_mask_and_crop(const GrayImage& img, const BinaryMask& mask) {
    if (img.height != mask.height || img.width != mask.width) throw ShapeError("mask and image dims differ");
    std::size_t r0 = img.height, r1 = 0, c0 = img.width, c1 = 0;
    for (std::size_t r = 0; r < img.height; ++r) {
        for (std::size_t c = 0; c < img.width; ++c) {
            if (mask.at(r, c) == 0) continue;
            r0 = std::min(r0, r);
            r1 = std::max(r1, r + 1);
            c0 = std::min(c0, c);
            c1 = std::max(c1, c + 1);
        }
    }
    if (r1 == 0) throw ValueError("apply_mask_and_crop: empty mask");
    GrayImage out(r1 - r0, c1 - c0);
    for (std::size_t r = r0; r < r1; ++r) {
        for (std::size_t c = c0; c < c1; ++c) out.at(r - r0, c - c0) = mask.at(r, c) ? img.at(r, c) : Real(0);
    }
    return out;
}

double mask_iou(const BinaryMask& a, const BinaryMask& b) {
    if (a.bits.size() != b.bits.size()) throw ShapeError("mask_iou: size mismatch");
    std::size_t inter = 0, uni = 0;
    for (std::size_t i = 0; i < a.bits.size(); ++i) {
        inter += a.bits[i] && b.bits[i];
        uni += a.bits[i] || b.bits[i];
    }
    return uni == 0 ? 1.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

double mask_pixel_accuracy(const BinaryMask& a, const BinaryMask& b) {
    if (a.bits.size() != b.bits.size()) throw ShapeError("mask_pixel_accuracy: size mismatch");
    std::size_t same = 0;
    for (std::size_t i = 0; i < a.bits.size(); ++i) same += a.bits[i] == b.bits[i];
    return static_cast<double>(same) / static_cast<double>(a.bits.size());
}

}  // namespace xcc::inline XCC_PRECISION_NS
