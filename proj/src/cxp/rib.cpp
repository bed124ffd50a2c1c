#include "xcc/cxp/rib.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "xcc/fusion/optim.hpp"

namespace xcc::inline XCC_PRECISION_NS {

RibModel::RibModel(const std::vector<std::size_t>& filters, RngStream& rng, bool identity_init) : filters_(filters) {
    if (filters_.empty()) throw ValueError("rib suppressor needs at least one block");
    std::size_t in = 1;
    for (std::size_t f : filters_) {
        blocks_.emplace_back(in, f, rng, identity_init);
        in = f;
    }
    head_ = Conv2d(in, 1, 3, rng);
}

Tensor RibModel::forward(const Tensor& x) const {
    Tensor h = x;
    for (const auto& b : blocks_) h = b(h);
    return sigmoid(head_(h));
}

void RibModel::params(NamedTensors& out, const std::string& prefix) const {
    for (std::size_t i = 0; i < blocks_.size(); ++i) blocks_[i].params(out, prefix + ".block" + std::to_string(i));
    head_.params(out, prefix + ".head");
}

RibTrainResult train_rib_suppressor(const RibConfig& cfg) {
    RngStream rng = RngStream(cfg.seed).split(10);
    std::vector<RibPair> pairs;
    for (std::size_t i = 0; i < cfg.pairs; ++i) pairs.push_back(make_rib_pair(cfg.size, rng));
    return train_rib_suppressor(pairs, cfg);
}

RibTrainResult train_rib_suppressor(const std::vector<RibPair>& pairs, const RibConfig& cfg) {
    if (pairs.empty()) throw ValueError("rib suppressor training needs data");
    const std::size_t H = pairs[0].clean.height, W = pairs[0].clean.width;
    RngStream rng(cfg.seed);
    RngStream init_rng = rng.split(1), order_rng = rng.split(2);
    RibTrainResult res{RibModel(cfg.filters, init_rng), {}};
    NamedTensors params;
    res.model.params(params);
    Adam opt(params, AdamConfig{cfg.lr});
    std::vector<std::size_t> order(pairs.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    const std::size_t batch = std::max<std::size_t>(1, cfg.batch);
    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[order_rng.below(i)]);
        double total = 0;
        std::size_t count = 0;
        for (std::size_t start = 0; start < order.size(); start += batch) {
            const std::size_t n = std::min(batch, order.size() - start);
            Tensor x(Shape{n, 1, H, W}), y(Shape{n, 1, H, W});
            for (std::size_t b = 0; b < n; ++b) {
                const RibPair& p = pairs[order[start + b]];
                if (p.clean.height != H || p.clean.width != W) throw ShapeError("rib pairs must share one size");
                std::copy(p.ribbed.pixels.begin(), p.ribbed.pixels.end(), x.ptr() + b * H * W);
                std::copy(p.clean.pixels.begin(), p.clean.pixels.end(), y.ptr() + b * H * W);
            }
            Tape tape;
            TapeScope scope(tape);
            opt.zero_grad();
            Tensor loss = mean(square(sub(res.model.forward(x), y)));
            tape.backward(loss);
            opt.step();
            total += loss.item();
            ++count;
        }
        res.epoch_loss.push_back(total / static_cast<double>(count));
    }
    return res;
}

GrayImage suppress_ribs(const GrayImage& img, const RibModel& model) {
    NoGradScope no_grad;
    return GrayImage::from_tensor(model.forward(img.to_tensor()));
}

double band_energy_removed(const RibPair& pair, const GrayImage& out) {
    double before = 0, after = 0;
    for (std::size_t i = 0; i < out.pixels.size(); ++i) {
        before += std::pow(static_cast<double>(pair.ribbed.pixels[i]) - pair.clean.pixels[i], 2);
        after += std::pow(static_cast<double>(out.pixels[i]) - pair.clean.pixels[i], 2);
    }
    return before > 0 ? 1.0 - after / before : 0.0;
}

}  // namespace xcc::inline XCC_PRECISION_NS
