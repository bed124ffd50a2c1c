#include "xcc/fusion/train.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

namespace xcc::inline XCC_PRECISION_NS {

Tensor LabeledSet::batch(std::size_t i0, std::size_t i1) const {
    std::vector<std::size_t> idx(images.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    return batch(idx, i0, i1);
}

Tensor LabeledSet::batch(const std::vector<std::size_t>& idx, std::size_t i0, std::size_t i1) const {
    const std::size_t h = images[idx[i0]].height, w = images[idx[i0]].width;
    Tensor x(Shape{i1 - i0, 1, h, w});
    for (std::size_t i = i0; i < i1; ++i) {
        const GrayImage& g = images[idx[i]];
        if (g.height != h || g.width != w) throw ShapeError("batch images differ in size");
        std::copy(g.pixels.begin(), g.pixels.end(), x.ptr() + (i - i0) * h * w);
    }
    return x;
}

void TrainConfig::validate() const {
    if (!(plateau_factor > 0 && plateau_factor < 1)) throw ValueError("plateau factor must lie in (0, 1)");
    if (!(lr > 0)) throw ValueError("lr must be positive");
    if (batch < 2) throw ValueError("batch must be >= 2 for the contrastive term");
    if (std::abs(train_frac + val_frac + test_frac - 1) > 1e-9) throw ValueError("split fractions must sum to 1");
    if (first_epoch < 1) throw ValueError("epochs are numbered from 1");
    if (l1 < 0 || l2 < 0) throw ValueError("regularization weights must be >= 0");
    if (schedule == BranchSchedule::alternate) throw ValueError("alternating branch schedule is not implemented");
}

namespace {

// Batch boundaries over n samples; a trailing batch of one joins the previous batch.
std::vector<std::size_t> batch_starts(std::size_t n, std::size_t batch) {
    std::vector<std::size_t> starts;
    for (std::size_t s = 0; s < n; s += batch) starts.push_back(s);
    if (starts.size() > 1 && n - starts.back() < 2) starts.pop_back();
    starts.push_back(n);
    return starts;
}

NamedTensors deep_copy(const NamedTensors& src) {
    NamedTensors out;
    for (const auto& [name, t] : src) out.emplace_back(name, t.clone());
    return out;
}

void copy_into(const NamedTensors& src, const NamedTensors& dst) {
    for (std::size_t i = 0; i < dst.size(); ++i) {
        Tensor d = dst[i].second;
        std::copy(src[i].second.data().begin(), src[i].second.data().end(), d.data().begin());
    }
}

}  // namespace

TrainResult train_xccnet(XccNet& net, const LabeledSet& train, const LabeledSet& val, const TrainConfig& cfg) {
    cfg.validate();
    if (train.size() < 2) throw ValueError("training split needs at least 2 samples");
    if (val.empty()) throw ValueError("validation split is empty");

    RngStream root(cfg.seed);
    RngStream order_rng = root.split(11), drop_rng = root.split(12);
    Adam opt(net.params(), AdamConfig{cfg.lr, cfg.beta1, cfg.beta2, cfg.eps, cfg.l1, cfg.l2});
    PlateauScheduler plateau(PlateauConfig{cfg.plateau_factor, cfg.plateau_patience, -1});
    const NamedTensors state = net.state();

    TrainResult res;
    std::vector<std::size_t> order(train.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    const auto starts = batch_starts(train.size(), cfg.batch);

    for (std::size_t epoch = cfg.first_epoch; epoch < cfg.first_epoch + cfg.epochs; ++epoch) {
        const double phi = cfg.ce_only ? 0.0 : phi_schedule(static_cast<long>(epoch), cfg.phi);
        for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[order_rng.below(i)]);
        double sum_g = 0, sum_ce = 0, sum_l = 0;
        for (std::size_t b = 0; b + 1 < starts.size(); ++b) {
            const std::size_t i0 = starts[b], i1 = starts[b + 1];
            try {
                Tensor x = train.batch(order, i0, i1);
                Tensor y(Shape{i1 - i0, 1});
                for (std::size_t i = i0; i < i1; ++i) y[i - i0] = static_cast<Real>(train.labels[order[i]]);
                Tape tape;
                TapeScope scope(tape);
                opt.zero_grad();
                XccOutput out = net.forward(x, Mode::train, drop_rng);
                Tensor ce = bce_loss(out.prob, y);
                Tensor loss = ce;
                if (!cfg.ce_only) {
                    Tensor global = contrastive_global_loss(net.proj().sfx(out.sfx.values),
                                                            net.proj().cotfx(out.cotfx.values), cfg.loss);
                    loss = combined_loss(global, ce, phi);
                    sum_g += global.item();
                }
                if (!std::isfinite(loss.item())) throw NumericError("loss not finite", loss.node());
                tape.backward(loss);
                opt.step();
                sum_ce += ce.item();
                sum_l += loss.item();
            } catch (const NumericError& e) {
                throw NumericError("epoch " + std::to_string(epoch) + " batch " + std::to_string(b) + ": " + e.what(),
                                   e.node());
            }
        }
        if (cfg.recalibrate_bn) {
            NoGradScope no_grad;
            std::vector<Tensor> batches;
            for (std::size_t b = 0; b + 1 < starts.size(); ++b) batches.push_back(train.batch(starts[b], starts[b + 1]));
            net.sfx().recalibrate_batchnorm(batches);
        }
        const double nb = static_cast<double>(starts.size() - 1);
        EpochRecord rec;
        rec.epoch = epoch;
        rec.phi = phi;
        rec.lr = opt.lr();
        rec.l_global = sum_g / nb;
        rec.l_ce = sum_ce / nb;
        rec.l_combined = sum_l / nb;
        rec.val_acc = evaluate(net, val).metrics.accuracy;
        res.curve.push_back(rec);
        if (rec.val_acc > res.best_val_acc) {
            res.best_val_acc = rec.val_acc;
            res.best_epoch = epoch;
            res.best_state = deep_copy(state);
        }
        if (plateau.observe(rec.val_acc)) opt.set_lr(opt.lr() * cfg.plateau_factor);
    }
    if (cfg.restore_best && !res.best_state.empty()) copy_into(res.best_state, state);
    return res;
}

Evaluation evaluate(XccNet& net, const LabeledSet& data, std::size_t batch) {
    if (data.empty()) throw ValueError("cannot evaluate an empty split");
    Evaluation ev;
    for (std::size_t i0 = 0; i0 < data.size(); i0 += batch) {
        const std::size_t i1 = std::min(data.size(), i0 + batch);
        Tensor p = net.predict(data.batch(i0, i1));
        for (std::size_t i = 0; i < p.numel(); ++i) ev.probs.push_back(p[i]);
    }
    ev.metrics = Metrics::from_predictions(ev.probs, data.labels);
    return ev;
}

std::string curves_csv(const std::vector<EpochRecord>& curve) {
    std::string out = "epoch,phi,lr,L_global,L_ce,L_combined,val_acc\n";
    char buf[256];
    for (const EpochRecord& r : curve) {
        std::snprintf(buf, sizeof buf, "%zu,%.9g,%.9g,%.9g,%.9g,%.9g,%.6f\n", r.epoch, r.phi, r.lr, r.l_global, r.l_ce,
                      r.l_combined, r.val_acc);
        out += buf;
    }
    return out;
}

}  // namespace xcc::inline XCC_PRECISION_NS
