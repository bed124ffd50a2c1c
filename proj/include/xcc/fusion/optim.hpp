#pragma once

#include <vector>

#include "xcc/tensor/layers.hpp"

namespace xcc::inline XCC_PRECISION_NS {

struct AdamConfig {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    double l1 = 0;  // adds l1 * sign(theta) to the gradient, sign(0) = 0
    double l2 = 0;  // adds l2 * theta to the gradient
};

/// Adam with bias correction over a fixed list of parameters. Moments are
/// kept in double regardless of the tensor precision.
class Adam {
 public:
    Adam() = default;
    Adam(NamedTensors params, AdamConfig cfg);

    /// Zeroes every parameter gradient.
    void zero_grad();
    /// One update from the parameters' current gradients. A parameter that
    /// never received a gradient is treated as having gradient zero.
    void step();

    double lr() const { return lr_; }
    void set_lr(double lr) { lr_ = lr; }
    long steps() const { return t_; }
    const NamedTensors& params() const { return params_; }
    const AdamConfig& config() const { return cfg_; }

    /// Moment buffers as tensors ("<name>.m", "<name>.v") plus "adam.t" and "adam.lr".
    NamedTensors state() const;
    void load_state(const NamedTensors& state);

 private:
    NamedTensors params_;
    AdamConfig cfg_;
    double lr_ = 1e-3;
    long t_ = 0;
    std::vector<std::vector<double>> m_, v_;
};

struct PlateauConfig {
    double factor = 0.3;
    std::size_t patience = 2;
    /// Epochs skipped after each cut; defaults to the patience.
    long cooldown = -1;
};

/// Reduce-on-plateau for a metric that should increase. An epoch improves
/// when its value is strictly above the best so far. After `patience`
/// non-improving epochs outside cooldown the rate is multiplied by `factor`
/// and a cooldown of `cooldown` epochs starts, during which the wait
/// counter stays at zero.
class PlateauScheduler {
 public:
    explicit PlateauScheduler(PlateauConfig cfg = {});
    /// Feeds one epoch's value; returns true if the rate is cut after it.
    bool observe(double value);
    double multiplier() const { return multiplier_; }
    std::size_t cuts() const { return cuts_; }

 private:
    PlateauConfig cfg_;
    double best_;
    std::size_t wait_ = 0;
    long cooldown_left_ = 0;
    std::size_t cuts_ = 0;
    double multiplier_ = 1;
};

/// 1-based epochs after which a cut happens for the given history.
std::vector<std::size_t> plateau_cut_epochs(const std::vector<double>& history, const PlateauConfig& cfg);
/// factor^(number of cuts) for the history.
double plateau_multiplier(const std::vector<double>& history, const PlateauConfig& cfg);

}  // namespace xcc::inline XCC_PRECISION_NS
